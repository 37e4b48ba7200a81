/* Copyright 2026 The AON Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef AON_BLSTM_H_
#define AON_BLSTM_H_

#include <string>

#include "aon/init.h"
#include "aon/tensor.h"

namespace aon {

// Parameters of one LSTM direction. Gate blocks are ordered (input, forget,
// cell, output) along the 4H axis.
template <typename T>
struct LstmWeights {
  Tensor<T> wx;  // [Din, 4H]
  Tensor<T> wh;  // [H, 4H]
  Tensor<T> b;   // [4H]

  Index hidden() const { return wh.dim(0); }
};

// Bidirectional LSTM over seq [L,N,Din] from zero initial states. Returns
// [L,N,2H]: the first H features come from the forward direction (t = 1..L),
// the last H from the backward direction (t = L..1), aligned per frame.
template <typename T>
Tensor<T> blstm(const Tensor<T>& seq, const LstmWeights<T>& fwd, const LstmWeights<T>& bwd);

// Registers wx/wh/b under `prefix` with uniform(+-1/sqrt(H)) weights and a
// forget-gate bias of 1.
template <typename T>
LstmWeights<T> make_lstm_weights(ParameterSet<T>& params, const std::string& prefix,
                                 Index input_dim, Index hidden, Rng& rng);

}  // namespace aon

#endif  // AON_BLSTM_H_
