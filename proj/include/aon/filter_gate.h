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

#ifndef AON_FILTER_GATE_H_
#define AON_FILTER_GATE_H_

#include "aon/tensor.h"

namespace aon {

// The four direction sequences, each [L,N,D]: forward/reversed horizontal
// and forward/reversed vertical.
template <typename T>
struct FourDirectionFeatures {
  Tensor<T> fwd_h, rev_h, fwd_v, rev_v;
};

// h_hat[i] = tanh(sum_j clues[i,:,j] * dir_j[i]) with clues [L,N,4].
// The four products are summed in ascending order of value, so permuting the
// directions together with their clue columns gives a bitwise-equal result.
// Outputs are clamped to the open interval (-1, 1).
template <typename T>
Tensor<T> fuse(const FourDirectionFeatures<T>& f, const Tensor<T>& clues);

}  // namespace aon

#endif  // AON_FILTER_GATE_H_
