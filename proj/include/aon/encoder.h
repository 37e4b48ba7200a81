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

#ifndef AON_ENCODER_H_
#define AON_ENCODER_H_

#include <string>
#include <utility>
#include <vector>

#include "aon/blstm.h"
#include "aon/config.h"
#include "aon/filter_gate.h"
#include "aon/init.h"
#include "aon/ops.h"
#include "aon/tensor.h"

namespace aon {

// conv 3x3 -> batch norm -> relu -> optional max pool. The convolution bias
// is a fixed zero: batch norm removes any per-channel shift, and beta plays
// that role.
template <typename T>
class ConvBlock {
 public:
  ConvBlock() = default;
  ConvBlock(const std::string& prefix, Index in_ch, Index out_ch, bool pooled, PoolSpec pool,
            ParameterSet<T>& params, NamedTensors<T>& buffers, Rng& rng);

  Tensor<T> forward(const Tensor<T>& x, BnMode mode);

 private:
  Tensor<T> weight_, bias_, gamma_, beta_;
  BnMoments<T> moments_;
  bool pooled_ = false;
  PoolSpec pool_;
};

template <typename T>
struct EncoderOutput {
  // aon: all four directions. concat modes: fwd_h/rev_h and fwd_v/rev_v.
  // hn_only: fwd_h/rev_h only.
  FourDirectionFeatures<T> features;
  // [L,N,4] placement clues; defined in aon mode only.
  Tensor<T> clues;
  // Sequence consumed by the decoder: fused for aon, concatenated for the
  // concat modes, fwd_h for hn_only.
  Tensor<T> sequence;
};

template <typename T>
class Encoder {
 public:
  Encoder(const EncoderConfig& config, ParameterSet<T>& params, NamedTensors<T>& buffers,
          Rng& rng);

  const EncoderConfig& config() const { return config_; }
  // Feature width of `sequence` for the configured mode.
  Index output_dim() const;

  // images [N,1,S,S] -> [N,C,S/4,S/4].
  Tensor<T> bcnn(const Tensor<T>& images, BnMode mode);
  // Square maps -> [N,C5,1,L]; the same parameters serve every call.
  Tensor<T> tower(const Tensor<T>& fmaps, BnMode mode);
  // Returns (forward, reversed) [L,N,D] sequences.
  std::pair<Tensor<T>, Tensor<T>> hn(const Tensor<T>& fmaps, BnMode mode);
  // hn applied to the 90 degree rotation of `fmaps`.
  std::pair<Tensor<T>, Tensor<T>> vn(const Tensor<T>& fmaps, BnMode mode);
  // [L,N,4] clue distributions.
  Tensor<T> cn(const Tensor<T>& fmaps, BnMode mode);

  EncoderOutput<T> encode(const Tensor<T>& images, BnMode mode);

 private:
  EncoderConfig config_;
  std::vector<ConvBlock<T>> bcnn_;
  std::vector<ConvBlock<T>> tower_;
  LstmWeights<T> lstm_fwd_, lstm_bwd_;
  std::vector<ConvBlock<T>> cn_blocks_;
  Tensor<T> cn_fc1_w_, cn_fc1_b_, cn_fc2_w_, cn_fc2_b_;
};

}  // namespace aon

#endif  // AON_ENCODER_H_
