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

#include "aon/encoder.h"

#include <cmath>

namespace aon {

namespace {

template <typename T>
Tensor<T> fan_in_uniform(Shape shape, Index fan_in, Rng& rng) {
  return uniform_tensor<T>(std::move(shape), 1.0 / std::sqrt(static_cast<double>(fan_in)), rng);
}

}  // namespace

template <typename T>
ConvBlock<T>::ConvBlock(const std::string& prefix, Index in_ch, Index out_ch, bool pooled,
                        PoolSpec pool, ParameterSet<T>& params, NamedTensors<T>& buffers,
                        Rng& rng)
    : pooled_(pooled), pool_(pool) {
  weight_ = params.add(prefix + ".weight",
                       fan_in_uniform<T>(Shape{out_ch, in_ch, 3, 3}, in_ch * 9, rng));
  bias_ = Tensor<T>(Shape{out_ch});
  gamma_ = params.add(prefix + ".gamma", Tensor<T>(Shape{out_ch}, T(1)));
  beta_ = params.add(prefix + ".beta", Tensor<T>(Shape{out_ch}));
  moments_.mean = buffers.add(prefix + ".running_mean", Tensor<T>(Shape{out_ch}));
  moments_.var = buffers.add(prefix + ".running_var", Tensor<T>(Shape{out_ch}, T(1)));
}

template <typename T>
Tensor<T> ConvBlock<T>::forward(const Tensor<T>& x, BnMode mode) {
  Tensor<T> y = relu(batchnorm(conv2d(x, weight_, bias_), gamma_, beta_, moments_, mode));
  return pooled_ ? maxpool2d(y, pool_) : y;
}

template <typename T>
Encoder<T>::Encoder(const EncoderConfig& config, ParameterSet<T>& params,
                    NamedTensors<T>& buffers, Rng& rng)
    : config_(config) {
  config_.validate();
  const PoolSpec square{2, 2, 2, 2, false};
  Index in_ch = 1;
  for (std::size_t i = 0; i < 4; ++i) {
    const Index out_ch = config_.bcnn_channels[i];
    // Pools follow the first two blocks: S -> S/2 -> S/4.
    bcnn_.emplace_back("bcnn." + std::to_string(i), in_ch, out_ch, i < 2, square, params,
                       buffers, rng);
    in_ch = out_ch;
  }
  const Index bcnn_ch = in_ch;
  const PoolSpec height{2, 1, 2, 1, true};
  Index h = config_.bcnn_output_size();
  for (std::size_t i = 0; i < 5; ++i) {
    const Index out_ch = config_.tower_channels[i];
    // Height pools until the map is one row tall, identity blocks after.
    const bool pooled = h > 1;
    if (pooled) h = pooled_extent(h, 2, 2, true);
    tower_.emplace_back("tower." + std::to_string(i), in_ch, out_ch, pooled, height, params,
                        buffers, rng);
    in_ch = out_ch;
  }
  lstm_fwd_ = make_lstm_weights<T>(params, "blstm.fwd", in_ch, config_.blstm_hidden, rng);
  lstm_bwd_ = make_lstm_weights<T>(params, "blstm.bwd", in_ch, config_.blstm_hidden, rng);

  const PoolSpec cn_pool{2, 2, 2, 2, true};
  Index side = config_.bcnn_output_size();
  in_ch = bcnn_ch;
  for (std::size_t i = 0; i < 2; ++i) {
    const Index out_ch = config_.cn_channels[i];
    cn_blocks_.emplace_back("cn." + std::to_string(i), in_ch, out_ch, true, cn_pool, params,
                            buffers, rng);
    side = pooled_extent(side, 2, 2, true);
    in_ch = out_ch;
  }
  const Index flat = in_ch * side * side;
  const Index len = config_.seq_len();
  cn_fc1_w_ = params.add("cn.fc1.weight",
                         fan_in_uniform<T>(Shape{flat, config_.cn_hidden}, flat, rng));
  cn_fc1_b_ = params.add("cn.fc1.bias", Tensor<T>(Shape{config_.cn_hidden}));
  // Zero final layer: training starts from uniform clues.
  cn_fc2_w_ = params.add("cn.fc2.weight", Tensor<T>(Shape{config_.cn_hidden, len * 4}));
  cn_fc2_b_ = params.add("cn.fc2.bias", Tensor<T>(Shape{len * 4}));
}

template <typename T>
Index Encoder<T>::output_dim() const {
  return config_.mode == EncodeMode::kConcatChannel ? 2 * config_.feature_dim()
                                                    : config_.feature_dim();
}

template <typename T>
Tensor<T> Encoder<T>::bcnn(const Tensor<T>& images, BnMode mode) {
  if (images.rank() != 4 || images.dim(1) != 1) {
    throw DimensionError("bcnn: expected [N,1,S,S] images, got " + to_string(images.shape()));
  }
  if (images.dim(2) != images.dim(3)) {
    throw DimensionError("bcnn: images must be square, got " + to_string(images.shape()));
  }
  if (images.dim(2) != config_.input_size) {
    throw DimensionError("bcnn: expected " + std::to_string(config_.input_size) +
                         " pixel images, got " + std::to_string(images.dim(2)));
  }
  Tensor<T> x = images;
  for (auto& block : bcnn_) x = block.forward(x, mode);
  return x;
}

template <typename T>
Tensor<T> Encoder<T>::tower(const Tensor<T>& fmaps, BnMode mode) {
  if (fmaps.rank() != 4 || fmaps.dim(2) != fmaps.dim(3)) {
    throw DimensionError("shared tower: expected square maps, got " + to_string(fmaps.shape()));
  }
  Tensor<T> x = fmaps;
  for (auto& block : tower_) x = block.forward(x, mode);
  if (x.dim(2) != 1) {
    throw ConfigError("shared tower: height " + std::to_string(x.dim(2)) + " after five blocks");
  }
  return x;
}

template <typename T>
std::pair<Tensor<T>, Tensor<T>> Encoder<T>::hn(const Tensor<T>& fmaps, BnMode mode) {
  Tensor<T> t = tower(fmaps, mode);
  const Index n = t.dim(0), c = t.dim(1), len = t.dim(3);
  Tensor<T> seq = permute(reshape(t, Shape{n, c, len}), {2, 0, 1});
  Tensor<T> fwd = blstm(seq, lstm_fwd_, lstm_bwd_);
  return {fwd, reverse_seq(fwd)};
}

template <typename T>
std::pair<Tensor<T>, Tensor<T>> Encoder<T>::vn(const Tensor<T>& fmaps, BnMode mode) {
  return hn(rot90(fmaps), mode);
}

template <typename T>
Tensor<T> Encoder<T>::cn(const Tensor<T>& fmaps, BnMode mode) {
  Tensor<T> x = fmaps;
  for (auto& block : cn_blocks_) x = block.forward(x, mode);
  const Index n = x.dim(0), len = config_.seq_len();
  Tensor<T> flat = reshape(x, Shape{n, x.size() / n});
  Tensor<T> hidden = relu(linear(flat, cn_fc1_w_, cn_fc1_b_));
  Tensor<T> logits = reshape(linear(hidden, cn_fc2_w_, cn_fc2_b_), Shape{n, len, 4});
  return softmax(permute(logits, {1, 0, 2}), 2);
}

template <typename T>
EncoderOutput<T> Encoder<T>::encode(const Tensor<T>& images, BnMode mode) {
  EncoderOutput<T> out;
  Tensor<T> fmaps = bcnn(images, mode);
  auto& f = out.features;
  std::tie(f.fwd_h, f.rev_h) = hn(fmaps, mode);
  switch (config_.mode) {
    case EncodeMode::kHnOnly:
      out.sequence = f.fwd_h;
      break;
    case EncodeMode::kConcatChannel:
      std::tie(f.fwd_v, f.rev_v) = vn(fmaps, mode);
      out.sequence = concat<T>({f.fwd_h, f.fwd_v}, 2);
      break;
    case EncodeMode::kConcatTemporal:
      std::tie(f.fwd_v, f.rev_v) = vn(fmaps, mode);
      out.sequence = concat<T>({f.fwd_h, f.fwd_v}, 0);
      break;
    case EncodeMode::kAon:
      std::tie(f.fwd_v, f.rev_v) = vn(fmaps, mode);
      out.clues = cn(fmaps, mode);
      out.sequence = fuse(f, out.clues);
      break;
  }
  return out;
}

template class ConvBlock<float>;
template class ConvBlock<double>;
template class Encoder<float>;
template class Encoder<double>;

}  // namespace aon
