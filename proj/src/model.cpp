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

#include "aon/model.h"

namespace aon {

template <typename T>
AonModel<T>::AonModel(const ModelConfig& config, std::uint64_t seed) : config_(config) {
  config_.validate();
  Rng rng(seed);
  encoder_ = std::make_unique<Encoder<T>>(config_.encoder, params_, buffers_, rng);
  decoder_ = std::make_unique<Decoder<T>>(config_.decoder, encoder_->output_dim(), params_, rng);
}

template <typename T>
EncoderOutput<T> AonModel<T>::encode(const Tensor<T>& images) {
  return encoder_->encode(images, bn_mode());
}

template <typename T>
std::vector<std::vector<int>> AonModel<T>::encode_labels(
    const std::vector<std::string>& labels) const {
  std::vector<std::vector<int>> targets;
  targets.reserve(labels.size());
  for (const auto& label : labels) targets.push_back(vocab().encode(label));
  return targets;
}

template <typename T>
Tensor<T> AonModel<T>::loss(const Tensor<T>& images, const std::vector<std::string>& labels) {
  return decoder_->seq_loss(encode(images).sequence, encode_labels(labels));
}

template <typename T>
std::vector<Decoded> AonModel<T>::greedy(const Tensor<T>& images) {
  NoGradScope<T> no_grad;
  return decoder_->greedy_decode(encode(images).sequence, config_.decoder.max_len);
}

template <typename T>
std::vector<std::string> AonModel<T>::lexicon(const Tensor<T>& images,
                                              const std::vector<std::string>& words) {
  NoGradScope<T> no_grad;
  return decoder_->lexicon_decode(encode(images).sequence, words);
}

template class AonModel<float>;
template class AonModel<double>;

}  // namespace aon
