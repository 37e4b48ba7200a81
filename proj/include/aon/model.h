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

#ifndef AON_MODEL_H_
#define AON_MODEL_H_

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "aon/config.h"
#include "aon/decoder.h"
#include "aon/encoder.h"
#include "aon/tensor.h"

namespace aon {

// Full recognizer: encoder, filter gate (aon mode) and attention decoder.
// Owns the trainable parameters and the batch-norm running moments.
template <typename T>
class AonModel {
 public:
  AonModel(const ModelConfig& config, std::uint64_t seed);
  AonModel(const AonModel&) = delete;
  AonModel& operator=(const AonModel&) = delete;

  const ModelConfig& config() const { return config_; }
  const Vocabulary& vocab() const { return decoder_->vocab(); }
  ParameterSet<T>& params() { return params_; }
  const ParameterSet<T>& params() const { return params_; }
  NamedTensors<T>& buffers() { return buffers_; }
  const NamedTensors<T>& buffers() const { return buffers_; }
  Encoder<T>& encoder() { return *encoder_; }
  const Decoder<T>& decoder() const { return *decoder_; }

  // Train mode normalizes with batch statistics and updates running moments.
  void set_training(bool on) { training_ = on; }
  bool training() const { return training_; }
  BnMode bn_mode() const { return training_ ? BnMode::kTrain : BnMode::kEval; }

  EncoderOutput<T> encode(const Tensor<T>& images);
  // Batch-averaged teacher-forced loss for labels (lowercased, EOS appended).
  Tensor<T> loss(const Tensor<T>& images, const std::vector<std::string>& labels);
  std::vector<Decoded> greedy(const Tensor<T>& images);
  std::vector<std::string> lexicon(const Tensor<T>& images,
                                   const std::vector<std::string>& words);

  std::vector<std::vector<int>> encode_labels(const std::vector<std::string>& labels) const;

  // Copies parameter and buffer values from a model with the same layout,
  // converting precision.
  template <typename U>
  void copy_from(const AonModel<U>& other);

 private:
  ModelConfig config_;
  ParameterSet<T> params_;
  NamedTensors<T> buffers_;
  std::unique_ptr<Encoder<T>> encoder_;
  std::unique_ptr<Decoder<T>> decoder_;
  bool training_ = true;
};

template <typename T>
template <typename U>
void AonModel<T>::copy_from(const AonModel<U>& other) {
  auto copy = [](auto& dst, const auto& src, const char* what) {
    if (dst.size() != src.size()) throw DimensionError(std::string("copy_from: ") + what);
    auto s = src.begin();
    for (auto d = dst.begin(); d != dst.end(); ++d, ++s) {
      if (d->first != s->first || d->second.shape() != s->second.shape()) {
        throw DimensionError("copy_from: layout differs at " + d->first);
      }
      auto out = d->second.data();
      auto in = s->second.data();
      for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<T>(in[i]);
    }
  };
  copy(params_, other.params(), "parameter count differs");
  copy(buffers_, other.buffers(), "buffer count differs");
}

}  // namespace aon

#endif  // AON_MODEL_H_
