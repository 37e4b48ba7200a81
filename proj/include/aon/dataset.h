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

#ifndef AON_DATASET_H_
#define AON_DATASET_H_

#include <cstdint>
#include <string>
#include <vector>

#include "aon/synth.h"
#include "aon/tensor.h"
#include "aon/vocab.h"

namespace aon {

struct Batch {
  Tensor<float> images;  // [N,1,S,S]
  std::vector<std::string> labels;
  std::vector<double> angles;
  std::vector<std::size_t> indices;  // positions in the dataset
  Index wrapped = 0;  // trailing entries reused from the start of the order
};

// Positions of each batch plus how many trailing entries wrap around.
struct BatchPlan {
  std::vector<std::vector<std::size_t>> batches;
  std::vector<Index> wrapped;
};

// Manifest images held in memory at the model input size.
class Dataset {
 public:
  // Reads every image, resizing to input_size; labels are lowercased and
  // checked against the vocabulary. Errors name the offending record.
  static Dataset load(const Manifest& manifest, Index input_size, const Vocabulary& vocab);

  std::size_t size() const { return labels_.size(); }
  Index input_size() const { return input_size_; }
  const std::string& label(std::size_t i) const { return labels_[i]; }
  double angle(std::size_t i) const { return angles_[i]; }
  const std::string& path(std::size_t i) const { return paths_[i]; }
  const float* image(std::size_t i) const {
    return pixels_.data() + i * static_cast<std::size_t>(input_size_ * input_size_);
  }

  Batch gather(const std::vector<std::size_t>& positions) const;

 private:
  Index input_size_ = 0;
  std::vector<float> pixels_;
  std::vector<std::string> labels_, paths_;
  std::vector<double> angles_;
};

// ceil(size / batch_size) batches; the last one is completed by wrapping to
// the start of the order. shuffle_seed fixes the permutation.
BatchPlan plan_batches(std::size_t size, Index batch_size, std::uint64_t shuffle_seed,
                       bool shuffle = true);
std::vector<Batch> load_batches(const Dataset& data, Index batch_size,
                                std::uint64_t shuffle_seed, bool shuffle = true);

}  // namespace aon

#endif  // AON_DATASET_H_
