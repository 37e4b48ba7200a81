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

#include "aon/dataset.h"

#include <algorithm>
#include <numeric>

#include "aon/init.h"

namespace aon {

Dataset Dataset::load(const Manifest& manifest, Index input_size, const Vocabulary& vocab) {
  if (input_size < 1) throw ContractError("dataset: input_size must be positive");
  Dataset d;
  d.input_size_ = input_size;
  const std::size_t n = manifest.records.size();
  const auto plane = static_cast<std::size_t>(input_size * input_size);
  d.pixels_.resize(n * plane);
  d.labels_.resize(n);
  d.paths_.resize(n);
  d.angles_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& r = manifest.records[i];
    const std::string where = manifest.file + " record " + std::to_string(i + 1) + " (" +
                              r.path + ")";
    const std::string label = Vocabulary::lowercase(r.label);
    if (!vocab.contains(label)) {
      throw FormatError(where + ": label `" + r.label + "` has out-of-vocabulary symbols");
    }
    Image img;
    try {
      img = read_pgm(manifest.resolve(r));
    } catch (const std::exception& e) {
      throw IoError(where + ": " + e.what());
    }
    img = resize_bilinear(img, input_size, input_size);
    std::copy(img.pixels.begin(), img.pixels.end(), d.pixels_.begin() + i * plane);
    d.labels_[i] = label;
    d.paths_[i] = manifest.resolve(r);
    d.angles_[i] = r.angle;
  }
  return d;
}

Batch Dataset::gather(const std::vector<std::size_t>& positions) const {
  Batch b;
  const auto n = static_cast<Index>(positions.size());
  const auto plane = static_cast<std::size_t>(input_size_ * input_size_);
  b.images = Tensor<float>(Shape{n, 1, input_size_, input_size_});
  for (std::size_t k = 0; k < positions.size(); ++k) {
    const std::size_t i = positions[k];
    if (i >= size()) throw ContractError("dataset: position out of range");
    std::copy_n(image(i), plane, b.images.ptr() + k * plane);
    b.labels.push_back(labels_[i]);
    b.angles.push_back(angles_[i]);
  }
  b.indices = positions;
  return b;
}

BatchPlan plan_batches(std::size_t size, Index batch_size, std::uint64_t shuffle_seed,
                       bool shuffle) {
  if (batch_size < 1) throw ContractError("plan_batches: batch_size must be positive");
  if (size == 0) throw ContractError("plan_batches: empty dataset");
  std::vector<std::size_t> order(size);
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (shuffle) {
    Rng rng(shuffle_seed);
    std::shuffle(order.begin(), order.end(), rng);
  }
  const auto bs = static_cast<std::size_t>(batch_size);
  BatchPlan plan;
  for (std::size_t start = 0; start < size; start += bs) {
    std::vector<std::size_t> batch;
    Index wrapped = 0;
    for (std::size_t k = 0; k < bs; ++k) {
      const std::size_t pos = start + k;
      if (pos >= size) ++wrapped;
      batch.push_back(order[pos % size]);
    }
    plan.batches.push_back(std::move(batch));
    plan.wrapped.push_back(wrapped);
  }
  return plan;
}

std::vector<Batch> load_batches(const Dataset& data, Index batch_size,
                                std::uint64_t shuffle_seed, bool shuffle) {
  const BatchPlan plan = plan_batches(data.size(), batch_size, shuffle_seed, shuffle);
  std::vector<Batch> out;
  for (std::size_t b = 0; b < plan.batches.size(); ++b) {
    out.push_back(data.gather(plan.batches[b]));
    out.back().wrapped = plan.wrapped[b];
  }
  return out;
}

}  // namespace aon
