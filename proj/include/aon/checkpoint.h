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

#ifndef AON_CHECKPOINT_H_
#define AON_CHECKPOINT_H_

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "aon/config.h"
#include "aon/model.h"
#include "aon/optim.h"

namespace aon {

// Binary layout, little-endian:
//   "AON1", u32 version, u32 blob length, config blob (key = value text),
//   records { u32 name length, name, u8 dtype (0 = f32), u32 rank,
//             u64 dims[rank], payload }, u32 CRC32 of all preceding bytes.
// Records: parameters, then batch-norm buffers, then optional optimizer
// accumulators named "adadelta.sq_grad/<param>" and "adadelta.sq_update/<param>".
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct CheckpointData {
  ModelConfig config;
  std::uint64_t step = 0;
  std::vector<std::pair<std::string, Tensor<float>>> records;
};

// Writes to <path>.tmp and renames, so an interrupted save keeps the old file.
void save_checkpoint(const std::string& path, const AonModel<float>& model,
                     std::uint64_t step = 0, const Adadelta<float>* optimizer = nullptr);
std::string serialize_checkpoint(const AonModel<float>& model, std::uint64_t step,
                                 const Adadelta<float>* optimizer);

// FormatError on bad magic, version, truncation, checksum or dtype.
CheckpointData read_checkpoint(const std::string& path);
CheckpointData parse_checkpoint(const std::string& bytes, const std::string& origin);

// Copies every parameter and buffer (and optimizer state when requested and
// present). DimensionError on missing, extra or mis-shaped tensors.
void restore_checkpoint(const CheckpointData& data, AonModel<float>& model,
                        Adadelta<float>* optimizer = nullptr);

// Builds the stored configuration (optionally with another encoder mode) and
// restores it.
std::unique_ptr<AonModel<float>> load_model(const std::string& path,
                                            std::optional<EncodeMode> mode = std::nullopt);

}  // namespace aon

#endif  // AON_CHECKPOINT_H_
