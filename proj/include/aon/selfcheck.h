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

#ifndef AON_SELFCHECK_H_
#define AON_SELFCHECK_H_

#include <cstdint>
#include <string>
#include <vector>

#include "aon/config.h"
#include "aon/grad_check.h"

namespace aon {

struct CheckLine {
  std::string name;
  bool pass = false;
  std::string detail;
};

// Gradient check of a full model in double precision on two noise images
// labelled with the first vocabulary symbols.
GradCheckReport model_grad_check(const ModelConfig& config, std::uint64_t seed = 1,
                                 const GradCheckOptions& options = {});
// Gradient check of the full mini model (16x16 input, vocabulary a,b,c) in
// double precision against central differences.
GradCheckReport mini_grad_check(std::uint64_t seed = 1, const GradCheckOptions& options = {});

CheckLine check_gradients(double threshold = 1e-3, double time_limit_s = 300,
                          std::uint64_t seed = 1);
// Clue rows sum to one for random inputs under random clue-network weights.
CheckLine check_clue_normalization(int inputs = 100, int inits = 10);
// Sequence reversal, VN(x) == HN(rot90 x) and rot90^4 == identity, bitwise.
CheckLine check_direction_identities(std::uint64_t seed = 1);
// Output bounds, exact tanh for one-hot clues, convex combination.
CheckLine check_filter_gate(int cases = 1000);
// Attention and output distributions sum to one; decoding halts by max_len.
CheckLine check_decoder_normalization(int samples = 100);
// save -> load -> forward bitwise, save -> load -> save byte-identical.
CheckLine check_checkpoint_round_trip(std::uint64_t seed = 1);
// rotate_augment at multiples of 90 degrees forms the rotation group.
CheckLine check_rotation_group();

std::vector<CheckLine> run_selftest();

}  // namespace aon

#endif  // AON_SELFCHECK_H_
