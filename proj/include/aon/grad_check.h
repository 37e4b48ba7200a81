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

#ifndef AON_GRAD_CHECK_H_
#define AON_GRAD_CHECK_H_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "aon/tensor.h"

namespace aon {

struct GradCheckOptions {
  double eps = 1e-4;
  // Coordinates sampled per parameter tensor (all of them when fewer exist).
  Index coords_per_tensor = 64;
  std::uint64_t seed = 7;
  // Central differences are meaningless across a relu or max-pool switch. A
  // coordinate whose +/- probes straddle one is redrawn while the budget and
  // untried coordinates last; otherwise its step shrinks tenfold (down to
  // min_eps) until both probes stay on the smooth piece, and as a last resort
  // the one-sided difference on a smooth side is used.
  bool skip_kinks = true;
  int max_redraws = 32;
  double min_eps = 1e-6;
};

struct GradCheckEntry {
  std::string name;
  Index checked = 0;
  Index skipped_kinks = 0;
  // Coordinates checked with a reduced step or a one-sided difference.
  Index shrunk_steps = 0;
  Index one_sided = 0;
  double max_rel_err = 0;
  Index worst_index = -1;
  double worst_analytic = 0;
  double worst_numeric = 0;
};

struct GradCheckReport {
  double max_rel_err = 0;
  std::vector<GradCheckEntry> per_tensor;
};

// Relative error |a-b| / max(|a|, |b|, 1e-8).
double relative_error(double analytic, double numeric);

// Compares the analytic gradient of the scalar returned by `model_fn` with
// central differences (f(p+eps) - f(p-eps)) / (2 eps) for every tensor in
// `params`. `model_fn` must be deterministic; a repeat evaluation that differs
// bitwise raises ContractError.
GradCheckReport grad_check(const std::function<Tensor<double>()>& model_fn,
                           ParameterSet<double>& params, const GradCheckOptions& options = {});

}  // namespace aon

#endif  // AON_GRAD_CHECK_H_
