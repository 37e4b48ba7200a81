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

#ifndef AON_OPTIM_H_
#define AON_OPTIM_H_

#include "aon/tensor.h"

namespace aon {

struct AdadeltaConfig {
  double rho = 0.95;
  double eps = 1e-6;
  double clip_norm = 5.0;  // global gradient-norm cap; <= 0 disables
};

struct StepStats {
  double grad_norm = 0;  // before clipping
  bool clipped = false;
};

// ADADELTA with per-parameter accumulators E[g^2] and E[dx^2]:
//   E[g^2]  <- rho E[g^2] + (1 - rho) g^2
//   dx      = -sqrt(E[dx^2] + eps) / sqrt(E[g^2] + eps) * g
//   E[dx^2] <- rho E[dx^2] + (1 - rho) dx^2
//   x       <- x + dx
template <typename T>
class Adadelta {
 public:
  Adadelta(const ParameterSet<T>& params, AdadeltaConfig config = {});

  const AdadeltaConfig& config() const { return config_; }
  // Parameters without a gradient count as zero gradient. Throws
  // NumericError (parameters untouched) on a non-finite gradient.
  StepStats step(ParameterSet<T>& params);

  NamedTensors<T>& sq_grad() { return sq_grad_; }
  NamedTensors<T>& sq_update() { return sq_update_; }
  const NamedTensors<T>& sq_grad() const { return sq_grad_; }
  const NamedTensors<T>& sq_update() const { return sq_update_; }

 private:
  AdadeltaConfig config_;
  NamedTensors<T> sq_grad_, sq_update_;
};

}  // namespace aon

#endif  // AON_OPTIM_H_
