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

#include "aon/optim.h"

#include <cmath>

namespace aon {

template <typename T>
Adadelta<T>::Adadelta(const ParameterSet<T>& params, AdadeltaConfig config) : config_(config) {
  if (!(config_.rho >= 0 && config_.rho < 1)) throw ConfigError("adadelta: rho must be in [0,1)");
  if (!(config_.eps > 0)) throw ConfigError("adadelta: eps must be positive");
  for (const auto& [name, p] : params) {
    sq_grad_.add(name, Tensor<T>(p.shape()));
    sq_update_.add(name, Tensor<T>(p.shape()));
  }
}

template <typename T>
StepStats Adadelta<T>::step(ParameterSet<T>& params) {
  if (params.size() != sq_grad_.size()) throw DimensionError("adadelta: parameter set changed");
  StepStats stats;
  double sq = 0;
  for (const auto& [name, p] : params) {
    if (!p.has_grad()) continue;
    check_finite<T>(p.grad(), "gradient of " + name);
    for (T g : p.grad()) sq += static_cast<double>(g) * static_cast<double>(g);
  }
  stats.grad_norm = std::sqrt(sq);
  double factor = 1.0;
  if (config_.clip_norm > 0 && stats.grad_norm > config_.clip_norm) {
    factor = config_.clip_norm / stats.grad_norm;
    stats.clipped = true;
  }
  const double rho = config_.rho, eps = config_.eps;
  auto acc_g = sq_grad_.begin();
  auto acc_x = sq_update_.begin();
  for (auto it = params.begin(); it != params.end(); ++it, ++acc_g, ++acc_x) {
    auto& p = it->second;
    if (acc_g->first != it->first || acc_g->second.shape() != p.shape()) {
      throw DimensionError("adadelta: state does not match parameter " + it->first);
    }
    if (!p.has_grad()) continue;
    auto x = p.data();
    auto grad = p.grad();
    auto eg = acc_g->second.data();
    auto ex = acc_x->second.data();
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double g = static_cast<double>(grad[i]) * factor;
      const double eg2 = rho * static_cast<double>(eg[i]) + (1 - rho) * g * g;
      const double dx = -std::sqrt(static_cast<double>(ex[i]) + eps) / std::sqrt(eg2 + eps) * g;
      eg[i] = static_cast<T>(eg2);
      ex[i] = static_cast<T>(rho * static_cast<double>(ex[i]) + (1 - rho) * dx * dx);
      x[i] = static_cast<T>(static_cast<double>(x[i]) + dx);
    }
  }
  return stats;
}

template class Adadelta<float>;
template class Adadelta<double>;

}  // namespace aon
