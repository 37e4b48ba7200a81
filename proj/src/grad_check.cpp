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

#include "aon/grad_check.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>
#include <random>
#include <tuple>
#include <utility>

#include "aon/ops.h"

namespace aon {

double relative_error(double analytic, double numeric) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
  return std::abs(analytic - numeric) / denom;
}

namespace {

struct Probe {
  double value;
  std::uint64_t signature;
};

Probe evaluate(const std::function<Tensor<double>()>& model_fn) {
  NoGradScope<double> no_grad;
  KinkProbe kinks;
  const Tensor<double> loss = model_fn();
  if (loss.size() != 1) throw ContractError("grad_check: model_fn must return a scalar");
  return {loss.item(), kinks.signature()};
}

}  // namespace

GradCheckReport grad_check(const std::function<Tensor<double>()>& model_fn,
                           ParameterSet<double>& params, const GradCheckOptions& options) {
  if (!(options.eps >= 1e-6 && options.eps <= 1e-3)) {
    throw ContractError("grad_check: eps must lie in [1e-6, 1e-3]");
  }

  params.zero_grad();
  {
    Tape<double> tape;
    ScopedTape<double> scope(tape);
    Tensor<double> loss = model_fn();
    tape.backward(loss);
  }
  std::vector<std::vector<double>> analytic;
  for (const auto& [name, tensor] : params) {
    check_finite<double>(tensor.grad(), "gradient of " + name);
    analytic.emplace_back(tensor.grad().begin(), tensor.grad().end());
  }

  const Probe base = evaluate(model_fn);
  const Probe again = evaluate(model_fn);
  if (std::memcmp(&base.value, &again.value, sizeof(double)) != 0) {
    throw ContractError("grad_check: model_fn is not deterministic");
  }

  GradCheckReport report;
  std::mt19937_64 rng(options.seed);
  std::size_t slot = 0;
  for (auto& [name, tensor] : params) {
    GradCheckEntry entry;
    entry.name = name;
    const Index n = tensor.size();
    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index(0));
    std::shuffle(order.begin(), order.end(), rng);
    const Index want = std::min(n, options.coords_per_tensor);
    std::size_t cursor = 0;
    int redraws = 0;
    while (entry.checked < want && cursor < order.size()) {
      const Index i = order[cursor++];
      const double saved = tensor[i];
      auto probe = [&](double step) {
        tensor[i] = saved + step;
        const Probe plus = evaluate(model_fn);
        tensor[i] = saved - step;
        const Probe minus = evaluate(model_fn);
        tensor[i] = saved;
        return std::pair{plus, minus};
      };
      double step = options.eps;
      auto [plus, minus] = probe(step);
      auto clean = [&](const Probe& p) { return p.signature == base.signature; };
      const Index untried = static_cast<Index>(order.size() - cursor);
      if (options.skip_kinks && !(clean(plus) && clean(minus))) {
        if (redraws < options.max_redraws && untried >= want - entry.checked) {
          ++entry.skipped_kinks;
          ++redraws;
          continue;
        }
        while (!(clean(plus) && clean(minus)) && step > options.min_eps) {
          step = std::max(step / 10, options.min_eps);
          std::tie(plus, minus) = probe(step);
        }
        if (step < options.eps) ++entry.shrunk_steps;
      }
      double numeric = (plus.value - minus.value) / (2 * step);
      if (options.skip_kinks && !(clean(plus) && clean(minus))) {
        if (clean(plus)) {
          numeric = (plus.value - base.value) / step;
          ++entry.one_sided;
        } else if (clean(minus)) {
          numeric = (base.value - minus.value) / step;
          ++entry.one_sided;
        }
      }
      const double a = analytic[slot][static_cast<std::size_t>(i)];
      const double err = relative_error(a, numeric);
      if (err > entry.max_rel_err || entry.worst_index < 0) {
        entry.max_rel_err = std::max(entry.max_rel_err, err);
        entry.worst_index = i;
        entry.worst_analytic = a;
        entry.worst_numeric = numeric;
      }
      ++entry.checked;
    }
    report.max_rel_err = std::max(report.max_rel_err, entry.max_rel_err);
    report.per_tensor.push_back(entry);
    ++slot;
  }
  return report;
}

}  // namespace aon
