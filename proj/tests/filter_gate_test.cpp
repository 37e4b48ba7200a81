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

#include "aon/filter_gate.h"

#include <algorithm>
#include <cmath>

#include "aon/grad_check.h"
#include "doctest.h"
#include "test_util.h"

using aon::FourDirectionFeatures;
using aon::Index;
using aon::Shape;
using aon::Tensor;
using namespace aon::testing;

namespace {

template <typename T>
Tensor<T> clues_from(Index len, Index n, std::mt19937_64& rng) {
  Tensor<T> c(Shape{len, n, 4});
  std::gamma_distribution<double> g(1.0, 1.0);
  for (Index r = 0; r < len * n; ++r) {
    double w[4], s = 0;
    for (double& v : w) s += (v = g(rng));
    for (int j = 0; j < 4; ++j) c[r * 4 + j] = static_cast<T>(w[j] / s);
  }
  return c;
}

template <typename T>
FourDirectionFeatures<T> random_features(Shape shape, std::mt19937_64& rng, double scale = 1.0) {
  return {random_tensor<T>(shape, rng, scale), random_tensor<T>(shape, rng, scale),
          random_tensor<T>(shape, rng, scale), random_tensor<T>(shape, rng, scale)};
}

}  // namespace

TEST_CASE("one-hot clues reproduce tanh of the selected direction in 32-bit") {
  std::mt19937_64 rng(1);
  auto f = random_features<float>({3, 2, 5}, rng, 2.0);
  const Tensor<float>* dirs[4] = {&f.fwd_h, &f.rev_h, &f.fwd_v, &f.rev_v};
  for (int k = 0; k < 4; ++k) {
    Tensor<float> c(Shape{3, 2, 4});
    for (Index r = 0; r < 6; ++r) c[r * 4 + k] = 1.0f;
    auto y = aon::fuse(f, c);
    for (Index i = 0; i < y.size(); ++i) CHECK(y[i] == std::tanh((*dirs[k])[i]));
  }
}

TEST_CASE("uniform clues over identical directions give tanh of that direction") {
  std::mt19937_64 rng(2);
  auto v = random_tensor<float>({2, 2, 3}, rng);
  FourDirectionFeatures<float> f{v, v, v, v};
  auto y = aon::fuse(f, Tensor<float>(Shape{2, 2, 4}, 0.25f));
  for (Index i = 0; i < y.size(); ++i) CHECK(y[i] == doctest::Approx(std::tanh(v[i])).epsilon(1e-6));
}

TEST_CASE("hand-computed half/half mix of the horizontal pair") {
  FourDirectionFeatures<double> f{Tensor<double>(Shape{1, 1, 2}, std::vector<double>{2, 0}),
                                  Tensor<double>(Shape{1, 1, 2}, std::vector<double>{0, 2}),
                                  Tensor<double>(Shape{1, 1, 2}), Tensor<double>(Shape{1, 1, 2})};
  auto y = aon::fuse(f, Tensor<double>(Shape{1, 1, 4}, std::vector<double>{0.5, 0.5, 0, 0}));
  CHECK(y[0] == doctest::Approx(0.7615941559557649));
  CHECK(y[1] == doctest::Approx(0.7615941559557649));
}

TEST_CASE("fused values stay strictly inside (-1, 1) even for huge inputs") {
  std::mt19937_64 rng(3);
  auto f = random_features<float>({4, 3, 8}, rng, 50.0);
  auto y = aon::fuse(f, clues_from<float>(4, 3, rng));
  for (float v : y.data()) {
    CHECK(v > -1.0f);
    CHECK(v < 1.0f);
  }
}

TEST_CASE("the pre-activation is a convex combination of the four directions") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 1000; ++trial) {
    auto f = random_features<double>({2, 1, 3}, rng);
    auto y = aon::fuse(f, clues_from<double>(2, 1, rng));
    for (Index i = 0; i < y.size(); ++i) {
      const double vals[4] = {f.fwd_h[i], f.rev_h[i], f.fwd_v[i], f.rev_v[i]};
      const double lo = *std::min_element(vals, vals + 4), hi = *std::max_element(vals, vals + 4);
      const double pre = std::atanh(y[i]);
      CHECK(pre >= lo - 1e-12);
      CHECK(pre <= hi + 1e-12);
    }
  }
}

TEST_CASE("permuting directions together with clue columns is bitwise invariant") {
  std::mt19937_64 rng(5);
  auto f = random_features<float>({3, 2, 6}, rng);
  auto c = clues_from<float>(3, 2, rng);
  auto y = aon::fuse(f, c);
  const int perm[4] = {2, 0, 3, 1};
  Tensor<float> dirs[4] = {f.fwd_h, f.rev_h, f.fwd_v, f.rev_v};
  FourDirectionFeatures<float> g{dirs[perm[0]], dirs[perm[1]], dirs[perm[2]], dirs[perm[3]]};
  Tensor<float> cp(c.shape());
  for (Index r = 0; r < 6; ++r) {
    for (int j = 0; j < 4; ++j) cp[r * 4 + j] = c[r * 4 + perm[j]];
  }
  CHECK(bitwise_equal(y, aon::fuse(g, cp)));
}

TEST_CASE("fuse passes a finite-difference check in features and clues") {
  std::mt19937_64 rng(6);
  aon::ParameterSet<double> params;
  FourDirectionFeatures<double> f{params.add("fh", random_tensor({2, 2, 3}, rng)),
                                  params.add("rh", random_tensor({2, 2, 3}, rng)),
                                  params.add("fv", random_tensor({2, 2, 3}, rng)),
                                  params.add("rv", random_tensor({2, 2, 3}, rng))};
  auto c = params.add("c", clues_from<double>(2, 2, rng));
  aon::GradCheckOptions opts;
  opts.eps = 1e-5;
  auto report = aon::grad_check([&] { return probe_loss(aon::fuse(f, c), 9); }, params, opts);
  CHECK(report.max_rel_err < 1e-6);
}

TEST_CASE("fuse rejects mismatched sequence lengths") {
  FourDirectionFeatures<float> f{Tensor<float>(Shape{3, 1, 2}), Tensor<float>(Shape{3, 1, 2}),
                                 Tensor<float>(Shape{3, 1, 2}), Tensor<float>(Shape{3, 1, 2})};
  CHECK_THROWS_AS(aon::fuse(f, Tensor<float>(Shape{2, 1, 4})), aon::DimensionError);
  f.rev_v = Tensor<float>(Shape{2, 1, 2});
  CHECK_THROWS_AS(aon::fuse(f, Tensor<float>(Shape{3, 1, 4})), aon::DimensionError);
}
