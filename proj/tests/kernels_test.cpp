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

#include "aon/kernels.h"

#include <random>

#include "doctest.h"

namespace k = aon::kernels;
namespace ref = aon::kernels::reference;
using aon::Index;

namespace {

std::vector<double> random_vec(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  std::vector<double> v(n);
  for (double& x : v) x = dist(rng);
  return v;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_CASE("gemm matches the serial reference for every transpose combination") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 12; ++trial) {
    const Index m = 1 + static_cast<Index>(rng() % 17);
    const Index n = 1 + static_cast<Index>(rng() % 13);
    const Index kk = 1 + static_cast<Index>(rng() % 19);
    const bool ta = trial & 1, tb = trial & 2;
    auto a = random_vec(static_cast<std::size_t>(m * kk), rng);
    auto b = random_vec(static_cast<std::size_t>(kk * n), rng);
    auto c0 = random_vec(static_cast<std::size_t>(m * n), rng);
    auto c1 = c0;
    const double beta = (trial % 3 == 0) ? 0.0 : 0.5;
    k::gemm<double>(ta, tb, m, n, kk, 1.5, a.data(), b.data(), beta, c0.data());
    ref::gemm<double>(ta, tb, m, n, kk, 1.5, a.data(), b.data(), beta, c1.data());
    CHECK(max_abs_diff(c0, c1) < 1e-12);
  }
}

TEST_CASE("im2col and col2im agree bitwise with the reference") {
  std::mt19937_64 rng(5);
  const Index n = 2, c = 3, h = 5, w = 4;
  auto x = random_vec(static_cast<std::size_t>(n * c * h * w), rng);
  std::vector<double> col0(static_cast<std::size_t>(c * 9 * n * h * w));
  auto col1 = col0;
  k::im2col3x3(x.data(), n, c, h, w, col0.data());
  ref::im2col3x3(x.data(), n, c, h, w, col1.data());
  CHECK(col0 == col1);
  std::vector<double> g0(x.size()), g1(x.size());
  k::col2im3x3(col0.data(), n, c, h, w, g0.data());
  ref::col2im3x3(col0.data(), n, c, h, w, g1.data());
  CHECK(max_abs_diff(g0, g1) < 1e-12);
}

TEST_CASE("im2col + gemm reproduces direct convolution") {
  std::mt19937_64 rng(9);
  const Index n = 2, c = 3, o = 4, h = 6, w = 6;
  auto x = random_vec(static_cast<std::size_t>(n * c * h * w), rng);
  auto wt = random_vec(static_cast<std::size_t>(o * c * 9), rng);
  std::vector<double> direct(static_cast<std::size_t>(n * o * h * w));
  ref::conv3x3<double>(x.data(), wt.data(), nullptr, n, c, o, h, w, direct.data());
  std::vector<double> col(static_cast<std::size_t>(c * 9 * n * h * w));
  k::im2col3x3(x.data(), n, c, h, w, col.data());
  std::vector<double> out2(static_cast<std::size_t>(o * n * h * w));
  k::gemm<double>(false, false, o, n * h * w, c * 9, 1.0, wt.data(), col.data(), 0.0, out2.data());
  double worst = 0;
  for (Index b = 0; b < n; ++b)
    for (Index oc = 0; oc < o; ++oc)
      for (Index p = 0; p < h * w; ++p)
        worst = std::max(worst, std::abs(out2[static_cast<std::size_t>(oc * n * h * w + b * h * w + p)] -
                                         direct[static_cast<std::size_t>((b * o + oc) * h * w + p)]));
  CHECK(worst < 1e-12);
}

TEST_CASE("max pooling kernels agree with the reference, including ragged windows") {
  std::mt19937_64 rng(3);
  k::PoolGeometry g{7, 5, 4, 3, 2, 2, 2, 2};  // ceil-mode 7x5 -> 4x3
  const Index planes = 6;
  auto x = random_vec(static_cast<std::size_t>(planes * 35), rng);
  std::vector<double> y0(static_cast<std::size_t>(planes * 12)), y1 = y0;
  std::vector<std::int32_t> a0(y0.size()), a1(y0.size());
  k::maxpool_forward(x.data(), planes, g, y0.data(), a0.data());
  ref::maxpool_forward(x.data(), planes, g, y1.data(), a1.data());
  CHECK(y0 == y1);
  CHECK(a0 == a1);
  auto gy = random_vec(y0.size(), rng);
  std::vector<double> gx0(x.size()), gx1(x.size());
  k::maxpool_backward(gy.data(), a0.data(), planes, g, gx0.data());
  ref::maxpool_backward(gy.data(), a1.data(), planes, g, gx1.data());
  CHECK(gx0 == gx1);
}

TEST_CASE("channel moments agree with the reference") {
  std::mt19937_64 rng(4);
  const Index n = 3, c = 5, s = 7;
  auto x = random_vec(static_cast<std::size_t>(n * c * s), rng);
  std::vector<double> m0(5), v0(5), m1(5), v1(5);
  k::channel_moments(x.data(), n, c, s, m0.data(), v0.data());
  ref::channel_moments(x.data(), n, c, s, m1.data(), v1.data());
  CHECK(max_abs_diff(m0, m1) < 1e-14);
  CHECK(max_abs_diff(v0, v1) < 1e-14);
}

TEST_CASE("lstm pointwise kernels agree with the reference") {
  std::mt19937_64 rng(6);
  const Index n = 3, hd = 5;
  auto gates = random_vec(static_cast<std::size_t>(n * 4 * hd), rng);
  auto cprev = random_vec(static_cast<std::size_t>(n * hd), rng);
  std::vector<double> act0(gates.size()), act1(gates.size());
  std::vector<double> c0(cprev.size()), c1(cprev.size()), h0(cprev.size()), h1(cprev.size());
  k::lstm_pointwise_forward(gates.data(), cprev.data(), n, hd, act0.data(), c0.data(), h0.data());
  ref::lstm_pointwise_forward(gates.data(), cprev.data(), n, hd, act1.data(), c1.data(), h1.data());
  CHECK(max_abs_diff(act0, act1) < 1e-15);
  CHECK(max_abs_diff(h0, h1) < 1e-15);
  auto dh = random_vec(cprev.size(), rng);
  auto dc = random_vec(cprev.size(), rng);
  std::vector<double> dg0(gates.size()), dg1(gates.size()), dcp0(cprev.size()), dcp1(cprev.size());
  k::lstm_pointwise_backward(act0.data(), cprev.data(), c0.data(), dh.data(), dc.data(), n, hd,
                             dg0.data(), dcp0.data());
  ref::lstm_pointwise_backward(act1.data(), cprev.data(), c1.data(), dh.data(), dc.data(), n, hd,
                               dg1.data(), dcp1.data());
  CHECK(max_abs_diff(dg0, dg1) < 1e-15);
  CHECK(max_abs_diff(dcp0, dcp1) < 1e-15);
}
