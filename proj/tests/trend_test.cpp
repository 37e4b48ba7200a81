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

#include "aon/trend.h"

#include <random>

#include "doctest.h"
#include "test_util.h"

using aon::ClueRows;
using aon::Image;
using aon::Index;
using aon::TrendPoint;

namespace {

ClueRows uniform_clues(std::size_t len) { return ClueRows(len, {0.25, 0.25, 0.25, 0.25}); }

}  // namespace

TEST_CASE("char_position: one-hot attention on direction 1") {
  const std::size_t len = 6;
  ClueRows clues(len, {1.0, 0.0, 0.0, 0.0});
  for (std::size_t k = 0; k < len; ++k) {
    std::vector<double> alpha(len, 0.0);
    alpha[k] = 1.0;
    const TrendPoint p = aon::char_position(clues, alpha);
    CHECK(p.x == static_cast<double>(k + 1));
    CHECK_FALSE(p.degenerate_x);
    CHECK(p.degenerate_y);
    CHECK(p.y == 3.5);
  }
}

TEST_CASE("char_position: uniform inputs give the grid center") {
  const std::size_t len = 5;
  const TrendPoint p = aon::char_position(uniform_clues(len), std::vector<double>(len, 0.2));
  CHECK(p.x == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(p.y == doctest::Approx(3.0).epsilon(1e-12));
  CHECK_FALSE(p.degenerate_x);
  CHECK_FALSE(p.degenerate_y);
}

TEST_CASE("char_position: hand-worked L=3 example") {
  // Rows: d1 = (1,0,0), d2 = (0,1,0), d3 = d4 = half of uniform.
  const double u = 0.5 / 3.0;
  const ClueRows clues = {{1.0, 0.0, u, u}, {0.0, 1.0, u, u}, {0.0, 0.0, u, u}};
  const TrendPoint p = aon::char_position(clues, {0.5, 0.5, 0.0});
  CHECK(p.x == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(p.y == doctest::Approx(1.5).epsilon(1e-12));
}

TEST_CASE("char_position: convex combination on random inputs") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t len = 1 + trial % 9;
    ClueRows clues(len);
    std::vector<double> alpha(len);
    double sa = 0;
    for (std::size_t j = 0; j < len; ++j) {
      double s = 0;
      for (double& c : clues[j]) s += (c = unit(rng));
      for (double& c : clues[j]) c /= s;
      sa += (alpha[j] = unit(rng));
    }
    for (double& a : alpha) a /= sa;
    const TrendPoint p = aon::char_position(clues, alpha, 3);
    CHECK(p.step == 3);
    CHECK(p.x >= 1.0);
    CHECK(p.x <= static_cast<double>(len));
    CHECK(p.y >= 1.0);
    CHECK(p.y <= static_cast<double>(len));
  }
  CHECK_THROWS_AS(aon::char_position(uniform_clues(3), {1.0, 0.0}), aon::DimensionError);
}

TEST_CASE("trend: one point per emitted character") {
  aon::DecodeTrace trace;
  const int eos = 10;
  auto push = [&](int symbol, std::vector<double> alpha) {
    trace.emitted.push_back(symbol);
    trace.alphas.push_back(std::move(alpha));
    trace.dists.emplace_back(11, 1.0 / 11);
  };
  push(eos, {0.5, 0.5});
  CHECK(aon::trend(trace, uniform_clues(2), eos).empty());
  trace = {};
  push(3, {1.0, 0.0});
  push(eos, {0.0, 1.0});
  CHECK(aon::trend(trace, uniform_clues(2), eos).size() == 1);
  trace = {};
  push(3, {1.0, 0.0});
  push(4, {0.0, 1.0});
  push(5, {0.5, 0.5});
  push(eos, {0.5, 0.5});
  const auto pts = aon::trend(trace, uniform_clues(2), eos);
  REQUIRE(pts.size() == 3);
  CHECK(pts[0].x == 1.0);
  CHECK(pts[1].x == 2.0);
  CHECK(pts[2].step == 2);
  // Truncated decodes (no EOS) keep every step.
  trace.emitted.back() = 6;
  CHECK(aon::trend(trace, uniform_clues(2), eos).size() == 4);
}

TEST_CASE("clue_rows reads one sample of [L,N,4]") {
  aon::Tensor<double> c(aon::Shape{2, 3, 4});
  for (Index i = 0; i < c.size(); ++i) c[i] = static_cast<double>(i);
  const ClueRows rows = aon::clue_rows(c, 1);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0][0] == 4.0);
  CHECK(rows[1][3] == 19.0);
  CHECK_THROWS_AS(aon::clue_rows(c, 3), aon::DimensionError);
}

TEST_CASE("render_overlay") {
  Image img(32, 32, 0.5f);
  const auto empty = aon::render_overlay(img, {}, 8);
  CHECK(empty.raster.width == 32);
  CHECK(empty.raster.height == 32);
  CHECK(empty.arrows.empty());
  for (auto v : empty.raster.rgb) CHECK(v == 128);
  CHECK(aon::overlay_vectors(empty).empty());

  const std::vector<TrendPoint> pts = {{4.5, 4.5, 0}, {1.0, 8.0, 1}, {8.0, 1.0, 2}};
  const auto ov = aon::render_overlay(img, pts, 8);
  REQUIRE(ov.arrows.size() == 2);
  // Grid center maps to the image center.
  CHECK(ov.arrows[0].x1 == 16.0);
  CHECK(ov.arrows[0].y1 == 16.0);
  CHECK(ov.arrows[0].x2 == 2.0);
  CHECK(ov.arrows[0].y2 == 30.0);
  CHECK(aon::overlay_vectors(ov) ==
        "arrow 16.000 16.000 2.000 30.000\narrow 2.000 30.000 30.000 2.000\n");
  int red = 0;
  for (std::size_t i = 0; i < ov.raster.rgb.size(); i += 3) {
    red += ov.raster.rgb[i] == 255 && ov.raster.rgb[i + 1] == 0;
  }
  CHECK(red > 20);
  // Pure: identical inputs, identical raster.
  CHECK(aon::render_overlay(img, pts, 8).raster == ov.raster);
}

TEST_CASE("trace_image on an untrained model") {
  aon::AonModel<float> model(aon::ModelConfig::preset("mini"), 3);
  Image img(40, 40, 0.0f);
  for (Index x = 10; x < 30; ++x) img.at(x, 20) = 1.0f;
  const auto r = aon::trace_image(model, img);
  CHECK(r.points.size() == r.text.size());
  CHECK(r.overlay.raster.width == 40);
  for (const auto& p : r.points) {
    CHECK(p.x >= 1.0);
    CHECK(p.x <= 4.0);
  }
  aon::ModelConfig hn = aon::ModelConfig::preset("mini");
  hn.encoder.mode = aon::EncodeMode::kHnOnly;
  aon::AonModel<float> plain(hn, 3);
  CHECK_THROWS_AS(aon::trace_image(plain, img), aon::ContractError);
}
