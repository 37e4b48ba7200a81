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

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace aon {

namespace {

void put_pixel(RgbImage& img, Index x, Index y, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  if (x < 0 || y < 0 || x >= img.width || y >= img.height) return;
  auto* p = img.rgb.data() + 3 * (y * img.width + x);
  p[0] = r, p[1] = g, p[2] = b;
}

void draw_line(RgbImage& img, double x1, double y1, double x2, double y2) {
  const double len = std::max(std::abs(x2 - x1), std::abs(y2 - y1));
  const int steps = std::max(1, static_cast<int>(std::ceil(len)));
  for (int i = 0; i <= steps; ++i) {
    const double t = static_cast<double>(i) / steps;
    put_pixel(img, static_cast<Index>(std::floor(x1 + t * (x2 - x1))),
              static_cast<Index>(std::floor(y1 + t * (y2 - y1))), 255, 0, 0);
  }
}

void draw_arrow(RgbImage& img, const Segment& s) {
  draw_line(img, s.x1, s.y1, s.x2, s.y2);
  const double dx = s.x2 - s.x1, dy = s.y2 - s.y1, len = std::hypot(dx, dy);
  if (len < 1e-9) return;
  const double head = std::clamp(0.3 * len, 1.5, 4.0);
  const double ux = dx / len, uy = dy / len;
  for (double side : {-1.0, 1.0}) {
    // Two barbs at +-30 degrees from the reversed direction.
    const double bx = -ux * 0.866 - side * uy * 0.5, by = -uy * 0.866 + side * ux * 0.5;
    draw_line(img, s.x2, s.y2, s.x2 + head * bx, s.y2 + head * by);
  }
}

}  // namespace

TrendPoint char_position(const ClueRows& clues, const std::vector<double>& alpha, Index step) {
  if (clues.size() != alpha.size() || clues.empty()) {
    throw DimensionError("char_position: " + std::to_string(clues.size()) + " clue positions vs " +
                         std::to_string(alpha.size()) + " attention weights");
  }
  const auto len = static_cast<Index>(alpha.size());
  const double center = 0.5 * static_cast<double>(len + 1);
  double mass[2] = {0, 0}, moment[2] = {0, 0};
  for (std::size_t j = 0; j < alpha.size(); ++j) {
    for (int axis = 0; axis < 2; ++axis) {
      const double d = (clues[j][2 * axis] + clues[j][2 * axis + 1]) * alpha[j];
      mass[axis] += d;
      moment[axis] += static_cast<double>(j + 1) * d;
    }
  }
  TrendPoint p;
  p.step = step;
  p.degenerate_x = mass[0] < kTrendEpsilon;
  p.degenerate_y = mass[1] < kTrendEpsilon;
  p.x = p.degenerate_x ? center : moment[0] / mass[0];
  p.y = p.degenerate_y ? center : moment[1] / mass[1];
  return p;
}

std::vector<TrendPoint> trend(const DecodeTrace& trace, const ClueRows& clues, int eos) {
  std::vector<TrendPoint> points;
  for (std::size_t t = 0; t < trace.size(); ++t) {
    if (trace.emitted[t] == eos) break;
    points.push_back(char_position(clues, trace.alphas[t], static_cast<Index>(t)));
  }
  return points;
}

template <typename T>
ClueRows clue_rows(const Tensor<T>& clues, Index n) {
  if (clues.rank() != 3 || clues.dim(2) != 4 || n < 0 || n >= clues.dim(1)) {
    throw DimensionError("clue_rows: expected [L,N,4] clues, got " + to_string(clues.shape()));
  }
  const Index len = clues.dim(0), batch = clues.dim(1);
  ClueRows rows(static_cast<std::size_t>(len));
  for (Index j = 0; j < len; ++j) {
    for (Index k = 0; k < 4; ++k) {
      rows[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)] =
          static_cast<double>(clues[(j * batch + n) * 4 + k]);
    }
  }
  return rows;
}

TrendOverlay render_overlay(const Image& image, const std::vector<TrendPoint>& points,
                            Index grid_len) {
  if (grid_len < 1) throw ContractError("render_overlay: grid length must be positive");
  TrendOverlay out;
  out.raster = RgbImage(image.width, image.height);
  for (std::size_t i = 0; i < image.pixels.size(); ++i) {
    const auto v = static_cast<std::uint8_t>(
        std::lround(std::clamp(image.pixels[i], 0.0f, 1.0f) * 255.0f));
    out.raster.rgb[3 * i] = out.raster.rgb[3 * i + 1] = out.raster.rgb[3 * i + 2] = v;
  }
  const double sx = static_cast<double>(image.width) / static_cast<double>(grid_len);
  const double sy = static_cast<double>(image.height) / static_cast<double>(grid_len);
  for (std::size_t i = 1; i < points.size(); ++i) {
    out.arrows.push_back({(points[i - 1].x - 0.5) * sx, (points[i - 1].y - 0.5) * sy,
                          (points[i].x - 0.5) * sx, (points[i].y - 0.5) * sy});
  }
  for (const auto& s : out.arrows) draw_arrow(out.raster, s);
  return out;
}

std::string overlay_vectors(const TrendOverlay& overlay) {
  std::string out;
  char line[128];
  for (const auto& s : overlay.arrows) {
    std::snprintf(line, sizeof(line), "arrow %.3f %.3f %.3f %.3f\n", s.x1, s.y1, s.x2, s.y2);
    out += line;
  }
  return out;
}

TrendResult trace_image(AonModel<float>& model, const Image& image) {
  if (model.config().encoder.mode != EncodeMode::kAon) {
    throw ContractError("trend: placement clues exist only in aon mode");
  }
  const Index s = model.config().encoder.input_size;
  const Image input = resize_bilinear(image, s, s);
  Tensor<float> batch(Shape{1, 1, s, s});
  std::copy(input.pixels.begin(), input.pixels.end(), batch.ptr());
  NoGradScope<float> no_grad;
  const bool was_training = model.training();
  model.set_training(false);
  const EncoderOutput<float> enc = model.encode(batch);
  model.set_training(was_training);
  const auto decoded =
      model.decoder().greedy_decode(enc.sequence, model.config().decoder.max_len);
  TrendResult result;
  result.text = decoded[0].text;
  result.points = trend(decoded[0].trace, clue_rows(enc.clues, 0), model.vocab().eos());
  result.overlay = render_overlay(image, result.points, enc.clues.dim(0));
  return result;
}

template ClueRows clue_rows<float>(const Tensor<float>&, Index);
template ClueRows clue_rows<double>(const Tensor<double>&, Index);

}  // namespace aon
