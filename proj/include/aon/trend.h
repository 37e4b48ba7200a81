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

#ifndef AON_TREND_H_
#define AON_TREND_H_

#include <array>
#include <string>
#include <vector>

#include "aon/decoder.h"
#include "aon/image.h"
#include "aon/model.h"

namespace aon {

// Per-position placement clues of one sample: clues[j] holds the weights of
// (fwd_h, rev_h, fwd_v, rev_v) at sequence position j.
using ClueRows = std::vector<std::array<double, 4>>;

struct TrendPoint {
  double x = 0;  // patch-grid coordinate in [1,L]
  double y = 0;
  Index step = 0;
  bool degenerate_x = false;  // horizontal mass below 1e-8, x set to (L+1)/2
  bool degenerate_y = false;
};

inline constexpr double kTrendEpsilon = 1e-8;

// d = C (.) alpha; rows 1-2 and rows 3-4 are each normalized jointly, then
// x = sum_j j (d1j + d2j) and y = sum_j j (d3j + d4j) with 1-based j.
TrendPoint char_position(const ClueRows& clues, const std::vector<double>& alpha, Index step = 0);

// One point per emitted non-EOS step, in emission order.
std::vector<TrendPoint> trend(const DecodeTrace& trace, const ClueRows& clues, int eos);

// Sample n of an [L,N,4] clue tensor.
template <typename T>
ClueRows clue_rows(const Tensor<T>& clues, Index n);

struct Segment {
  double x1, y1, x2, y2;
};

struct TrendOverlay {
  RgbImage raster;                // input size, arrows drawn in red
  std::vector<Segment> arrows;    // pixel coordinates, points - 1 entries
};

// Grid point (x, y) maps to pixel ((x - 0.5) W / L, (y - 0.5) H / L).
TrendOverlay render_overlay(const Image& image, const std::vector<TrendPoint>& points,
                            Index grid_len);
// "arrow x1 y1 x2 y2" per line.
std::string overlay_vectors(const TrendOverlay& overlay);

struct TrendResult {
  std::string text;
  std::vector<TrendPoint> points;
  TrendOverlay overlay;
};

// Greedy-decodes one image with an aon-mode model and traces its placement
// trend. The image is resized to the model input size.
TrendResult trace_image(AonModel<float>& model, const Image& image);

}  // namespace aon

#endif  // AON_TREND_H_
