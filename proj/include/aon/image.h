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

#ifndef AON_IMAGE_H_
#define AON_IMAGE_H_

#include <cstdint>
#include <string>
#include <vector>

#include "aon/tensor.h"

namespace aon {

// Single-channel image, row-major, values in [0,1].
struct Image {
  Index width = 0, height = 0;
  std::vector<float> pixels;

  Image() = default;
  Image(Index w, Index h, float fill = 0.0f)
      : width(w), height(h), pixels(static_cast<std::size_t>(w * h), fill) {}
  float& at(Index x, Index y) { return pixels[static_cast<std::size_t>(y * width + x)]; }
  float at(Index x, Index y) const { return pixels[static_cast<std::size_t>(y * width + x)]; }
  bool operator==(const Image& o) const = default;
};

// Three-channel 8-bit raster, row-major RGB.
struct RgbImage {
  Index width = 0, height = 0;
  std::vector<std::uint8_t> rgb;

  RgbImage() = default;
  RgbImage(Index w, Index h) : width(w), height(h), rgb(static_cast<std::size_t>(w * h * 3)) {}
  bool operator==(const RgbImage& o) const = default;
};

// Binary PGM (P5, maxval 255). Reading accepts maxval 1..255 and comments.
Image read_pgm(const std::string& path);
void write_pgm(const std::string& path, const Image& image);
// Binary PPM (P6, maxval 255).
void write_ppm(const std::string& path, const RgbImage& image);
RgbImage read_ppm(const std::string& path);

// 8-bit quantization used by the PGM codec.
Image quantize(const Image& image);
// Bilinear resampling to a new size (pixel centers aligned).
Image resize_bilinear(const Image& image, Index width, Index height);
// Quarter turns counterclockwise, as exact pixel permutations.
Image rotate_quarter(const Image& image, int quarter_turns);

}  // namespace aon

#endif  // AON_IMAGE_H_
