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

#include "aon/image.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace aon {

namespace {

// Reads the next header token of a netpbm file, skipping comments.
std::string next_token(std::istream& in, const std::string& path) {
  std::string token;
  char ch = 0;
  while (in.get(ch)) {
    if (ch == '#') {
      std::string rest;
      std::getline(in, rest);
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(ch))) {
      if (!token.empty()) return token;
      continue;
    }
    token.push_back(ch);
  }
  if (token.empty()) throw FormatError(path + ": truncated header");
  return token;
}

Index parse_extent(const std::string& token, const std::string& path, const char* what) {
  try {
    std::size_t used = 0;
    const long v = std::stol(token, &used);
    if (used == token.size() && v > 0) return v;
  } catch (const std::exception&) {
  }
  throw FormatError(path + ": bad " + what + " `" + token + "`");
}

struct NetpbmHeader {
  Index width, height, maxval;
};

NetpbmHeader read_header(std::istream& in, const std::string& path, const char* magic) {
  const std::string m = next_token(in, path);
  if (m != magic) throw FormatError(path + ": expected " + magic + " magic, found `" + m + "`");
  NetpbmHeader h{};
  h.width = parse_extent(next_token(in, path), path, "width");
  h.height = parse_extent(next_token(in, path), path, "height");
  h.maxval = parse_extent(next_token(in, path), path, "maxval");
  if (h.maxval > 255) throw FormatError(path + ": only 8-bit maxval is supported");
  return h;
}

inline std::uint8_t to_byte(float v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f));
}

void write_file(const std::string& path, const std::string& header, const char* data,
                std::size_t size) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << header;
  out.write(data, static_cast<std::streamsize>(size));
  if (!out) throw IoError("write failed for " + path);
}

}  // namespace

Image read_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read image " + path);
  const NetpbmHeader h = read_header(in, path, "P5");
  std::vector<unsigned char> bytes(static_cast<std::size_t>(h.width * h.height));
  in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (in.gcount() != static_cast<std::streamsize>(bytes.size())) {
    throw FormatError(path + ": truncated pixel data");
  }
  Image img(h.width, h.height);
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    img.pixels[i] = static_cast<float>(bytes[i]) / static_cast<float>(h.maxval);
  }
  return img;
}

void write_pgm(const std::string& path, const Image& image) {
  std::vector<char> bytes(image.pixels.size());
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    bytes[i] = static_cast<char>(to_byte(image.pixels[i]));
  }
  const std::string header = "P5\n" + std::to_string(image.width) + " " +
                             std::to_string(image.height) + "\n255\n";
  write_file(path, header, bytes.data(), bytes.size());
}

void write_ppm(const std::string& path, const RgbImage& image) {
  const std::string header = "P6\n" + std::to_string(image.width) + " " +
                             std::to_string(image.height) + "\n255\n";
  write_file(path, header, reinterpret_cast<const char*>(image.rgb.data()), image.rgb.size());
}

RgbImage read_ppm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read image " + path);
  const NetpbmHeader h = read_header(in, path, "P6");
  RgbImage img(h.width, h.height);
  in.read(reinterpret_cast<char*>(img.rgb.data()), static_cast<std::streamsize>(img.rgb.size()));
  if (in.gcount() != static_cast<std::streamsize>(img.rgb.size())) {
    throw FormatError(path + ": truncated pixel data");
  }
  return img;
}

Image quantize(const Image& image) {
  Image out = image;
  for (float& v : out.pixels) v = static_cast<float>(to_byte(v)) / 255.0f;
  return out;
}

Image resize_bilinear(const Image& image, Index width, Index height) {
  if (width == image.width && height == image.height) return image;
  Image out(width, height);
  const double sx = static_cast<double>(image.width) / static_cast<double>(width);
  const double sy = static_cast<double>(image.height) / static_cast<double>(height);
  for (Index y = 0; y < height; ++y) {
    const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, static_cast<double>(image.height - 1));
    const Index y0 = static_cast<Index>(fy);
    const Index y1 = std::min(y0 + 1, image.height - 1);
    const double wy = fy - static_cast<double>(y0);
    for (Index x = 0; x < width; ++x) {
      const double fx =
          std::clamp((x + 0.5) * sx - 0.5, 0.0, static_cast<double>(image.width - 1));
      const Index x0 = static_cast<Index>(fx);
      const Index x1 = std::min(x0 + 1, image.width - 1);
      const double wx = fx - static_cast<double>(x0);
      const double top = image.at(x0, y0) * (1 - wx) + image.at(x1, y0) * wx;
      const double bottom = image.at(x0, y1) * (1 - wx) + image.at(x1, y1) * wx;
      out.at(x, y) = static_cast<float>(top * (1 - wy) + bottom * wy);
    }
  }
  return out;
}

Image rotate_quarter(const Image& image, int quarter_turns) {
  const int k = ((quarter_turns % 4) + 4) % 4;
  Image cur = image;
  for (int r = 0; r < k; ++r) {
    // out[y][x] = in[x][W-1-y]: content turns counterclockwise.
    Image next(cur.height, cur.width);
    for (Index y = 0; y < next.height; ++y) {
      for (Index x = 0; x < next.width; ++x) next.at(x, y) = cur.at(cur.width - 1 - y, x);
    }
    cur = std::move(next);
  }
  return cur;
}

}  // namespace aon
