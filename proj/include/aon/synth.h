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

#ifndef AON_SYNTH_H_
#define AON_SYNTH_H_

#include <array>
#include <cstdint>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "aon/config.h"
#include "aon/image.h"

namespace aon {

class GenerationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Embedded 5x7 dot-matrix font for a-z and 0-9 (letters drawn as capitals).
// No glyph equals the half-turn rotation of a different glyph, so rotated
// digit strings stay unambiguous.
class GlyphAtlas {
 public:
  static constexpr int kCols = 5;
  static constexpr int kRows = 7;
  using Bitmap = std::array<std::uint8_t, kRows>;  // bit 4 is the leftmost dot

  static bool has(char symbol);
  // Throws ContractError for symbols without a glyph.
  static const Bitmap& glyph(char symbol);
  static bool dot(const Bitmap& g, int col, int row) {
    return (g[static_cast<std::size_t>(row)] >> (kCols - 1 - col)) & 1u;
  }
  static const std::string& symbols();
};

enum class Layout { kLine, kArc };
std::string layout_name(Layout layout);
Layout parse_layout(const std::string& name);

struct SampleSpec {
  std::string text;
  Layout layout = Layout::kLine;
  double angle = 0;           // degrees, counterclockwise
  double arc_curvature = 0;   // signed, 1/pixels; positive bends the ends up
  double scale = 2;           // pixels per font dot
  double min_scale = 0.75;    // smallest scale tried before giving up
  double shear = 0;           // horizontal shear per unit height
  double noise_std = 0;       // additive gaussian, gray levels in [0,1]
  double jitter = 0;          // max per-glyph offset, pixels
  Index canvas = 32;
  std::uint64_t seed = 0;
};

struct RenderedSample {
  Image image;  // noisy, clipped to [0,1]
  Image clean;  // same geometry before noise
  std::string label;
  double scale_used = 0;
};

// White text on a black canvas, 4x4 supersampled. Throws GenerationError when
// the text does not fit even at min_scale.
RenderedSample render_sample(const SampleSpec& spec);

// Counterclockwise rotation about the center, bilinear, background 0.
// Multiples of 90 degrees are exact pixel permutations.
Image rotate_augment(const Image& image, double angle);

struct GenConfig {
  Index image_size = 32;
  std::string symbols = "0123456789";
  Index min_chars = 1;
  Index max_chars = 4;
  Index train_count = 5000;
  Index test_count = 500;
  // Angle bins in degrees; empty draws angles uniformly from [0,360).
  std::vector<Index> angles = {0, 90, 180, 270};
  double angle_jitter = 30;
  double arc_fraction = 0;
  double max_curvature = 0.02;
  double max_shear = 0.15;
  double scale_min = 1.2;
  double scale_max = 2.4;
  double min_scale = 0.75;
  double noise_std = 0.05;
  double glyph_jitter = 0.5;
  std::uint64_t seed = 1;

  static const std::set<std::string>& keys();
  static GenConfig from_key_values(const KeyValues& kv);
  std::string to_text() const;
  void validate() const;
};

// Spec of sample `index` of a split, derived from the config and `seed`.
SampleSpec sample_spec(const GenConfig& config, Index index, std::uint64_t seed);

struct ManifestRecord {
  std::string path;  // relative to the manifest's directory
  std::string label;
  double angle = 0;
  Layout layout = Layout::kLine;
  std::uint64_t seed = 0;
};

struct Manifest {
  std::string file;   // location of the manifest
  std::string split;  // file stem, e.g. "train"
  std::vector<ManifestRecord> records;

  std::string resolve(const ManifestRecord& record) const;
};

Manifest read_manifest(const std::string& path);
void write_manifest(const std::string& path, const std::vector<ManifestRecord>& records);

struct GeneratedDataset {
  Manifest train, test;
};

// Writes <out>/train.tsv, <out>/test.tsv, <out>/gen.cfg and one PGM per
// sample under <out>/train and <out>/test.
GeneratedDataset generate_dataset(const GenConfig& config, const std::string& out_dir);

}  // namespace aon

#endif  // AON_SYNTH_H_
