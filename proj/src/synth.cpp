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

#include "aon/synth.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <random>
#include <sstream>

#include "aon/init.h"

namespace aon {

namespace {

namespace fs = std::filesystem;

constexpr double kPi = 3.14159265358979323846;

const std::map<char, GlyphAtlas::Bitmap>& font() {
  static const std::map<char, GlyphAtlas::Bitmap> f = {
      {'0', {0x0E, 0x11, 0x13, 0x15, 0x19, 0x11, 0x0E}},
      {'1', {0x04, 0x0C, 0x04, 0x04, 0x04, 0x04, 0x0E}},
      {'2', {0x0E, 0x11, 0x01, 0x02, 0x04, 0x08, 0x1F}},
      {'3', {0x1F, 0x02, 0x04, 0x02, 0x01, 0x11, 0x0E}},
      {'4', {0x02, 0x06, 0x0A, 0x12, 0x1F, 0x02, 0x02}},
      {'5', {0x1F, 0x10, 0x1E, 0x01, 0x01, 0x11, 0x0E}},
      {'6', {0x06, 0x08, 0x10, 0x1E, 0x11, 0x11, 0x0E}},
      {'7', {0x1F, 0x01, 0x02, 0x04, 0x08, 0x08, 0x08}},
      {'8', {0x0E, 0x11, 0x11, 0x0E, 0x11, 0x11, 0x0E}},
      // Straight tail: a hooked 9 would be the half-turn of 6.
      {'9', {0x0E, 0x11, 0x11, 0x0F, 0x01, 0x01, 0x01}},
      {'a', {0x0E, 0x11, 0x11, 0x11, 0x1F, 0x11, 0x11}},
      {'b', {0x1E, 0x11, 0x11, 0x1E, 0x11, 0x11, 0x1E}},
      {'c', {0x0E, 0x11, 0x10, 0x10, 0x10, 0x11, 0x0E}},
      {'d', {0x1C, 0x12, 0x11, 0x11, 0x11, 0x12, 0x1C}},
      {'e', {0x1F, 0x10, 0x10, 0x1E, 0x10, 0x10, 0x1F}},
      {'f', {0x1F, 0x10, 0x10, 0x1E, 0x10, 0x10, 0x10}},
      {'g', {0x0E, 0x11, 0x10, 0x17, 0x11, 0x11, 0x0F}},
      {'h', {0x11, 0x11, 0x11, 0x1F, 0x11, 0x11, 0x11}},
      {'i', {0x0E, 0x04, 0x04, 0x04, 0x04, 0x04, 0x0E}},
      {'j', {0x07, 0x02, 0x02, 0x02, 0x02, 0x12, 0x0C}},
      {'k', {0x11, 0x12, 0x14, 0x18, 0x14, 0x12, 0x11}},
      {'l', {0x10, 0x10, 0x10, 0x10, 0x10, 0x10, 0x1F}},
      {'m', {0x11, 0x1B, 0x15, 0x15, 0x11, 0x11, 0x11}},
      {'n', {0x11, 0x11, 0x19, 0x15, 0x13, 0x11, 0x11}},
      {'o', {0x0E, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0E}},
      {'p', {0x1E, 0x11, 0x11, 0x1E, 0x10, 0x10, 0x10}},
      {'q', {0x0E, 0x11, 0x11, 0x11, 0x15, 0x12, 0x0D}},
      {'r', {0x1E, 0x11, 0x11, 0x1E, 0x14, 0x12, 0x11}},
      {'s', {0x0F, 0x10, 0x10, 0x0E, 0x01, 0x01, 0x1E}},
      {'t', {0x1F, 0x04, 0x04, 0x04, 0x04, 0x04, 0x04}},
      {'u', {0x11, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0E}},
      {'v', {0x11, 0x11, 0x11, 0x11, 0x11, 0x0A, 0x04}},
      {'w', {0x11, 0x11, 0x11, 0x15, 0x15, 0x15, 0x0A}},
      {'x', {0x11, 0x11, 0x0A, 0x04, 0x0A, 0x11, 0x11}},
      {'y', {0x11, 0x11, 0x11, 0x0A, 0x04, 0x04, 0x04}},
      {'z', {0x1F, 0x01, 0x02, 0x04, 0x08, 0x10, 0x1F}},
  };
  return f;
}

// cos and sin of an angle in degrees, exact at multiples of 90.
std::pair<double, double> cos_sin(double degrees) {
  double a = std::fmod(degrees, 360.0);
  if (a < 0) a += 360.0;
  if (a == 0) return {1, 0};
  if (a == 90) return {0, 1};
  if (a == 180) return {-1, 0};
  if (a == 270) return {0, -1};
  const double r = a * kPi / 180.0;
  return {std::cos(r), std::sin(r)};
}

// Text layout before rotation. Text frame: u along the line, w downward,
// origin at the center of the unbent text box.
class Geometry {
 public:
  Geometry(const SampleSpec& spec, const std::vector<std::pair<double, double>>& offsets,
           double scale)
      : spec_(spec), offsets_(offsets), s_(scale) {
    n_ = static_cast<int>(spec.text.size());
    width_ = (6.0 * n_ - 1.0) * s_;
    height_ = GlyphAtlas::kRows * s_;
    radius_ = spec.layout == Layout::kArc && spec.arc_curvature != 0
                  ? 1.0 / std::abs(spec.arc_curvature)
                  : 0.0;
    for (char ch : spec.text) glyphs_.push_back(&GlyphAtlas::glyph(ch));
    // Center the bent, sheared text on the canvas.
    double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
    for (auto [x, y] : outline()) {
      x0 = std::min(x0, x), x1 = std::max(x1, x);
      y0 = std::min(y0, y), y1 = std::max(y1, y);
    }
    cx_ = 0.5 * (x0 + x1);
    cy_ = 0.5 * (y0 + y1);
  }

  // Points on every glyph cell boundary, pre-rotation, centered.
  std::vector<std::pair<double, double>> outline() const {
    std::vector<std::pair<double, double>> pts;
    for (int k = 0; k < n_; ++k) {
      const double left = cell_left(k), top = cell_top(k);
      const double w = GlyphAtlas::kCols * s_, h = height_;
      for (int i = 0; i <= 8; ++i) {
        const double f = i / 8.0;
        pts.push_back(forward(left + f * w, top));
        pts.push_back(forward(left + f * w, top + h));
        pts.push_back(forward(left, top + f * h));
        pts.push_back(forward(left + w, top + f * h));
      }
    }
    return pts;
  }

  bool bends_too_far() const {
    return radius_ > 0 && (0.5 * width_ + s_ + 1.0) / radius_ > 0.9 * kPi;
  }

  // Text frame -> centered pre-rotation plane.
  std::pair<double, double> forward(double u, double w) const {
    const double sx = u - spec_.shear * w, sy = w;
    double x = sx, y = sy;
    if (radius_ > 0) {
      const double phi = sx / radius_;
      if (spec_.arc_curvature > 0) {
        const double rho = radius_ + sy;
        x = rho * std::sin(phi);
        y = -radius_ + rho * std::cos(phi);
      } else {
        const double rho = radius_ - sy;
        x = rho * std::sin(phi);
        y = radius_ - rho * std::cos(phi);
      }
    }
    return {x - cx_, y - cy_};
  }

  // True when the pre-rotation point lies on a glyph dot.
  bool covered(double x, double y) const {
    x += cx_;
    y += cy_;
    double sx = x, sy = y;
    if (radius_ > 0) {
      if (spec_.arc_curvature > 0) {
        const double dy = y + radius_;
        sx = radius_ * std::atan2(x, dy);
        sy = std::hypot(x, dy) - radius_;
      } else {
        const double dy = radius_ - y;
        sx = radius_ * std::atan2(x, dy);
        sy = radius_ - std::hypot(x, dy);
      }
    }
    const double w = sy, u = sx + spec_.shear * sy;
    for (int k = 0; k < n_; ++k) {
      const double cu = (u - cell_left(k)) / s_, cw = (w - cell_top(k)) / s_;
      if (cu < 0 || cw < 0 || cu >= GlyphAtlas::kCols || cw >= GlyphAtlas::kRows) continue;
      if (GlyphAtlas::dot(*glyphs_[static_cast<std::size_t>(k)], static_cast<int>(cu),
                          static_cast<int>(cw))) {
        return true;
      }
    }
    return false;
  }

 private:
  double cell_left(int k) const {
    return -0.5 * width_ + 6.0 * k * s_ + offsets_[static_cast<std::size_t>(k)].first;
  }
  double cell_top(int k) const {
    return -0.5 * height_ + offsets_[static_cast<std::size_t>(k)].second;
  }

  const SampleSpec& spec_;
  const std::vector<std::pair<double, double>>& offsets_;
  double s_;
  int n_ = 0;
  double width_ = 0, height_ = 0, radius_ = 0, cx_ = 0, cy_ = 0;
  std::vector<const GlyphAtlas::Bitmap*> glyphs_;
};

bool fits(const Geometry& g, double c, double s, double half) {
  if (g.bends_too_far()) return false;
  for (auto [x, y] : g.outline()) {
    // Canvas offset of a pre-rotation point.
    const double qx = c * x + s * y, qy = -s * x + c * y;
    if (std::abs(qx) > half || std::abs(qy) > half) return false;
  }
  return true;
}

std::string format_double(double v) {
  std::ostringstream out;
  out << std::setprecision(10) << v;
  return out.str();
}

std::string join_ints(const std::vector<Index>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + std::to_string(v[i]);
  return out;
}

}  // namespace

bool GlyphAtlas::has(char symbol) { return font().count(symbol) > 0; }

const GlyphAtlas::Bitmap& GlyphAtlas::glyph(char symbol) {
  auto it = font().find(symbol);
  if (it == font().end()) {
    throw ContractError(std::string("glyph atlas: no glyph for `") + symbol + "`");
  }
  return it->second;
}

const std::string& GlyphAtlas::symbols() {
  static const std::string s = [] {
    std::string out;
    for (const auto& [ch, bitmap] : font()) out.push_back(ch);
    return out;
  }();
  return s;
}

std::string layout_name(Layout layout) { return layout == Layout::kArc ? "arc" : "line"; }

Layout parse_layout(const std::string& name) {
  if (name == "line") return Layout::kLine;
  if (name == "arc") return Layout::kArc;
  throw FormatError("unknown layout `" + name + "` (expected line or arc)");
}

RenderedSample render_sample(const SampleSpec& spec) {
  if (spec.text.empty()) throw ContractError("render_sample: empty text");
  if (spec.canvas < 4) throw ContractError("render_sample: canvas must be at least 4 pixels");
  if (!(spec.scale > 0) || !(spec.min_scale > 0)) {
    throw ContractError("render_sample: scales must be positive");
  }
  for (char ch : spec.text) GlyphAtlas::glyph(ch);

  Rng rng(spec.seed);
  std::uniform_real_distribution<double> offset(-spec.jitter, spec.jitter);
  std::vector<std::pair<double, double>> offsets(spec.text.size());
  for (auto& o : offsets) {
    o.first = spec.jitter > 0 ? offset(rng) : 0.0;
    o.second = spec.jitter > 0 ? offset(rng) : 0.0;
  }

  const auto [c, s] = cos_sin(spec.angle);
  const double half = 0.5 * static_cast<double>(spec.canvas) - 1.0;
  double scale = std::max(spec.scale, spec.min_scale);
  while (!fits(Geometry(spec, offsets, scale), c, s, half)) {
    if (scale <= spec.min_scale) {
      throw GenerationError("render_sample: `" + spec.text + "` does not fit a " +
                            std::to_string(spec.canvas) + " pixel canvas at scale " +
                            format_double(spec.min_scale));
    }
    scale = std::max(spec.min_scale, scale * 0.9);
  }
  const Geometry geom(spec, offsets, scale);

  RenderedSample out;
  out.label = spec.text;
  out.scale_used = scale;
  out.clean = Image(spec.canvas, spec.canvas);
  constexpr int kSub = 4;
  const double center = 0.5 * static_cast<double>(spec.canvas);
  for (Index py = 0; py < spec.canvas; ++py) {
    for (Index px = 0; px < spec.canvas; ++px) {
      int hits = 0;
      for (int sy = 0; sy < kSub; ++sy) {
        for (int sx = 0; sx < kSub; ++sx) {
          const double qx = (static_cast<double>(px) + (sx + 0.5) / kSub) - center;
          const double qy = (static_cast<double>(py) + (sy + 0.5) / kSub) - center;
          hits += geom.covered(qx * c - qy * s, qx * s + qy * c);
        }
      }
      out.clean.at(px, py) = static_cast<float>(hits) / (kSub * kSub);
    }
  }
  out.image = out.clean;
  if (spec.noise_std > 0) {
    std::normal_distribution<double> noise(0.0, spec.noise_std);
    for (float& v : out.image.pixels) {
      v = static_cast<float>(std::clamp(static_cast<double>(v) + noise(rng), 0.0, 1.0));
    }
  }
  return out;
}

Image rotate_augment(const Image& image, double angle) {
  if (image.width != image.height) throw DimensionError("rotate_augment: image must be square");
  double a = std::fmod(angle, 360.0);
  if (a < 0) a += 360.0;
  if (a == 0 || a == 90 || a == 180 || a == 270) {
    return rotate_quarter(image, static_cast<int>(a / 90));
  }
  const auto [c, s] = cos_sin(a);
  const Index n = image.width;
  const double mid = 0.5 * static_cast<double>(n - 1);
  Image out(n, n);
  auto sample = [&](Index x, Index y) -> double {
    return x < 0 || y < 0 || x >= n || y >= n ? 0.0 : image.at(x, y);
  };
  for (Index y = 0; y < n; ++y) {
    for (Index x = 0; x < n; ++x) {
      const double dx = static_cast<double>(x) - mid, dy = static_cast<double>(y) - mid;
      const double sx = dx * c - dy * s + mid, sy = dx * s + dy * c + mid;
      const double fx = std::floor(sx), fy = std::floor(sy);
      const Index x0 = static_cast<Index>(fx), y0 = static_cast<Index>(fy);
      const double wx = sx - fx, wy = sy - fy;
      const double v = (sample(x0, y0) * (1 - wx) + sample(x0 + 1, y0) * wx) * (1 - wy) +
                       (sample(x0, y0 + 1) * (1 - wx) + sample(x0 + 1, y0 + 1) * wx) * wy;
      out.at(x, y) = static_cast<float>(std::clamp(v, 0.0, 1.0));
    }
  }
  return out;
}

const std::set<std::string>& GenConfig::keys() {
  static const std::set<std::string> k = {
      "image_size", "symbols",   "min_chars",     "max_chars",  "train_count", "test_count",
      "angles",     "angle_jitter", "arc_fraction", "max_curvature", "max_shear",
      "scale_min",  "scale_max", "min_scale",     "noise_std",  "glyph_jitter", "gen_seed"};
  return k;
}

GenConfig GenConfig::from_key_values(const KeyValues& kv) {
  GenConfig c;
  c.image_size = kv.get_int("image_size", c.image_size);
  c.symbols = kv.get_string("symbols", c.symbols);
  c.min_chars = kv.get_int("min_chars", c.min_chars);
  c.max_chars = kv.get_int("max_chars", c.max_chars);
  c.train_count = kv.get_int("train_count", c.train_count);
  c.test_count = kv.get_int("test_count", c.test_count);
  if (kv.get_string("angles", "") == "uniform") {
    c.angles.clear();
  } else {
    c.angles = kv.get_ints("angles", c.angles);
  }
  c.angle_jitter = kv.get_double("angle_jitter", c.angle_jitter);
  c.arc_fraction = kv.get_double("arc_fraction", c.arc_fraction);
  c.max_curvature = kv.get_double("max_curvature", c.max_curvature);
  c.max_shear = kv.get_double("max_shear", c.max_shear);
  c.scale_min = kv.get_double("scale_min", c.scale_min);
  c.scale_max = kv.get_double("scale_max", c.scale_max);
  c.min_scale = kv.get_double("min_scale", c.min_scale);
  c.noise_std = kv.get_double("noise_std", c.noise_std);
  c.glyph_jitter = kv.get_double("glyph_jitter", c.glyph_jitter);
  c.seed = static_cast<std::uint64_t>(kv.get_int("gen_seed", static_cast<std::int64_t>(c.seed)));
  c.validate();
  return c;
}

std::string GenConfig::to_text() const {
  std::ostringstream out;
  out << "image_size = " << image_size << "\n"
      << "symbols = " << symbols << "\n"
      << "min_chars = " << min_chars << "\n"
      << "max_chars = " << max_chars << "\n"
      << "train_count = " << train_count << "\n"
      << "test_count = " << test_count << "\n"
      << "angles = " << (angles.empty() ? "uniform" : join_ints(angles)) << "\n"
      << "angle_jitter = " << format_double(angle_jitter) << "\n"
      << "arc_fraction = " << format_double(arc_fraction) << "\n"
      << "max_curvature = " << format_double(max_curvature) << "\n"
      << "max_shear = " << format_double(max_shear) << "\n"
      << "scale_min = " << format_double(scale_min) << "\n"
      << "scale_max = " << format_double(scale_max) << "\n"
      << "min_scale = " << format_double(min_scale) << "\n"
      << "noise_std = " << format_double(noise_std) << "\n"
      << "glyph_jitter = " << format_double(glyph_jitter) << "\n"
      << "gen_seed = " << seed << "\n";
  return out.str();
}

void GenConfig::validate() const {
  if (image_size < 8) throw ConfigError("image_size must be at least 8");
  if (symbols.empty()) throw ConfigError("symbols must not be empty");
  for (char ch : symbols) {
    if (!GlyphAtlas::has(ch)) {
      throw ConfigError(std::string("symbol `") + ch + "` has no glyph (use a-z, 0-9)");
    }
  }
  if (min_chars < 1 || max_chars < min_chars) {
    throw ConfigError("need 1 <= min_chars <= max_chars");
  }
  if (train_count < 0 || test_count < 0) throw ConfigError("sample counts must be >= 0");
  if (angle_jitter < 0 || max_curvature < 0 || max_shear < 0 || noise_std < 0 ||
      glyph_jitter < 0) {
    throw ConfigError("jitter, curvature, shear and noise must be >= 0");
  }
  if (arc_fraction < 0 || arc_fraction > 1) throw ConfigError("arc_fraction must be in [0,1]");
  if (!(min_scale > 0) || scale_min < min_scale || scale_max < scale_min) {
    throw ConfigError("need 0 < min_scale <= scale_min <= scale_max");
  }
}

SampleSpec sample_spec(const GenConfig& config, Index index, std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };
  SampleSpec spec;
  const Index bins = config.angles.empty() ? 1 : static_cast<Index>(config.angles.size());
  if (config.angles.empty()) {
    spec.angle = uniform(0, 360);
  } else {
    const double base = static_cast<double>(config.angles[static_cast<std::size_t>(index % bins)]);
    spec.angle = base + uniform(-config.angle_jitter, config.angle_jitter);
    spec.angle = std::fmod(spec.angle, 360.0);
    if (spec.angle < 0) spec.angle += 360.0;
  }
  const Index lengths = config.max_chars - config.min_chars + 1;
  const Index len = config.min_chars + (index / bins) % lengths;
  const auto nsym = static_cast<std::uint64_t>(config.symbols.size());
  for (Index i = 0; i < len; ++i) {
    spec.text.push_back(config.symbols[static_cast<std::size_t>(rng() % nsym)]);
  }
  if (unit(rng) < config.arc_fraction) {
    spec.layout = Layout::kArc;
    spec.arc_curvature = uniform(-config.max_curvature, config.max_curvature);
  }
  spec.shear = uniform(-config.max_shear, config.max_shear);
  spec.scale = uniform(config.scale_min, config.scale_max);
  spec.min_scale = config.min_scale;
  spec.noise_std = config.noise_std;
  spec.jitter = config.glyph_jitter;
  spec.canvas = config.image_size;
  spec.seed = derive_seed(seed, 1);
  return spec;
}

std::string Manifest::resolve(const ManifestRecord& record) const {
  return (fs::path(file).parent_path() / record.path).string();
}

Manifest read_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read manifest " + path);
  Manifest m;
  m.file = path;
  m.split = fs::path(path).stem().string();
  std::string line;
  if (!std::getline(in, line) || line != "path\tlabel\tangle\tlayout\tseed") {
    throw FormatError(path + ": missing header `path\\tlabel\\tangle\\tlayout\\tseed`");
  }
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string item;
    while (std::getline(ss, item, '\t')) f.push_back(item);
    const std::string where = path + ":" + std::to_string(lineno);
    if (f.size() != 5) throw FormatError(where + ": expected 5 tab-separated fields");
    ManifestRecord r;
    r.path = f[0];
    r.label = f[1];
    try {
      std::size_t used = 0;
      r.angle = std::stod(f[2], &used);
      if (used != f[2].size()) throw std::invalid_argument("angle");
      r.seed = std::stoull(f[4], &used);
      if (used != f[4].size()) throw std::invalid_argument("seed");
    } catch (const std::exception&) {
      throw FormatError(where + ": bad angle or seed");
    }
    r.layout = parse_layout(f[3]);
    if (r.path.empty() || r.label.empty()) throw FormatError(where + ": empty path or label");
    m.records.push_back(std::move(r));
  }
  return m;
}

void write_manifest(const std::string& path, const std::vector<ManifestRecord>& records) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write manifest " + path);
  out << "path\tlabel\tangle\tlayout\tseed\n";
  char angle[32];
  for (const auto& r : records) {
    std::snprintf(angle, sizeof(angle), "%.4f", r.angle);
    out << r.path << '\t' << r.label << '\t' << angle << '\t' << layout_name(r.layout) << '\t'
        << r.seed << '\n';
  }
  if (!out) throw IoError("write failed for " + path);
}

GeneratedDataset generate_dataset(const GenConfig& config, const std::string& out_dir) {
  config.validate();
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir + ": " + ec.message());
  {
    std::ofstream cfg(fs::path(out_dir) / "gen.cfg");
    if (!cfg) throw IoError("cannot write " + (fs::path(out_dir) / "gen.cfg").string());
    cfg << config.to_text();
  }
  GeneratedDataset result;
  const std::pair<const char*, Index> splits[] = {{"train", config.train_count},
                                                  {"test", config.test_count}};
  std::uint64_t stream = 0;
  for (const auto& [name, count] : splits) {
    const fs::path dir = fs::path(out_dir) / name;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
    std::vector<ManifestRecord> records(static_cast<std::size_t>(count));
    std::exception_ptr error;
#pragma omp parallel for schedule(dynamic, 16)
    for (Index i = 0; i < count; ++i) {
      try {
        const std::uint64_t seed = derive_seed(config.seed, stream + static_cast<std::uint64_t>(i));
        const SampleSpec spec = sample_spec(config, i, seed);
        const RenderedSample sample = render_sample(spec);
        char file[32];
        std::snprintf(file, sizeof(file), "%06lld.pgm", static_cast<long long>(i));
        write_pgm((dir / file).string(), sample.image);
        auto& r = records[static_cast<std::size_t>(i)];
        r.path = std::string(name) + "/" + file;
        r.label = sample.label;
        r.angle = spec.angle;
        r.layout = spec.layout;
        r.seed = seed;
      } catch (...) {
#pragma omp critical(aon_generate_error)
        if (!error) error = std::current_exception();
      }
    }
    if (error) std::rethrow_exception(error);
    const std::string manifest = (fs::path(out_dir) / (std::string(name) + ".tsv")).string();
    write_manifest(manifest, records);
    (name == std::string("train") ? result.train : result.test) = read_manifest(manifest);
    stream += std::uint64_t{1} << 40;
  }
  return result;
}

}  // namespace aon
