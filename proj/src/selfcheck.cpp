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

#include "aon/selfcheck.h"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <random>

#include "aon/checkpoint.h"
#include "aon/filter_gate.h"
#include "aon/image.h"
#include "aon/model.h"
#include "aon/synth.h"

namespace aon {

namespace {

std::string fmt(const char* pattern, double a, double b = 0, double c = 0) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), pattern, a, b, c);
  return buf;
}

template <typename T>
Tensor<T> noise_images(Index n, Index size, Rng& rng) {
  Tensor<T> t(Shape{n, 1, size, size});
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (T& v : t.data()) v = static_cast<T>(unit(rng));
  return t;
}

template <typename T>
Tensor<T> normal_tensor(Shape shape, double scale, Rng& rng) {
  Tensor<T> t(std::move(shape));
  std::normal_distribution<double> dist(0.0, scale);
  for (T& v : t.data()) v = static_cast<T>(dist(rng));
  return t;
}

template <typename T>
bool same_bits(const Tensor<T>& a, const Tensor<T>& b) {
  if (a.shape() != b.shape()) return false;
  for (Index i = 0; i < a.size(); ++i) {
    if (std::memcmp(&a.ptr()[i], &b.ptr()[i], sizeof(T)) != 0) return false;
  }
  return true;
}

}  // namespace

GradCheckReport model_grad_check(const ModelConfig& config, std::uint64_t seed,
                                 const GradCheckOptions& options) {
  AonModel<double> model(config, seed);
  Rng rng(derive_seed(seed, 100));
  // The clue head starts at zero, which would zero every clue-network
  // gradient; a small random head makes those tensors checkable.
  if (config.encoder.mode == EncodeMode::kAon) {
    auto& w = model.params().at("cn.fc2.weight");
    const Tensor<double> r = normal_tensor<double>(w.shape(), 0.5, rng);
    std::copy(r.data().begin(), r.data().end(), w.data().begin());
  }
  const Tensor<double> images = noise_images<double>(2, config.encoder.input_size, rng);
  const std::string& s = config.decoder.symbols;
  const std::vector<std::string> labels = {{s[0], s[1 % s.size()]}, {s[2 % s.size()]}};
  return grad_check([&] { return model.loss(images, labels); }, model.params(), options);
}

GradCheckReport mini_grad_check(std::uint64_t seed, const GradCheckOptions& options) {
  return model_grad_check(ModelConfig::preset("mini"), seed, options);
}

CheckLine check_gradients(double threshold, double time_limit_s, std::uint64_t seed) {
  const auto start = std::chrono::steady_clock::now();
  const GradCheckReport report = mini_grad_check(seed);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const AonModel<double> sizes(ModelConfig::preset("mini"), seed);
  Index coords = 0;
  bool covered = report.per_tensor.size() == sizes.params().size();
  for (const auto& e : report.per_tensor) {
    coords += e.checked;
    covered &= e.checked >= std::min<Index>(64, sizes.params().at(e.name).size());
  }
  CheckLine line{"gradient check (mini, float64)", false, ""};
  line.pass = report.max_rel_err < threshold && seconds < time_limit_s && covered;
  line.detail = fmt("max rel err %.3g over %.0f coords in %.0f tensors", report.max_rel_err,
                    static_cast<double>(coords), static_cast<double>(report.per_tensor.size())) +
                (covered ? ", min(64, size) per tensor" : ", COVERAGE SHORT") +
                fmt(", %.1fs", seconds);
  return line;
}

CheckLine check_clue_normalization(int inputs, int inits) {
  double worst = 0;
  for (int init = 0; init < inits; ++init) {
    AonModel<float> model(ModelConfig::preset("toy"), static_cast<std::uint64_t>(init + 1));
    Rng rng(derive_seed(static_cast<std::uint64_t>(init), 200));
    // Random final layer so the clues are far from uniform.
    auto& w = model.params().at("cn.fc2.weight");
    const Tensor<float> rw = normal_tensor<float>(w.shape(), 1.0, rng);
    std::copy(rw.data().begin(), rw.data().end(), w.data().begin());
    model.set_training(false);
    NoGradScope<float> no_grad;
    const Tensor<float> images = noise_images<float>(inputs, 32, rng);
    const Tensor<float> c = model.encoder().cn(model.encoder().bcnn(images, BnMode::kEval),
                                               BnMode::kEval);
    for (Index r = 0; r < c.size() / 4; ++r) {
      double s = 0;
      for (Index k = 0; k < 4; ++k) s += c[r * 4 + k];
      worst = std::max(worst, std::abs(s - 1.0));
    }
  }
  return {"clue rows sum to 1", worst <= 1e-5,
          fmt("max |sum - 1| = %.3g over %.0f inputs x %.0f inits", worst, inputs, inits)};
}

CheckLine check_direction_identities(std::uint64_t seed) {
  AonModel<float> model(ModelConfig::preset("toy"), seed);
  model.set_training(false);
  Rng rng(derive_seed(seed, 300));
  NoGradScope<float> no_grad;
  const Tensor<float> fmaps = model.encoder().bcnn(noise_images<float>(3, 32, rng), BnMode::kEval);
  const auto [fwd_h, rev_h] = model.encoder().hn(fmaps, BnMode::kEval);
  const auto [fwd_v, rev_v] = model.encoder().vn(fmaps, BnMode::kEval);
  const auto [rot_fwd, rot_rev] = model.encoder().hn(rot90(fmaps), BnMode::kEval);
  auto reversed = [](const Tensor<float>& fwd, const Tensor<float>& rev) {
    const Index len = fwd.dim(0), row = fwd.size() / len;
    bool ok = rev.shape() == fwd.shape();
    for (Index j = 0; ok && j < len; ++j) {
      ok = std::memcmp(rev.ptr() + j * row, fwd.ptr() + (len - 1 - j) * row,
                       sizeof(float) * static_cast<std::size_t>(row)) == 0;
    }
    return ok;
  };
  const bool reversal = reversed(fwd_h, rev_h) && reversed(fwd_v, rev_v);
  const bool vn_ok = same_bits(fwd_v, rot_fwd) && same_bits(rev_v, rot_rev);
  const bool rot_ok = same_bits(rot90(rot90(rot90(rot90(fmaps)))), fmaps);
  return {"direction identities", reversal && vn_ok && rot_ok,
          std::string("H and V reversal ") + (reversal ? "ok" : "FAIL") + ", VN == HN(rot90) " +
              (vn_ok ? "ok" : "FAIL") + ", rot90^4 == id " + (rot_ok ? "ok" : "FAIL")};
}

CheckLine check_filter_gate(int cases) {
  Rng rng(400);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::gamma_distribution<double> gamma(1.0, 1.0);
  bool bounded = true, exact = true, convex = true;
  double slack = 0;
  Index saturated = 0;
  const Shape shape{3, 2, 5};
  for (int t = 0; t < cases; ++t) {
    const double scale = t % 10 == 0 ? 50.0 : 2.0;
    FourDirectionFeatures<double> f{normal_tensor<double>(shape, scale, rng),
                                    normal_tensor<double>(shape, scale, rng),
                                    normal_tensor<double>(shape, scale, rng),
                                    normal_tensor<double>(shape, scale, rng)};
    Tensor<double> c(Shape{3, 2, 4});
    for (Index r = 0; r < 6; ++r) {
      double w[4], s = 0;
      for (double& v : w) s += (v = gamma(rng));
      for (int k = 0; k < 4; ++k) c[r * 4 + k] = w[k] / s;
    }
    const Tensor<double> y = fuse(f, c);
    const Tensor<double>* dirs[4] = {&f.fwd_h, &f.rev_h, &f.fwd_v, &f.rev_v};
    for (Index i = 0; i < y.size(); ++i) {
      bounded &= y[i] > -1.0 && y[i] < 1.0;
      if (scale > 2.0) continue;  // saturated outputs lose the atanh inverse
      double lo = 1e300, hi = -1e300;
      for (const auto* d : dirs) lo = std::min(lo, (*d)[i]), hi = std::max(hi, (*d)[i]);
      const double z = std::atanh(y[i]);
      slack = std::max(slack, std::max(lo - z, z - hi));
      convex &= z >= lo - 1e-9 && z <= hi + 1e-9;
    }
    // One-hot clues in float reproduce tanh of the selected direction.
    FourDirectionFeatures<float> g{normal_tensor<float>(shape, 2.0, rng),
                                   normal_tensor<float>(shape, 2.0, rng),
                                   normal_tensor<float>(shape, 2.0, rng),
                                   normal_tensor<float>(shape, 2.0, rng)};
    const int k = t % 4;
    Tensor<float> onehot(Shape{3, 2, 4});
    for (Index r = 0; r < 6; ++r) onehot[r * 4 + k] = 1.0f;
    const Tensor<float> yf = fuse(g, onehot);
    const Tensor<float>* gd[4] = {&g.fwd_h, &g.rev_h, &g.fwd_v, &g.rev_v};
    for (Index i = 0; i < yf.size(); ++i) {
      const float want = std::tanh((*gd[k])[i]);
      if (yf[i] == want) continue;
      // Where tanh rounds to +-1 the open range wins, one ulp inside.
      ++saturated;
      exact &= std::abs(want) == 1.0f && yf[i] == std::nextafter(want, 0.0f);
    }
  }
  return {"filter gate", bounded && exact && convex,
          std::string("bounds ") + (bounded ? "ok" : "FAIL") + ", one-hot tanh " +
              (exact ? "exact" : "FAIL") +
              fmt(" (%.0f saturated values one ulp inside +-1)", static_cast<double>(saturated)) +
              ", convexity " + (convex ? "ok" : "FAIL") +
              fmt(" (%.0f cases, worst slack %.2g)", cases, slack)};
}

CheckLine check_decoder_normalization(int samples) {
  AonModel<float> model(ModelConfig::preset("toy"), 5);
  model.set_training(false);
  Rng rng(500);
  const Tensor<float> images = noise_images<float>(samples, 32, rng);
  const auto decoded = model.greedy(images);
  double worst_alpha = 0, worst_y = 0;
  std::size_t longest = 0, truncated = 0;
  for (const auto& d : decoded) {
    longest = std::max(longest, d.trace.size());
    truncated += d.trace.truncated;
    for (const auto& a : d.trace.alphas) {
      double s = 0;
      for (double v : a) s += v;
      worst_alpha = std::max(worst_alpha, std::abs(s - 1));
    }
    for (const auto& y : d.trace.dists) {
      double s = 0;
      for (double v : y) s += v;
      worst_y = std::max(worst_y, std::abs(s - 1));
    }
  }
  const auto max_len = static_cast<std::size_t>(model.config().decoder.max_len);
  const bool ok = worst_alpha <= 1e-6 && worst_y <= 1e-6 && longest <= max_len;
  return {"attention and output normalization", ok,
          fmt("max |sum alpha - 1| = %.3g, max |sum y - 1| = %.3g", worst_alpha, worst_y) +
              fmt(", longest decode %.0f of max %.0f, %.0f truncated",
                  static_cast<double>(longest), static_cast<double>(max_len),
                  static_cast<double>(truncated))};
}

CheckLine check_checkpoint_round_trip(std::uint64_t seed) {
  AonModel<float> model(ModelConfig::preset("mini"), seed);
  Rng rng(derive_seed(seed, 600));
  for (auto& [name, t] : model.buffers()) {
    const Tensor<float> r = normal_tensor<float>(t.shape(), 0.1, rng);
    for (Index i = 0; i < t.size(); ++i) t[i] += std::abs(r[i]);
  }
  const std::string first = serialize_checkpoint(model, 7, nullptr);
  const CheckpointData data = parse_checkpoint(first, "memory");
  AonModel<float> loaded(data.config, seed + 1);
  restore_checkpoint(data, loaded);
  const std::string second = serialize_checkpoint(loaded, data.step, nullptr);
  model.set_training(false);
  loaded.set_training(false);
  const Tensor<float> images = noise_images<float>(4, 16, rng);
  const std::vector<std::string> labels = {"a", "bc", "cab", "b"};
  NoGradScope<float> no_grad;
  const bool forward = same_bits(model.loss(images, labels), loaded.loss(images, labels)) &&
                       same_bits(model.encode(images).sequence, loaded.encode(images).sequence);
  const bool bytes = first == second;
  return {"checkpoint round trip", forward && bytes,
          std::string("load -> forward ") + (forward ? "bitwise equal" : "DIFFERS") +
              ", save -> load -> save " + (bytes ? "byte-identical" : "DIFFERS") +
              fmt(" (%.0f bytes)", static_cast<double>(first.size()))};
}

CheckLine check_rotation_group() {
  Rng rng(700);
  Image img(17, 17);
  std::uniform_real_distribution<float> unit(0.0f, 1.0f);
  for (float& v : img.pixels) v = unit(rng);
  bool ok = true;
  for (int a = 0; a < 4; ++a) {
    for (int b = 0; b < 4; ++b) {
      ok &= rotate_augment(rotate_augment(img, 90.0 * a), 90.0 * b) == rotate_quarter(img, a + b);
    }
  }
  ok &= rotate_augment(img, 360) == img;
  return {"rotation group", ok, ok ? "rotate_augment(90k) composes exactly" : "FAIL"};
}

std::vector<CheckLine> run_selftest() {
  return {check_gradients(),          check_clue_normalization(20, 3),
          check_direction_identities(), check_filter_gate(200),
          check_decoder_normalization(20), check_checkpoint_round_trip(),
          check_rotation_group()};
}

}  // namespace aon
