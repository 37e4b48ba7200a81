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

// Acceptance run: one PASS/FAIL line per criterion. Trained models are cached
// under --work and reused when their configuration matches.
#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iomanip>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <set>

#include "aon/checkpoint.h"
#include "aon/selfcheck.h"
#include "aon/synth.h"
#include "aon/trainer.h"
#include "aon/trend.h"

namespace fs = std::filesystem;
using namespace aon;

namespace {

struct Options {
  std::string work = "acceptance_work";
  Index epochs = 200;
  int seeds = 3;
  double minutes_per_run = 60;
  std::vector<int> known_failures;
};

template <typename... Args>
std::string format(const char* pattern, Args... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), pattern, args...);
  return buf;
}

void report(int id, const CheckLine& line) {
  std::cout << "criterion " << std::setw(2) << id << " " << (line.pass ? "PASS" : "FAIL") << "  "
            << line.name << ": " << line.detail << std::endl;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), {}};
}

// The experiment: 1-4 digits at 32x32, four orientations with +/-30 degree
// jitter, 5000 train and 500 test images.
GenConfig experiment_data() {
  GenConfig g;
  g.image_size = 32;
  g.symbols = "0123456789";
  g.min_chars = 1;
  g.max_chars = 4;
  g.train_count = 5000;
  g.test_count = 500;
  g.angles = {0, 90, 180, 270};
  g.angle_jitter = 30;
  g.seed = 1;
  return g;
}

ModelConfig experiment_model(EncodeMode mode) {
  ModelConfig c = ModelConfig::preset("toy");
  c.encoder.mode = mode;
  c.decoder.symbols = "0123456789";
  return c;
}

TrainConfig experiment_training(const Options& opt, std::uint64_t seed) {
  TrainConfig t;
  t.epochs = opt.epochs;
  t.batch_size = 32;
  t.seed = seed;
  t.time_limit_minutes = opt.minutes_per_run;
  t.augment_rotation = true;
  return t;
}

struct Run {
  EncodeMode mode;
  std::uint64_t seed;
  std::unique_ptr<AonModel<float>> model;
  double accuracy = 0;
  double minutes = 0;
  bool cached = false;
  bool timed_out = false;
};

Run train_or_load(const Options& opt, EncodeMode mode, std::uint64_t seed, const Dataset& train_set,
                  const Dataset& test_set) {
  Run run{mode, seed, nullptr};
  const ModelConfig mc = experiment_model(mode);
  TrainConfig tc = experiment_training(opt, seed);
  const fs::path ckpt = fs::path(opt.work) / format("%s_s%llu_e%lld.aon", mode_name(mode).c_str(),
                                                   static_cast<unsigned long long>(seed),
                                                   static_cast<long long>(opt.epochs));
  const fs::path meta = fs::path(ckpt).replace_extension(".done");
  if (fs::exists(ckpt) && fs::exists(meta)) {
    const CheckpointData data = read_checkpoint(ckpt.string());
    const std::string expected = mc.to_text();
    if (data.config.to_text() == expected) {
      run.model = std::make_unique<AonModel<float>>(mc, seed);
      restore_checkpoint(data, *run.model);
      std::istringstream(slurp(meta)) >> run.minutes >> run.timed_out;
      run.cached = true;
    }
  }
  if (!run.model) {
    run.model = std::make_unique<AonModel<float>>(mc, seed);
    tc.checkpoint = ckpt.string();
    std::cerr << "training " << mode_name(mode) << " seed " << seed << " for " << tc.epochs
              << " epochs" << std::endl;
    const TrainResult r = train(*run.model, tc, train_set);
    if (r.diverged) throw NumericError(mode_name(mode) + ": " + r.message);
    run.minutes = r.seconds / 60.0;
    run.timed_out = r.timed_out;
    std::ofstream(meta) << run.minutes << " " << run.timed_out << "\n";
  }
  run.model->set_training(false);
  run.accuracy = evaluate(*run.model, test_set).accuracy;
  std::cerr << mode_name(mode) << " seed " << seed << " accuracy " << run.accuracy
            << format(" (%.1f min%s)", run.minutes, run.cached ? ", cached" : "") << std::endl;
  return run;
}

Tensor<float> single(const Dataset& data, std::size_t i) {
  return data.gather({i}).images;
}

// Criterion 6: lexicon decoding against scoring each word on its own.
CheckLine lexicon_vs_bruteforce(AonModel<float>& model, const Dataset& test, int samples,
                                int words) {
  Rng rng(derive_seed(6, 6));
  std::uniform_int_distribution<int> len(1, 4), digit(0, 9);
  int exact = 0, ties = 0, mismatch = 0;
  const int eos = model.vocab().eos();
  NoGradScope<float> no_grad;
  for (int i = 0; i < samples && static_cast<std::size_t>(i) < test.size(); ++i) {
    const std::string truth = test.label(static_cast<std::size_t>(i));
    std::set<std::string> seen{truth};
    std::vector<std::string> lexicon{truth};
    while (static_cast<int>(lexicon.size()) < words) {
      std::string w;
      for (int k = len(rng); k > 0; --k) w += static_cast<char>('0' + digit(rng));
      if (seen.insert(w).second) lexicon.push_back(w);
    }
    std::shuffle(lexicon.begin(), lexicon.end(), rng);
    const Tensor<float> image = single(test, static_cast<std::size_t>(i));
    const std::string chosen = model.lexicon(image, lexicon)[0];
    const Tensor<float> seq = model.encode(image).sequence;
    double best = -1e300, chosen_score = 0;
    std::string brute;
    for (const std::string& w : lexicon) {
      std::vector<int> target = model.vocab().encode(w);
      if (target.back() != eos) target.push_back(eos);
      const double s = model.decoder().forced_log_probs(seq, {target})[0];
      if (s > best) best = s, brute = w;
      if (w == chosen) chosen_score = s;
    }
    if (brute == chosen) {
      ++exact;
    } else if (best - chosen_score < 1e-5) {
      ++ties;  // equal up to float reassociation across batch widths
    } else {
      ++mismatch;
    }
  }
  return {"lexicon decode equals brute force", exact == samples,
          format("%d/%d identical, %d near-ties, %d mismatches (%d-word lexicons)", exact, samples,
                 ties, mismatch, words)};
}

int nominal_angle(double angle) {
  const int q = static_cast<int>(std::lround(angle / 90.0));
  return ((q % 4) + 4) % 4 * 90;
}

// Criterion 9: dominant displacement axis of the placement trend.
CheckLine trend_direction(AonModel<float>& model, const Dataset& test) {
  model.set_training(false);
  NoGradScope<float> no_grad;
  int n0 = 0, ok0 = 0, n90 = 0, ok90 = 0;
  double vertical_mass = 0, horizontal_mass = 0, peak = 0;
  Index peak_count = 0;
  const int eos = model.vocab().eos();
  for (std::size_t start = 0; start < test.size(); start += 50) {
    std::vector<std::size_t> pos;
    for (std::size_t i = start; i < std::min(test.size(), start + 50); ++i) pos.push_back(i);
    const Batch batch = test.gather(pos);
    const EncoderOutput<float> enc = model.encode(batch.images);
    const auto decoded = model.decoder().greedy_decode(enc.sequence, model.config().decoder.max_len);
    for (std::size_t b = 0; b < pos.size(); ++b) {
      const std::string& label = test.label(pos[b]);
      if (decoded[b].text != label || label.size() < 2) continue;
      const int angle = nominal_angle(test.angle(pos[b]));
      if (angle != 0 && angle != 90) continue;
      const auto points =
          trend(decoded[b].trace, clue_rows(enc.clues, static_cast<Index>(b)), eos);
      const ClueRows rows = clue_rows(enc.clues, static_cast<Index>(b));
      for (const auto& c : rows) {
        (angle == 90 ? vertical_mass : horizontal_mass) +=
            (angle == 90 ? c[2] + c[3] : c[0] + c[1]) / static_cast<double>(rows.size());
      }
      for (std::size_t t = 0; t + 1 < decoded[b].trace.size(); ++t) {
        const auto& a = decoded[b].trace.alphas[t];
        peak += *std::max_element(a.begin(), a.end());
        ++peak_count;
      }
      int vertical = 0, horizontal = 0;
      for (std::size_t k = 1; k < points.size(); ++k) {
        const double dx = std::abs(points[k].x - points[k - 1].x);
        const double dy = std::abs(points[k].y - points[k - 1].y);
        vertical += dy > dx;
        horizontal += dx > dy;
      }
      const int steps = static_cast<int>(points.size()) - 1;
      if (angle == 90) {
        ++n90;
        ok90 += 2 * vertical > steps;
      } else {
        ++n0;
        ok0 += 2 * horizontal > steps;
      }
    }
  }
  const double f90 = n90 ? static_cast<double>(ok90) / n90 : 0;
  const double f0 = n0 ? static_cast<double>(ok0) / n0 : 0;
  const Index len = model.config().encoder.seq_len();
  return {"placement trend follows orientation", n90 > 0 && n0 > 0 && f90 >= 0.8 && f0 >= 0.8,
          format("90 deg: %d/%d (%.1f%%) mostly vertical; 0 deg: %d/%d (%.1f%%) mostly "
                 "horizontal; clue mass on the text axis %.2f (90 deg) / %.2f (0 deg); mean "
                 "peak attention %.2f over L=%lld",
                 ok90, n90, 100 * f90, ok0, n0, 100 * f0, n90 ? vertical_mass / n90 : 0.0,
                 n0 ? horizontal_mass / n0 : 0.0, peak_count ? peak / peak_count : 0.0,
                 static_cast<long long>(len))};
}

// Criterion 10: loss curves, forward pass and checkpoint bytes reproduce.
CheckLine determinism(const Options& opt, AonModel<float>& trained, const Dataset& test) {
  GenConfig g = experiment_data();
  g.train_count = 96;
  g.test_count = 0;
  g.seed = 10;
  const fs::path dir = fs::path(opt.work) / "determinism";
  const GeneratedDataset data = generate_dataset(g, dir.string());
  TrainConfig tc;
  tc.epochs = 2;
  tc.batch_size = 16;
  tc.seed = 10;
  std::vector<std::vector<double>> curves;
  for (int r = 0; r < 2; ++r) {
    AonModel<float> model(experiment_model(EncodeMode::kAon), 10);
    const Dataset ds = Dataset::load(data.train, 32, model.vocab());
    curves.push_back(train(model, tc, ds).step_loss);
  }
  const bool curves_equal =
      curves[0].size() == curves[1].size() &&
      std::memcmp(curves[0].data(), curves[1].data(), curves[0].size() * sizeof(double)) == 0;

  const std::string first = serialize_checkpoint(trained, 1, nullptr);
  const CheckpointData parsed = parse_checkpoint(first, "memory");
  AonModel<float> loaded(parsed.config, 99);
  restore_checkpoint(parsed, loaded);
  const bool bytes_equal = serialize_checkpoint(loaded, parsed.step, nullptr) == first;
  trained.set_training(false);
  loaded.set_training(false);
  std::vector<std::size_t> pos(std::min<std::size_t>(64, test.size()));
  std::iota(pos.begin(), pos.end(), 0);
  const Tensor<float> images = test.gather(pos).images;
  NoGradScope<float> no_grad;
  const Tensor<float> a = trained.encode(images).sequence, b = loaded.encode(images).sequence;
  bool forward_equal =
      a.shape() == b.shape() &&
      std::memcmp(a.ptr(), b.ptr(), sizeof(float) * static_cast<std::size_t>(a.size())) == 0;
  const auto da = trained.greedy(images), db = loaded.greedy(images);
  for (std::size_t i = 0; i < da.size(); ++i) forward_equal &= da[i].trace.dists == db[i].trace.dists;
  return {"determinism and persistence", curves_equal && bytes_equal && forward_equal,
          format("loss curves %s (%zu steps), save->load->forward %s, save->load->save %s",
                 curves_equal ? "identical" : "DIFFER", curves[0].size(),
                 forward_equal ? "bitwise equal" : "DIFFERS",
                 bytes_equal ? "byte-identical" : "DIFFERS")};
}

}  // namespace

int main(int argc, char** argv) {
  Options opt;
  CLI::App app{"Acceptance criteria"};
  app.add_option("--work", opt.work, "Cache directory for data and trained models");
  app.add_option("--epochs", opt.epochs, "Epochs per experiment run");
  app.add_option("--seeds", opt.seeds, "Seeds per encoder mode");
  app.add_option("--minutes-per-run", opt.minutes_per_run, "Wall-clock cap per run");
  app.add_option("--known-failure", opt.known_failures,
                 "Criterion expected to fail; the exit status flags any other outcome");
  CLI11_PARSE(app, argc, argv);

  std::vector<int> failed;
  auto emit = [&](int id, const CheckLine& line) {
    report(id, line);
    if (!line.pass) failed.push_back(id);
  };
  try {
    emit(1, check_gradients(1e-3, 300, 1));
    emit(2, check_clue_normalization(100, 10));
    emit(3, check_direction_identities(1));
    emit(4, check_filter_gate(1000));
    emit(5, check_decoder_normalization(100));

    fs::create_directories(opt.work);
    const GenConfig g = experiment_data();
    const fs::path data_dir = fs::path(opt.work) / "digits";
    if (slurp(data_dir / "gen.cfg") != g.to_text() || !fs::exists(data_dir / "test.tsv")) {
      std::cerr << "generating " << data_dir << std::endl;
      generate_dataset(g, data_dir.string());
    }
    const Vocabulary vocab(g.symbols);
    const Dataset train_set = Dataset::load(read_manifest((data_dir / "train.tsv").string()), 32, vocab);
    const Dataset test_set = Dataset::load(read_manifest((data_dir / "test.tsv").string()), 32, vocab);

    std::map<EncodeMode, std::vector<Run>> runs;
    for (EncodeMode mode : {EncodeMode::kAon, EncodeMode::kHnOnly, EncodeMode::kConcatTemporal}) {
      for (int s = 1; s <= opt.seeds; ++s) {
        runs[mode].push_back(train_or_load(opt, mode, static_cast<std::uint64_t>(s), train_set, test_set));
      }
    }
    auto accuracies = [&](EncodeMode m) {
      std::vector<double> v;
      for (const Run& r : runs[m]) v.push_back(r.accuracy);
      return v;
    };
    auto list = [&](EncodeMode m) {
      std::string s;
      for (const Run& r : runs[m]) s += format("%s%.1f", s.empty() ? "" : "/", 100 * r.accuracy);
      return s;
    };
    const double aon = median(accuracies(EncodeMode::kAon));
    const double hn = median(accuracies(EncodeMode::kHnOnly));
    const double ct = median(accuracies(EncodeMode::kConcatTemporal));
    // The AON run closest to the median is the trained toy model below.
    Run* mid = &runs[EncodeMode::kAon][0];
    for (Run& r : runs[EncodeMode::kAon]) {
      if (std::abs(r.accuracy - aon) < std::abs(mid->accuracy - aon)) mid = &r;
    }
    double slowest = 0;
    bool any_timeout = false;
    for (const auto& [m, rs] : runs) {
      for (const Run& r : rs) slowest = std::max(slowest, r.minutes), any_timeout |= r.timed_out;
    }

    emit(6, lexicon_vs_bruteforce(*mid->model, test_set, 200, 50));
    emit(7, {"orientation experiment", aon >= 0.85 && hn <= aon - 0.15 && !any_timeout,
             format("median accuracy aon %.1f%% (%s), hn_only %.1f%% (%s), gap %.1f points; "
                    "%lld epochs, slowest run %.1f min%s",
                    100 * aon, list(EncodeMode::kAon).c_str(), 100 * hn,
                    list(EncodeMode::kHnOnly).c_str(), 100 * (aon - hn),
                    static_cast<long long>(opt.epochs), slowest,
                    any_timeout ? ", TIME LIMIT HIT" : "")});
    emit(8, {"concat_temporal does not beat aon", ct <= aon,
             format("median concat_temporal %.1f%% (%s) vs aon %.1f%%, gap %.1f points", 100 * ct,
                    list(EncodeMode::kConcatTemporal).c_str(), 100 * aon, 100 * (aon - ct))});
    emit(9, trend_direction(*mid->model, test_set));
    emit(10, determinism(opt, *mid->model, test_set));
  } catch (const std::exception& e) {
    std::cout << "acceptance aborted: " << e.what() << std::endl;
    return 2;
  }
  std::cout << 10 - failed.size() << "/10 criteria pass";
  if (!failed.empty()) {
    std::cout << "; failing:";
    for (int id : failed) std::cout << " " << id;
  }
  std::cout << std::endl;
  std::vector<int> expected = opt.known_failures;
  std::sort(expected.begin(), expected.end());
  if (failed == expected) return 0;
  std::cout << "outcome differs from the expected failures (--known-failure)" << std::endl;
  return 1;
}
