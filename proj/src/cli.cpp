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

#include "aon/cli.h"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "aon/checkpoint.h"
#include "aon/selfcheck.h"
#include "aon/synth.h"
#include "aon/trainer.h"
#include "aon/trend.h"

namespace aon {

namespace {

constexpr int kUsage = 1;
constexpr int kRuntime = 2;

template <typename... Args>
std::string format(const char* pattern, Args... args) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), pattern, args...);
  return buf;
}

// Gen, train and model keys may share one file.
KeyValues load_run_config(const std::string& path) {
  KeyValues kv = path.empty() ? KeyValues() : KeyValues::load(path);
  std::set<std::string> known = GenConfig::keys();
  known.insert(TrainConfig::keys().begin(), TrainConfig::keys().end());
  known.insert(ModelConfig::keys().begin(), ModelConfig::keys().end());
  kv.require_known(known);
  return kv;
}

Tensor<float> image_batch(const Image& image, Index size) {
  const Image input = resize_bilinear(image, size, size);
  Tensor<float> batch(Shape{1, 1, size, size});
  std::copy(input.pixels.begin(), input.pixels.end(), batch.ptr());
  return batch;
}

int run_gen_data(const std::string& config_path, const std::string& out) {
  const GenConfig config = GenConfig::from_key_values(load_run_config(config_path));
  const GeneratedDataset data = generate_dataset(config, out);
  std::cout << "train " << data.train.records.size() << " " << data.train.file << "\n"
            << "test " << data.test.records.size() << " " << data.test.file << "\n";
  return 0;
}

int run_train(const std::string& config_path, const std::string& manifest,
              const std::string& out, const std::string& eval_manifest,
              const std::string& curve) {
  const KeyValues kv = load_run_config(config_path);
  const ModelConfig model_config = ModelConfig::from_key_values(kv);
  TrainConfig config = TrainConfig::from_key_values(kv);
  config.checkpoint = out;
  AonModel<float> model(model_config, config.seed);
  const Index size = model_config.encoder.input_size;
  const Dataset train_set = Dataset::load(read_manifest(manifest), size, model.vocab());
  std::optional<Dataset> eval_set;
  if (!eval_manifest.empty()) {
    eval_set = Dataset::load(read_manifest(eval_manifest), size, model.vocab());
  }
  const TrainResult result =
      train(model, config, train_set, eval_set ? &*eval_set : nullptr, &std::cerr);
  if (!curve.empty()) {
    std::ofstream f(curve);
    if (!f) throw IoError("cannot write " + curve);
    f << "step\tloss\n";
    for (std::size_t i = 0; i < result.step_loss.size(); ++i) {
      f << i + 1 << "\t" << result.step_loss[i] << "\n";
    }
  }
  std::cout << "steps " << result.steps << "\nepochs " << result.epochs_done << "\n";
  if (!result.epoch_loss.empty()) std::cout << "final_loss " << result.epoch_loss.back() << "\n";
  if (!result.evals.empty()) {
    std::cout << "eval_accuracy " << result.evals.back().second.accuracy << "\n";
  }
  if (result.diverged) {
    std::cerr << "error: " << result.message << "\n";
    return kRuntime;
  }
  if (result.timed_out) std::cerr << "note: stopped at the time limit\n";
  return 0;
}

int run_eval(const std::string& ckpt, const std::string& manifest, const std::string& lexicon,
             const std::string& mode) {
  std::optional<EncodeMode> override_mode;
  if (!mode.empty()) override_mode = parse_mode(mode);
  auto model = load_model(ckpt, override_mode);
  const Dataset data =
      Dataset::load(read_manifest(manifest), model->config().encoder.input_size, model->vocab());
  std::vector<std::string> words;
  if (!lexicon.empty()) words = load_lexicon(lexicon);
  print_report(std::cout, evaluate(*model, data, lexicon.empty() ? nullptr : &words));
  return 0;
}

int run_infer(const std::string& ckpt, const std::string& image, const std::string& lexicon) {
  auto model = load_model(ckpt);
  const Tensor<float> batch = image_batch(read_pgm(image), model->config().encoder.input_size);
  NoGradScope<float> no_grad;
  if (lexicon.empty()) {
    std::cout << model->greedy(batch)[0].text << "\n";
  } else {
    std::cout << model->lexicon(batch, load_lexicon(lexicon))[0] << "\n";
  }
  return 0;
}

int run_trend(const std::string& ckpt, const std::string& image, const std::string& out) {
  auto model = load_model(ckpt);
  const TrendResult result = trace_image(*model, read_pgm(image));
  write_ppm(out, result.overlay.raster);
  const std::string vectors = std::filesystem::path(out).replace_extension(".txt").string();
  std::ofstream f(vectors);
  if (!f) throw IoError("cannot write " + vectors);
  f << overlay_vectors(result.overlay);
  if (!f) throw IoError("write failed: " + vectors);
  std::cout << "text " << result.text << "\n";
  for (const TrendPoint& p : result.points) {
    std::cout << format("point %lld %.4f %.4f%s%s\n", static_cast<long long>(p.step), p.x, p.y,
                        p.degenerate_x ? " degenerate_x" : "",
                        p.degenerate_y ? " degenerate_y" : "");
  }
  std::cout << "overlay " << out << "\nvectors " << vectors << "\n";
  return 0;
}

int run_gradcheck(const std::string& config, double threshold, std::uint64_t seed) {
  const bool preset = config == "mini" || config == "toy";
  const ModelConfig model_config =
      preset ? ModelConfig::preset(config) : ModelConfig::from_key_values(load_run_config(config));
  const GradCheckReport report = model_grad_check(model_config, seed);
  for (const auto& e : report.per_tensor) {
    std::cout << format("%-28s coords %4lld  max_rel_err %.3e\n", e.name.c_str(),
                        static_cast<long long>(e.checked), e.max_rel_err);
  }
  std::cout << format("max_rel_err %.3e\n", report.max_rel_err);
  if (report.max_rel_err < threshold) return 0;
  std::cerr << format("error: relative error %.3e exceeds %.1e\n", report.max_rel_err, threshold);
  return kRuntime;
}

int run_selftest_command() {
  bool all = true;
  for (const CheckLine& line : aon::run_selftest()) {
    std::cout << (line.pass ? "PASS " : "FAIL ") << line.name << ": " << line.detail << "\n";
    all &= line.pass;
  }
  return all ? 0 : kRuntime;
}

}  // namespace

int cli_main(int argc, char** argv) {
  CLI::App app{"Arbitrarily-oriented text recognition toolkit", "aon"};
  app.require_subcommand(1);
  std::function<int()> action;

  std::string config, out, manifest, eval_manifest, curve, ckpt, image, lexicon, mode;
  double threshold = 1e-3;
  std::uint64_t seed = 1;

  auto* gen = app.add_subcommand("gen-data", "Render a synthetic train/test dataset");
  gen->add_option("--config", config, "Run configuration file")->check(CLI::ExistingFile);
  gen->add_option("--out", out, "Output directory")->required();
  gen->callback([&] { action = [&] { return run_gen_data(config, out); }; });

  auto* tr = app.add_subcommand("train", "Train a model and write its checkpoint");
  tr->add_option("--config", config, "Run configuration file")->check(CLI::ExistingFile);
  tr->add_option("--manifest", manifest, "Training manifest (TSV)")
      ->required()
      ->check(CLI::ExistingFile);
  tr->add_option("--out", out, "Checkpoint path")->required();
  tr->add_option("--eval", eval_manifest, "Held-out manifest evaluated at eval_every")
      ->check(CLI::ExistingFile);
  tr->add_option("--curve", curve, "Write the per-step loss curve (TSV)");
  tr->callback([&] {
    action = [&] { return run_train(config, manifest, out, eval_manifest, curve); };
  });

  auto* ev = app.add_subcommand("eval", "Report accuracy on a manifest");
  ev->add_option("checkpoint", ckpt)->required()->check(CLI::ExistingFile);
  ev->add_option("manifest", manifest)->required()->check(CLI::ExistingFile);
  ev->add_option("--lexicon", lexicon, "One word per line")->check(CLI::ExistingFile);
  ev->add_option("--mode", mode, "Encoder mode override")
      ->check(CLI::IsMember({"aon", "hn_only", "concat_channel", "concat_temporal"}));
  ev->callback([&] { action = [&] { return run_eval(ckpt, manifest, lexicon, mode); }; });

  auto* inf = app.add_subcommand("infer", "Decode one PGM image");
  inf->add_option("checkpoint", ckpt)->required()->check(CLI::ExistingFile);
  inf->add_option("image", image)->required()->check(CLI::ExistingFile);
  inf->add_option("--lexicon", lexicon, "One word per line")->check(CLI::ExistingFile);
  inf->callback([&] { action = [&] { return run_infer(ckpt, image, lexicon); }; });

  auto* trd = app.add_subcommand("trend", "Draw the character placement trend of one image");
  trd->add_option("checkpoint", ckpt)->required()->check(CLI::ExistingFile);
  trd->add_option("image", image)->required()->check(CLI::ExistingFile);
  trd->add_option("out", out, "Overlay PPM; vectors go next to it as .txt")->required();
  trd->callback([&] { action = [&] { return run_trend(ckpt, image, out); }; });

  auto* gc = app.add_subcommand("gradcheck", "Finite-difference gradient check in float64");
  gc->add_option("--config", config, "Preset (mini, toy) or configuration file")
      ->default_val("mini");
  gc->add_option("--threshold", threshold, "Maximum relative error")->default_val(1e-3);
  gc->add_option("--seed", seed, "Initialization seed")->default_val(1);
  gc->callback([&] { action = [&] { return run_gradcheck(config, threshold, seed); }; });

  auto* st = app.add_subcommand("selftest", "Run the invariant suite");
  st->callback([&] { action = [&] { return run_selftest_command(); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n";
    const auto parsed = app.get_subcommands();
    std::cerr << (parsed.empty() ? app.help() : parsed.front()->help());
    return kUsage;
  }
  try {
    return action();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntime;
  }
}

}  // namespace aon
