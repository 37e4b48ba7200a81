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

#include "aon/trainer.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

#include "aon/checkpoint.h"
#include "aon/optim.h"
#include "aon/synth.h"
#include "doctest.h"
#include "test_util.h"

using aon::Adadelta;
using aon::AdadeltaConfig;
using aon::AonModel;
using aon::Index;
using aon::ModelConfig;
using aon::ParameterSet;
using aon::Shape;
using aon::Tensor;
using aon::TrainConfig;
using namespace aon::testing;

namespace {

ModelConfig digit_mini() {
  ModelConfig c = ModelConfig::preset("mini");
  c.decoder.symbols = "0123456789";
  return c;
}

aon::GenConfig digit_gen(Index train, Index test) {
  aon::GenConfig g;
  g.image_size = 16;
  g.min_chars = 1;
  g.max_chars = 2;
  g.scale_min = 0.8;
  g.scale_max = 1.2;
  g.min_scale = 0.6;
  g.train_count = train;
  g.test_count = test;
  g.seed = 3;
  return g;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// One-parameter set with the given gradient.
struct Scalar {
  explicit Scalar(float x0 = 0.0f) { p = params.add("p", Tensor<float>(Shape{1}, x0)); }
  void set_grad(float g) {
    p.zero_grad();
    p.grad_mut()[0] = g;
  }
  ParameterSet<float> params;
  Tensor<float> p;
};

struct Trained {
  Trained()
      : dir("trainer"),
        data(aon::generate_dataset(digit_gen(200, 40), dir.path().string())),
        model(digit_mini(), 4) {
    vocab_train = aon::Dataset::load(data.train, 16, model.vocab());
    vocab_test = aon::Dataset::load(data.test, 16, model.vocab());
  }
  TempDir dir;
  aon::GeneratedDataset data;
  AonModel<float> model;
  aon::Dataset vocab_train, vocab_test;
};

}  // namespace

TEST_CASE("adadelta: zero gradient leaves parameters unchanged") {
  Scalar s(0.5f);
  Adadelta<float> opt(s.params);
  for (int i = 0; i < 5; ++i) {
    s.set_grad(0.0f);
    opt.step(s.params);
  }
  CHECK(s.p[0] == 0.5f);
  // A parameter that never received a gradient is skipped too.
  Scalar t(0.25f);
  Adadelta<float> opt2(t.params);
  opt2.step(t.params);
  CHECK(t.p[0] == 0.25f);
}

TEST_CASE("adadelta: first step matches the closed form") {
  Scalar s(0.0f);
  Adadelta<float> opt(s.params);
  s.set_grad(1.0f);
  opt.step(s.params);
  const double expected = -std::sqrt(1e-6) / std::sqrt(0.05 + 1e-6);
  CHECK(s.p[0] == doctest::Approx(expected).epsilon(1e-6));
  CHECK(expected == doctest::Approx(-4.47e-3).epsilon(1e-3));
  CHECK(opt.sq_grad().at("p")[0] == doctest::Approx(0.05));
  CHECK(opt.sq_update().at("p")[0] == doctest::Approx(0.05 * expected * expected));
}

TEST_CASE("adadelta: update size is invariant to gradient scale") {
  // 100 identical steps with g and with 10 g give nearly the same step.
  auto last_step = [](float g) {
    Scalar s;
    Adadelta<float> opt(s.params, {0.95, 1e-6, 0.0});
    double step = 0;
    for (int i = 0; i < 100; ++i) {
      const float x = s.p[0];
      s.set_grad(g);
      opt.step(s.params);
      step = std::abs(static_cast<double>(s.p[0]) - x);
    }
    return step;
  };
  const double unit = last_step(1.0f), scaled = last_step(10.0f);
  CHECK(unit > 0);
  CHECK(std::abs(scaled - unit) / unit < 0.1);
}

TEST_CASE("adadelta: global norm clipping") {
  ParameterSet<float> params;
  auto a = params.add("a", Tensor<float>(Shape{1}));
  auto b = params.add("b", Tensor<float>(Shape{1}));
  Adadelta<float> opt(params, {0.95, 1e-6, 5.0});
  a.zero_grad();
  b.zero_grad();
  a.grad_mut()[0] = 6.0f;
  b.grad_mut()[0] = 8.0f;
  const auto stats = opt.step(params);
  CHECK(stats.grad_norm == doctest::Approx(10.0));
  CHECK(stats.clipped);
  CHECK(opt.sq_grad().at("a")[0] == doctest::Approx(0.05 * 9.0));
  CHECK(opt.sq_grad().at("b")[0] == doctest::Approx(0.05 * 16.0));
}

TEST_CASE("adadelta: non-finite gradient aborts before any update") {
  ParameterSet<float> params;
  auto a = params.add("a", Tensor<float>(Shape{2}, 1.0f));
  auto b = params.add("b", Tensor<float>(Shape{1}, 2.0f));
  Adadelta<float> opt(params);
  a.zero_grad();
  b.zero_grad();
  a.grad_mut()[0] = 1.0f;
  b.grad_mut()[0] = std::numeric_limits<float>::quiet_NaN();
  CHECK_THROWS_AS(opt.step(params), aon::NumericError);
  CHECK(a[0] == 1.0f);
  CHECK(b[0] == 2.0f);
  CHECK(opt.sq_grad().at("a")[0] == 0.0f);
}

TEST_CASE("adadelta: elementwise updates do not depend on parameter order") {
  std::mt19937_64 rng(2);
  const auto ga = random_tensor<float>(Shape{3}, rng), gb = random_tensor<float>(Shape{4}, rng);
  auto run = [&](bool swapped) {
    ParameterSet<float> params;
    Tensor<float> a, b;
    if (swapped) {
      b = params.add("b", Tensor<float>(Shape{4}));
      a = params.add("a", Tensor<float>(Shape{3}));
    } else {
      a = params.add("a", Tensor<float>(Shape{3}));
      b = params.add("b", Tensor<float>(Shape{4}));
    }
    Adadelta<float> opt(params, {0.95, 1e-6, 0.0});
    for (int i = 0; i < 3; ++i) {
      a.zero_grad();
      b.zero_grad();
      std::copy(ga.data().begin(), ga.data().end(), a.grad_mut().begin());
      std::copy(gb.data().begin(), gb.data().end(), b.grad_mut().begin());
      opt.step(params);
    }
    return std::make_pair(a.clone(), b.clone());
  };
  const auto [a1, b1] = run(false);
  const auto [a2, b2] = run(true);
  CHECK(bitwise_equal(a1, a2));
  CHECK(bitwise_equal(b1, b2));
  CHECK_THROWS_AS(Adadelta<float>(ParameterSet<float>{}, {1.0, 1e-6, 5.0}), aon::ConfigError);
}

TEST_CASE("edit distance") {
  CHECK(aon::edit_distance("kitten", "sitting") == 3);
  CHECK(aon::edit_distance("", "abc") == 3);
  CHECK(aon::normalized_edit_distance("", "abc") == 1.0);
  CHECK(aon::normalized_edit_distance("abc", "abc") == 0.0);
  CHECK(aon::normalized_edit_distance("ab", "") == 2.0);
}

TEST_CASE("train config keys") {
  const auto kv = aon::KeyValues::parse("epochs = 3\nclip_norm = 0\naugment_rotation = on\n", "t");
  const TrainConfig c = TrainConfig::from_key_values(kv);
  CHECK(c.epochs == 3);
  CHECK(c.optimizer.clip_norm == 0.0);
  CHECK(c.augment_rotation);
  CHECK(c.optimizer.rho == 0.95);
  CHECK_THROWS_AS(TrainConfig::from_key_values(aon::KeyValues::parse("epochs = 0\n", "t")),
                  aon::ConfigError);
}

TEST_CASE("checkpoint: layout, round trips and errors") {
  TempDir dir("ckpt");
  AonModel<float> model(digit_mini(), 9);
  // Perturb buffers so they are not at their initial values.
  for (auto& [name, t] : model.buffers()) {
    for (float& v : t.data()) v += 0.125f;
  }
  Adadelta<float> opt(model.params());
  for (auto& [name, t] : opt.sq_grad()) t.data()[0] = 0.5f;
  const std::string path = dir.file("m.ckpt");
  aon::save_checkpoint(path, model, 42, &opt);
  const std::string bytes = slurp(path);
  REQUIRE(bytes.size() > 16);
  CHECK(bytes.substr(0, 4) == "AON1");
  CHECK(bytes.substr(4, 4) == std::string("\x01\x00\x00\x00", 4));
  CHECK(bytes.find("mode = aon\n") != std::string::npos);
  CHECK_FALSE(std::filesystem::exists(path + ".tmp"));

  // save -> load -> save is byte-identical, optimizer state included.
  const auto data = aon::read_checkpoint(path);
  CHECK(data.step == 42);
  CHECK(data.config.to_text() == model.config().to_text());
  AonModel<float> loaded(data.config, 123);
  Adadelta<float> opt2(loaded.params());
  aon::restore_checkpoint(data, loaded, &opt2);
  aon::save_checkpoint(dir.file("again.ckpt"), loaded, data.step, &opt2);
  CHECK(slurp(dir.file("again.ckpt")) == bytes);

  // save -> load -> forward is bitwise identical.
  std::mt19937_64 rng(5);
  const auto images = random_images<float>(3, 16, rng);
  model.set_training(false);
  auto from_file = aon::load_model(path);
  const auto a = model.greedy(images);
  const auto b = from_file->greedy(images);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].text == b[i].text);
    CHECK(a[i].trace.dists == b[i].trace.dists);
    CHECK(a[i].trace.alphas == b[i].trace.alphas);
  }
  {
    aon::NoGradScope<float> ng;
    CHECK(bitwise_equal(model.loss(images, {"1", "22", "3"}),
                        from_file->loss(images, {"1", "22", "3"})));
  }

  // Corruptions.
  std::ofstream(dir.file("magic.ckpt"), std::ios::binary) << "AON2" << bytes.substr(4);
  CHECK_THROWS_AS(aon::read_checkpoint(dir.file("magic.ckpt")), aon::FormatError);
  std::ofstream(dir.file("short.ckpt"), std::ios::binary) << bytes.substr(0, bytes.size() / 2);
  CHECK_THROWS_AS(aon::read_checkpoint(dir.file("short.ckpt")), aon::FormatError);
  std::string flipped = bytes;
  flipped[bytes.size() / 2] ^= 0x10;
  std::ofstream(dir.file("flip.ckpt"), std::ios::binary) << flipped;
  CHECK_THROWS_AS(aon::read_checkpoint(dir.file("flip.ckpt")), aon::FormatError);
  std::string version = bytes;
  version[4] = 2;
  std::ofstream(dir.file("ver.ckpt"), std::ios::binary) << version;
  CHECK_THROWS_AS(aon::read_checkpoint(dir.file("ver.ckpt")), aon::FormatError);
  CHECK_THROWS_AS(aon::read_checkpoint(dir.file("none.ckpt")), aon::IoError);

  // A checkpoint for one architecture does not load into another.
  AonModel<float> bigger(ModelConfig::preset("toy"), 1);
  CHECK_THROWS_AS(aon::restore_checkpoint(data, bigger), aon::DimensionError);
  // Restoring without an optimizer ignores the optimizer records.
  AonModel<float> plain(data.config, 0);
  aon::restore_checkpoint(data, plain);
  CHECK(bitwise_equal(plain.params().at("decoder.embed"), model.params().at("decoder.embed")));
}

TEST_CASE("training smoke, determinism and learning signal") {
  Trained t;
  TrainConfig cfg;
  cfg.epochs = 1;
  cfg.batch_size = 16;
  cfg.threads = 1;
  cfg.seed = 4;
  cfg.checkpoint = t.dir.file("run.ckpt");
  const auto r1 = aon::train(t.model, cfg, t.vocab_train);
  CHECK(r1.epochs_done == 1);
  CHECK(r1.steps == 13);
  CHECK(std::filesystem::exists(cfg.checkpoint));
  CHECK(aon::read_checkpoint(cfg.checkpoint).step == 13);

  // Identical seeds give bitwise identical loss curves.
  AonModel<float> again(digit_mini(), 4);
  cfg.checkpoint.clear();
  const auto r2 = aon::train(again, cfg, t.vocab_train);
  REQUIRE(r1.step_loss.size() == r2.step_loss.size());
  for (std::size_t i = 0; i < r1.step_loss.size(); ++i) CHECK(r1.step_loss[i] == r2.step_loss[i]);

  // After one epoch the loss beats a uniform predictor: M ln V with M the
  // mean target length including EOS.
  double m = 0;
  for (std::size_t i = 0; i < t.vocab_train.size(); ++i) m += t.vocab_train.label(i).size() + 1;
  m /= static_cast<double>(t.vocab_train.size());
  CHECK(r1.epoch_loss[0] < m * std::log(static_cast<double>(t.model.vocab().size())));
}

TEST_CASE("training stops on divergence and keeps the last good checkpoint") {
  Trained t;
  TrainConfig cfg;
  cfg.epochs = 1;
  cfg.batch_size = 50;
  cfg.checkpoint = t.dir.file("good.ckpt");
  aon::train(t.model, cfg, t.vocab_train);
  const std::string good = slurp(cfg.checkpoint);
  t.model.params().at("decoder.out.weight")[0] = std::numeric_limits<float>::quiet_NaN();
  cfg.epochs = 2;
  const auto r = aon::train(t.model, cfg, t.vocab_train);
  CHECK(r.diverged);
  CHECK(r.steps == 0);
  CHECK(r.message.find("non-finite") != std::string::npos);
  CHECK(slurp(cfg.checkpoint) == good);
}

TEST_CASE("memorizing one sample gives accuracy 1") {
  TempDir dir("memo");
  aon::GenConfig g = digit_gen(1, 0);
  g.angles = {0};
  g.angle_jitter = 0;
  const auto ds = aon::generate_dataset(g, dir.path().string());
  AonModel<float> model(digit_mini(), 2);
  const auto data = aon::Dataset::load(ds.train, 16, model.vocab());
  TrainConfig cfg;
  cfg.epochs = 150;
  cfg.batch_size = 4;
  aon::train(model, cfg, data);
  const auto report = aon::evaluate(model, data);
  CHECK(report.accuracy == 1.0);
  CHECK(report.mean_edit == 0.0);
  CHECK(report.bins[0].count == 1);
  CHECK(report.predictions[0] == data.label(0));
}

TEST_CASE("evaluate: lexicon mode, idempotence and vocabulary checks") {
  Trained t;
  TrainConfig cfg;
  cfg.epochs = 8;
  cfg.batch_size = 16;
  aon::train(t.model, cfg, t.vocab_train);
  const auto greedy = aon::evaluate(t.model, t.vocab_test);
  CHECK(greedy.count == 40);
  CHECK(greedy.accuracy >= 0.0);
  CHECK(greedy.accuracy <= 1.0);
  CHECK(greedy.mean_edit >= 0.0);
  Index binned = 0;
  for (const auto& bin : greedy.bins) binned += bin.count;
  CHECK(binned == 40);
  CHECK(greedy.bins.size() == 4);
  CHECK(greedy.bins[1].center == 90.0);

  const auto repeat = aon::evaluate(t.model, t.vocab_test);
  CHECK(repeat.predictions == greedy.predictions);
  CHECK(repeat.accuracy == greedy.accuracy);

  std::vector<std::string> lexicon;
  for (std::size_t i = 0; i < t.vocab_test.size(); ++i) lexicon.push_back(t.vocab_test.label(i));
  const auto lex = aon::evaluate(t.model, t.vocab_test, &lexicon);
  CHECK(lex.accuracy >= greedy.accuracy);

  // Labels outside the checkpoint vocabulary are rejected.
  AonModel<float> letters(ModelConfig::preset("mini"), 1);  // symbols "abc"
  CHECK_THROWS_AS(aon::evaluate(letters, t.vocab_test), aon::ContractError);
}
