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

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <random>

#include <omp.h>

#include "aon/checkpoint.h"
#include "aon/init.h"
#include "aon/synth.h"

namespace aon {

namespace {

// Rotates every image of a batch by an independent uniform angle.
void rotate_batch(Batch& batch, Rng& rng) {
  std::uniform_real_distribution<double> angle(0.0, 360.0);
  const Index n = batch.images.dim(0), s = batch.images.dim(2);
  const auto plane = static_cast<std::size_t>(s * s);
  for (Index b = 0; b < n; ++b) {
    Image img(s, s);
    float* p = batch.images.ptr() + static_cast<std::size_t>(b) * plane;
    std::copy_n(p, plane, img.pixels.begin());
    const double a = angle(rng);
    img = rotate_augment(img, a);
    std::copy(img.pixels.begin(), img.pixels.end(), p);
    batch.angles[static_cast<std::size_t>(b)] =
        std::fmod(batch.angles[static_cast<std::size_t>(b)] + a, 360.0);
  }
}

class ModeGuard {
 public:
  ModeGuard(AonModel<float>& m, bool training) : m_(m), saved_(m.training()) {
    m_.set_training(training);
  }
  ~ModeGuard() { m_.set_training(saved_); }

 private:
  AonModel<float>& m_;
  bool saved_;
};

}  // namespace

const std::set<std::string>& TrainConfig::keys() {
  static const std::set<std::string> k = {
      "epochs",         "batch_size",       "rho",        "eps",
      "clip_norm",      "seed",             "eval_every", "checkpoint_every",
      "checkpoint",     "time_limit_minutes", "augment_rotation", "threads"};
  return k;
}

TrainConfig TrainConfig::from_key_values(const KeyValues& kv) {
  TrainConfig c;
  c.epochs = kv.get_int("epochs", c.epochs);
  c.batch_size = kv.get_int("batch_size", c.batch_size);
  c.optimizer.rho = kv.get_double("rho", c.optimizer.rho);
  c.optimizer.eps = kv.get_double("eps", c.optimizer.eps);
  c.optimizer.clip_norm = kv.get_double("clip_norm", c.optimizer.clip_norm);
  c.seed = static_cast<std::uint64_t>(kv.get_int("seed", static_cast<std::int64_t>(c.seed)));
  c.eval_every = kv.get_int("eval_every", c.eval_every);
  c.checkpoint_every = kv.get_int("checkpoint_every", c.checkpoint_every);
  c.checkpoint = kv.get_string("checkpoint", c.checkpoint);
  c.time_limit_minutes = kv.get_double("time_limit_minutes", c.time_limit_minutes);
  c.augment_rotation = kv.get_bool("augment_rotation", c.augment_rotation);
  c.threads = kv.get_int("threads", c.threads);
  c.validate();
  return c;
}

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("epochs must be at least 1");
  if (batch_size < 1) throw ConfigError("batch_size must be at least 1");
  if (!(optimizer.rho >= 0 && optimizer.rho < 1)) throw ConfigError("rho must be in [0,1)");
  if (!(optimizer.eps > 0)) throw ConfigError("eps must be positive");
  if (eval_every < 0 || checkpoint_every < 0 || threads < 0 || time_limit_minutes < 0) {
    throw ConfigError("eval_every, checkpoint_every, threads and time_limit_minutes must be >= 0");
  }
}

TrainResult train(AonModel<float>& model, const TrainConfig& config, const Dataset& train_set,
                  const Dataset* eval_set, std::ostream* log) {
  config.validate();
  if (train_set.input_size() != model.config().encoder.input_size) {
    throw DimensionError("train: dataset images are " + std::to_string(train_set.input_size()) +
                         " pixels, model expects " +
                         std::to_string(model.config().encoder.input_size));
  }
  const int saved_threads = omp_get_max_threads();
  if (config.threads > 0) omp_set_num_threads(static_cast<int>(config.threads));
  const auto start = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };
  Adadelta<float> optimizer(model.params(), config.optimizer);
  TrainResult result;
  Rng augment_rng(derive_seed(config.seed, 0xA06));
  auto save = [&] {
    if (!config.checkpoint.empty()) {
      save_checkpoint(config.checkpoint, model, static_cast<std::uint64_t>(result.steps),
                      &optimizer);
    }
  };
  for (Index epoch = 1; epoch <= config.epochs && !result.timed_out && !result.diverged;
       ++epoch) {
    const BatchPlan plan = plan_batches(train_set.size(), config.batch_size,
                                        derive_seed(config.seed, static_cast<std::uint64_t>(epoch)));
    double total = 0;
    Index batches = 0;
    for (std::size_t bi = 0; bi < plan.batches.size(); ++bi) {
      if (config.time_limit_minutes > 0 && elapsed() > 60.0 * config.time_limit_minutes) {
        result.timed_out = true;
        break;
      }
      Batch batch = train_set.gather(plan.batches[bi]);
      if (config.augment_rotation) rotate_batch(batch, augment_rng);
      ModeGuard mode(model, true);
      model.params().zero_grad();
      Tape<float> tape;
      double loss_value = 0;
      try {
        Tensor<float> loss;
        {
          ScopedTape<float> scope(tape);
          loss = model.loss(batch.images, batch.labels);
        }
        loss_value = loss.item();
        tape.backward(loss);
        optimizer.step(model.params());
      } catch (const NumericError& e) {
        result.diverged = true;
        result.message = "epoch " + std::to_string(epoch) + " batch " + std::to_string(bi + 1) +
                         ": " + e.what();
        break;
      }
      result.step_loss.push_back(loss_value);
      total += loss_value;
      ++batches;
      ++result.steps;
    }
    if (batches > 0 && !result.diverged) {
      result.epoch_loss.push_back(total / static_cast<double>(batches));
      result.epochs_done = epoch;
      if (log) {
        *log << "epoch " << epoch << " loss " << std::setprecision(6) << result.epoch_loss.back()
             << " steps " << result.steps << " time " << std::setprecision(4) << elapsed()
             << "s" << std::endl;
      }
    }
    if (result.diverged) break;
    if (eval_set && config.eval_every > 0 && epoch % config.eval_every == 0) {
      result.evals.emplace_back(epoch, evaluate(model, *eval_set));
      if (log) {
        *log << "epoch " << epoch << " eval accuracy " << result.evals.back().second.accuracy
             << std::endl;
      }
    }
    if (config.checkpoint_every > 0 && epoch % config.checkpoint_every == 0) save();
  }
  if (!result.diverged) save();
  if (log && result.diverged) *log << "diverged: " << result.message << "\n";
  result.seconds = elapsed();
  if (config.threads > 0) omp_set_num_threads(saved_threads);
  return result;
}

EvalReport evaluate(AonModel<float>& model, const Dataset& data,
                    const std::vector<std::string>* lexicon, Index batch_size, double bin_width) {
  if (batch_size < 1) throw ContractError("evaluate: batch_size must be positive");
  if (!(bin_width > 0)) throw ContractError("evaluate: bin_width must be positive");
  if (data.size() == 0) throw ContractError("evaluate: empty dataset");
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (!model.vocab().contains(data.label(i))) {
      throw ContractError("evaluate: label `" + data.label(i) + "` of " + data.path(i) +
                          " is outside the checkpoint vocabulary");
    }
  }
  ModeGuard mode(model, false);
  const auto nbins = static_cast<std::size_t>(std::max(1.0, std::round(360.0 / bin_width)));
  EvalReport report;
  report.bins.resize(nbins);
  for (std::size_t b = 0; b < nbins; ++b) report.bins[b].center = bin_width * static_cast<double>(b);
  double edit = 0;
  Index correct = 0;
  const BatchPlan plan = plan_batches(data.size(), batch_size, 0, false);
  for (std::size_t bi = 0; bi < plan.batches.size(); ++bi) {
    std::vector<std::size_t> positions = plan.batches[bi];
    positions.resize(positions.size() - static_cast<std::size_t>(plan.wrapped[bi]));
    const Batch batch = data.gather(positions);
    std::vector<std::string> predicted;
    if (lexicon) {
      predicted = model.lexicon(batch.images, *lexicon);
    } else {
      for (auto& d : model.greedy(batch.images)) predicted.push_back(std::move(d.text));
    }
    for (std::size_t k = 0; k < positions.size(); ++k) {
      const bool ok = predicted[k] == batch.labels[k];
      correct += ok;
      edit += normalized_edit_distance(predicted[k], batch.labels[k]);
      double a = std::fmod(batch.angles[k], 360.0);
      if (a < 0) a += 360.0;
      auto& bin = report.bins[static_cast<std::size_t>(std::floor(a / bin_width + 0.5)) % nbins];
      ++bin.count;
      bin.correct += ok;
      report.predictions.push_back(predicted[k]);
    }
  }
  report.count = static_cast<Index>(data.size());
  report.accuracy = static_cast<double>(correct) / static_cast<double>(report.count);
  report.mean_edit = edit / static_cast<double>(report.count);
  return report;
}

Index edit_distance(const std::string& a, const std::string& b) {
  std::vector<Index> row(b.size() + 1);
  std::iota(row.begin(), row.end(), Index{0});
  for (std::size_t i = 1; i <= a.size(); ++i) {
    Index diag = row[0];
    row[0] = static_cast<Index>(i);
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const Index up = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] != b[j - 1])});
      diag = up;
    }
  }
  return row[b.size()];
}

double normalized_edit_distance(const std::string& prediction, const std::string& target) {
  return static_cast<double>(edit_distance(prediction, target)) /
         static_cast<double>(std::max<std::size_t>(1, target.size()));
}

void print_report(std::ostream& out, const EvalReport& report) {
  out << std::fixed << std::setprecision(4);
  out << "samples " << report.count << "\n";
  out << "accuracy " << report.accuracy << "\n";
  out << "mean_normalized_edit_distance " << report.mean_edit << "\n";
  out << "angle_bin\tcount\taccuracy\n";
  for (const auto& bin : report.bins) {
    if (bin.count == 0) continue;
    out << std::setprecision(0) << bin.center << "\t" << bin.count << "\t" << std::setprecision(4)
        << bin.accuracy() << "\n";
  }
  out.unsetf(std::ios::floatfield);
  out << std::setprecision(6);
}

}  // namespace aon
