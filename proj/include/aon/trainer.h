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

#ifndef AON_TRAINER_H_
#define AON_TRAINER_H_

#include <cstdint>
#include <functional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "aon/config.h"
#include "aon/dataset.h"
#include "aon/model.h"
#include "aon/optim.h"

namespace aon {

struct TrainConfig {
  Index epochs = 30;
  Index batch_size = 32;
  AdadeltaConfig optimizer;
  std::uint64_t seed = 1;           // model init and shuffling
  Index eval_every = 0;             // epochs between held-out evaluations; 0 = never
  Index checkpoint_every = 1;       // epochs between checkpoint writes
  std::string checkpoint;           // empty = no checkpoints
  double time_limit_minutes = 0;    // 0 = unlimited; checked between steps
  bool augment_rotation = false;    // rotate each training image by U[0,360)
  Index threads = 0;                // 0 = OpenMP default

  static const std::set<std::string>& keys();
  static TrainConfig from_key_values(const KeyValues& kv);
  void validate() const;
};

struct AngleBin {
  double center = 0;
  Index count = 0;
  Index correct = 0;
  double accuracy() const { return count ? static_cast<double>(correct) / count : 0.0; }
};

struct EvalReport {
  Index count = 0;
  double accuracy = 0;           // exact sequence match
  double mean_edit = 0;          // Levenshtein / target length, averaged
  std::vector<AngleBin> bins;    // by angle metadata
  std::vector<std::string> predictions;
};

struct TrainResult {
  std::vector<double> step_loss;
  std::vector<double> epoch_loss;  // mean over the epoch's batches
  std::vector<std::pair<Index, EvalReport>> evals;  // (epoch, report)
  Index steps = 0;
  Index epochs_done = 0;
  bool timed_out = false;
  bool diverged = false;  // non-finite loss or gradient; training stopped
  std::string message;
  double seconds = 0;
};

// Teacher-forced ADADELTA training. Writes config.checkpoint after every
// checkpoint_every epochs and at the end; a divergent step stops training
// without overwriting the last good checkpoint.
TrainResult train(AonModel<float>& model, const TrainConfig& config, const Dataset& train_set,
                  const Dataset* eval_set = nullptr, std::ostream* log = nullptr);

// Greedy (or lexicon) decoding over a dataset in eval mode; angle bins of
// width bin_width centered on multiples of it.
EvalReport evaluate(AonModel<float>& model, const Dataset& data,
                    const std::vector<std::string>* lexicon = nullptr, Index batch_size = 64,
                    double bin_width = 90);

Index edit_distance(const std::string& a, const std::string& b);
// edit_distance / max(1, |target|).
double normalized_edit_distance(const std::string& prediction, const std::string& target);

void print_report(std::ostream& out, const EvalReport& report);

}  // namespace aon

#endif  // AON_TRAINER_H_
