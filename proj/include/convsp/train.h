// Copyright 2026 The convsp Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef CONVSP_TRAIN_H_
#define CONVSP_TRAIN_H_

#include <functional>
#include <span>
#include <vector>

#include "convsp/model.h"

namespace convsp {

// Linear warmup over the first `warmup_fraction` of steps, then linear
// decay to zero at `total_steps`.
class WarmupLinearSchedule {
 public:
  WarmupLinearSchedule(double peak, int64_t total_steps, double warmup_fraction = 0.01);
  double Rate(int64_t step) const;
  int64_t warmup_steps() const { return warmup_; }

 private:
  double peak_;
  int64_t total_;
  int64_t warmup_;
};

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

class Adam {
 public:
  explicit Adam(AdamConfig config = {}) : config_(config) {}
  // Applies one update from the accumulated gradients and clears them.
  void Step(std::span<Parameter *const> params, double lr);
  int64_t steps() const { return t_; }

 private:
  AdamConfig config_;
  int64_t t_ = 0;
};

struct TrainConfig {
  int epochs = 6;
  int batch_size = 128;
  double learning_rate = 1e-4;
  double warmup_fraction = 0.01;
  double clip_norm = 0.0;  // global gradient norm clip; 0 disables
  uint64_t seed = 1;       // shuffling
};

struct EpochStats {
  int epoch = 0;
  double loss = 0;  // mean example loss over the epoch
  double parsing = 0;
  double detection = 0;
};

struct TrainLog {
  std::vector<EpochStats> epochs;
  std::vector<double> batch_losses;
  int64_t steps = 0;
};

// Mini-batch training with teacher forcing. Throws DivergenceError when a
// batch loss is not finite.
TrainLog Train(Model &model, std::span<const TrainingExample> data, const TrainConfig &config,
               const std::function<void(const EpochStats &)> &on_epoch = {});

struct TeacherForcedAccuracy {
  int64_t steps = 0;
  int64_t correct_tokens = 0;
  int64_t entry_steps = 0;
  int64_t correct_entries = 0;  // argmax instantiation on entry steps
  int64_t labels = 0;
  int64_t correct_labels = 0;

  double token_accuracy() const { return steps ? double(correct_tokens) / steps : 0.0; }
  double entry_accuracy() const { return entry_steps ? double(correct_entries) / entry_steps : 0.0; }
  double label_accuracy() const { return labels ? double(correct_labels) / labels : 0.0; }
};

TeacherForcedAccuracy Evaluate(const Model &model, std::span<const TrainingExample> data);

}  // namespace convsp

#endif  // CONVSP_TRAIN_H_
