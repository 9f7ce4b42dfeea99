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

#include "convsp/train.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "convsp/errors.h"

namespace convsp {

WarmupLinearSchedule::WarmupLinearSchedule(double peak, int64_t total_steps,
                                           double warmup_fraction)
    : peak_(peak), total_(std::max<int64_t>(1, total_steps)) {
  warmup_ = std::clamp<int64_t>(std::llround(warmup_fraction * total_), 1, total_);
}

double WarmupLinearSchedule::Rate(int64_t step) const {
  if (step <= 0) return 0.0;
  if (step < warmup_) return peak_ * step / warmup_;
  if (step >= total_) return 0.0;
  if (total_ == warmup_) return peak_;
  return peak_ * double(total_ - step) / double(total_ - warmup_);
}

void Adam::Step(std::span<Parameter *const> params, double lr) {
  ++t_;
  const double c1 = 1.0 - std::pow(config_.beta1, t_);
  const double c2 = 1.0 - std::pow(config_.beta2, t_);
  for (Parameter *p : params) {
    p->m = config_.beta1 * p->m + (1.0 - config_.beta1) * p->grad;
    p->v = config_.beta2 * p->v + (1.0 - config_.beta2) * p->grad.cwiseProduct(p->grad);
    p->value.array() -=
        lr * (p->m.array() / c1) / ((p->v.array() / c2).sqrt() + config_.epsilon);
    p->grad.setZero();
  }
}

TrainLog Train(Model &model, std::span<const TrainingExample> data, const TrainConfig &config,
               const std::function<void(const EpochStats &)> &on_epoch) {
  if (config.batch_size < 1 || config.epochs < 0) throw Error("invalid training configuration");
  TrainLog log;
  if (data.empty()) return log;
  const int64_t batches = (static_cast<int64_t>(data.size()) + config.batch_size - 1) /
                          config.batch_size;
  WarmupLinearSchedule schedule(config.learning_rate, batches * config.epochs,
                                config.warmup_fraction);
  Adam adam;
  std::vector<Parameter *> params = model.parameters();
  std::vector<size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(config.seed);
  model.ZeroGrad();

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    EpochStats stats;
    stats.epoch = epoch + 1;
    for (size_t begin = 0; begin < order.size(); begin += config.batch_size) {
      size_t end = std::min(order.size(), begin + config.batch_size);
      const double scale = 1.0 / double(end - begin);
      double batch_loss = 0;
      for (size_t i = begin; i < end; ++i) {
        Graph g;
        LossValue lv;
        Var loss = model.Loss(g, data[order[i]], &lv, true);
        g.Backward(g.Scale(loss, scale));
        batch_loss += lv.total * scale;
        stats.loss += lv.total;
        stats.parsing += lv.parsing;
        stats.detection += lv.detection;
      }
      if (!std::isfinite(batch_loss)) {
        throw DivergenceError("non-finite loss at epoch " + std::to_string(epoch + 1) +
                              ", step " + std::to_string(log.steps));
      }
      if (config.clip_norm > 0) {
        double sq = 0;
        for (Parameter *p : params) sq += p->grad.squaredNorm();
        double norm = std::sqrt(sq);
        if (norm > config.clip_norm) {
          for (Parameter *p : params) p->grad *= config.clip_norm / norm;
        }
      }
      adam.Step(params, schedule.Rate(log.steps));
      ++log.steps;
      log.batch_losses.push_back(batch_loss);
    }
    stats.loss /= data.size();
    stats.parsing /= data.size();
    stats.detection /= data.size();
    log.epochs.push_back(stats);
    if (on_epoch) on_epoch(stats);
  }
  return log;
}

TeacherForcedAccuracy Evaluate(const Model &model, std::span<const TrainingExample> data) {
  TeacherForcedAccuracy acc;
  for (const TrainingExample &ex : data) {
    EncoderState state = model.Encode(ex.input);
    if (!ex.labels.empty()) {
      std::vector<int> predicted = model.PredictLabels(state);
      for (size_t i = 0; i < predicted.size() && i < ex.labels.size(); ++i) {
        ++acc.labels;
        acc.correct_labels += predicted[i] == ex.labels[i];
      }
    }
    if (ex.program.empty()) continue;
    DecodeTargets t = MakeTargets(ex.program, state.content_length());
    std::vector<DecodeToken> tokens;
    for (const Step &s : ex.program) tokens.push_back(s.token);
    std::vector<StepDistributions> dists = model.DecodeAll(state, tokens);
    for (size_t r = 0; r < dists.size(); ++r) {
      int best;
      dists[r].token.maxCoeff(&best);
      ++acc.steps;
      acc.correct_tokens += best == t.tokens[r];
      const Eigen::VectorXd *head = nullptr;
      int target = -1;
      if (t.predicates[r] >= 0) head = &dists[r].predicate, target = t.predicates[r];
      if (t.types[r] >= 0) head = &dists[r].type, target = t.types[r];
      if (t.entities[r] >= 0) head = &dists[r].entity, target = t.entities[r];
      if (t.numbers[r] >= 0) head = &dists[r].number, target = t.numbers[r];
      if (head) {
        head->maxCoeff(&best);
        ++acc.entry_steps;
        acc.correct_entries += best == target;
      }
    }
  }
  return acc;
}

}  // namespace convsp
