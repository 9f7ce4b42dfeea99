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

#ifndef CONVSP_EXPERIMENT_H_
#define CONVSP_EXPERIMENT_H_

#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "convsp/bfs.h"
#include "convsp/dataset.h"
#include "convsp/inference.h"
#include "convsp/metrics.h"
#include "convsp/model.h"
#include "convsp/train.h"

namespace convsp {

enum class Mode { kFull, kNoTypeFilter, kSeparate, kNoBoth };

struct ModeFlags {
  bool joint = true;        // one model trained on both losses
  bool type_filter = true;  // filter link candidates by detected type
  bool operator==(const ModeFlags &) const = default;
};

ModeFlags FlagsFor(Mode mode);
std::string_view ModeName(Mode mode);
// "full", "no-type-filter", "separate", "no-both". Throws Error otherwise.
Mode ParseMode(std::string_view name);

struct ExperimentConfig {
  Mode mode = Mode::kFull;
  ModelConfig model;  // vocabulary, predicate and type counts are filled in
  TrainConfig train;
  InstanceOptions instances;
  SearchConfig search;
  // Ignore gold forms and search for programs from the answers.
  bool weak_supervision = false;
  AnswerOptions answer;
  int index_threshold = InvertedIndex::kDefaultThreshold;
};

// Model configurations a mode trains: the parser, and in separate mode a
// second model trained on detection alone.
ModelConfig ParserConfig(const ExperimentConfig &config, const Vocabulary &vocab,
                         const KnowledgeBase &kb);
std::optional<ModelConfig> DetectorConfig(const ExperimentConfig &config, const Vocabulary &vocab,
                                          const KnowledgeBase &kb);

struct TrainingSet {
  std::vector<TrainingExample> examples;
  int questions = 0;
  int searched = 0;  // questions that needed BFS
  int found = 0;     // of those, with a program
  double search_success() const { return searched ? double(found) / searched : 1.0; }
};

// Questions without a usable target are left out.
TrainingSet MakeTrainingSet(const std::vector<QuestionInstance> &instances, const KnowledgeBase &kb,
                            const Vocabulary &vocab, const ExperimentConfig &config);

struct System {
  Vocabulary vocab;
  std::unique_ptr<Model> parser;
  std::unique_ptr<Model> detector;  // separate mode only
  ModeFlags flags;

  const Model &detection_model() const { return detector ? *detector : *parser; }
};

using EpochCallback = std::function<void(std::string_view model, const EpochStats &)>;

System TrainSystem(const TrainingSet &data, Vocabulary vocab, const KnowledgeBase &kb,
                   const ExperimentConfig &config, const EpochCallback &on_epoch = {});

// Checkpoints: the parser at `path`, the detector (if any) at path.detector.
void SaveSystem(const System &system, const std::string &path);
System LoadSystem(const std::string &path, Mode mode);

struct Evaluation {
  MetricsReport report;
  std::vector<AnswerResult> results;  // one per question
};

Evaluation EvaluateSystem(const System &system, const std::vector<QuestionInstance> &questions,
                          const KnowledgeBase &kb, const InvertedIndex &index,
                          const AnswerOptions &options);

AnswerOptions OptionsFor(const System &system, const ExperimentConfig &config);

// Interactive session keeping a rolling dialog history.
class ReplSession {
 public:
  ReplSession(const System &system, const KnowledgeBase &kb, const InvertedIndex &index,
              AnswerOptions options, InstanceOptions instances = {});

  // Answers one utterance and records it, with the reply, in the history.
  AnswerResult Ask(std::string_view utterance);
  void Reset() { history_.clear(); }
  const std::vector<std::vector<std::string>> &history() const { return history_; }
  // The tokens the model sees for `utterance` given the current history.
  std::vector<std::string> Context(std::string_view utterance) const;

  // Line loop: ":reset" clears the history, ":quit" or end of input stops.
  void Run(std::istream &in, std::ostream &out);
  std::string Describe(const AnswerResult &result) const;

 private:
  const System &system_;
  const KnowledgeBase &kb_;
  const InvertedIndex &index_;
  AnswerOptions options_;
  InstanceOptions instances_;
  std::vector<std::vector<std::string>> history_;  // tokens per turn
};

}  // namespace convsp

#endif  // CONVSP_EXPERIMENT_H_
