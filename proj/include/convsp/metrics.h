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

#ifndef CONVSP_METRICS_H_
#define CONVSP_METRICS_H_

#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "convsp/executor.h"
#include "convsp/kb.h"
#include "convsp/linker.h"

namespace convsp {

// 2PR/(P+R), 0 when P+R = 0.
double F1(double precision, double recall);

struct SetScore {
  double precision = 0;
  double recall = 0;
};

// Precision and recall of a predicted entity set against the gold set. An
// empty prediction scores 0/0 against a nonempty gold set; two empty sets
// score 1/1.
SetScore ScoreSets(const EntitySet &predicted, const EntitySet &gold);

// Scores for one question type. Entity-set questions contribute to the
// averaged precision and recall; number and boolean questions to accuracy.
struct TypeMetrics {
  int questions = 0;
  int set_questions = 0;
  double precision = 0;  // mean over set questions
  double recall = 0;
  int exact_questions = 0;  // number and boolean questions
  double accuracy = 0;

  double f1() const { return F1(precision, recall); }
  // F1 and accuracy weighted by their question counts.
  double score() const;
};

struct Counts {
  int64_t hits = 0, predicted = 0, gold = 0;
  double precision() const { return predicted ? double(hits) / predicted : 0.0; }
  double recall() const { return gold ? double(hits) / gold : 0.0; }
  double f1() const { return F1(precision(), recall()); }
};

struct MetricsReport {
  std::map<std::string, TypeMetrics> by_type;
  TypeMetrics all;           // every question pooled
  double overall = 0;        // question-weighted mean of per-type scores
  Counts linking;            // predicted vs gold entity sets per question
  Counts detection;          // mention spans with their types
  double nonempty_ratio = 0; // questions whose chosen form gave a usable answer
  double mean_candidates = 0;
  std::optional<double> bfs_success;
};

// Accumulates per-question outcomes.
class MetricsBuilder {
 public:
  // `predicted` is nullopt when the system gave no answer.
  void AddAnswer(const std::string &type, const Answer &gold, const std::optional<Answer> &predicted);
  // Linking outcome for one question: gold entity set against the top
  // candidate of every predicted mention.
  void AddLinking(const EntitySet &gold, std::span<const LinkedMention> predicted);
  // Exact span-and-type matching of predicted mentions against gold ones.
  void AddDetection(std::span<const Mention> gold, std::span<const Mention> predicted);
  void SetBfsSuccess(double ratio) { bfs_success_ = ratio; }

  MetricsReport Report() const;

 private:
  struct Sums {
    int questions = 0, set_questions = 0, exact_questions = 0, correct = 0;
    double precision = 0, recall = 0;
    void Add(const Sums &o);
  };
  static TypeMetrics Finish(const Sums &s);

  std::map<std::string, Sums> by_type_;
  Counts linking_, detection_;
  int answered_ = 0;
  int64_t candidates_ = 0, mentions_ = 0;
  std::optional<double> bfs_success_;
};

// Scores answers alone: one prediction per question, in order.
MetricsReport ScoreAnswers(std::span<const std::string> types, std::span<const Answer> gold,
                           std::span<const std::optional<Answer>> predicted);

void PrintReport(std::ostream &out, const MetricsReport &report);
std::string ReportJson(const MetricsReport &report);

}  // namespace convsp

#endif  // CONVSP_METRICS_H_
