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

#include "convsp/metrics.h"

#include <algorithm>
#include <cstdio>
#include <iterator>

#include "convsp/errors.h"
#include "json.hpp"

namespace convsp {

double F1(double precision, double recall) {
  double sum = precision + recall;
  return sum > 0 ? 2 * precision * recall / sum : 0.0;
}

SetScore ScoreSets(const EntitySet &predicted, const EntitySet &gold) {
  if (predicted.empty() && gold.empty()) return {1.0, 1.0};
  std::vector<EntityId> common;
  std::set_intersection(predicted.begin(), predicted.end(), gold.begin(), gold.end(),
                        std::back_inserter(common));
  SetScore s;
  if (!predicted.empty()) s.precision = double(common.size()) / predicted.size();
  if (!gold.empty()) s.recall = double(common.size()) / gold.size();
  return s;
}

double TypeMetrics::score() const {
  if (questions == 0) return 0.0;
  return (set_questions * f1() + exact_questions * accuracy) / questions;
}

void MetricsBuilder::Sums::Add(const Sums &o) {
  questions += o.questions;
  set_questions += o.set_questions;
  exact_questions += o.exact_questions;
  correct += o.correct;
  precision += o.precision;
  recall += o.recall;
}

void MetricsBuilder::AddAnswer(const std::string &type, const Answer &gold,
                               const std::optional<Answer> &predicted) {
  Sums &s = by_type_[type];
  ++s.questions;
  if (predicted) {
    const EntitySet *set = std::get_if<EntitySet>(&predicted->value);
    if (!set || !set->empty()) ++answered_;
  }
  if (const EntitySet *g = std::get_if<EntitySet>(&gold.value)) {
    ++s.set_questions;
    const EntitySet *p = predicted ? std::get_if<EntitySet>(&predicted->value) : nullptr;
    SetScore score = ScoreSets(p ? *p : EntitySet{}, *g);
    s.precision += score.precision;
    s.recall += score.recall;
  } else {
    ++s.exact_questions;
    if (predicted && *predicted == gold) ++s.correct;
  }
}

void MetricsBuilder::AddLinking(const EntitySet &gold, std::span<const LinkedMention> predicted) {
  EntitySet chosen;
  for (const LinkedMention &m : predicted) {
    candidates_ += m.candidates.size();
    ++mentions_;
    if (!m.candidates.empty()) chosen.push_back(m.candidates.front());
  }
  std::sort(chosen.begin(), chosen.end());
  chosen.erase(std::unique(chosen.begin(), chosen.end()), chosen.end());
  std::vector<EntityId> common;
  std::set_intersection(chosen.begin(), chosen.end(), gold.begin(), gold.end(),
                        std::back_inserter(common));
  linking_.hits += common.size();
  linking_.predicted += chosen.size();
  linking_.gold += gold.size();
}

void MetricsBuilder::AddDetection(std::span<const Mention> gold, std::span<const Mention> predicted) {
  auto key = [](const Mention &m) { return std::tuple(m.begin, m.end, m.type); };
  for (const Mention &p : predicted) {
    for (const Mention &g : gold) {
      if (key(p) == key(g)) {
        ++detection_.hits;
        break;
      }
    }
  }
  detection_.predicted += predicted.size();
  detection_.gold += gold.size();
}

TypeMetrics MetricsBuilder::Finish(const Sums &s) {
  TypeMetrics t;
  t.questions = s.questions;
  t.set_questions = s.set_questions;
  t.exact_questions = s.exact_questions;
  if (s.set_questions) {
    t.precision = s.precision / s.set_questions;
    t.recall = s.recall / s.set_questions;
  }
  if (s.exact_questions) t.accuracy = double(s.correct) / s.exact_questions;
  return t;
}

MetricsReport MetricsBuilder::Report() const {
  MetricsReport r;
  Sums pooled;
  double weighted = 0;
  for (const auto &[type, sums] : by_type_) {
    TypeMetrics t = Finish(sums);
    r.by_type[type] = t;
    weighted += t.score() * t.questions;
    pooled.Add(sums);
  }
  r.all = Finish(pooled);
  if (pooled.questions) {
    r.overall = weighted / pooled.questions;
    r.nonempty_ratio = double(answered_) / pooled.questions;
  }
  r.linking = linking_;
  r.detection = detection_;
  if (mentions_) r.mean_candidates = double(candidates_) / mentions_;
  r.bfs_success = bfs_success_;
  return r;
}

MetricsReport ScoreAnswers(std::span<const std::string> types, std::span<const Answer> gold,
                           std::span<const std::optional<Answer>> predicted) {
  if (types.size() != gold.size() || gold.size() != predicted.size()) {
    throw Error("one prediction per question is required");
  }
  MetricsBuilder b;
  for (size_t i = 0; i < gold.size(); ++i) b.AddAnswer(types[i], gold[i], predicted[i]);
  return b.Report();
}

void PrintReport(std::ostream &out, const MetricsReport &r) {
  char line[256];
  std::snprintf(line, sizeof line, "%-38s %5s %7s %7s %7s %7s\n", "question type", "n", "P", "R",
                "F1", "acc");
  out << line;
  auto row = [&](const std::string &name, const TypeMetrics &t) {
    char p[16] = "-", rc[16] = "-", f[16] = "-", a[16] = "-";
    if (t.set_questions) {
      std::snprintf(p, sizeof p, "%.4f", t.precision);
      std::snprintf(rc, sizeof rc, "%.4f", t.recall);
      std::snprintf(f, sizeof f, "%.4f", t.f1());
    }
    if (t.exact_questions) std::snprintf(a, sizeof a, "%.4f", t.accuracy);
    std::snprintf(line, sizeof line, "%-38s %5d %7s %7s %7s %7s\n", name.c_str(), t.questions, p,
                  rc, f, a);
    out << line;
  };
  for (const auto &[type, t] : r.by_type) row(type, t);
  row("all", r.all);
  std::snprintf(line, sizeof line,
                "overall %.4f\nlinking P %.4f R %.4f\ndetection P %.4f R %.4f F1 %.4f\n"
                "nonempty %.4f\nmean candidates %.3f\n",
                r.overall, r.linking.precision(), r.linking.recall(), r.detection.precision(),
                r.detection.recall(), r.detection.f1(), r.nonempty_ratio, r.mean_candidates);
  out << line;
  if (r.bfs_success) out << "bfs success " << *r.bfs_success << '\n';
}

std::string ReportJson(const MetricsReport &r) {
  using json = nlohmann::json;
  auto type_json = [](const TypeMetrics &t) {
    json j{{"questions", t.questions}, {"score", t.score()}};
    if (t.set_questions) {
      j["precision"] = t.precision;
      j["recall"] = t.recall;
      j["f1"] = t.f1();
    }
    if (t.exact_questions) j["accuracy"] = t.accuracy;
    return j;
  };
  json j;
  for (const auto &[type, t] : r.by_type) j["by_type"][type] = type_json(t);
  j["all"] = type_json(r.all);
  j["overall"] = r.overall;
  j["linking"] = {{"precision", r.linking.precision()}, {"recall", r.linking.recall()}};
  j["detection"] = {{"precision", r.detection.precision()},
                    {"recall", r.detection.recall()},
                    {"f1", r.detection.f1()}};
  j["nonempty_ratio"] = r.nonempty_ratio;
  j["mean_candidates"] = r.mean_candidates;
  if (r.bfs_success) j["bfs_success"] = *r.bfs_success;
  return j.dump();
}

}  // namespace convsp
