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

#include "convsp/bfs.h"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <tuple>

#include "convsp/errors.h"

namespace convsp {
namespace {

bool IsNumberToken(const std::string &t, int64_t *value) {
  if (t.empty() || !std::all_of(t.begin(), t.end(), [](unsigned char c) { return std::isdigit(c); })) {
    return false;
  }
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), *value);
  return ec == std::errc() && ptr == t.data() + t.size();
}

bool EntryLess(const Entry &a, const Entry &b) {
  if (a.index() != b.index()) return a.index() < b.index();
  if (auto *x = std::get_if<EntityEntry>(&a)) {
    const auto &y = std::get<EntityEntry>(b);
    return std::tie(x->position, x->id) < std::tie(y.position, y.id);
  }
  if (auto *x = std::get_if<PredicateId>(&a)) return *x < std::get<PredicateId>(b);
  if (auto *x = std::get_if<TypeId>(&a)) return *x < std::get<TypeId>(b);
  const auto &x = std::get<NumberEntry>(a);
  const auto &y = std::get<NumberEntry>(b);
  return std::tie(x.position, x.value) < std::tie(y.position, y.value);
}

DecodeToken StartFor(const Value &v) {
  if (std::holds_alternative<EntitySet>(v)) return DecodeToken::kA1;
  if (std::holds_alternative<int64_t>(v)) return DecodeToken::kA2;
  return DecodeToken::kA3;
}

struct Prefix {
  std::vector<Step> steps;
  DerivationState derivation;
  PartialEvaluator evaluator;
};

}  // namespace

EntryPools PoolsFromLinks(std::span<const std::string> tokens,
                          std::span<const LinkedMention> mentions, const KnowledgeBase &kb,
                          int max_candidates, int max_catalog) {
  EntryPools pools;
  std::map<EntityId, int> latest;
  for (const LinkedMention &lm : mentions) {
    int n = std::min<int>(max_candidates, lm.candidates.size());
    for (int i = 0; i < n; ++i) {
      int &pos = latest[lm.candidates[i]];
      pos = std::max(pos, lm.mention.begin);
    }
  }
  for (const auto &[e, pos] : latest) pools.entities.push_back(EntityEntry{e, pos});
  for (int i = 0; i < static_cast<int>(tokens.size()); ++i) {
    int64_t value;
    if (IsNumberToken(tokens[i], &value)) pools.numbers.push_back(NumberEntry{value, i});
  }
  if (kb.num_predicates() <= max_catalog) {
    for (int i = 0; i < kb.num_predicates(); ++i) pools.predicates.push_back(PredicateId(i));
  }
  if (kb.num_types() <= max_catalog) {
    for (int i = 0; i < kb.num_types(); ++i) pools.types.push_back(TypeId(i));
  }
  return pools;
}

bool StepLess(const Step &a, const Step &b) {
  if (a.token != b.token) return TokenIndex(a.token) < TokenIndex(b.token);
  if (a.entry.has_value() != b.entry.has_value()) return !a.entry.has_value();
  return a.entry && EntryLess(*a.entry, *b.entry);
}

bool ProgramLess(std::span<const Step> a, std::span<const Step> b) {
  if (a.size() != b.size()) return a.size() < b.size();
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end(), StepLess);
}

SearchResult BfsSearch(const Answer &gold, const EntryPools &pools, const KnowledgeBase &kb,
                       const SearchConfig &config) {
  if (config.buffer_size <= 0) throw Error("buffer_size must be positive");

  // Entry candidates per category, in StepLess order.
  std::vector<Step> entity_steps, predicate_steps, type_steps, number_steps;
  for (const EntityEntry &e : pools.entities) entity_steps.push_back(Step::Of(e));
  for (PredicateId p : pools.predicates) predicate_steps.push_back(Step::Of(p));
  for (TypeId t : pools.types) type_steps.push_back(Step::Of(t));
  for (const NumberEntry &n : pools.numbers) number_steps.push_back(Step::Of(n));
  for (auto *v : {&entity_steps, &predicate_steps, &type_steps, &number_steps}) {
    std::sort(v->begin(), v->end(), StepLess);
    v->erase(std::unique(v->begin(), v->end()), v->end());
  }
  auto candidates = [&](DecodeToken token) -> const std::vector<Step> & {
    switch (token) {
      case DecodeToken::kEntity: return entity_steps;
      case DecodeToken::kPredicate: return predicate_steps;
      case DecodeToken::kType: return type_steps;
      default: return number_steps;
    }
  };

  // An empty gold set must not be pruned away by emptiness; only failures
  // are dropped then.
  const auto *gold_set = std::get_if<EntitySet>(&gold.value);
  const bool prune_empty = !(gold_set && gold_set->empty());

  SearchResult result;
  Prefix start{{}, DerivationState(), PartialEvaluator(kb, nullptr, config.exec_budget)};
  Step start_step = Step::Op(StartFor(gold.value));
  start.steps.push_back(start_step);
  start.derivation.Push(start_step.token);
  start.evaluator.Push(start_step);

  std::vector<Prefix> frontier;
  frontier.push_back(std::move(start));
  int first_found = -1;
  result.levels = 1;

  while (!frontier.empty()) {
    std::vector<Prefix> next;
    const int length = result.levels + 1;
    for (const Prefix &parent : frontier) {
      for (DecodeToken token : parent.derivation.Legal(&config.limits)) {
        std::vector<Step> op_only = {Step::Op(token)};
        const std::vector<Step> &choices = IsEntryToken(token) ? candidates(token) : op_only;
        for (const Step &step : choices) {
          DerivationState derivation = parent.derivation;
          derivation.Push(token);
          const bool done = derivation.complete();
          if (!done && static_cast<int>(next.size()) >= config.buffer_size) continue;
          if (++result.evaluated > config.work_budget) {
            result.budget_exceeded = true;
            goto finish;
          }
          PartialEvaluator evaluator = parent.evaluator;
          evaluator.Push(step);
          if (done) {
            if (evaluator.result() && *evaluator.result() == gold.value) {
              GoldProgram program{parent.steps};
              program.steps.push_back(step);
              result.programs.push_back(std::move(program));
              if (first_found < 0) first_found = length;
            }
            continue;
          }
          if (evaluator.failed()) continue;
          if (prune_empty && evaluator.verdict() == PartialVerdict::kEmpty) continue;
          Prefix child{parent.steps, std::move(derivation), std::move(evaluator)};
          child.steps.push_back(step);
          next.push_back(std::move(child));
        }
      }
    }
    result.levels = length;
    if (first_found >= 0 && length >= first_found + config.extra_levels) break;
    frontier = std::move(next);
  }

finish:
  std::sort(result.programs.begin(), result.programs.end(),
            [](const GoldProgram &a, const GoldProgram &b) { return ProgramLess(a.steps, b.steps); });
  return result;
}

SuccessReport SuccessRatio(std::span<const SearchQuestion> questions, const KnowledgeBase &kb,
                           const SearchConfig &config) {
  SuccessReport report;
  for (const SearchQuestion &q : questions) {
    SearchResult r = BfsSearch(q.gold, q.pools, kb, config);
    auto &count = report.by_type[q.type];
    ++count.total;
    ++report.overall.total;
    if (r.success()) {
      ++count.found;
      ++report.overall.found;
    }
    if (r.budget_exceeded) ++report.budget_failures;
  }
  return report;
}

}  // namespace convsp
