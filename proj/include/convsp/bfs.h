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

#ifndef CONVSP_BFS_H_
#define CONVSP_BFS_H_

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "convsp/executor.h"
#include "convsp/grammar.h"
#include "convsp/kb.h"
#include "convsp/linker.h"

namespace convsp {

// Constants a search may place in entry slots. Entities and numbers carry
// the question position they were found at so that found programs can
// supervise the pointer heads.
struct EntryPools {
  std::vector<EntityEntry> entities;  // id and position both set
  std::vector<PredicateId> predicates;
  std::vector<TypeId> types;
  std::vector<NumberEntry> numbers;  // value and position both set
};

// Entities from linked mentions (top `max_candidates` per mention, pointing
// at the mention's first token; a repeated entity keeps its latest
// position), numbers from digit tokens, and every predicate and type when
// the KB has at most `max_catalog` of them.
EntryPools PoolsFromLinks(std::span<const std::string> tokens,
                          std::span<const LinkedMention> mentions, const KnowledgeBase &kb,
                          int max_candidates = 1, int max_catalog = 1000);

struct SearchConfig {
  int buffer_size = 1000;
  GrammarLimits limits{4, 20};
  // Upper bound on evaluated child prefixes for one search.
  int64_t work_budget = 2000000;
  // Executor budget for each partial evaluation.
  int64_t exec_budget = WorkBudget::kDefaultLimit;
  // Levels to keep searching after the first solution is found.
  int extra_levels = 0;
};

// A training target: the step sequence carries the decode tokens and, on
// entry steps, the predicate/type ids and entity/number positions.
struct GoldProgram {
  std::vector<Step> steps;  // start rule first, no end token

  LogicalForm form() const { return Deserialize(steps); }
  bool operator==(const GoldProgram &) const = default;
};

// Total order used for frontier truncation and target selection: shorter
// first, then token index, then instantiation.
bool StepLess(const Step &a, const Step &b);
bool ProgramLess(std::span<const Step> a, std::span<const Step> b);

struct SearchResult {
  std::vector<GoldProgram> programs;  // sorted by ProgramLess
  bool budget_exceeded = false;
  int64_t evaluated = 0;
  int levels = 0;

  bool success() const { return !programs.empty(); }
  // Shortest, then lexicographically least program; requires success().
  const GoldProgram &target() const { return programs.front(); }
  // More than one program reproduces the answer: some are likely spurious.
  bool ambiguous() const { return programs.size() > 1; }
};

// Level-order search over grammar prefixes. A level extends every frontier
// prefix by one step; prefixes whose partial execution is provably empty
// (or failing) are dropped and the survivors are truncated to the buffer.
SearchResult BfsSearch(const Answer &gold, const EntryPools &pools, const KnowledgeBase &kb,
                       const SearchConfig &config = {});

struct SearchQuestion {
  std::string type;
  Answer gold;
  EntryPools pools;
};

struct SuccessReport {
  struct Count {
    int found = 0;
    int total = 0;
    double ratio() const { return total ? static_cast<double>(found) / total : 0.0; }
  };
  std::map<std::string, Count> by_type;
  Count overall;
  int budget_failures = 0;
};

SuccessReport SuccessRatio(std::span<const SearchQuestion> questions, const KnowledgeBase &kb,
                           const SearchConfig &config = {});

}  // namespace convsp

#endif  // CONVSP_BFS_H_
