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

#ifndef CONVSP_EXECUTOR_H_
#define CONVSP_EXECUTOR_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "convsp/grammar.h"
#include "convsp/kb.h"

namespace convsp {

// Sorted, duplicate-free entity list.
using EntitySet = std::vector<EntityId>;

// Result of evaluating an intermediate category: set, num or bool.
using Value = std::variant<EntitySet, int64_t, bool>;

inline bool IsSet(const Value &v) { return std::holds_alternative<EntitySet>(v); }

struct Answer {
  Value value;
  bool operator==(const Answer &) const = default;
};

// Entity names (catalog surface text), integer, or true/false.
std::string RenderAnswer(const Answer &answer, const KnowledgeBase &kb);
// Same rendering with string ids instead of surface text.
std::string RenderAnswerIds(const Answer &answer, const KnowledgeBase &kb);

// Counts primitive set operations; throws BudgetExceeded past the limit.
class WorkBudget {
 public:
  static constexpr int64_t kDefaultLimit = 100000;

  explicit WorkBudget(int64_t limit = kDefaultLimit) : limit_(limit) {}
  void Charge(int64_t units);
  int64_t used() const { return used_; }
  int64_t limit() const { return limit_; }

 private:
  int64_t limit_;
  int64_t used_ = 0;
};

// Evaluates a complete logical form whose entity and number leaves all
// carry resolved values. Throws ExecutionError on unresolved pointers and
// BudgetExceeded when the work budget runs out.
Answer Execute(const LogicalForm &lf, const KnowledgeBase &kb,
               int64_t budget = WorkBudget::kDefaultLimit);
Value Evaluate(const Node &node, const KnowledgeBase &kb, WorkBudget &budget);

// Degree of an entity for the comparison operators: number of distinct
// p-objects (0 when it has no p edge).
int64_t Degree(const KnowledgeBase &kb, EntityId e, PredicateId p);

enum class PartialVerdict { kNonEmpty, kEmpty, kUnknown };

std::string_view VerdictName(PartialVerdict v);

// Resolves pointer leaves during partial evaluation. nullopt leaves the
// subtree unevaluated, or fails the prefix when `final` is set (the pointer
// can never be substituted).
struct PointerResolver {
  std::function<std::optional<EntityId>(int position)> entity;
  std::function<std::optional<int64_t>(int position)> number;
  bool final = false;
};

// Evaluates a prefix step by step, closing subtrees as soon as their last
// argument arrives. The verdict is kEmpty only when every completion of
// the prefix yields an empty set or fails; an empty operand can only force
// that through find/inter/diff(left)/larger/less/equal/argmax/argmin/filter
// chains up to a set-valued root. Count and membership stop the chain, so
// a num or bool form never reports kEmpty unless it fails; once complete it
// reports kUnknown.
class PartialEvaluator {
 public:
  PartialEvaluator(const KnowledgeBase &kb, const PointerResolver *resolver = nullptr,
                   int64_t budget = WorkBudget::kDefaultLimit);

  // Steps must form a valid prefix; legality is the caller's concern.
  void Push(const Step &step);

  PartialVerdict verdict() const;
  bool complete() const { return root_.has_value(); }
  bool failed() const { return failed_; }
  // Value of the completed form; nullopt when unresolved or failed.
  const std::optional<Value> &result() const { return result_; }

 private:
  struct Operand {
    // One of: evaluated Value, entry constant, or nothing (unknown).
    std::variant<std::monostate, Value, EntityId, PredicateId, TypeId, int64_t> value;
    bool empty = false;     // known to be the empty set
    bool nonempty = false;  // known to be a nonempty set
  };
  struct Frame {
    DecodeToken op;
    std::vector<Operand> args;
    bool doomed = false;   // result is the empty set for every completion
    bool assured = false;  // result is a nonempty set for every completion
  };

  void Deliver(Operand operand);
  Operand Close(Frame &frame);

  const KnowledgeBase *kb_;
  const PointerResolver *resolver_;
  WorkBudget budget_;
  std::vector<Frame> frames_;
  std::optional<Operand> root_;
  std::optional<Value> result_;
  bool failed_ = false;
};

// Convenience wrapper: feeds `prefix` to a PartialEvaluator.
PartialVerdict ExecutePartial(std::span<const Step> prefix, const KnowledgeBase &kb,
                              const PointerResolver *resolver = nullptr,
                              int64_t budget = WorkBudget::kDefaultLimit);

}  // namespace convsp

#endif  // CONVSP_EXECUTOR_H_
