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

#include "convsp/executor.h"

#include <algorithm>
#include <iterator>

#include "convsp/errors.h"

namespace convsp {
namespace {

using T = DecodeToken;

template <typename ArgT>
const EntitySet &SetOf(const ArgT &arg) {
  const Value &v = std::get<Value>(arg);
  if (!IsSet(v)) throw ExecutionError("expected a set operand");
  return std::get<EntitySet>(v);
}

template <typename ArgT>
int64_t NumOf(const ArgT &arg) {
  if (auto *n = std::get_if<int64_t>(&arg)) return *n;
  const Value &v = std::get<Value>(arg);
  if (!std::holds_alternative<int64_t>(v)) throw ExecutionError("expected a number operand");
  return std::get<int64_t>(v);
}

EntitySet Normalize(EntitySet s) {
  std::sort(s.begin(), s.end());
  s.erase(std::unique(s.begin(), s.end()), s.end());
  return s;
}

template <typename Compare>
EntitySet SelectByDegree(const KnowledgeBase &kb, const EntitySet &s, PredicateId p,
                         WorkBudget &budget, Compare keep) {
  budget.Charge(static_cast<int64_t>(s.size()));
  EntitySet out;
  for (EntityId e : s) {
    if (keep(Degree(kb, e, p))) out.push_back(e);
  }
  return out;
}

EntitySet Extreme(const KnowledgeBase &kb, const EntitySet &s, PredicateId p,
                  WorkBudget &budget, bool maximum) {
  budget.Charge(static_cast<int64_t>(s.size()));
  if (s.empty()) return {};
  std::vector<int64_t> degrees;
  for (EntityId e : s) degrees.push_back(Degree(kb, e, p));
  int64_t best = maximum ? *std::max_element(degrees.begin(), degrees.end())
                         : *std::min_element(degrees.begin(), degrees.end());
  EntitySet out;
  for (size_t i = 0; i < s.size(); ++i) {
    if (degrees[i] == best) out.push_back(s[i]);
  }
  return out;
}

// Applies an operator to evaluated operands (in argument order).
template <typename ArgT>
Value Apply(DecodeToken op, std::span<const ArgT> args, const KnowledgeBase &kb,
            WorkBudget &budget) {
  switch (op) {
    case T::kA4: {
      const EntitySet &s = SetOf(args[0]);
      PredicateId p = std::get<PredicateId>(args[1]);
      EntitySet out;
      budget.Charge(static_cast<int64_t>(s.size()));
      for (EntityId e : s) {
        auto objects = kb.ObjectsOf(e, p);
        budget.Charge(static_cast<int64_t>(objects.size()));
        out.insert(out.end(), objects.begin(), objects.end());
      }
      return Normalize(std::move(out));
    }
    case T::kA5:
      budget.Charge(1);
      return static_cast<int64_t>(SetOf(args[0]).size());
    case T::kA6: {
      EntityId e = std::get<EntityId>(args[0]);
      const EntitySet &s = SetOf(args[1]);
      budget.Charge(1);
      return std::binary_search(s.begin(), s.end(), e);
    }
    case T::kA7:
    case T::kA8:
    case T::kA9: {
      const EntitySet &a = SetOf(args[0]);
      const EntitySet &b = SetOf(args[1]);
      budget.Charge(static_cast<int64_t>(a.size() + b.size()));
      EntitySet out;
      auto sink = std::back_inserter(out);
      if (op == T::kA7) std::set_union(a.begin(), a.end(), b.begin(), b.end(), sink);
      if (op == T::kA8) std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), sink);
      if (op == T::kA9) std::set_difference(a.begin(), a.end(), b.begin(), b.end(), sink);
      return out;
    }
    case T::kA10:
    case T::kA11:
    case T::kA12: {
      const EntitySet &s = SetOf(args[0]);
      PredicateId p = std::get<PredicateId>(args[1]);
      int64_t k = NumOf(args[2]);
      if (op == T::kA10) return SelectByDegree(kb, s, p, budget, [k](int64_t d) { return d > k; });
      if (op == T::kA11) return SelectByDegree(kb, s, p, budget, [k](int64_t d) { return d < k; });
      return SelectByDegree(kb, s, p, budget, [k](int64_t d) { return d == k; });
    }
    case T::kA13:
    case T::kA14:
      return Extreme(kb, SetOf(args[0]), std::get<PredicateId>(args[1]), budget, op == T::kA13);
    case T::kA15: {
      TypeId tp = std::get<TypeId>(args[0]);
      const EntitySet &s = SetOf(args[1]);
      budget.Charge(static_cast<int64_t>(s.size()));
      EntitySet out;
      for (EntityId e : s) {
        if (kb.HasType(e, tp)) out.push_back(e);
      }
      return out;
    }
    case T::kA16:
      return NumOf(args[0]);
    case T::kA17: {
      EntityId e = std::get<EntityId>(args[0]);
      if (!kb.Valid(e)) throw ExecutionError("unknown entity in set()");
      budget.Charge(1);
      return EntitySet{e};
    }
    default:
      throw ExecutionError("cannot apply " + TokenName(op));
  }
}

using Arg = std::variant<Value, EntityId, PredicateId, TypeId, int64_t>;

Arg EntryArg(const Entry &entry) {
  if (auto *e = std::get_if<EntityEntry>(&entry)) {
    if (!e->id) {
      throw ExecutionError("unresolved entity pointer" +
                           (e->position ? " @" + std::to_string(*e->position) : std::string()));
    }
    return *e->id;
  }
  if (auto *p = std::get_if<PredicateId>(&entry)) return *p;
  if (auto *t = std::get_if<TypeId>(&entry)) return *t;
  const auto &n = std::get<NumberEntry>(entry);
  if (!n.value) throw ExecutionError("unresolved number pointer");
  return *n.value;
}

// Whether an empty set arriving at argument `slot` of `op` forces the
// operator's own result to be empty regardless of the other operands.
bool EmptyAnnihilates(DecodeToken op, size_t slot) {
  switch (op) {
    case T::kA1:   // root: the final answer is empty
    case T::kA4:   // find
    case T::kA10:  // larger
    case T::kA11:  // less
    case T::kA12:  // equal
    case T::kA13:  // argmax
    case T::kA14:  // argmin
      return slot == 0;
    case T::kA8:  // inter
      return true;
    case T::kA9:  // diff: only the minuend
      return slot == 0;
    case T::kA15:  // filter
      return slot == 1;
    default:
      return false;
  }
}

}  // namespace

void WorkBudget::Charge(int64_t units) {
  used_ += units;
  if (used_ > limit_) {
    throw BudgetExceeded("work budget of " + std::to_string(limit_) + " exceeded");
  }
}

int64_t Degree(const KnowledgeBase &kb, EntityId e, PredicateId p) {
  // Triples are deduplicated, so the object span has distinct entries.
  return static_cast<int64_t>(kb.ObjectsOf(e, p).size());
}

Value Evaluate(const Node &node, const KnowledgeBase &kb, WorkBudget &budget) {
  if (node.entry) throw ExecutionError("cannot evaluate a bare entry");
  std::vector<Arg> args;
  args.reserve(node.children.size());
  for (const Node &child : node.children) {
    if (child.entry) {
      args.push_back(EntryArg(*child.entry));
    } else {
      args.push_back(Evaluate(child, kb, budget));
    }
  }
  return Apply<Arg>(node.token, args, kb, budget);
}

Answer Execute(const LogicalForm &lf, const KnowledgeBase &kb, int64_t budget) {
  Validate(lf);
  WorkBudget work(budget);
  return Answer{Evaluate(lf.root, kb, work)};
}

namespace {

std::string RenderSet(const EntitySet &s, const std::function<std::string(EntityId)> &name) {
  std::string out = "{";
  for (size_t i = 0; i < s.size(); ++i) {
    if (i) out += ", ";
    out += name(s[i]);
  }
  return out + "}";
}

std::string RenderWith(const Answer &answer, const std::function<std::string(EntityId)> &name) {
  if (auto *s = std::get_if<EntitySet>(&answer.value)) return RenderSet(*s, name);
  if (auto *n = std::get_if<int64_t>(&answer.value)) return std::to_string(*n);
  return std::get<bool>(answer.value) ? "true" : "false";
}

}  // namespace

std::string RenderAnswer(const Answer &answer, const KnowledgeBase &kb) {
  return RenderWith(answer, [&](EntityId e) { return kb.EntityText(e); });
}

std::string RenderAnswerIds(const Answer &answer, const KnowledgeBase &kb) {
  return RenderWith(answer, [&](EntityId e) { return kb.EntityName(e); });
}

std::string_view VerdictName(PartialVerdict v) {
  switch (v) {
    case PartialVerdict::kNonEmpty: return "nonempty";
    case PartialVerdict::kEmpty: return "empty";
    default: return "unknown";
  }
}

PartialEvaluator::PartialEvaluator(const KnowledgeBase &kb, const PointerResolver *resolver,
                                   int64_t budget)
    : kb_(&kb), resolver_(resolver), budget_(budget) {}

void PartialEvaluator::Push(const Step &step) {
  if (complete()) throw ValidationError("form already complete");
  if (!step.entry) {
    frames_.push_back(Frame{step.token, {}});
    return;
  }
  Operand operand;
  const Entry &entry = *step.entry;
  if (auto *e = std::get_if<EntityEntry>(&entry)) {
    std::optional<EntityId> id = e->id;
    if (!id && e->position && resolver_ && resolver_->entity) {
      id = resolver_->entity(*e->position);
      if (!id && resolver_->final) failed_ = true;
    }
    if (id) operand.value = *id;
  } else if (auto *p = std::get_if<PredicateId>(&entry)) {
    operand.value = *p;
  } else if (auto *t = std::get_if<TypeId>(&entry)) {
    operand.value = *t;
  } else {
    const auto &n = std::get<NumberEntry>(entry);
    std::optional<int64_t> value = n.value;
    if (!value && n.position && resolver_ && resolver_->number) {
      value = resolver_->number(*n.position);
      if (!value && resolver_->final) failed_ = true;
    }
    if (value) operand.value = *value;
  }
  Deliver(std::move(operand));
}

void PartialEvaluator::Deliver(Operand operand) {
  while (true) {
    if (frames_.empty()) {
      root_ = std::move(operand);
      return;
    }
    Frame &frame = frames_.back();
    size_t slot = frame.args.size();
    if (operand.empty && EmptyAnnihilates(frame.op, slot)) frame.doomed = true;
    if (operand.nonempty && frame.op == T::kA7) frame.assured = true;
    frame.args.push_back(std::move(operand));
    if (frame.args.size() < Operator(frame.op).args.size()) return;
    operand = Close(frame);
    frames_.pop_back();
  }
}

PartialEvaluator::Operand PartialEvaluator::Close(Frame &frame) {
  Operand out;
  if (frame.op <= T::kA3) {
    // Start rule: the form is complete.
    out = frame.args.front();
    if (auto *v = std::get_if<Value>(&out.value)) result_ = *v;
    return out;
  }
  bool known = std::all_of(frame.args.begin(), frame.args.end(), [](const Operand &a) {
    return !std::holds_alternative<std::monostate>(a.value);
  });
  if (known && !failed_) {
    std::vector<Arg> args;
    for (const Operand &a : frame.args) {
      std::visit(
          [&](const auto &v) {
            if constexpr (!std::is_same_v<std::decay_t<decltype(v)>, std::monostate>) {
              args.push_back(v);
            }
          },
          a.value);
    }
    try {
      Value v = Apply<Arg>(frame.op, args, *kb_, budget_);
      if (auto *s = std::get_if<EntitySet>(&v)) {
        out.empty = s->empty();
        out.nonempty = !s->empty();
      }
      out.value = std::move(v);
      return out;
    } catch (const ExecutionError &) {
      failed_ = true;
    }
  }
  out.empty = frame.doomed;
  out.nonempty = frame.assured;
  return out;
}

PartialVerdict PartialEvaluator::verdict() const {
  if (failed_) return PartialVerdict::kEmpty;
  if (root_) {
    if (!result_) {
      if (root_->empty) return PartialVerdict::kEmpty;
      if (root_->nonempty) return PartialVerdict::kNonEmpty;
      return PartialVerdict::kUnknown;
    }
    if (auto *s = std::get_if<EntitySet>(&*result_)) {
      return s->empty() ? PartialVerdict::kEmpty : PartialVerdict::kNonEmpty;
    }
    // Counts and booleans are valid answers whatever their value.
    return PartialVerdict::kUnknown;
  }
  // Walk outward from the subtree under construction, tracking whether its
  // eventual value is already forced to be empty (or nonempty).
  bool empty = false;
  bool nonempty = false;
  for (auto it = frames_.rbegin(); it != frames_.rend(); ++it) {
    size_t slot = it->args.size();
    bool next_empty = it->doomed || (empty && EmptyAnnihilates(it->op, slot));
    bool next_nonempty = it->assured || (nonempty && it->op == T::kA7);
    if (it->op == T::kA1) {
      if (next_empty) return PartialVerdict::kEmpty;
      if (nonempty || it->assured) return PartialVerdict::kNonEmpty;
      return PartialVerdict::kUnknown;
    }
    empty = next_empty;
    nonempty = next_nonempty;
  }
  return PartialVerdict::kUnknown;
}

PartialVerdict ExecutePartial(std::span<const Step> prefix, const KnowledgeBase &kb,
                              const PointerResolver *resolver, int64_t budget) {
  PartialEvaluator eval(kb, resolver, budget);
  for (const Step &s : prefix) eval.Push(s);
  return eval.verdict();
}

}  // namespace convsp
