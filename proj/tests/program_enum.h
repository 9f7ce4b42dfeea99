#ifndef CONVSP_TESTS_PROGRAM_ENUM_H_
#define CONVSP_TESTS_PROGRAM_ENUM_H_

// Exhaustive enumeration of decoder programs for tiny models.

#include <functional>
#include <span>
#include <vector>

#include "convsp/grammar.h"
#include "convsp/model.h"
#include "model_util.h"

namespace convsp::testing {

inline ModelConfig TinyConfig() {
  ModelConfig c = ToyConfig();
  c.d_model = 8;
  c.heads = 2;
  c.num_predicates = 2;
  c.num_types = 1;
  return c;
}

inline std::vector<Step> EntryChoices(DecodeToken token, const ModelConfig &c, int content) {
  std::vector<Step> out;
  int n = token == DecodeToken::kPredicate ? c.num_predicates
          : token == DecodeToken::kType    ? c.num_types
                                           : content;
  for (int k = 0; k < n; ++k) {
    Entry e = token == DecodeToken::kEntity      ? Entry(EntityEntry{std::nullopt, k})
              : token == DecodeToken::kPredicate ? Entry(PredicateId(k))
              : token == DecodeToken::kType      ? Entry(TypeId(k))
                                                 : Entry(NumberEntry{std::nullopt, k});
    out.push_back(Step{token, e});
  }
  return out;
}

// Every complete program under `limits`, by depth-first expansion.
inline void EnumeratePrograms(const ModelConfig &c, int content, const GrammarLimits &limits,
                       const std::function<bool(std::span<const Step>)> &keep_prefix,
                       std::vector<std::vector<Step>> &out) {
  std::vector<Step> steps;
  std::function<void(const DerivationState &)> rec = [&](const DerivationState &d) {
    if (d.complete()) {
      out.push_back(steps);
      return;
    }
    for (DecodeToken t : d.Legal(&limits)) {
      std::vector<Step> choices =
          IsEntryToken(t) ? EntryChoices(t, c, content) : std::vector<Step>{Step::Op(t)};
      for (const Step &s : choices) {
        steps.push_back(s);
        if (keep_prefix(steps)) {
          DerivationState next = d;
          next.Push(t);
          rec(next);
        }
        steps.pop_back();
      }
    }
  };
  rec(DerivationState());
}

}  // namespace convsp::testing

#endif  // CONVSP_TESTS_PROGRAM_ENUM_H_
