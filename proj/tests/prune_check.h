#ifndef CONVSP_TESTS_PRUNE_CHECK_H_
#define CONVSP_TESTS_PRUNE_CHECK_H_

// Exhaustive soundness check for early-execution pruning: every prefix of
// every form up to `max_depth` that is judged `empty` must have no
// completion (within the same depth bound) that executes to a nonempty,
// non-failing answer.

#include <map>
#include <string>

#include "convsp/errors.h"
#include "convsp/executor.h"
#include "lf_gen.h"

namespace convsp::testing {

struct PruneCheckResult {
  int prefixes = 0;
  int pruned = 0;
  int violations = 0;
};

inline bool GoodAnswer(const LogicalForm &lf, const KnowledgeBase &kb) {
  try {
    Answer a = Execute(lf, kb);
    if (auto *s = std::get_if<EntitySet>(&a.value)) return !s->empty();
    return true;
  } catch (const ExecutionError &) {
    return false;
  }
}

inline PruneCheckResult CheckPruning(const KnowledgeBase &kb, const EntryPool &pool,
                                     int max_depth) {
  std::map<std::string, bool> has_good;  // prefix -> some completion is good
  std::map<std::string, std::vector<Step>> prefixes;
  for (const LogicalForm &lf : EnumerateForms(max_depth, pool)) {
    bool good = GoodAnswer(lf, kb);
    std::vector<Step> steps = Serialize(lf);
    for (size_t cut = 1; cut <= steps.size(); ++cut) {
      std::vector<Step> prefix(steps.begin(), steps.begin() + cut);
      std::string key = RenderSteps(prefix);
      has_good[key] = has_good[key] || good;
      prefixes.emplace(key, std::move(prefix));
    }
  }
  PruneCheckResult result;
  for (const auto &[key, prefix] : prefixes) {
    ++result.prefixes;
    if (ExecutePartial(prefix, kb) == PartialVerdict::kEmpty) {
      ++result.pruned;
      if (has_good[key]) ++result.violations;
    }
  }
  return result;
}

}  // namespace convsp::testing

#endif  // CONVSP_TESTS_PRUNE_CHECK_H_
