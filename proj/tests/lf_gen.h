#ifndef CONVSP_TESTS_LF_GEN_H_
#define CONVSP_TESTS_LF_GEN_H_

// Test-only generators of grammar-respecting logical forms.

#include <random>
#include <set>
#include <string>
#include <vector>

#include "convsp/grammar.h"

namespace convsp::testing {

struct EntryPool {
  std::vector<EntityId> entities;
  std::vector<PredicateId> predicates;
  std::vector<TypeId> types;
  std::vector<int64_t> numbers;
};

inline Entry PoolEntry(Category c, const EntryPool &pool, size_t i) {
  switch (c) {
    case Category::kEntity: return EntityEntry{pool.entities[i], std::nullopt};
    case Category::kPredicate: return pool.predicates[i];
    case Category::kType: return pool.types[i];
    default: return NumberEntry{pool.numbers[i], std::nullopt};
  }
}

inline size_t PoolSize(Category c, const EntryPool &pool) {
  switch (c) {
    case Category::kEntity: return pool.entities.size();
    case Category::kPredicate: return pool.predicates.size();
    case Category::kType: return pool.types.size();
    default: return pool.numbers.size();
  }
}

// Rules rewriting an intermediate category, read straight off the table.
inline std::vector<const OperatorDef *> RulesFor(Category c) {
  std::vector<const OperatorDef *> out;
  for (const OperatorDef &op : Operators()) {
    if (op.result == c && op.token <= DecodeToken::kA17) out.push_back(&op);
  }
  return out;
}

// Every tree of category `c` with operator depth <= max_depth.
inline std::vector<Node> EnumerateTrees(Category c, int max_depth, const EntryPool &pool) {
  std::vector<Node> out;
  if (IsEntry(c)) {
    for (size_t i = 0; i < PoolSize(c, pool); ++i) out.push_back(Node::Leaf(PoolEntry(c, pool, i)));
    return out;
  }
  if (max_depth <= 0) return out;
  for (const OperatorDef *op : RulesFor(c)) {
    std::vector<std::vector<Node>> options;
    for (Category arg : op->args) options.push_back(EnumerateTrees(arg, max_depth - 1, pool));
    std::vector<Node> partial{Node::Apply(op->token, {})};
    for (const auto &choices : options) {
      std::vector<Node> next;
      for (const Node &p : partial) {
        for (const Node &ch : choices) {
          Node n = p;
          n.children.push_back(ch);
          next.push_back(std::move(n));
        }
      }
      partial = std::move(next);
    }
    out.insert(out.end(), partial.begin(), partial.end());
  }
  return out;
}

// Every complete form (set, num or bool root) with depth <= max_depth.
inline std::vector<LogicalForm> EnumerateForms(int max_depth, const EntryPool &pool) {
  std::vector<LogicalForm> out;
  for (Category c : {Category::kSet, Category::kNum, Category::kBool}) {
    for (Node &n : EnumerateTrees(c, max_depth, pool)) out.push_back({std::move(n)});
  }
  return out;
}

// Random tree of category `c` with depth <= max_depth.
template <typename Rng>
Node RandomTree(Category c, int max_depth, const EntryPool &pool, Rng &rng) {
  if (IsEntry(c)) {
    size_t n = PoolSize(c, pool);
    return Node::Leaf(PoolEntry(c, pool, std::uniform_int_distribution<size_t>(0, n - 1)(rng)));
  }
  std::vector<const OperatorDef *> rules;
  for (const OperatorDef *op : RulesFor(c)) {
    int need = 1;
    for (Category arg : op->args) {
      if (arg == Category::kSet || arg == Category::kNum) need = 2;
    }
    if (need <= max_depth) rules.push_back(op);
  }
  const OperatorDef *op = rules[std::uniform_int_distribution<size_t>(0, rules.size() - 1)(rng)];
  std::vector<Node> children;
  for (Category arg : op->args) children.push_back(RandomTree(arg, max_depth - 1, pool, rng));
  return Node::Apply(op->token, std::move(children));
}

template <typename Rng>
LogicalForm RandomForm(int max_depth, const EntryPool &pool, Rng &rng) {
  static constexpr Category kRoots[] = {Category::kSet, Category::kNum, Category::kBool};
  Category c = kRoots[std::uniform_int_distribution<int>(0, max_depth >= 2 ? 2 : 1)(rng)];
  return {RandomTree(c, max_depth, pool, rng)};
}

// Rendered step sequences reachable by extending the empty prefix with
// legal_next tokens (entries instantiated from the pool) until `end`.
inline void ExpandLegal(std::vector<Step> &prefix, const GrammarLimits &limits,
                        const EntryPool &pool, std::set<std::string> &out) {
  for (DecodeToken t : LegalNext(prefix, &limits)) {
    if (t == DecodeToken::kEnd) {
      out.insert(RenderSteps(prefix));
      continue;
    }
    if (IsEntryToken(t)) {
      Category c = EntryCategory(t);
      for (size_t i = 0; i < PoolSize(c, pool); ++i) {
        prefix.push_back(Step::Of(PoolEntry(c, pool, i)));
        ExpandLegal(prefix, limits, pool, out);
        prefix.pop_back();
      }
    } else {
      prefix.push_back(Step::Op(t));
      ExpandLegal(prefix, limits, pool, out);
      prefix.pop_back();
    }
  }
}

inline std::set<std::string> LegalClosure(const GrammarLimits &limits, const EntryPool &pool) {
  std::set<std::string> out;
  std::vector<Step> prefix;
  ExpandLegal(prefix, limits, pool, out);
  return out;
}

}  // namespace convsp::testing

#endif  // CONVSP_TESTS_LF_GEN_H_
