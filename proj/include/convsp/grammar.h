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

#ifndef CONVSP_GRAMMAR_H_
#define CONVSP_GRAMMAR_H_

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "convsp/kb.h"

namespace convsp {

// Semantic categories of grammar slots. The first four are intermediate
// (instantiated by operator results), the last four are entries
// (instantiated by constants from the question).
enum class Category : uint8_t { kStart, kSet, kNum, kBool, kEntity, kPredicate, kType, kNumber };

inline bool IsEntry(Category c) { return c >= Category::kEntity; }
std::string_view CategoryName(Category c);

// The decoding vocabulary: start, end, the four entry tokens and A1..A21.
enum class DecodeToken : uint8_t {
  kStart,
  kEnd,
  kEntity,
  kPredicate,
  kType,
  kNumber,
  kA1, kA2, kA3, kA4, kA5, kA6, kA7, kA8, kA9, kA10, kA11,
  kA12, kA13, kA14, kA15, kA16, kA17, kA18, kA19, kA20, kA21,
};

inline constexpr int kDecodeVocabSize = 27;

constexpr DecodeToken OperatorToken(int alias) {
  return static_cast<DecodeToken>(static_cast<int>(DecodeToken::kA1) + alias - 1);
}
constexpr int TokenIndex(DecodeToken t) { return static_cast<int>(t); }
constexpr DecodeToken TokenFromIndex(int i) { return static_cast<DecodeToken>(i); }

inline bool IsOperator(DecodeToken t) { return t >= DecodeToken::kA1; }
inline bool IsEntryToken(DecodeToken t) {
  return t >= DecodeToken::kEntity && t <= DecodeToken::kNumber;
}
// Category instantiated by an entry token.
Category EntryCategory(DecodeToken t);
// Entry token for an entry category.
DecodeToken EntryToken(Category c);
// "A4", "e", "end", ...
std::string TokenName(DecodeToken t);
// Inverse of TokenName; nullopt when unknown.
std::optional<DecodeToken> ParseTokenName(std::string_view name);

struct OperatorDef {
  DecodeToken token;
  Category result;
  std::vector<Category> args;
  std::string_view name;  // function symbol used in text rendering
};

// The 21 grammar rules indexed by alias 1..21.
const OperatorDef &Operator(DecodeToken op);
const std::array<OperatorDef, 21> &Operators();

// Entity leaf: a KB entity, a pointer to a question position, or both (gold
// programs carry the entity together with the position it was found at).
struct EntityEntry {
  std::optional<EntityId> id;
  std::optional<int> position;
  bool operator==(const EntityEntry &) const = default;
};

// Number leaf: parsed integer, pointer to a question position, or both.
struct NumberEntry {
  std::optional<int64_t> value;
  std::optional<int> position;
  bool operator==(const NumberEntry &) const = default;
};

using Entry = std::variant<EntityEntry, PredicateId, TypeId, NumberEntry>;

// Category an entry instantiates.
Category CategoryOf(const Entry &entry);

// One element of a sequence-formatted logical form. Entry tokens carry their
// instantiation; operator tokens carry none.
struct Step {
  DecodeToken token = DecodeToken::kStart;
  std::optional<Entry> entry;
  bool operator==(const Step &) const = default;

  static Step Op(DecodeToken t) { return {t, std::nullopt}; }
  static Step Of(Entry e);
};

// Tree node: an operator with children, or an entry leaf.
struct Node {
  DecodeToken token = DecodeToken::kA17;
  std::vector<Node> children;
  std::optional<Entry> entry;

  bool IsLeaf() const { return entry.has_value(); }
  Category result() const;
  bool operator==(const Node &) const = default;

  static Node Leaf(Entry e);
  static Node Apply(DecodeToken op, std::vector<Node> children);
};

// A logical form: the expression rewritten from `start`. The start rule
// (A1/A2/A3) is implied by the root's result category.
struct LogicalForm {
  Node root;
  bool operator==(const LogicalForm &) const = default;
};

// Bounds used during search and decoding. Depth counts operator nesting
// (set(e) has depth 1, count(set(e)) depth 2); length counts steps
// excluding the end token.
struct GrammarLimits {
  int max_depth = 6;
  int max_length = 40;
};

// Checks typing and completeness; throws ValidationError.
void Validate(const LogicalForm &lf);
int Depth(const Node &node);

// Pre-order traversal prefixed with the start rule.
std::vector<Step> Serialize(const LogicalForm &lf);
// Inverse of Serialize; throws ValidationError.
LogicalForm Deserialize(std::span<const Step> steps);

// Incremental leftmost-derivation state over a prefix. Each Push rewrites
// the leftmost nonterminal.
class DerivationState {
 public:
  DerivationState();

  // True when `token` may rewrite the leftmost nonterminal under `limits`.
  bool Allows(DecodeToken token, const GrammarLimits *limits = nullptr) const;
  // Legal next tokens in vocabulary order; {end} when complete.
  std::vector<DecodeToken> Legal(const GrammarLimits *limits = nullptr) const;
  // Applies a token; throws ValidationError when illegal.
  void Push(DecodeToken token);

  bool complete() const { return pending_.empty(); }
  int length() const { return length_; }
  // Leftmost nonterminal; requires !complete().
  Category leftmost() const { return pending_.back().category; }
  // Depth at which the leftmost nonterminal would be rewritten.
  int leftmost_depth() const { return pending_.back().depth; }
  // Minimal number of further steps needed to complete the form.
  int MinRemainingLength() const;

 private:
  struct Pending {
    Category category;
    int depth;
  };
  std::vector<Pending> pending_;  // back() is leftmost
  int length_ = 0;
};

// Legal next decode tokens after `prefix` (operator and entry tokens only are
// inspected; instantiations do not affect legality). Throws ValidationError
// when the prefix itself is invalid.
std::vector<DecodeToken> LegalNext(std::span<const Step> prefix,
                                   const GrammarLimits *limits = nullptr);
std::vector<DecodeToken> LegalNext(std::span<const DecodeToken> prefix,
                                   const GrammarLimits *limits = nullptr);

// Canonical text, e.g. `find(set(Q7), P3)`. Entities render as their
// string id (or `#12` without a KB), pointers as `@k`, anchored entities as
// `Q7@k`, numbers as `3`, `@k` or `3@k`.
std::string Render(const LogicalForm &lf, const KnowledgeBase *kb = nullptr);
std::string Render(const Node &node, const KnowledgeBase *kb = nullptr);
// Parses the canonical text back; throws ParseError or ReferenceError.
LogicalForm ParseLogicalForm(std::string_view text, const KnowledgeBase *kb = nullptr);

// Space-separated step rendering for logs: `A1 A4 A17 e:Q7 p:P3`.
std::string RenderSteps(std::span<const Step> steps, const KnowledgeBase *kb = nullptr);

}  // namespace convsp

#endif  // CONVSP_GRAMMAR_H_
