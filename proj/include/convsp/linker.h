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

#ifndef CONVSP_LINKER_H_
#define CONVSP_LINKER_H_

#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "convsp/executor.h"
#include "convsp/grammar.h"
#include "convsp/kb.h"

namespace convsp {

// Joint IOB x entity-type label space: O plus {B, I} for every type.
// Label 0 is O, 2k+1 is B-type k and 2k+2 is I-type k.
class LabelSpace {
 public:
  static constexpr int kOutside = 0;

  explicit LabelSpace(int num_types) : num_types_(num_types) {}

  int size() const { return 2 * num_types_ + 1; }
  int num_types() const { return num_types_; }
  int Begin(TypeId t) const { return 2 * t.value + 1; }
  int Inside(TypeId t) const { return 2 * t.value + 2; }
  bool IsBegin(int label) const { return label > 0 && label % 2 == 1; }
  bool IsInside(int label) const { return label > 0 && label % 2 == 0; }
  TypeId TypeOf(int label) const { return TypeId((label - 1) / 2); }

  // "O", "B-T1", "I-T1" (type names from the KB).
  std::string Name(int label, const KnowledgeBase &kb) const;
  // Throws ParseError / ReferenceError.
  int Parse(std::string_view name, const KnowledgeBase &kb) const;

 private:
  int num_types_;
};

struct Mention {
  int begin = 0;  // token span [begin, end) in the question
  int end = 0;
  std::string surface;
  TypeId type;
  bool operator==(const Mention &) const = default;
};

// Maximal B I* runs. An orphan I starts a new mention; inside a run the B
// label's type wins over conflicting I types.
std::vector<Mention> DecodeMentions(std::span<const int> labels,
                                    std::span<const std::string> tokens,
                                    const LabelSpace &space);

// Token-level edit distance.
int LevenshteinDistance(std::span<const std::string> a, std::span<const std::string> b);

struct IndexEntry {
  EntityId entity;
  int score;  // minus the token edit distance from the full entity text
  bool operator==(const IndexEntry &) const = default;
};

// Maps normalized substrings of entity texts to the entities they came
// from. Every contiguous token span whose length is at least the full
// length minus `threshold` is indexed; per key only the entities reaching
// that key's best score are kept.
class InvertedIndex {
 public:
  static constexpr int kDefaultThreshold = 3;

  static InvertedIndex Build(const KnowledgeBase &kb, int threshold = kDefaultThreshold);

  // Entries for a normalized key, sorted by score desc then entity asc.
  std::span<const IndexEntry> Lookup(std::string_view key) const;

  struct Stats {
    size_t keys = 0;
    size_t entries = 0;
    size_t ambiguous_keys = 0;  // keys with more than one entity
    double mean_candidates = 0;
  };
  Stats stats() const;
  int threshold() const { return threshold_; }

 private:
  int threshold_ = 0;
  std::unordered_map<std::string, std::vector<IndexEntry>> map_;
};

// Candidates for a mention, best first. With `type_filter` only entities
// carrying the mention's predicted type survive. Empty means link failure.
std::vector<EntityId> Link(const Mention &mention, const InvertedIndex &index,
                           const KnowledgeBase &kb, bool type_filter = true);

// Link(); on failure retries without the type filter.
std::vector<EntityId> LinkWithFallback(const Mention &mention, const InvertedIndex &index,
                                       const KnowledgeBase &kb, bool type_filter = true);

struct LinkedMention {
  Mention mention;
  std::vector<EntityId> candidates;  // best first; may be empty
};

std::vector<LinkedMention> LinkMentions(std::span<const Mention> mentions,
                                        const InvertedIndex &index, const KnowledgeBase &kb,
                                        bool type_filter = true);

struct SubstitutionOptions {
  // A pointer this many tokens outside a mention still resolves to it.
  int max_repair_distance = 1;
};

// Entity for a pointed position: top candidate of the mention containing
// it (or the nearest one within the repair distance). Throws
// SubstitutionError when no mention qualifies.
EntityId ResolveEntityPointer(int position, std::span<const LinkedMention> mentions,
                              const SubstitutionOptions &options = {});
// Integer spelled by the pointed token; throws SubstitutionError.
int64_t ResolveNumberPointer(int position, std::span<const std::string> tokens);

// Replaces pointer leaves by KB entities and parsed numbers.
LogicalForm SubstitutePointers(const LogicalForm &lf, std::span<const std::string> tokens,
                               std::span<const LinkedMention> mentions,
                               const SubstitutionOptions &options = {});

// Resolver for partial evaluation backed by the same rules; failures map
// to nullopt.
PointerResolver MakePointerResolver(std::vector<std::string> tokens,
                                    std::vector<LinkedMention> mentions,
                                    const SubstitutionOptions &options = {});

}  // namespace convsp

#endif  // CONVSP_LINKER_H_
