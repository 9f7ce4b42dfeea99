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

#include "convsp/linker.h"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <limits>
#include <map>
#include <memory>

#include "convsp/errors.h"
#include "convsp/tokenizer.h"

namespace convsp {

std::string LabelSpace::Name(int label, const KnowledgeBase &kb) const {
  if (label == kOutside) return "O";
  return std::string(IsBegin(label) ? "B-" : "I-") + kb.TypeName(TypeOf(label));
}

int LabelSpace::Parse(std::string_view name, const KnowledgeBase &kb) const {
  if (name == "O") return kOutside;
  if (name.size() < 3 || (name[0] != 'B' && name[0] != 'I') || name[1] != '-') {
    throw ParseError("bad label '" + std::string(name) + "'");
  }
  TypeId t = kb.FindType(name.substr(2));
  if (!t.valid()) throw ReferenceError("unknown type in label '" + std::string(name) + "'");
  return name[0] == 'B' ? Begin(t) : Inside(t);
}

std::vector<Mention> DecodeMentions(std::span<const int> labels,
                                    std::span<const std::string> tokens,
                                    const LabelSpace &space) {
  std::vector<Mention> out;
  bool open = false;
  auto close = [&](int end) {
    if (!open) return;
    Mention &m = out.back();
    m.end = end;
    std::vector<std::string> words;
    for (int i = m.begin; i < end && i < static_cast<int>(tokens.size()); ++i) {
      words.push_back(tokens[i]);
    }
    m.surface = JoinTokens(words);
    open = false;
  };
  for (int i = 0; i < static_cast<int>(labels.size()); ++i) {
    int label = labels[i];
    if (space.IsBegin(label) || (space.IsInside(label) && !open)) {
      close(i);
      out.push_back(Mention{i, i + 1, "", space.TypeOf(label)});
      open = true;
    } else if (label == LabelSpace::kOutside) {
      close(i);
    }
  }
  close(static_cast<int>(labels.size()));
  return out;
}

int LevenshteinDistance(std::span<const std::string> a, std::span<const std::string> b) {
  std::vector<int> prev(b.size() + 1), cur(b.size() + 1);
  for (size_t j = 0; j <= b.size(); ++j) prev[j] = static_cast<int>(j);
  for (size_t i = 1; i <= a.size(); ++i) {
    cur[0] = static_cast<int>(i);
    for (size_t j = 1; j <= b.size(); ++j) {
      int substitute = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, substitute});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

InvertedIndex InvertedIndex::Build(const KnowledgeBase &kb, int threshold) {
  if (threshold < 0) throw Error("index threshold must be non-negative");
  InvertedIndex index;
  index.threshold_ = threshold;
  // key -> entity -> best score for that entity
  std::unordered_map<std::string, std::map<EntityId, int>> raw;
  for (int i = 0; i < kb.num_entities(); ++i) {
    EntityId e(i);
    std::vector<std::string> full = Tokenize(kb.EntityText(e));
    int n = static_cast<int>(full.size());
    if (n == 0) continue;
    for (int len = std::max(1, n - threshold); len <= n; ++len) {
      for (int begin = 0; begin + len <= n; ++begin) {
        std::span<const std::string> sub(full.data() + begin, len);
        int score = -LevenshteinDistance(full, sub);
        auto [it, inserted] = raw[JoinTokens(sub)].emplace(e, score);
        if (!inserted) it->second = std::max(it->second, score);
      }
    }
  }
  for (auto &[key, entities] : raw) {
    int best = std::numeric_limits<int>::min();
    for (const auto &[e, score] : entities) best = std::max(best, score);
    std::vector<IndexEntry> kept;
    for (const auto &[e, score] : entities) {
      if (score == best) kept.push_back({e, score});
    }
    index.map_.emplace(key, std::move(kept));
  }
  return index;
}

std::span<const IndexEntry> InvertedIndex::Lookup(std::string_view key) const {
  auto it = map_.find(std::string(key));
  if (it == map_.end()) return {};
  return it->second;
}

InvertedIndex::Stats InvertedIndex::stats() const {
  Stats s;
  s.keys = map_.size();
  for (const auto &[key, entries] : map_) {
    s.entries += entries.size();
    if (entries.size() > 1) ++s.ambiguous_keys;
  }
  s.mean_candidates = s.keys ? static_cast<double>(s.entries) / s.keys : 0.0;
  return s;
}

std::vector<EntityId> Link(const Mention &mention, const InvertedIndex &index,
                           const KnowledgeBase &kb, bool type_filter) {
  std::vector<IndexEntry> candidates;
  for (const IndexEntry &entry : index.Lookup(Normalize(mention.surface))) {
    if (type_filter && !(mention.type.valid() && kb.Valid(mention.type) &&
                         kb.HasType(entry.entity, mention.type))) {
      continue;
    }
    candidates.push_back(entry);
  }
  std::sort(candidates.begin(), candidates.end(), [](const IndexEntry &a, const IndexEntry &b) {
    return a.score != b.score ? a.score > b.score : a.entity < b.entity;
  });
  std::vector<EntityId> out;
  for (const IndexEntry &c : candidates) out.push_back(c.entity);
  return out;
}

std::vector<EntityId> LinkWithFallback(const Mention &mention, const InvertedIndex &index,
                                       const KnowledgeBase &kb, bool type_filter) {
  std::vector<EntityId> out = Link(mention, index, kb, type_filter);
  if (out.empty() && type_filter) out = Link(mention, index, kb, false);
  return out;
}

std::vector<LinkedMention> LinkMentions(std::span<const Mention> mentions,
                                        const InvertedIndex &index, const KnowledgeBase &kb,
                                        bool type_filter) {
  std::vector<LinkedMention> out;
  for (const Mention &m : mentions) out.push_back({m, LinkWithFallback(m, index, kb, type_filter)});
  return out;
}

EntityId ResolveEntityPointer(int position, std::span<const LinkedMention> mentions,
                              const SubstitutionOptions &options) {
  const LinkedMention *best = nullptr;
  int best_distance = std::numeric_limits<int>::max();
  for (const LinkedMention &lm : mentions) {
    const Mention &m = lm.mention;
    int distance = position < m.begin ? m.begin - position
                   : position >= m.end ? position - m.end + 1
                                       : 0;
    if (distance < best_distance) {
      best = &lm;
      best_distance = distance;
    }
  }
  if (!best || best_distance > options.max_repair_distance) {
    throw SubstitutionError("entity pointer @" + std::to_string(position) +
                            " lies in no detected mention");
  }
  if (best->candidates.empty()) {
    throw SubstitutionError("mention '" + best->mention.surface + "' has no linked entity");
  }
  return best->candidates.front();
}

int64_t ResolveNumberPointer(int position, std::span<const std::string> tokens) {
  if (position < 0 || position >= static_cast<int>(tokens.size())) {
    throw SubstitutionError("number pointer @" + std::to_string(position) + " out of range");
  }
  const std::string &t = tokens[position];
  int64_t value = 0;
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (ec != std::errc() || ptr != t.data() + t.size() || value < 0) {
    throw SubstitutionError("token '" + t + "' is not a number");
  }
  return value;
}

namespace {

void SubstituteNode(Node &node, std::span<const std::string> tokens,
                    std::span<const LinkedMention> mentions, const SubstitutionOptions &options) {
  if (node.entry) {
    if (auto *e = std::get_if<EntityEntry>(&*node.entry)) {
      if (!e->id) {
        if (!e->position) throw SubstitutionError("entity leaf without id or pointer");
        if (*e->position < 0 || *e->position >= static_cast<int>(tokens.size())) {
          throw SubstitutionError("entity pointer @" + std::to_string(*e->position) +
                                  " out of range");
        }
        e->id = ResolveEntityPointer(*e->position, mentions, options);
      }
    } else if (auto *n = std::get_if<NumberEntry>(&*node.entry)) {
      if (!n->value) {
        if (!n->position) throw SubstitutionError("number leaf without value or pointer");
        n->value = ResolveNumberPointer(*n->position, tokens);
      }
    }
    return;
  }
  for (Node &child : node.children) SubstituteNode(child, tokens, mentions, options);
}

}  // namespace

LogicalForm SubstitutePointers(const LogicalForm &lf, std::span<const std::string> tokens,
                               std::span<const LinkedMention> mentions,
                               const SubstitutionOptions &options) {
  LogicalForm out = lf;
  SubstituteNode(out.root, tokens, mentions, options);
  return out;
}

PointerResolver MakePointerResolver(std::vector<std::string> tokens,
                                    std::vector<LinkedMention> mentions,
                                    const SubstitutionOptions &options) {
  auto shared_tokens = std::make_shared<std::vector<std::string>>(std::move(tokens));
  auto shared_mentions = std::make_shared<std::vector<LinkedMention>>(std::move(mentions));
  PointerResolver resolver;
  resolver.final = true;
  resolver.entity = [shared_mentions, options](int pos) -> std::optional<EntityId> {
    try {
      return ResolveEntityPointer(pos, *shared_mentions, options);
    } catch (const SubstitutionError &) {
      return std::nullopt;
    }
  };
  resolver.number = [shared_tokens](int pos) -> std::optional<int64_t> {
    try {
      return ResolveNumberPointer(pos, *shared_tokens);
    } catch (const SubstitutionError &) {
      return std::nullopt;
    }
  };
  return resolver;
}

}  // namespace convsp
