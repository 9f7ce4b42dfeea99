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

#ifndef CONVSP_KB_H_
#define CONVSP_KB_H_

#include <compare>
#include <cstdint>
#include <functional>
#include <istream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace convsp {

// Dense integer identifier in its own namespace. Values are assigned at load
// time in order of first appearance.
template <typename Tag>
struct Id {
  int32_t value = -1;

  constexpr Id() = default;
  constexpr explicit Id(int32_t v) : value(v) {}
  constexpr bool valid() const { return value >= 0; }
  constexpr auto operator<=>(const Id &) const = default;
};

struct EntityTag {};
struct PredicateTag {};
struct TypeTag {};

using EntityId = Id<EntityTag>;
using PredicateId = Id<PredicateTag>;
using TypeId = Id<TypeTag>;

struct Triple {
  EntityId subject;
  PredicateId predicate;
  EntityId object;

  auto operator<=>(const Triple &) const = default;
};

// Bidirectional map between external string ids and dense integer ids.
template <typename IdT>
class Interner {
 public:
  IdT Intern(std::string_view name) {
    auto it = index_.find(std::string(name));
    if (it != index_.end()) return it->second;
    IdT id(static_cast<int32_t>(names_.size()));
    names_.emplace_back(name);
    index_.emplace(names_.back(), id);
    return id;
  }
  // Returns an invalid id when the name is unknown.
  IdT Find(std::string_view name) const {
    auto it = index_.find(std::string(name));
    return it == index_.end() ? IdT() : it->second;
  }
  const std::string &Name(IdT id) const { return names_.at(id.value); }
  int size() const { return static_cast<int>(names_.size()); }
  bool Contains(IdT id) const { return id.value >= 0 && id.value < size(); }

  bool operator==(const Interner &other) const { return names_ == other.names_; }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, IdT> index_;
};

// Immutable in-memory knowledge base. Construct with Build() or LoadKb();
// all lookups are read-only and safe to share between threads.
class KnowledgeBase {
 public:
  struct EntityRecord {
    std::string id;
    std::string text;
    std::vector<std::string> types;
  };
  struct TripleRecord {
    std::string subject, predicate, object;
  };

  KnowledgeBase() = default;

  // Builds a KB from string records. Unknown entity ids in triples raise
  // ReferenceError. Duplicate triples are collapsed.
  static KnowledgeBase Build(const std::vector<EntityRecord> &entities,
                             const std::vector<TripleRecord> &triples);

  int num_entities() const { return entities_.size(); }
  int num_predicates() const { return predicates_.size(); }
  int num_types() const { return types_.size(); }
  const std::vector<Triple> &triples() const { return by_subject_; }

  // {o : (e, p, o) in triples}, sorted ascending.
  std::span<const EntityId> ObjectsOf(EntityId e, PredicateId p) const;
  // {s : (s, p, o) in triples}, sorted ascending.
  std::span<const EntityId> SubjectsOf(PredicateId p, EntityId o) const;
  // Entities carrying type tp among their (possibly several) types.
  std::span<const EntityId> EntitiesOfType(TypeId tp) const;
  std::span<const TypeId> TypesOf(EntityId e) const;
  bool HasType(EntityId e, TypeId tp) const;

  const std::string &EntityText(EntityId e) const;
  const std::string &EntityName(EntityId e) const { return entities_.Name(Check(e)); }
  const std::string &PredicateName(PredicateId p) const { return predicates_.Name(Check(p)); }
  const std::string &TypeName(TypeId t) const { return types_.Name(Check(t)); }

  // Name lookups; invalid id when absent.
  EntityId FindEntity(std::string_view name) const { return entities_.Find(name); }
  PredicateId FindPredicate(std::string_view name) const { return predicates_.Find(name); }
  TypeId FindType(std::string_view name) const { return types_.Find(name); }

  bool Valid(EntityId e) const { return entities_.Contains(e); }
  bool Valid(PredicateId p) const { return predicates_.Contains(p); }
  bool Valid(TypeId t) const { return types_.Contains(t); }

  // Structural equality of catalogs and indices.
  bool operator==(const KnowledgeBase &other) const;

 private:
  EntityId Check(EntityId e) const;
  PredicateId Check(PredicateId p) const;
  TypeId Check(TypeId t) const;
  void BuildIndices();

  Interner<EntityId> entities_;
  Interner<PredicateId> predicates_;
  Interner<TypeId> types_;
  std::vector<std::string> entity_text_;
  std::vector<std::vector<TypeId>> entity_types_;
  std::vector<std::vector<EntityId>> type_members_;

  // Triples sorted by (s, p, o); objects_ holds the object column in the same
  // order so ObjectsOf can return a contiguous span.
  std::vector<Triple> by_subject_;
  std::vector<EntityId> objects_;
  // Triples sorted by (p, o, s) with the subject column alongside.
  std::vector<Triple> by_predicate_object_;
  std::vector<EntityId> subjects_;
};

// Reads the tab-separated triples and catalog formats. Malformed lines raise
// ParseError with a 1-based line number; dangling ids raise ReferenceError.
KnowledgeBase LoadKb(std::istream &triples, std::istream &catalog);
KnowledgeBase LoadKbFiles(const std::string &triples_path,
                          const std::string &catalog_path);

// Writes the same formats LoadKb reads.
void WriteKb(const KnowledgeBase &kb, std::ostream &triples, std::ostream &catalog);

}  // namespace convsp

template <typename Tag>
struct std::hash<convsp::Id<Tag>> {
  size_t operator()(const convsp::Id<Tag> &id) const noexcept {
    return std::hash<int32_t>()(id.value);
  }
};

#endif  // CONVSP_KB_H_
