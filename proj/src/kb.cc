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

#include "convsp/kb.h"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "convsp/errors.h"

namespace convsp {
namespace {

std::vector<std::string> SplitTabs(const std::string &line) {
  std::vector<std::string> fields;
  size_t begin = 0;
  while (true) {
    size_t tab = line.find('\t', begin);
    fields.push_back(line.substr(begin, tab - begin));
    if (tab == std::string::npos) break;
    begin = tab + 1;
  }
  return fields;
}

std::string StripCr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

bool IsBlank(const std::string &s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

const std::vector<EntityId> kNoEntities;

}  // namespace

KnowledgeBase KnowledgeBase::Build(const std::vector<EntityRecord> &entities,
                                   const std::vector<TripleRecord> &triples) {
  KnowledgeBase kb;
  for (const EntityRecord &rec : entities) {
    if (kb.entities_.Find(rec.id).valid()) {
      throw ReferenceError("duplicate entity id '" + rec.id + "'");
    }
    EntityId e = kb.entities_.Intern(rec.id);
    kb.entity_text_.push_back(rec.text);
    std::vector<TypeId> types;
    for (const std::string &t : rec.types) types.push_back(kb.types_.Intern(t));
    std::sort(types.begin(), types.end());
    types.erase(std::unique(types.begin(), types.end()), types.end());
    kb.entity_types_.push_back(std::move(types));
    (void)e;
  }
  for (const TripleRecord &rec : triples) {
    EntityId s = kb.entities_.Find(rec.subject);
    EntityId o = kb.entities_.Find(rec.object);
    if (!s.valid()) throw ReferenceError("unknown entity '" + rec.subject + "'");
    if (!o.valid()) throw ReferenceError("unknown entity '" + rec.object + "'");
    PredicateId p = kb.predicates_.Intern(rec.predicate);
    kb.by_subject_.push_back({s, p, o});
  }
  kb.BuildIndices();
  return kb;
}

void KnowledgeBase::BuildIndices() {
  std::sort(by_subject_.begin(), by_subject_.end());
  by_subject_.erase(std::unique(by_subject_.begin(), by_subject_.end()), by_subject_.end());
  objects_.clear();
  for (const Triple &t : by_subject_) objects_.push_back(t.object);

  by_predicate_object_ = by_subject_;
  std::sort(by_predicate_object_.begin(), by_predicate_object_.end(),
            [](const Triple &a, const Triple &b) {
              return std::tie(a.predicate, a.object, a.subject) <
                     std::tie(b.predicate, b.object, b.subject);
            });
  subjects_.clear();
  for (const Triple &t : by_predicate_object_) subjects_.push_back(t.subject);

  type_members_.assign(types_.size(), {});
  for (int e = 0; e < entities_.size(); ++e) {
    for (TypeId t : entity_types_[e]) type_members_[t.value].push_back(EntityId(e));
  }
}

std::span<const EntityId> KnowledgeBase::ObjectsOf(EntityId e, PredicateId p) const {
  Check(e);
  Check(p);
  auto lo = std::lower_bound(by_subject_.begin(), by_subject_.end(), Triple{e, p, EntityId(0)});
  auto hi = std::lower_bound(lo, by_subject_.end(),
                             Triple{e, PredicateId(p.value + 1), EntityId(0)});
  size_t begin = lo - by_subject_.begin();
  return {objects_.data() + begin, static_cast<size_t>(hi - lo)};
}

std::span<const EntityId> KnowledgeBase::SubjectsOf(PredicateId p, EntityId o) const {
  Check(o);
  Check(p);
  auto less = [](const Triple &a, const Triple &b) {
    return std::tie(a.predicate, a.object) < std::tie(b.predicate, b.object);
  };
  Triple key{EntityId(0), p, o};
  auto [lo, hi] = std::equal_range(by_predicate_object_.begin(), by_predicate_object_.end(),
                                   key, less);
  size_t begin = lo - by_predicate_object_.begin();
  return {subjects_.data() + begin, static_cast<size_t>(hi - lo)};
}

std::span<const EntityId> KnowledgeBase::EntitiesOfType(TypeId tp) const {
  Check(tp);
  return type_members_[tp.value];
}

std::span<const TypeId> KnowledgeBase::TypesOf(EntityId e) const {
  Check(e);
  return entity_types_[e.value];
}

bool KnowledgeBase::HasType(EntityId e, TypeId tp) const {
  auto types = TypesOf(e);
  return std::binary_search(types.begin(), types.end(), tp);
}

const std::string &KnowledgeBase::EntityText(EntityId e) const {
  return entity_text_[Check(e).value];
}

EntityId KnowledgeBase::Check(EntityId e) const {
  if (!entities_.Contains(e)) throw ReferenceError("unknown entity id " + std::to_string(e.value));
  return e;
}

PredicateId KnowledgeBase::Check(PredicateId p) const {
  if (!predicates_.Contains(p)) {
    throw ReferenceError("unknown predicate id " + std::to_string(p.value));
  }
  return p;
}

TypeId KnowledgeBase::Check(TypeId t) const {
  if (!types_.Contains(t)) throw ReferenceError("unknown type id " + std::to_string(t.value));
  return t;
}

bool KnowledgeBase::operator==(const KnowledgeBase &other) const {
  return entities_ == other.entities_ && predicates_ == other.predicates_ &&
         types_ == other.types_ && entity_text_ == other.entity_text_ &&
         entity_types_ == other.entity_types_ && type_members_ == other.type_members_ &&
         by_subject_ == other.by_subject_ && objects_ == other.objects_ &&
         by_predicate_object_ == other.by_predicate_object_ && subjects_ == other.subjects_;
}

KnowledgeBase LoadKb(std::istream &triples, std::istream &catalog) {
  std::vector<KnowledgeBase::EntityRecord> entities;
  std::string line;
  int line_no = 0;
  while (std::getline(catalog, line)) {
    ++line_no;
    line = StripCr(line);
    if (IsBlank(line)) continue;
    std::vector<std::string> fields = SplitTabs(line);
    if (fields.size() != 3 || fields[0].empty()) {
      throw ParseError("catalog: expected 'entity<TAB>text<TAB>types'", line_no);
    }
    KnowledgeBase::EntityRecord rec{fields[0], fields[1], {}};
    std::stringstream types(fields[2]);
    std::string t;
    while (std::getline(types, t, ',')) {
      if (t.empty()) throw ParseError("catalog: empty type id", line_no);
      rec.types.push_back(t);
    }
    entities.push_back(std::move(rec));
  }

  std::vector<KnowledgeBase::TripleRecord> records;
  line_no = 0;
  while (std::getline(triples, line)) {
    ++line_no;
    line = StripCr(line);
    if (IsBlank(line)) continue;
    std::vector<std::string> fields = SplitTabs(line);
    if (fields.size() != 3 || fields[0].empty() || fields[1].empty() || fields[2].empty()) {
      throw ParseError("triples: expected 'subject<TAB>predicate<TAB>object'", line_no);
    }
    records.push_back({fields[0], fields[1], fields[2]});
  }
  return KnowledgeBase::Build(entities, records);
}

KnowledgeBase LoadKbFiles(const std::string &triples_path, const std::string &catalog_path) {
  std::ifstream triples(triples_path);
  if (!triples) throw Error("cannot open " + triples_path);
  std::ifstream catalog(catalog_path);
  if (!catalog) throw Error("cannot open " + catalog_path);
  return LoadKb(triples, catalog);
}

void WriteKb(const KnowledgeBase &kb, std::ostream &triples, std::ostream &catalog) {
  for (int i = 0; i < kb.num_entities(); ++i) {
    EntityId e(i);
    catalog << kb.EntityName(e) << '\t' << kb.EntityText(e) << '\t';
    bool first = true;
    for (TypeId t : kb.TypesOf(e)) {
      if (!first) catalog << ',';
      catalog << kb.TypeName(t);
      first = false;
    }
    catalog << '\n';
  }
  for (const Triple &t : kb.triples()) {
    triples << kb.EntityName(t.subject) << '\t' << kb.PredicateName(t.predicate) << '\t'
            << kb.EntityName(t.object) << '\n';
  }
}

}  // namespace convsp
