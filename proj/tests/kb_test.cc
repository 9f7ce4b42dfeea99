#include <random>
#include <set>
#include <sstream>

#include "convsp/errors.h"
#include "convsp/kb.h"
#include "doctest.h"
#include "test_util.h"

namespace convsp {
namespace {

using testing::E;
using testing::MakeKb;
using testing::P;
using testing::Ty;

std::vector<EntityId> Vec(std::span<const EntityId> s) { return {s.begin(), s.end()}; }

TEST_CASE("empty sources give an empty KB") {
  std::istringstream triples(""), catalog("");
  KnowledgeBase kb = LoadKb(triples, catalog);
  CHECK(kb.num_entities() == 0);
  CHECK(kb.num_predicates() == 0);
  CHECK(kb.num_types() == 0);
  CHECK(kb.triples().empty());
}

TEST_CASE("predicate and type counts") {
  std::istringstream catalog("a\tAlpha\tT1\nb\tBeta\tT1,T2\nc\tGamma\t\n");
  std::istringstream triples("a\tP1\tb\nb\tP2\tc\na\tP1\tc\n");
  KnowledgeBase kb = LoadKb(triples, catalog);
  CHECK(kb.num_entities() == 3);
  CHECK(kb.num_predicates() == 2);
  CHECK(kb.num_types() == 2);
  CHECK(kb.EntityText(E(kb, "b")) == "Beta");
  CHECK(kb.TypesOf(E(kb, "c")).empty());
}

TEST_CASE("duplicate triple lines collapse") {
  std::string lines = "a\tp\tb\na\tp\tb\nb\tq\ta\na\tp\tb\nb\tq\tb\n";
  std::istringstream catalog("a\ta\t\nb\tb\t\n");
  std::istringstream triples(lines);
  KnowledgeBase kb = LoadKb(triples, catalog);

  std::set<std::tuple<std::string, std::string, std::string>> naive;
  std::istringstream again(lines);
  std::string s, p, o;
  while (std::getline(again, s, '\t') && std::getline(again, p, '\t') &&
         std::getline(again, o)) {
    naive.insert({s, p, o});
  }
  CHECK(kb.triples().size() == naive.size());
  for (const Triple &t : kb.triples()) {
    CHECK(naive.count({kb.EntityName(t.subject), kb.PredicateName(t.predicate),
                       kb.EntityName(t.object)}) == 1);
  }
}

TEST_CASE("objects_of") {
  KnowledgeBase kb = MakeKb({{"a", "p", "x"}, {"a", "p", "y"}, {"b", "q", "z"}});
  CHECK(Vec(kb.ObjectsOf(E(kb, "a"), P(kb, "p"))) ==
        std::vector<EntityId>{E(kb, "x"), E(kb, "y")});
  CHECK(kb.ObjectsOf(E(kb, "b"), P(kb, "p")).empty());
  CHECK(kb.ObjectsOf(E(kb, "a"), P(kb, "q")).empty());
  CHECK_THROWS_AS(kb.ObjectsOf(EntityId(99), P(kb, "p")), ReferenceError);
  CHECK_THROWS_AS(kb.ObjectsOf(E(kb, "a"), PredicateId(7)), ReferenceError);
}

TEST_CASE("entities_of_type") {
  KnowledgeBase kb = MakeKb({}, {{"x", {"T1"}}, {"y", {"T2"}}, {"w", {"T1", "T2"}}, {"u", {"T3"}}});
  CHECK(Vec(kb.EntitiesOfType(Ty(kb, "T1"))) == std::vector<EntityId>{E(kb, "w"), E(kb, "x")});
  CHECK(Vec(kb.EntitiesOfType(Ty(kb, "T2"))) == std::vector<EntityId>{E(kb, "w"), E(kb, "y")});
  KnowledgeBase unused = KnowledgeBase::Build({{"x", "x", {"T1"}}, {"y", "y", {}}}, {});
  CHECK(unused.EntitiesOfType(unused.FindType("T1")).size() == 1);
  CHECK_THROWS_AS(kb.EntitiesOfType(TypeId(42)), ReferenceError);
}

TEST_CASE("load errors") {
  SUBCASE("malformed triple reports its line") {
    std::istringstream catalog("a\ta\t\n");
    std::istringstream triples("a\tp\ta\n\na\tp\n");
    try {
      LoadKb(triples, catalog);
      FAIL("expected ParseError");
    } catch (const ParseError &e) {
      CHECK(e.line() == 3);
    }
  }
  SUBCASE("malformed catalog") {
    std::istringstream catalog("a\ta\n");
    std::istringstream triples("");
    CHECK_THROWS_AS(LoadKb(triples, catalog), ParseError);
  }
  SUBCASE("dangling entity") {
    std::istringstream catalog("a\ta\t\n");
    std::istringstream triples("a\tp\tb\n");
    CHECK_THROWS_AS(LoadKb(triples, catalog), ReferenceError);
  }
}

TEST_CASE("indexed lookups agree with linear scans on random KBs") {
  std::mt19937 rng(17);
  for (int round = 0; round < 50; ++round) {
    int entities = 2 + rng() % 12, predicates = 1 + rng() % 4, types = 1 + rng() % 3;
    std::vector<KnowledgeBase::EntityRecord> catalog;
    for (int e = 0; e < entities; ++e) {
      std::vector<std::string> ts;
      for (int t = 0; t < types; ++t) {
        if (rng() % 2) ts.push_back("T" + std::to_string(t));
      }
      catalog.push_back({"e" + std::to_string(e), "text", ts});
    }
    std::vector<KnowledgeBase::TripleRecord> records;
    int count = rng() % 201;
    for (int i = 0; i < count; ++i) {
      records.push_back({"e" + std::to_string(rng() % entities), "p" + std::to_string(rng() % predicates),
                         "e" + std::to_string(rng() % entities)});
    }
    KnowledgeBase kb = KnowledgeBase::Build(catalog, records);
    for (int e = 0; e < kb.num_entities(); ++e) {
      for (int p = 0; p < kb.num_predicates(); ++p) {
        std::vector<EntityId> objects, subjects;
        for (const Triple &t : kb.triples()) {
          if (t.subject == EntityId(e) && t.predicate == PredicateId(p)) objects.push_back(t.object);
          if (t.object == EntityId(e) && t.predicate == PredicateId(p)) subjects.push_back(t.subject);
        }
        std::sort(objects.begin(), objects.end());
        std::sort(subjects.begin(), subjects.end());
        REQUIRE(Vec(kb.ObjectsOf(EntityId(e), PredicateId(p))) == objects);
        REQUIRE(Vec(kb.SubjectsOf(PredicateId(p), EntityId(e))) == subjects);
      }
    }
    for (int t = 0; t < kb.num_types(); ++t) {
      std::vector<EntityId> members;
      for (int e = 0; e < kb.num_entities(); ++e) {
        for (TypeId x : kb.TypesOf(EntityId(e))) {
          if (x == TypeId(t)) members.push_back(EntityId(e));
        }
      }
      REQUIRE(Vec(kb.EntitiesOfType(TypeId(t))) == members);
    }
  }
}

TEST_CASE("loading the same sources twice is idempotent") {
  std::string catalog_text = "a\tAlpha\tT1\nb\tBeta\tT2,T1\nc\tGamma\t\n";
  std::string triples_text = "a\tP1\tb\nb\tP2\tc\na\tP1\tc\nc\tP1\ta\n";
  std::istringstream c1(catalog_text), t1(triples_text), c2(catalog_text), t2(triples_text);
  KnowledgeBase first = LoadKb(t1, c1);
  KnowledgeBase second = LoadKb(t2, c2);
  CHECK(first == second);

  std::ostringstream out_triples, out_catalog;
  WriteKb(first, out_triples, out_catalog);
  std::istringstream c3(out_catalog.str()), t3(out_triples.str());
  KnowledgeBase reread = LoadKb(t3, c3);
  CHECK(reread.num_entities() == first.num_entities());
  CHECK(reread.triples().size() == first.triples().size());
}

}  // namespace
}  // namespace convsp
