#include <algorithm>
#include <random>
#include <set>

#include "convsp/errors.h"
#include "convsp/executor.h"
#include "convsp/linker.h"
#include "convsp/tokenizer.h"
#include "doctest.h"
#include "test_util.h"

namespace convsp {
namespace {

using testing::E;
using testing::P;
using testing::Ty;

struct Ent {
  std::string id, text;
  std::vector<std::string> types;
};

KnowledgeBase Catalog(const std::vector<Ent> &ents,
                      const std::vector<KnowledgeBase::TripleRecord> &triples = {}) {
  std::vector<KnowledgeBase::EntityRecord> records;
  for (const Ent &e : ents) records.push_back({e.id, e.text, e.types});
  return KnowledgeBase::Build(records, triples);
}

// Plain two-row DP over characters of joined tokens would be wrong here;
// this oracle works on full token tables.
int OracleDistance(const std::vector<std::string> &a, const std::vector<std::string> &b) {
  std::vector<std::vector<int>> d(a.size() + 1, std::vector<int>(b.size() + 1));
  for (size_t i = 0; i <= a.size(); ++i) d[i][0] = static_cast<int>(i);
  for (size_t j = 0; j <= b.size(); ++j) d[0][j] = static_cast<int>(j);
  for (size_t i = 1; i <= a.size(); ++i) {
    for (size_t j = 1; j <= b.size(); ++j) {
      d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1,
                          d[i - 1][j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
    }
  }
  return d[a.size()][b.size()];
}

std::vector<IndexEntry> Entries(const InvertedIndex &index, const std::string &key) {
  auto s = index.Lookup(key);
  return {s.begin(), s.end()};
}

TEST_CASE("label space size") {
  for (int n : {0, 1, 3, 10}) CHECK(LabelSpace(n).size() == 2 * n + 1);
  CHECK(LabelSpace(3).size() == 7);

  KnowledgeBase kb = Catalog({{"a", "A", {"T0", "T1", "T2"}}});
  LabelSpace space(kb.num_types());
  CHECK(space.size() == 7);
  std::set<int> seen;
  for (int l = 0; l < space.size(); ++l) {
    std::string name = space.Name(l, kb);
    CHECK(space.Parse(name, kb) == l);
    seen.insert(l);
    if (l > 0) CHECK(space.IsBegin(l) != space.IsInside(l));
  }
  CHECK(space.Parse("B-T1", kb) == space.Begin(Ty(kb, "T1")));
  CHECK_THROWS_AS(space.Parse("B-T9", kb), ReferenceError);
  CHECK_THROWS_AS(space.Parse("X-T1", kb), ParseError);
}

TEST_CASE("decode mentions") {
  LabelSpace space(3);
  TypeId t1(1), t2(2);
  std::vector<std::string> toks = {"bill", "woods", "is", "x"};

  std::vector<int> one = {space.Begin(t1), space.Inside(t1), 0};
  auto m = DecodeMentions(one, toks, space);
  REQUIRE(m.size() == 1);
  CHECK(m[0].begin == 0);
  CHECK(m[0].end == 2);
  CHECK(m[0].type == t1);
  CHECK(m[0].surface == "bill woods");

  std::vector<int> none = {0, 0, 0};
  CHECK(DecodeMentions(none, toks, space).empty());

  // orphan I then a B: two mentions
  std::vector<int> orphan = {space.Inside(t1), 0, space.Begin(t2)};
  m = DecodeMentions(orphan, toks, space);
  REQUIRE(m.size() == 2);
  CHECK(m[0] == Mention{0, 1, "bill", t1});
  CHECK(m[1] == Mention{2, 3, "is", t2});

  // conflicting I inside a run keeps the B type
  std::vector<int> conflict = {space.Begin(t1), space.Inside(t2), space.Begin(t2), 0};
  m = DecodeMentions(conflict, toks, space);
  REQUIRE(m.size() == 2);
  CHECK(m[0] == Mention{0, 2, "bill woods", t1});
  CHECK(m[1] == Mention{2, 3, "is", t2});
}

TEST_CASE("decoded mentions are maximal runs") {
  std::mt19937 rng(7);
  LabelSpace space(2);
  std::vector<std::string> toks(12, "w");
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<int> labels(12);
    for (int &l : labels) l = std::uniform_int_distribution<int>(0, space.size() - 1)(rng);
    auto ms = DecodeMentions(labels, toks, space);
    std::vector<bool> covered(12, false);
    for (const Mention &m : ms) {
      CHECK(m.begin < m.end);
      CHECK(labels[m.begin] != 0);
      if (space.IsBegin(labels[m.begin])) CHECK(m.type == space.TypeOf(labels[m.begin]));
      for (int i = m.begin + 1; i < m.end; ++i) CHECK(space.IsInside(labels[i]));
      if (m.end < 12) CHECK(!space.IsInside(labels[m.end]));
      for (int i = m.begin; i < m.end; ++i) covered[i] = true;
    }
    for (int i = 0; i < 12; ++i) CHECK(covered[i] == (labels[i] != 0));
  }
}

TEST_CASE("levenshtein matches a full-table oracle") {
  std::mt19937 rng(11);
  const std::vector<std::string> alphabet = {"a", "b", "c"};
  for (int trial = 0; trial < 400; ++trial) {
    std::vector<std::string> a(rng() % 6), b(rng() % 6);
    for (auto &t : a) t = alphabet[rng() % 3];
    for (auto &t : b) t = alphabet[rng() % 3];
    CHECK(LevenshteinDistance(a, b) == OracleDistance(a, b));
  }
}

TEST_CASE("index with zero threshold holds only full texts") {
  KnowledgeBase kb = Catalog({{"d", "Deram Records", {"label"}}});
  InvertedIndex index = InvertedIndex::Build(kb, 0);
  CHECK(index.stats().keys == 1);
  CHECK(Entries(index, "deram records") == std::vector<IndexEntry>{{E(kb, "d"), 0}});
  CHECK(index.Lookup("deram").empty());
  CHECK_THROWS(InvertedIndex::Build(kb, -1));
}

TEST_CASE("index scores are negative edit distances") {
  KnowledgeBase kb = Catalog({{"x", "a b c", {}}});
  InvertedIndex index = InvertedIndex::Build(kb, 1);
  std::vector<std::string> full = {"a", "b", "c"};
  CHECK(index.stats().keys == 3);
  for (std::vector<std::string> sub : {std::vector<std::string>{"a", "b", "c"},
                                       {"a", "b"}, {"b", "c"}}) {
    auto entries = Entries(index, JoinTokens(sub));
    REQUIRE(entries.size() == 1);
    CHECK(entries[0].score == -OracleDistance(full, sub));
  }
  CHECK(Entries(index, "a b c")[0].score == 0);
  CHECK(Entries(index, "a b")[0].score == -1);
  CHECK(index.Lookup("a").empty());
}

TEST_CASE("identical texts share a key") {
  KnowledgeBase kb = Catalog({{"p", "Bill Woods", {"person"}}, {"f", "Bill Woods", {"film"}}});
  InvertedIndex index = InvertedIndex::Build(kb);
  auto entries = Entries(index, "bill woods");
  REQUIRE(entries.size() == 2);
  CHECK(entries[0].score == entries[1].score);
  CHECK(index.stats().ambiguous_keys >= 1);
}

TEST_CASE("per key only the best score survives") {
  // "a b" is the full text of y (score 0) and a truncation of x (score -1).
  KnowledgeBase kb = Catalog({{"x", "a b c", {}}, {"y", "a b", {}}});
  InvertedIndex index = InvertedIndex::Build(kb, 2);
  CHECK(Entries(index, "a b") == std::vector<IndexEntry>{{E(kb, "y"), 0}});
  auto b = Entries(index, "b");
  REQUIRE(b.size() == 1);
  CHECK(b[0].entity == E(kb, "y"));
  CHECK(b[0].score == -1);
}

TEST_CASE("index invariants on random catalogs") {
  std::mt19937 rng(3);
  const std::vector<std::string> words = {"red", "river", "the", "of", "blue", "song", "king"};
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Ent> ents;
    int n = 2 + rng() % 8;
    for (int i = 0; i < n; ++i) {
      std::vector<std::string> toks(1 + rng() % 5);
      for (auto &t : toks) t = words[rng() % words.size()];
      ents.push_back({"e" + std::to_string(i), JoinTokens(toks), {}});
    }
    KnowledgeBase kb = Catalog(ents);
    int threshold = rng() % 4;
    InvertedIndex index = InvertedIndex::Build(kb, threshold);

    // Oracle: every contiguous span of acceptable length with its best score.
    std::map<std::string, std::map<EntityId, int>> oracle;
    for (const Ent &e : ents) {
      auto toks = Tokenize(e.text);
      int len = toks.size();
      for (int b = 0; b < len; ++b) {
        for (int l = 1; b + l <= len; ++l) {
          if (l < len - threshold) continue;
          std::vector<std::string> sub(toks.begin() + b, toks.begin() + b + l);
          int score = -OracleDistance(toks, sub);
          auto [it, fresh] = oracle[JoinTokens(sub)].emplace(E(kb, e.id), score);
          if (!fresh) it->second = std::max(it->second, score);
        }
      }
    }
    CHECK(index.stats().keys == oracle.size());
    for (const auto &[key, scores] : oracle) {
      int best = INT32_MIN;
      for (auto [e, s] : scores) best = std::max(best, s);
      std::vector<IndexEntry> expect;
      for (auto [e, s] : scores) {
        if (s == best) expect.push_back({e, s});
      }
      CHECK(Entries(index, key) == expect);
    }
    // Full texts always retrieve their entity.
    for (const Ent &e : ents) {
      bool found = false;
      for (const IndexEntry &x : index.Lookup(Normalize(e.text))) found |= x.entity == E(kb, e.id);
      CHECK(found);
    }
  }
}

TEST_CASE("type filter drops wrong types") {
  KnowledgeBase kb = Catalog({{"p", "Bill Woods", {"person"}}, {"f", "Bill Woods", {"film"}}});
  InvertedIndex index = InvertedIndex::Build(kb);
  Mention m{0, 2, "Bill Woods", Ty(kb, "person")};
  CHECK(Link(m, index, kb) == std::vector<EntityId>{E(kb, "p")});
  CHECK(Link(m, index, kb, false) == std::vector<EntityId>{E(kb, "p"), E(kb, "f")});
  m.type = Ty(kb, "film");
  CHECK(Link(m, index, kb) == std::vector<EntityId>{E(kb, "f")});
}

TEST_CASE("exact match outranks truncation") {
  KnowledgeBase kb = Catalog({{"long", "deram records label", {"t"}}, {"short", "deram records", {"t"}}});
  InvertedIndex index = InvertedIndex::Build(kb);
  Mention m{0, 2, "deram records", Ty(kb, "t")};
  CHECK(Link(m, index, kb).front() == E(kb, "short"));
}

TEST_CASE("link failure falls back to the unfiltered best") {
  KnowledgeBase kb = Catalog({{"a", "river song", {"person"}},
                              {"b", "river song", {"film"}},
                              {"c", "blue king", {"place"}}});
  InvertedIndex index = InvertedIndex::Build(kb);
  Mention m{0, 2, "river song", Ty(kb, "place")};
  CHECK(Link(m, index, kb).empty());
  CHECK(LinkWithFallback(m, index, kb) == std::vector<EntityId>{E(kb, "a"), E(kb, "b")});
  Mention unknown{0, 1, "nothing", Ty(kb, "place")};
  CHECK(LinkWithFallback(unknown, index, kb).empty());
}

TEST_CASE("filtered candidates are a subset and help on ambiguous pairs") {
  std::vector<Ent> ents;
  const std::vector<std::string> words = {"red", "river", "blue", "song", "king", "stone"};
  for (int i = 0; i < 30; ++i) {
    std::string text = words[i % 6] + " " + words[(i / 6) % 6];
    ents.push_back({"p" + std::to_string(i), text, {"person"}});
    ents.push_back({"f" + std::to_string(i), text, {"film"}});
  }
  KnowledgeBase kb = Catalog(ents);
  InvertedIndex index = InvertedIndex::Build(kb);
  int with = 0, without = 0, total = 0;
  for (const Ent &e : ents) {
    EntityId gold = E(kb, e.id);
    Mention m{0, 2, e.text, Ty(kb, e.types[0])};
    auto filtered = Link(m, index, kb);
    auto all = Link(m, index, kb, false);
    for (EntityId x : filtered) CHECK(std::find(all.begin(), all.end(), x) != all.end());
    ++total;
    with += !filtered.empty() && filtered[0] == gold;
    without += !all.empty() && all[0] == gold;
  }
  CHECK(with > without);
  CHECK(with == total);
}

TEST_CASE("entity pointer substitution") {
  KnowledgeBase kb = Catalog({{"deram", "Deram Records", {"label"}}, {"decca", "Decca", {"label"}}},
                             {{"deram", "owned_by", "decca"}});
  InvertedIndex index = InvertedIndex::Build(kb);
  std::vector<std::string> toks = Tokenize("who owns deram records ?");
  LabelSpace space(kb.num_types());
  std::vector<int> labels = {0, 0, space.Begin(Ty(kb, "label")), space.Inside(Ty(kb, "label")), 0};
  auto mentions = LinkMentions(DecodeMentions(labels, toks, space), index, kb);
  REQUIRE(mentions.size() == 1);

  LogicalForm lf = ParseLogicalForm("find(set(@2), owned_by)", &kb);
  LogicalForm sub = SubstitutePointers(lf, toks, mentions);
  // the pointer position stays attached for provenance
  CHECK(Render(sub, &kb) == "find(set(deram@2), owned_by)");
  CHECK(Execute(sub, kb).value == Value(EntitySet({E(kb, "decca")})));

  // inside the span but not on the first token
  CHECK(Render(SubstitutePointers(ParseLogicalForm("find(set(@3), owned_by)", &kb), toks, mentions),
               &kb) == "find(set(deram@3), owned_by)");
  // one token off
  CHECK(ResolveEntityPointer(1, mentions) == E(kb, "deram"));
  CHECK(ResolveEntityPointer(4, mentions) == E(kb, "deram"));
  CHECK_THROWS_AS(ResolveEntityPointer(0, mentions), SubstitutionError);
  SubstitutionOptions strict{0};
  CHECK_THROWS_AS(ResolveEntityPointer(1, mentions, strict), SubstitutionError);
  CHECK_THROWS_AS(SubstitutePointers(ParseLogicalForm("find(set(@9), owned_by)", &kb), toks,
                                     mentions),
                  SubstitutionError);
}

TEST_CASE("number pointer substitution") {
  std::vector<std::string> toks = Tokenize("which bands have more than 3 albums");
  CHECK(ResolveNumberPointer(5, toks) == 3);
  CHECK_THROWS_AS(ResolveNumberPointer(4, toks), SubstitutionError);
  CHECK_THROWS_AS(ResolveNumberPointer(17, toks), SubstitutionError);
  KnowledgeBase kb = Catalog({{"a", "a", {"t"}}}, {{"a", "p", "a"}});
  LogicalForm lf = ParseLogicalForm("larger(set(a), p, num(@5))", &kb);
  CHECK(Render(SubstitutePointers(lf, toks, {}), &kb) == "larger(set(a), p, num(3@5))");
  CHECK_THROWS_AS(SubstitutePointers(ParseLogicalForm("larger(set(a), p, num(@1))", &kb), toks, {}),
                  SubstitutionError);
}

TEST_CASE("pointer resolver mirrors substitution") {
  KnowledgeBase kb = Catalog({{"x", "stone king", {"t"}}});
  InvertedIndex index = InvertedIndex::Build(kb);
  std::vector<std::string> toks = {"is", "stone", "king", "5"};
  LabelSpace space(kb.num_types());
  std::vector<int> labels = {0, space.Begin(TypeId(0)), space.Inside(TypeId(0)), 0};
  auto mentions = LinkMentions(DecodeMentions(labels, toks, space), index, kb);
  PointerResolver r = MakePointerResolver(toks, mentions);
  CHECK(r.entity(1) == E(kb, "x"));
  CHECK(r.entity(2) == E(kb, "x"));
  CHECK(r.number(3) == 5);
  CHECK(!r.number(1).has_value());
}

}  // namespace
}  // namespace convsp
