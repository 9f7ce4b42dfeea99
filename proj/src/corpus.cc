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

#include "convsp/corpus.h"

#include <algorithm>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <variant>

#include "convsp/errors.h"
#include "convsp/executor.h"
#include "convsp/grammar.h"
#include "convsp/tokenizer.h"

namespace convsp {
namespace {

using Rng = std::mt19937_64;

const std::vector<std::string> kFirst = {
    "anna", "boris", "carla", "dmitri", "elena", "felix", "greta", "hugo", "irene", "jonas",
    "karin", "leo", "maria", "nils", "olga", "pavel", "rosa", "stefan", "tara", "uwe",
    "vera", "walter", "xenia", "yuri", "zora", "amir", "bea", "cyril", "dora", "emil"};
const std::vector<std::string> kLast = {
    "adler", "berg", "costa", "diaz", "engel", "ferro", "gallo", "hahn", "ivanov", "jung",
    "keller", "lang", "moreau", "novak", "ortiz", "petrov", "quinn", "reyes", "silva", "tanaka",
    "ueda", "vogel", "weber", "young", "zeller", "brandt", "conti", "dorn", "falk", "grimm"};
const std::vector<std::string> kFilmAdj = {
    "silent", "golden", "broken", "hidden", "last", "crimson", "frozen", "distant",
    "hollow", "burning", "quiet", "wild", "lost", "bright", "iron", "velvet",
    "paper", "midnight", "electric", "northern", "secret", "endless", "wooden", "glass"};
const std::vector<std::string> kFilmNoun = {
    "river", "garden", "mirror", "harbor", "empire", "station", "window", "forest",
    "letter", "island", "kingdom", "promise", "shadow", "voyage", "circus", "tower",
    "season", "valley", "engine", "orchard", "bridge", "compass", "lantern", "desert"};
const std::vector<std::string> kBandAdj = {
    "neon", "rusty", "purple", "cosmic", "atomic", "lonely", "savage", "sonic",
    "plastic", "liquid", "static", "lunar", "solar", "holy", "tiny", "heavy"};
const std::vector<std::string> kBandNoun = {
    "foxes", "wolves", "ravens", "tigers", "pilots", "saints", "echoes", "rebels",
    "kings", "ghosts", "sparks", "strangers", "drifters", "hornets", "owls", "comets"};
const std::vector<std::string> kCityA = {
    "north", "san", "port", "new", "fort", "lake", "saint", "east", "west", "mount",
    "bay", "glen", "rock", "elm", "oak", "pine", "red", "white", "green", "stone"};
const std::vector<std::string> kCityB = {
    "haven", "ford", "bury", "field", "wick", "dale", "mere", "ton", "gate", "crest"};
const std::vector<std::string> kCountry = {
    "aldoria", "brevia", "calmora", "dravia", "estova", "fennland", "galdor",
    "hestia", "istra", "jorvik", "kaldera", "lumeria", "mordavia", "norland",
    "ostrava", "pelora", "quendia", "rovania", "sylvania", "tarvos"};
const std::vector<std::string> kBrand = {
    "ember", "orbit", "vertex", "summit", "beacon", "zenith", "apex", "nova", "pulse",
    "prism", "atlas", "cobalt", "delta", "ethos", "falcon", "granite", "helix", "indigo",
    "jade", "kestrel", "lumen", "magnet", "nimbus", "onyx", "pioneer", "quartz", "radiant",
    "sierra", "titan", "umbra", "vanguard", "willow", "yonder", "zephyr", "amber", "bolt",
    "cinder", "dynamo", "ether", "fusion", "glacier", "horizon", "ionic", "jubilee",
    "karma", "lotus", "meridian", "nectar", "opal", "paragon"};

template <typename T>
const T &Pick(const std::vector<T> &v, Rng &rng) {
  return v[std::uniform_int_distribution<size_t>(0, v.size() - 1)(rng)];
}

int Uniform(int lo, int hi, Rng &rng) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

bool Chance(double p, Rng &rng) { return std::uniform_real_distribution<double>(0, 1)(rng) < p; }

// Distinct names from a generator, giving up after enough collisions.
std::vector<std::string> DistinctNames(int n, Rng &rng, const std::function<std::string()> &make) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (int tries = 0; static_cast<int>(out.size()) < n && tries < 100 * n + 100; ++tries) {
    std::string s = make();
    if (seen.insert(s).second) out.push_back(s);
  }
  (void)rng;
  if (static_cast<int>(out.size()) < n) throw Error("name pool too small for " + std::to_string(n));
  return out;
}

struct WorldBuilder {
  std::vector<KnowledgeBase::EntityRecord> entities;
  std::vector<KnowledgeBase::TripleRecord> triples;

  std::vector<std::string> Add(const std::string &type, const std::string &prefix,
                               const std::vector<std::string> &names) {
    std::vector<std::string> ids;
    for (size_t i = 0; i < names.size(); ++i) {
      ids.push_back(prefix + std::to_string(i));
      entities.push_back({ids.back(), names[i], {type}});
    }
    return ids;
  }
  void Link(const std::string &s, const std::string &p, const std::string &o) {
    triples.push_back({s, p, o});
  }
  void Both(const std::string &s, const std::string &p, const std::string &inverse,
            const std::string &o) {
    Link(s, p, o);
    Link(o, inverse, s);
  }
};

}  // namespace

KnowledgeBase GenerateWorld(const WorldConfig &c) {
  if (c.countries < 1 || c.cities < 1 || c.companies < 1 || c.labels < 1 || c.bands < 1 ||
      c.films < 1 || c.people < 2) {
    throw Error("world sizes must be positive");
  }
  Rng rng(c.seed);
  WorldBuilder w;

  std::vector<std::string> country_names(kCountry.begin(), kCountry.end());
  if (c.countries > static_cast<int>(country_names.size())) throw Error("too many countries");
  std::shuffle(country_names.begin(), country_names.end(), rng);
  country_names.resize(c.countries);
  auto countries = w.Add("country", "country_", country_names);

  auto cities = w.Add("city", "city_", DistinctNames(c.cities, rng, [&] {
                        return Pick(kCityA, rng) + " " + Pick(kCityB, rng);
                      }));
  std::vector<std::string> brands(kBrand.begin(), kBrand.end());
  if (std::max(c.companies, c.labels) > static_cast<int>(brands.size())) {
    throw Error("too many companies or labels");
  }
  std::shuffle(brands.begin(), brands.end(), rng);
  std::vector<std::string> company_names, label_names;
  for (int i = 0; i < c.companies; ++i) company_names.push_back(brands[i] + " group");
  std::shuffle(brands.begin(), brands.end(), rng);
  for (int i = 0; i < c.labels; ++i) label_names.push_back(brands[i] + " records");
  auto companies = w.Add("company", "company_", company_names);
  auto labels = w.Add("label", "label_", label_names);

  std::vector<std::string> film_names = DistinctNames(c.films, rng, [&] {
    return "the " + Pick(kFilmAdj, rng) + " " + Pick(kFilmNoun, rng);
  });
  std::vector<std::string> band_names = DistinctNames(c.bands, rng, [&] {
    return "the " + Pick(kBandAdj, rng) + " " + Pick(kBandNoun, rng);
  });
  // Shared names between bands and films.
  std::vector<std::string> borrowed = film_names;
  std::shuffle(borrowed.begin(), borrowed.end(), rng);
  int shared = std::min<int>(c.bands, static_cast<int>(c.ambiguity * c.bands + 0.5));
  shared = std::min<int>(shared, borrowed.size());
  for (int i = 0; i < shared; ++i) band_names[i] = borrowed[i];
  auto films = w.Add("film", "film_", film_names);
  auto bands = w.Add("band", "band_", band_names);
  auto people = w.Add("person", "person_", DistinctNames(c.people, rng, [&] {
                        return Pick(kFirst, rng) + " " + Pick(kLast, rng);
                      }));

  for (const auto &city : cities) w.Link(city, "located_in", Pick(countries, rng));
  for (const auto &co : companies) w.Link(co, "headquartered_in", Pick(cities, rng));
  for (const auto &l : labels) w.Link(l, "owned_by", Pick(companies, rng));
  for (const auto &b : bands) {
    w.Both(b, "signed_to", "has_artist", Pick(labels, rng));
    w.Link(b, "country_of_origin", Pick(countries, rng));
    int members = Uniform(2, 5, rng);
    for (int i = 0; i < members; ++i) w.Both(b, "has_member", "member_of", Pick(people, rng));
  }
  for (const auto &f : films) {
    w.Both(f, "directed_by", "director_of", Pick(people, rng));
    w.Link(f, "country_of_origin", Pick(countries, rng));
    int cast = Uniform(2, 6, rng);
    for (int i = 0; i < cast; ++i) w.Both(f, "cast_member", "acted_in", Pick(people, rng));
  }
  for (const auto &p : people) {
    w.Link(p, "born_in", Pick(cities, rng));
    w.Link(p, "citizen_of", Pick(countries, rng));
    int related = Uniform(1, 3, rng);
    for (int i = 0; i < related; ++i) {
      int kind = Uniform(0, 2, rng);
      w.Link(p, "related_to", kind == 0 ? Pick(films, rng) : kind == 1 ? Pick(bands, rng)
                                                                      : Pick(cities, rng));
    }
  }
  // Interleave ids so that catalog order says nothing about type.
  std::shuffle(w.entities.begin(), w.entities.end(), rng);
  return KnowledgeBase::Build(w.entities, w.triples);
}

namespace {

struct Relation {
  std::string predicate, subject, object;
  std::vector<std::string> ask;  // "{}" is the subject
  // Multi-valued relations only.
  std::string which;             // "which films did {} act in"
  std::string plural;            // "the films {} acted in"
  std::string verify;            // "did {} act in {}": subject, object
  bool many() const { return !which.empty(); }
};

const std::vector<Relation> &Relations() {
  static const std::vector<Relation> kRelations = {
      {"directed_by", "film", "person",
       {"who directed {}", "who is the director of {}", "which person directed {}"}, "", "", ""},
      {"director_of", "person", "film",
       {"which films did {} direct", "what films were directed by {}", "name the films {} directed"},
       "which films did {} direct", "the films {} directed", "did {} direct {}"},
      {"cast_member", "film", "person",
       {"who acted in {}", "who starred in {}", "which people were in the cast of {}"},
       "who acted in {}", "the actors of {}", "did {} have {} in the cast"},
      {"acted_in", "person", "film",
       {"which films did {} act in", "what films did {} star in", "in which films did {} appear"},
       "which films did {} act in", "the films {} acted in", "did {} act in {}"},
      {"born_in", "person", "city",
       {"where was {} born", "which city was {} born in", "what is the birthplace of {}"}, "", "", ""},
      {"located_in", "city", "country",
       {"which country is {} in", "where is {} located", "in which country is {}"}, "", "", ""},
      {"citizen_of", "person", "country",
       {"which country is {} a citizen of", "what is the citizenship of {}",
        "where does {} hold citizenship"}, "", "", ""},
      {"country_of_origin", "film", "country",
       {"which country is {} from", "what is the country of origin of {}",
        "where was {} produced"}, "", "", ""},
      {"country_of_origin", "band", "country",
       {"which country is {} from", "what is the country of origin of {}",
        "where does {} come from"}, "", "", ""},
      {"member_of", "person", "band",
       {"which bands is {} a member of", "what band does {} play in", "{} is a member of which band"},
       "which bands is {} a member of", "the bands {} plays in", "is {} a member of {}"},
      {"has_member", "band", "person",
       {"who are the members of {}", "who plays in {}", "which people are in {}"},
       "who plays in {}", "the members of {}", "does {} have {} as a member"},
      {"signed_to", "band", "label",
       {"which label is {} signed to", "what record label signed {}",
        "which label releases the records of {}"}, "", "", ""},
      {"has_artist", "label", "band",
       {"which bands are signed to {}", "what bands does {} release", "who is on the roster of {}"},
       "which bands are signed to {}", "the bands signed to {}", "did {} sign {}"},
      {"owned_by", "label", "company",
       {"which company owns {}", "who owns {}", "{} is owned by which company"}, "", "", ""},
      {"headquartered_in", "company", "city",
       {"where is {} headquartered", "which city is {} based in", "where are the offices of {}"},
       "", "", ""},
  };
  return kRelations;
}

// Relation used to compare entities of a type by degree.
struct Measure {
  std::string predicate, noun;
};
std::optional<Measure> MeasureFor(const std::string &type) {
  if (type == "film") return Measure{"cast_member", "actors"};
  if (type == "person") return Measure{"acted_in", "films"};
  if (type == "band") return Measure{"has_member", "members"};
  if (type == "label") return Measure{"has_artist", "bands"};
  return std::nullopt;
}

std::string PluralType(const std::string &type) {
  if (type == "city") return "cities";
  if (type == "country") return "countries";
  if (type == "company") return "companies";
  return type + "s";
}

const std::string kDirect = "Simple Question (Direct)";
const std::string kCoref = "Simple Question (Coreferenced)";
const std::string kEllipsis = "Simple Question (Ellipsis)";
const std::string kClarify = "Clarification";
const std::string kLogical = "Logical Reasoning (All)";
const std::string kCount = "Quantitative Reasoning (Count) (All)";
const std::string kVerify = "Verification (Boolean) (All)";
const std::string kQuant = "Quantitative Reasoning (All)";
const std::string kCompare = "Comparative Reasoning (All)";
const std::string kCompareCount = "Comparative Reasoning (Count) (All)";

using Slot = std::variant<EntityId, std::string>;

// Fills each "{}" of the pattern with an entity mention (labeled and
// linked) or plain text.
Turn RenderTurn(const KnowledgeBase &kb, const std::string &speaker, const std::string &pattern,
                const std::vector<Slot> &slots) {
  LabelSpace space(kb.num_types());
  Turn t;
  t.speaker = speaker;
  std::vector<std::string> tokens;
  size_t start = 0, k = 0;
  auto text = [&](std::string_view s) {
    for (std::string &tok : Tokenize(s)) {
      tokens.push_back(std::move(tok));
      t.labels.push_back("O");
    }
  };
  while (true) {
    size_t at = pattern.find("{}", start);
    text(std::string_view(pattern).substr(start, at == std::string::npos ? std::string::npos
                                                                          : at - start));
    if (at == std::string::npos) break;
    const Slot &slot = slots.at(k++);
    if (auto *e = std::get_if<EntityId>(&slot)) {
      TypeId type = kb.TypesOf(*e).front();
      std::vector<std::string> words = Tokenize(kb.EntityText(*e));
      for (size_t i = 0; i < words.size(); ++i) {
        tokens.push_back(words[i]);
        t.labels.push_back(space.Name(i == 0 ? space.Begin(type) : space.Inside(type), kb));
      }
      t.links.push_back(kb.EntityName(*e));
    } else {
      text(std::get<std::string>(slot));
    }
    start = at + 2;
  }
  t.utterance = JoinTokens(tokens);
  return t;
}

class DialogWriter {
 public:
  DialogWriter(const KnowledgeBase &kb, Rng &rng) : kb_(kb), rng_(rng) {
    for (int i = 0; i < kb.num_entities(); ++i) {
      EntityId e(i);
      by_text_[kb.EntityText(e)].push_back(e);
    }
    for (const auto &[text, ids] : by_text_) {
      if (ids.size() > 1) ambiguous_.insert(ambiguous_.end(), ids.begin(), ids.end());
    }
  }

  Turn Render(const std::string &speaker, const std::string &pattern,
              const std::vector<Slot> &slots) {
    return RenderTurn(kb_, speaker, pattern, slots);
  }

  EntityId RandomOf(const std::string &type) {
    auto members = kb_.EntitiesOfType(kb_.FindType(type));
    return members[std::uniform_int_distribution<size_t>(0, members.size() - 1)(rng_)];
  }

  std::span<const EntityId> Objects(EntityId e, const Relation &r) const {
    return kb_.ObjectsOf(e, kb_.FindPredicate(r.predicate));
  }

  // Random subject with at least `min` objects under r.
  std::optional<EntityId> Subject(const Relation &r, size_t min = 1) {
    for (int tries = 0; tries < 200; ++tries) {
      EntityId e = RandomOf(r.subject);
      if (Objects(e, r).size() >= min) return e;
    }
    return std::nullopt;
  }

  std::string TypeNameOf(EntityId e) const { return kb_.TypeName(kb_.TypesOf(e).front()); }

  const std::vector<EntityId> &ambiguous() const { return ambiguous_; }
  const KnowledgeBase &kb() const { return kb_; }
  Rng &rng() { return rng_; }

 private:
  const KnowledgeBase &kb_;
  Rng &rng_;
  std::map<std::string, std::vector<EntityId>> by_text_;
  std::vector<EntityId> ambiguous_;
};

Node SetOf(EntityId e) { return Node::Apply(DecodeToken::kA17, {Node::Leaf(EntityEntry{e, {}})}); }
Node Find(Node set, const KnowledgeBase &kb, const std::string &p) {
  return Node::Apply(DecodeToken::kA4, {std::move(set), Node::Leaf(kb.FindPredicate(p))});
}

struct Question {
  Turn turn;
  LogicalForm form;
  // Set for single-relation lookups, so follow-ups can reuse them.
  const Relation *relation = nullptr;
  EntityId subject;
};

class QuestionMaker {
 public:
  explicit QuestionMaker(DialogWriter &w) : w_(w), kb_(w.kb()), rng_(w.rng()) {
    for (const Relation &r : Relations()) {
      if (r.many()) many_.push_back(&r);
    }
  }

  std::optional<Question> Direct(double ambiguous_rate) {
    const Relation *r = nullptr;
    std::optional<EntityId> e;
    if (!w_.ambiguous().empty() && Chance(ambiguous_rate, rng_)) {
      EntityId pick = Pick(w_.ambiguous(), rng_);
      std::vector<const Relation *> options;
      for (const Relation &rel : Relations()) {
        if (rel.subject == w_.TypeNameOf(pick) && !w_.Objects(pick, rel).empty()) {
          options.push_back(&rel);
        }
      }
      if (options.empty()) return std::nullopt;
      r = Pick(options, rng_);
      e = pick;
    } else {
      r = &Pick(Relations(), rng_);
      e = w_.Subject(*r);
    }
    if (!e) return std::nullopt;
    return Lookup(*r, *e, kDirect, Pick(r->ask, rng_));
  }

  std::optional<Question> Filter() {
    static const Relation kRelated{"related_to", "person", "", {}, "", "", ""};
    auto e = w_.Subject(kRelated);
    if (!e) return std::nullopt;
    auto objects = w_.Objects(*e, kRelated);
    std::string type = w_.TypeNameOf(objects[Uniform(0, objects.size() - 1, rng_)]);
    static const std::vector<std::string> kPatterns = {
        "which {} is {} related to", "what {} are connected to {}", "name the {} related to {}"};
    Question q;
    q.turn = w_.Render("user", Pick(kPatterns, rng_) + " ?", {PluralType(type), *e});
    q.form.root = Node::Apply(DecodeToken::kA15, {Node::Leaf(kb_.FindType(type)),
                                                   Find(SetOf(*e), kb_, "related_to")});
    q.turn.question_type = kDirect;
    return q;
  }

  // Follow-up about the single entity of the previous answer.
  std::optional<Question> Coreference(EntityId x) {
    std::vector<const Relation *> options;
    for (const Relation &rel : Relations()) {
      if (rel.subject == w_.TypeNameOf(x) && !w_.Objects(x, rel).empty()) options.push_back(&rel);
    }
    if (options.empty()) return std::nullopt;
    const Relation &r = *Pick(options, rng_);
    std::string pronoun = r.subject == "person" ? "that person" : "it";
    std::string pattern = Pick(r.ask, rng_);
    pattern.replace(pattern.find("{}"), 2, pronoun);
    Question q;
    q.turn = w_.Render("user", "and " + pattern + " ?", {});
    q.turn.question_type = kCoref;
    q.form.root = Find(SetOf(x), kb_, r.predicate);
    q.relation = &r;
    q.subject = x;
    return q;
  }

  // Same relation as the previous lookup, different subject.
  std::optional<Question> Ellipsis(const Relation &r, EntityId previous, bool clarification) {
    for (int tries = 0; tries < 50; ++tries) {
      auto e = w_.Subject(r);
      if (!e || *e == previous) continue;
      static const std::vector<std::string> kEllipsisPatterns = {"and what about {} ?",
                                                                 "how about {} ?", "and {} ?"};
      static const std::vector<std::string> kClarifyPatterns = {
          "no , i meant {} .", "sorry , i mean {} .", "i was asking about {} ."};
      return Lookup(r, *e, clarification ? kClarify : kEllipsis,
                    Pick(clarification ? kClarifyPatterns : kEllipsisPatterns, rng_));
    }
    return std::nullopt;
  }

  std::optional<Question> Logical() {
    const Relation &r = *Pick(many_, rng_);
    PredicateId p = kb_.FindPredicate(r.predicate);
    int op = Uniform(0, 2, rng_);
    std::optional<EntityId> a, b;
    if (op == 1) {  // intersection: two subjects sharing an object
      auto o = w_.Subject(*InverseOf(r), 2);
      if (!o) return std::nullopt;
      auto subjects = kb_.SubjectsOf(p, *o);
      std::vector<EntityId> pool(subjects.begin(), subjects.end());
      std::shuffle(pool.begin(), pool.end(), rng_);
      a = pool[0];
      b = pool[1];
    } else {
      a = w_.Subject(r);
      b = w_.Subject(r);
      if (!a || !b || *a == *b) return std::nullopt;
    }
    Node left = Find(SetOf(*a), kb_, r.predicate), right = Find(SetOf(*b), kb_, r.predicate);
    Question q;
    std::string which = r.which;
    if (op == 0) {
      which.replace(which.find("{}"), 2, "{} or {}");
      q.form.root = Node::Apply(DecodeToken::kA7, {left, right});
    } else if (op == 1) {
      which.replace(which.find("{}"), 2, "both {} and {}");
      q.form.root = Node::Apply(DecodeToken::kA8, {left, right});
    } else {
      which += " but not {}";
      q.form.root = Node::Apply(DecodeToken::kA9, {left, right});
    }
    q.turn = w_.Render("user", which + " ?", {*a, *b});
    q.turn.question_type = kLogical;
    return q;
  }

  std::optional<Question> Count() {
    const Relation &r = *Pick(many_, rng_);
    auto e = w_.Subject(r);
    if (!e) return std::nullopt;
    std::string pattern = Chance(0.5, rng_) ? "how many of " + r.plural + " are there"
                                            : "count " + r.plural;
    Question q;
    q.turn = w_.Render("user", pattern + " ?", {*e});
    q.turn.question_type = kCount;
    q.form.root = Node::Apply(DecodeToken::kA5, {Find(SetOf(*e), kb_, r.predicate)});
    return q;
  }

  std::optional<Question> Verify() {
    const Relation &r = *Pick(many_, rng_);
    auto e = w_.Subject(r);
    if (!e) return std::nullopt;
    auto objects = w_.Objects(*e, r);
    EntityId o;
    if (Chance(0.5, rng_)) {
      o = objects[Uniform(0, objects.size() - 1, rng_)];
    } else {
      for (int tries = 0; tries < 50 && !o.valid(); ++tries) {
        EntityId c = w_.RandomOf(r.object);
        if (!std::binary_search(objects.begin(), objects.end(), c)) o = c;
      }
      if (!o.valid()) return std::nullopt;
    }
    Question q;
    if (Chance(0.5, rng_)) {
      q.turn = w_.Render("user", r.verify + " ?", {*e, o});
    } else {
      q.turn = w_.Render("user", "is {} one of " + r.plural + " ?", {o, *e});
    }
    q.turn.question_type = kVerify;
    q.form.root = Node::Apply(DecodeToken::kA6,
                              {Node::Leaf(EntityEntry{o, {}}), Find(SetOf(*e), kb_, r.predicate)});
    return q;
  }

  std::optional<Question> Superlative() {
    const Relation &r = *Pick(many_, rng_);
    auto measure = MeasureFor(r.object);
    auto e = w_.Subject(r, 2);
    if (!measure || !e) return std::nullopt;
    bool most = Chance(0.5, rng_);
    Question q;
    q.turn = w_.Render("user", "which of " + r.plural + " has the " + (most ? "most " : "fewest ") +
                                   measure->noun + " ?",
                       {*e});
    q.turn.question_type = kQuant;
    q.form.root = Node::Apply(most ? DecodeToken::kA13 : DecodeToken::kA14,
                              {Find(SetOf(*e), kb_, r.predicate),
                               Node::Leaf(kb_.FindPredicate(measure->predicate))});
    return q;
  }

  std::optional<Question> Comparative(bool count) {
    const Relation &r = *Pick(many_, rng_);
    auto measure = MeasureFor(r.object);
    auto e = w_.Subject(r, 2);
    if (!measure || !e) return std::nullopt;
    PredicateId mp = kb_.FindPredicate(measure->predicate);
    std::vector<int64_t> degrees;
    for (EntityId o : w_.Objects(*e, r)) degrees.push_back(Degree(kb_, o, mp));
    auto [lo, hi] = std::minmax_element(degrees.begin(), degrees.end());
    int op = Uniform(0, 2, rng_);
    int64_t k;
    std::string phrase;
    DecodeToken token;
    if (op == 0) {
      k = Uniform(std::max<int64_t>(0, *lo - 1), *hi - 1, rng_);
      phrase = "more than";
      token = DecodeToken::kA10;
    } else if (op == 1) {
      k = Uniform(*lo + 1, *hi + 1, rng_);
      phrase = "fewer than";
      token = DecodeToken::kA11;
    } else {
      k = Pick(degrees, rng_);
      phrase = "exactly";
      token = DecodeToken::kA12;
    }
    std::string head = count ? "how many of " : "which of ";
    Question q;
    q.turn = w_.Render("user",
                       head + r.plural + " have " + phrase + " {} " + measure->noun + " ?",
                       {*e, std::to_string(k)});
    q.turn.question_type = count ? kCompareCount : kCompare;
    Node compare = Node::Apply(token, {Find(SetOf(*e), kb_, r.predicate), Node::Leaf(mp),
                                       Node::Apply(DecodeToken::kA16,
                                                   {Node::Leaf(NumberEntry{k, {}})})});
    q.form.root = count ? Node::Apply(DecodeToken::kA5, {compare}) : compare;
    return q;
  }

 private:
  std::optional<Question> Lookup(const Relation &r, EntityId e, const std::string &type,
                                 std::string pattern) {
    if (pattern.back() != '?' && pattern.back() != '.') pattern += " ?";
    Question q;
    q.turn = w_.Render("user", pattern, {e});
    q.turn.question_type = type;
    q.form.root = Find(SetOf(e), kb_, r.predicate);
    q.relation = &r;
    q.subject = e;
    return q;
  }

  const Relation *InverseOf(const Relation &r) const {
    static const std::map<std::string, std::string> kInverse = {
        {"director_of", "directed_by"}, {"cast_member", "acted_in"}, {"acted_in", "cast_member"},
        {"member_of", "has_member"},    {"has_member", "member_of"}, {"has_artist", "signed_to"}};
    const std::string &name = kInverse.at(r.predicate);
    for (const Relation &rel : Relations()) {
      if (rel.predicate == name) return &rel;
    }
    throw Error("no inverse for " + r.predicate);
  }

  DialogWriter &w_;
  const KnowledgeBase &kb_;
  Rng &rng_;
  std::vector<const Relation *> many_;
};

}  // namespace

Turn SystemTurn(const Answer &answer, const KnowledgeBase &kb) {
  if (auto *set = std::get_if<EntitySet>(&answer.value)) {
    std::string pattern;
    std::vector<Slot> slots;
    for (size_t i = 0; i < set->size() && i < 3; ++i) {
      if (i) pattern += " , ";
      pattern += "{}";
      slots.push_back((*set)[i]);
    }
    if (set->size() > 3) pattern += " and others";
    return RenderTurn(kb, "system", pattern, slots);
  }
  if (auto *n = std::get_if<int64_t>(&answer.value)) {
    return RenderTurn(kb, "system", std::to_string(*n), {});
  }
  return RenderTurn(kb, "system", std::get<bool>(answer.value) ? "yes" : "no", {});
}

const std::vector<std::string> &QuestionTypes() {
  static const std::vector<std::string> kTypes = {kDirect, kCoref,   kEllipsis, kClarify, kLogical,
                                                  kCount,  kVerify, kQuant,    kCompare, kCompareCount};
  return kTypes;
}

std::vector<Dialog> GenerateDialogs(const KnowledgeBase &kb, const DialogConfig &config) {
  if (config.min_questions < 1 || config.max_questions < config.min_questions) {
    throw Error("bad question count range");
  }
  Rng rng(config.seed);
  DialogWriter writer(kb, rng);
  QuestionMaker maker(writer);
  std::vector<Dialog> out;
  for (int d = 0; d < config.dialogs; ++d) {
    Dialog dialog;
    dialog.id = "d" + std::to_string(config.seed) + "_" + std::to_string(d);
    int questions = Uniform(config.min_questions, config.max_questions, rng);
    std::optional<Question> previous;
    std::optional<Answer> previous_answer;
    int asked = 0;
    for (int attempt = 0; asked < questions && attempt < 100; ++attempt) {
      std::optional<Question> q;
      double roll = std::uniform_real_distribution<double>(0, 1)(rng);
      const EntitySet *single =
          previous_answer ? std::get_if<EntitySet>(&previous_answer->value) : nullptr;
      if (previous && single && single->size() == 1 && roll < 0.35) {
        q = maker.Coreference(single->front());
      } else if (previous && previous->relation && roll < 0.55) {
        q = maker.Ellipsis(*previous->relation, previous->subject, roll < 0.45);
      } else {
        switch (Uniform(0, 8, rng)) {
          case 0:
          case 1: q = maker.Direct(config.ambiguous_questions); break;
          case 2: q = maker.Filter(); break;
          case 3: q = maker.Logical(); break;
          case 4: q = maker.Count(); break;
          case 5: q = maker.Verify(); break;
          case 6: q = maker.Superlative(); break;
          case 7: q = maker.Comparative(false); break;
          default: q = maker.Comparative(true); break;
        }
      }
      if (!q) continue;
      Validate(q->form);
      Answer answer = Execute(q->form, kb);
      if (auto *set = std::get_if<EntitySet>(&answer.value); set && set->empty()) continue;
      q->turn.answer = MakeAnswerSpec(answer, kb);
      q->turn.logical_form = Render(q->form, &kb);
      dialog.turns.push_back(q->turn);
      dialog.turns.push_back(SystemTurn(answer, kb));
      previous = std::move(q);
      previous_answer = std::move(answer);
      ++asked;
    }
    out.push_back(std::move(dialog));
  }
  return out;
}

}  // namespace convsp
