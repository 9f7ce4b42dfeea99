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

#include "convsp/dataset.h"

#include <fstream>
#include <map>

#include "convsp/errors.h"
#include "json.hpp"

namespace convsp {
namespace {

using json = nlohmann::json;

const char *KindName(AnswerSpec::Kind k) {
  switch (k) {
    case AnswerSpec::Kind::kSet: return "set";
    case AnswerSpec::Kind::kNum: return "num";
    default: return "bool";
  }
}

json AnswerToJson(const AnswerSpec &a) {
  json j;
  j["type"] = KindName(a.kind);
  if (a.kind == AnswerSpec::Kind::kSet) j["entities"] = a.entities;
  if (a.kind == AnswerSpec::Kind::kNum) j["value"] = a.number;
  if (a.kind == AnswerSpec::Kind::kBool) j["value"] = a.truth;
  return j;
}

AnswerSpec AnswerFromJson(const json &j) {
  AnswerSpec a;
  std::string type = j.at("type").get<std::string>();
  if (type == "set") {
    a.kind = AnswerSpec::Kind::kSet;
    a.entities = j.at("entities").get<std::vector<std::string>>();
  } else if (type == "num") {
    a.kind = AnswerSpec::Kind::kNum;
    a.number = j.at("value").get<int64_t>();
  } else if (type == "bool") {
    a.kind = AnswerSpec::Kind::kBool;
    a.truth = j.at("value").get<bool>();
  } else {
    throw ParseError("unknown answer type '" + type + "'");
  }
  return a;
}

json TurnToJson(const Turn &t) {
  json j;
  j["speaker"] = t.speaker;
  j["utterance"] = t.utterance;
  if (!t.question_type.empty()) j["question_type"] = t.question_type;
  j["labels"] = t.labels;
  j["links"] = t.links;
  if (t.answer) j["answer"] = AnswerToJson(*t.answer);
  if (t.logical_form) j["logical_form"] = *t.logical_form;
  return j;
}

Turn TurnFromJson(const json &j) {
  Turn t;
  t.speaker = j.at("speaker").get<std::string>();
  t.utterance = j.at("utterance").get<std::string>();
  t.question_type = j.value("question_type", "");
  t.labels = j.value("labels", std::vector<std::string>{});
  t.links = j.value("links", std::vector<std::string>{});
  if (j.contains("answer")) t.answer = AnswerFromJson(j.at("answer"));
  if (j.contains("logical_form")) t.logical_form = j.at("logical_form").get<std::string>();
  return t;
}

std::string TurnId(const Dialog &d, size_t t) { return d.id + "#" + std::to_string(t); }

struct ParsedTurn {
  std::vector<std::string> tokens;
  std::vector<int> labels;
  std::vector<GoldMention> mentions;
};

void FindLatest(const Node &node, const QuestionInstance &q, bool *ok, Node &out) {
  if (node.entry) {
    if (auto *e = std::get_if<EntityEntry>(&*node.entry)) {
      int pos = -1;
      for (const GoldMention &m : q.mentions) {
        if (e->id && m.entity == *e->id) pos = std::max(pos, m.mention.begin);
      }
      if (pos < 0) *ok = false;
      out.entry = EntityEntry{e->id, pos};
    } else if (auto *n = std::get_if<NumberEntry>(&*node.entry)) {
      int pos = -1;
      for (int i = 0; i < static_cast<int>(q.tokens.size()); ++i) {
        if (n->value && q.tokens[i] == std::to_string(*n->value)) pos = i;
      }
      if (pos < 0) *ok = false;
      out.entry = NumberEntry{n->value, pos};
    }
    return;
  }
  for (size_t i = 0; i < node.children.size(); ++i) FindLatest(node.children[i], q, ok, out.children[i]);
}

}  // namespace

std::vector<Dialog> LoadDialogs(std::istream &in) {
  std::vector<Dialog> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    Dialog d;
    try {
      json j = json::parse(line);
      d.id = j.at("id").get<std::string>();
      for (const json &t : j.at("turns")) d.turns.push_back(TurnFromJson(t));
    } catch (const json::exception &e) {
      throw ParseError(e.what(), lineno);
    } catch (const ParseError &e) {
      throw ParseError(e.what(), lineno);
    }
    for (size_t t = 0; t < d.turns.size(); ++t) {
      size_t n = Tokenize(d.turns[t].utterance).size();
      if (d.turns[t].labels.size() != n) {
        throw DataError("turn " + TurnId(d, t) + ": " + std::to_string(d.turns[t].labels.size()) +
                        " labels for " + std::to_string(n) + " tokens");
      }
    }
    out.push_back(std::move(d));
  }
  return out;
}

std::vector<Dialog> LoadDialogFile(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  return LoadDialogs(in);
}

void WriteDialogs(std::ostream &out, const std::vector<Dialog> &dialogs) {
  for (const Dialog &d : dialogs) {
    json j;
    j["id"] = d.id;
    j["turns"] = json::array();
    for (const Turn &t : d.turns) j["turns"].push_back(TurnToJson(t));
    out << j.dump() << '\n';
  }
}

void WriteDialogFile(const std::string &path, const std::vector<Dialog> &dialogs) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  WriteDialogs(out, dialogs);
}

Answer ResolveAnswer(const AnswerSpec &spec, const KnowledgeBase &kb) {
  switch (spec.kind) {
    case AnswerSpec::Kind::kNum: return Answer{spec.number};
    case AnswerSpec::Kind::kBool: return Answer{spec.truth};
    default: break;
  }
  EntitySet set;
  for (const std::string &name : spec.entities) {
    EntityId e = kb.FindEntity(name);
    if (!e.valid()) throw ReferenceError("unknown answer entity '" + name + "'");
    set.push_back(e);
  }
  std::sort(set.begin(), set.end());
  set.erase(std::unique(set.begin(), set.end()), set.end());
  return Answer{std::move(set)};
}

AnswerSpec MakeAnswerSpec(const Answer &answer, const KnowledgeBase &kb) {
  AnswerSpec spec;
  if (auto *s = std::get_if<EntitySet>(&answer.value)) {
    for (EntityId e : *s) spec.entities.push_back(kb.EntityName(e));
  } else if (auto *n = std::get_if<int64_t>(&answer.value)) {
    spec.kind = AnswerSpec::Kind::kNum;
    spec.number = *n;
  } else {
    spec.kind = AnswerSpec::Kind::kBool;
    spec.truth = std::get<bool>(answer.value);
  }
  return spec;
}

std::vector<QuestionInstance> BuildInstances(const std::vector<Dialog> &dialogs,
                                             const KnowledgeBase &kb,
                                             const InstanceOptions &options) {
  LabelSpace space(kb.num_types());
  std::vector<QuestionInstance> out;
  for (const Dialog &d : dialogs) {
    std::vector<ParsedTurn> parsed;
    for (size_t t = 0; t < d.turns.size(); ++t) {
      const Turn &turn = d.turns[t];
      ParsedTurn p;
      p.tokens = Tokenize(turn.utterance);
      if (turn.labels.size() != p.tokens.size()) {
        throw DataError("turn " + TurnId(d, t) + ": label/token length mismatch");
      }
      for (const std::string &l : turn.labels) p.labels.push_back(space.Parse(l, kb));
      std::vector<Mention> mentions = DecodeMentions(p.labels, p.tokens, space);
      if (mentions.size() != turn.links.size()) {
        throw DataError("turn " + TurnId(d, t) + ": " + std::to_string(mentions.size()) +
                        " mentions but " + std::to_string(turn.links.size()) + " links");
      }
      for (size_t i = 0; i < mentions.size(); ++i) {
        EntityId e = kb.FindEntity(turn.links[i]);
        if (!e.valid()) {
          throw ReferenceError("turn " + TurnId(d, t) + ": unknown entity '" + turn.links[i] + "'");
        }
        p.mentions.push_back({mentions[i], e});
      }
      parsed.push_back(std::move(p));
    }
    for (size_t t = 0; t < d.turns.size(); ++t) {
      const Turn &turn = d.turns[t];
      if (!turn.is_question()) continue;
      if (static_cast<int>(parsed[t].tokens.size()) > options.max_tokens) {
        throw DataError("turn " + TurnId(d, t) + " is longer than max_tokens");
      }
      size_t first = t >= static_cast<size_t>(options.history_window) ? t - options.history_window : 0;
      auto length_from = [&](size_t f) {
        size_t n = parsed[t].tokens.size();
        for (size_t h = f; h < t; ++h) n += parsed[h].tokens.size() + 1;
        return n;
      };
      while (first < t && static_cast<int>(length_from(first)) > options.max_tokens) ++first;

      QuestionInstance q;
      q.dialog_id = d.id;
      q.turn = static_cast<int>(t);
      q.type = turn.question_type;
      for (size_t h = first; h <= t; ++h) {
        int offset = q.tokens.size();
        const ParsedTurn &p = parsed[h];
        q.tokens.insert(q.tokens.end(), p.tokens.begin(), p.tokens.end());
        q.labels.insert(q.labels.end(), p.labels.begin(), p.labels.end());
        for (GoldMention m : p.mentions) {
          m.mention.begin += offset;
          m.mention.end += offset;
          q.mentions.push_back(m);
        }
        if (h < t) {
          q.tokens.emplace_back(Vocabulary::kSepToken);
          q.labels.push_back(LabelSpace::kOutside);
        }
      }
      q.answer = ResolveAnswer(*turn.answer, kb);
      if (turn.logical_form) q.form = ParseLogicalForm(*turn.logical_form, &kb);
      out.push_back(std::move(q));
    }
  }
  return out;
}

std::vector<int> EncodeInput(const QuestionInstance &q, const Vocabulary &vocab) {
  std::vector<int> ids = vocab.Encode(q.tokens);
  ids.push_back(Vocabulary::kCtx);
  return ids;
}

std::optional<GoldProgram> AnchorProgram(const LogicalForm &form, const QuestionInstance &q) {
  LogicalForm anchored = form;
  bool ok = true;
  FindLatest(form.root, q, &ok, anchored.root);
  if (!ok) return std::nullopt;
  return GoldProgram{Serialize(anchored)};
}

EntryPools GoldPools(const QuestionInstance &q, const KnowledgeBase &kb) {
  std::vector<LinkedMention> linked;
  for (const GoldMention &m : q.mentions) linked.push_back({m.mention, {m.entity}});
  return PoolsFromLinks(q.tokens, linked, kb);
}

std::optional<GoldProgram> TargetProgram(const QuestionInstance &q, const KnowledgeBase &kb,
                                         const SearchConfig &search, SearchResult *search_out) {
  if (q.form) return AnchorProgram(*q.form, q);
  SearchResult r = BfsSearch(q.answer, GoldPools(q, kb), kb, search);
  std::optional<GoldProgram> out;
  if (r.success()) out = r.target();
  if (search_out) *search_out = std::move(r);
  return out;
}

Vocabulary BuildVocabulary(const std::vector<QuestionInstance> &instances, int min_count) {
  std::map<std::string, int> counts;
  for (const QuestionInstance &q : instances) {
    for (const std::string &t : q.tokens) ++counts[t];
  }
  Vocabulary v;
  for (const QuestionInstance &q : instances) {
    for (const std::string &t : q.tokens) {
      if (counts[t] >= min_count) v.Add(t);
    }
  }
  return v;
}

}  // namespace convsp
