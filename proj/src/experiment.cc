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

#include "convsp/experiment.h"

#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>

#include "convsp/corpus.h"
#include "convsp/errors.h"

namespace convsp {

ModeFlags FlagsFor(Mode mode) {
  switch (mode) {
    case Mode::kFull: return {true, true};
    case Mode::kNoTypeFilter: return {true, false};
    case Mode::kSeparate: return {false, true};
    case Mode::kNoBoth: return {false, false};
  }
  throw Error("bad mode");
}

std::string_view ModeName(Mode mode) {
  switch (mode) {
    case Mode::kFull: return "full";
    case Mode::kNoTypeFilter: return "no-type-filter";
    case Mode::kSeparate: return "separate";
    case Mode::kNoBoth: return "no-both";
  }
  throw Error("bad mode");
}

Mode ParseMode(std::string_view name) {
  for (Mode m : {Mode::kFull, Mode::kNoTypeFilter, Mode::kSeparate, Mode::kNoBoth}) {
    if (ModeName(m) == name) return m;
  }
  throw Error("unknown mode '" + std::string(name) + "'");
}

ModelConfig ParserConfig(const ExperimentConfig &config, const Vocabulary &vocab,
                         const KnowledgeBase &kb) {
  ModelConfig c = config.model;
  c.vocab_size = vocab.size();
  c.num_predicates = kb.num_predicates();
  c.num_types = kb.num_types();
  if (!FlagsFor(config.mode).joint) c.ed_weight = 0.0;
  return c;
}

std::optional<ModelConfig> DetectorConfig(const ExperimentConfig &config, const Vocabulary &vocab,
                                          const KnowledgeBase &kb) {
  if (FlagsFor(config.mode).joint) return std::nullopt;
  ModelConfig c = ParserConfig(config, vocab, kb);
  c.alpha = 0.0;
  c.ed_weight = config.model.ed_weight;
  return c;
}

TrainingSet MakeTrainingSet(const std::vector<QuestionInstance> &instances, const KnowledgeBase &kb,
                            const Vocabulary &vocab, const ExperimentConfig &config) {
  TrainingSet out;
  for (const QuestionInstance &q : instances) {
    ++out.questions;
    std::optional<GoldProgram> program;
    if (q.form && !config.weak_supervision) {
      program = AnchorProgram(*q.form, q);
    } else {
      ++out.searched;
      SearchResult r = BfsSearch(q.answer, GoldPools(q, kb), kb, config.search);
      if (r.success()) {
        ++out.found;
        program = r.target();
      }
    }
    if (!program) continue;
    if (static_cast<int>(program->steps.size()) + 1 > config.model.max_decode_length) continue;
    out.examples.push_back({EncodeInput(q, vocab), q.labels, program->steps});
  }
  return out;
}

System TrainSystem(const TrainingSet &data, Vocabulary vocab, const KnowledgeBase &kb,
                   const ExperimentConfig &config, const EpochCallback &on_epoch) {
  System s;
  s.flags = FlagsFor(config.mode);
  s.parser = std::make_unique<Model>(ParserConfig(config, vocab, kb));
  Train(*s.parser, data.examples, config.train, [&](const EpochStats &e) {
    if (on_epoch) on_epoch("parser", e);
  });
  if (auto detector = DetectorConfig(config, vocab, kb)) {
    s.detector = std::make_unique<Model>(*detector);
    Train(*s.detector, data.examples, config.train, [&](const EpochStats &e) {
      if (on_epoch) on_epoch("detector", e);
    });
  }
  s.vocab = std::move(vocab);
  return s;
}

void SaveSystem(const System &system, const std::string &path) {
  auto save = [&](const Model &m, const std::string &p) {
    std::ofstream out(p);
    if (!out) throw Error("cannot write " + p);
    SaveCheckpoint(out, m, system.vocab);
  };
  save(*system.parser, path);
  if (system.detector) save(*system.detector, path + ".detector");
}

System LoadSystem(const std::string &path, Mode mode) {
  auto load = [](const std::string &p) {
    std::ifstream in(p);
    if (!in) throw Error("cannot open " + p);
    return LoadCheckpoint(in);
  };
  System s;
  s.flags = FlagsFor(mode);
  Checkpoint parser = load(path);
  s.parser = std::move(parser.model);
  s.vocab = std::move(parser.vocab);
  if (!s.flags.joint) {
    if (!std::filesystem::exists(path + ".detector")) {
      throw Error("mode " + std::string(ModeName(mode)) + " needs " + path + ".detector");
    }
    s.detector = std::move(load(path + ".detector").model);
  }
  return s;
}

AnswerOptions OptionsFor(const System &system, const ExperimentConfig &config) {
  AnswerOptions o = config.answer;
  o.type_filter = system.flags.type_filter;
  return o;
}

Evaluation EvaluateSystem(const System &system, const std::vector<QuestionInstance> &questions,
                          const KnowledgeBase &kb, const InvertedIndex &index,
                          const AnswerOptions &options) {
  LabelSpace space(kb.num_types());
  MetricsBuilder metrics;
  Evaluation out;
  for (const QuestionInstance &q : questions) {
    std::vector<int> input = EncodeInput(q, system.vocab);
    AnswerResult r = AnswerQuestion(*system.parser, system.detection_model(), kb, index, q.tokens,
                                    input, options);
    metrics.AddAnswer(q.type, q.answer, r.answer);
    EntitySet gold_entities;
    std::vector<Mention> gold_mentions;
    for (const GoldMention &m : q.mentions) {
      gold_entities.push_back(m.entity);
      gold_mentions.push_back(m.mention);
    }
    std::sort(gold_entities.begin(), gold_entities.end());
    gold_entities.erase(std::unique(gold_entities.begin(), gold_entities.end()),
                        gold_entities.end());
    metrics.AddLinking(gold_entities, r.provenance.mentions);
    metrics.AddDetection(gold_mentions, DecodeMentions(r.provenance.labels, q.tokens, space));
    out.results.push_back(std::move(r));
  }
  out.report = metrics.Report();
  return out;
}

ReplSession::ReplSession(const System &system, const KnowledgeBase &kb, const InvertedIndex &index,
                         AnswerOptions options, InstanceOptions instances)
    : system_(system), kb_(kb), index_(index), options_(options), instances_(instances) {}

std::vector<std::string> ReplSession::Context(std::string_view utterance) const {
  std::vector<std::string> current = Tokenize(utterance);
  if (static_cast<int>(current.size()) > instances_.max_tokens) {
    current.erase(current.begin(), current.end() - instances_.max_tokens);
  }
  size_t first = history_.size() - std::min<size_t>(history_.size(), instances_.history_window);
  auto length_from = [&](size_t f) {
    size_t n = current.size();
    for (size_t h = f; h < history_.size(); ++h) n += history_[h].size() + 1;
    return n;
  };
  while (first < history_.size() && static_cast<int>(length_from(first)) > instances_.max_tokens) {
    ++first;
  }
  std::vector<std::string> out;
  for (size_t h = first; h < history_.size(); ++h) {
    out.insert(out.end(), history_[h].begin(), history_[h].end());
    out.emplace_back(Vocabulary::kSepToken);
  }
  out.insert(out.end(), current.begin(), current.end());
  return out;
}

AnswerResult ReplSession::Ask(std::string_view utterance) {
  std::vector<std::string> tokens = Context(utterance);
  std::vector<int> input = system_.vocab.Encode(tokens);
  input.push_back(Vocabulary::kCtx);
  AnswerResult r = AnswerQuestion(*system_.parser, system_.detection_model(), kb_, index_, tokens,
                                  input, options_);
  history_.push_back(Tokenize(utterance));
  history_.push_back(r.answer ? Tokenize(SystemTurn(*r.answer, kb_).utterance)
                              : std::vector<std::string>{"no", "answer"});
  return r;
}

std::string ReplSession::Describe(const AnswerResult &r) const {
  std::string out;
  if (!r.answer) {
    out += "no answer: " + r.provenance.failure + "\n";
  } else {
    out += "answer: " + RenderAnswer(*r.answer, kb_) + "\n";
    if (r.provenance.executed) out += "form: " + Render(*r.provenance.executed, &kb_) + "\n";
  }
  for (const LinkedMention &m : r.provenance.mentions) {
    out += "entity: \"" + m.mention.surface + "\" (" + kb_.TypeName(m.mention.type) + ") -> ";
    if (m.candidates.empty()) {
      out += "none";
    } else {
      EntityId e = m.candidates.front();
      out += kb_.EntityName(e) + " \"" + kb_.EntityText(e) + "\"";
    }
    out += "\n";
  }
  return out;
}

void ReplSession::Run(std::istream &in, std::ostream &out) {
  std::string line;
  while (out << "> " << std::flush, std::getline(in, line)) {
    std::string text = Normalize(line);
    if (text.empty()) continue;
    if (line.find(":quit") != std::string::npos) break;
    if (line.find(":reset") != std::string::npos) {
      Reset();
      out << "history cleared\n";
      continue;
    }
    try {
      out << Describe(Ask(line));
    } catch (const Error &e) {
      out << "error: " << e.what() << "\n";
    }
  }
  out << "\n";
}

}  // namespace convsp
