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

// Command-line front end: corpus generation, indexing, search, training,
// evaluation, parsing and an interactive session.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "convsp/corpus.h"
#include "convsp/errors.h"
#include "convsp/experiment.h"

namespace fs = std::filesystem;
using namespace convsp;

namespace {

struct Options {
  std::string kb_dir = "corpus";
  std::string mode = "full";
  ExperimentConfig config;
  int min_count = 2;
  bool json = false;
};

KnowledgeBase LoadKbDir(const std::string &dir) {
  return LoadKbFiles((fs::path(dir) / "kb.triples").string(), (fs::path(dir) / "kb.catalog").string());
}

void Emit(const MetricsReport &report, bool json) {
  if (json) {
    std::cout << ReportJson(report) << '\n';
  } else {
    PrintReport(std::cout, report);
  }
}

double Seconds(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - since).count();
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Conversational semantic parsing over a knowledge base"};
  app.set_config("--config", "", "TOML or INI file with option values")->check(CLI::ExistingFile);
  app.require_subcommand(1);
  app.fallthrough();

  Options o;
  ExperimentConfig &c = o.config;
  c.train.epochs = 25;
  c.train.batch_size = 16;
  c.train.learning_rate = 1e-3;
  c.model.dropout = 0.1;

  app.add_option("--kb", o.kb_dir, "directory holding kb.triples and kb.catalog");
  app.add_option("--mode", o.mode, "full, no-type-filter, separate or no-both");
  app.add_flag("--json", o.json, "print metrics as one JSON record");
  app.add_option("--d-model", c.model.d_model);
  app.add_option("--heads", c.model.heads);
  app.add_option("--encoder-layers", c.model.encoder_layers);
  app.add_option("--decoder-layers", c.model.decoder_layers);
  app.add_option("--alpha", c.model.alpha, "parsing loss weight");
  app.add_option("--ed-weight", c.model.ed_weight, "detection loss weight");
  app.add_option("--dropout", c.model.dropout);
  app.add_option("--model-seed", c.model.seed);
  app.add_option("--epochs", c.train.epochs);
  app.add_option("--batch-size", c.train.batch_size);
  app.add_option("--lr", c.train.learning_rate, "peak learning rate");
  app.add_option("--warmup", c.train.warmup_fraction);
  app.add_option("--train-seed", c.train.seed);
  app.add_option("--min-count", o.min_count, "rarer tokens encode as [UNK]");
  app.add_option("--history", c.instances.history_window, "previous turns in the input");
  app.add_option("--beam", c.answer.decode.beam_size);
  app.add_option("--max-length", c.answer.decode.limits.max_length);
  app.add_option("--threshold", c.index_threshold, "index substring threshold");
  app.add_option("--buffer", c.search.buffer_size, "BFS buffer size");
  app.add_option("--max-depth", c.search.limits.max_depth, "BFS operator depth");
  app.add_flag("--weak", c.weak_supervision, "train on BFS programs instead of gold forms");

  // gen-corpus
  auto *gen = app.add_subcommand("gen-corpus", "write a synthetic KB and train/test dialogs");
  WorldConfig world;
  DialogConfig train_dialogs, test_dialogs;
  test_dialogs.dialogs = 100;
  test_dialogs.seed = 99;
  std::string out_dir = "corpus";
  gen->add_option("--out", out_dir);
  gen->add_option("--people", world.people);
  gen->add_option("--films", world.films);
  gen->add_option("--bands", world.bands);
  gen->add_option("--ambiguity", world.ambiguity, "fraction of bands named like a film");
  gen->add_option("--world-seed", world.seed);
  gen->add_option("--dialogs", train_dialogs.dialogs);
  gen->add_option("--test-dialogs", test_dialogs.dialogs);
  gen->add_option("--dialog-seed", train_dialogs.seed);
  gen->add_option("--test-seed", test_dialogs.seed);
  gen->add_option("--ambiguous-questions", train_dialogs.ambiguous_questions);

  auto *index_cmd = app.add_subcommand("build-index", "build the entity index and print statistics");
  std::string lookup;
  index_cmd->add_option("--lookup", lookup, "print candidates for a mention");

  auto *bfs = app.add_subcommand("bfs-search", "search programs for the answers of a dialog file");
  std::string data_path;
  bool show = false;
  bfs->add_option("--data", data_path)->required();
  bfs->add_flag("--show", show, "print the program found for each question");

  auto *train = app.add_subcommand("train", "train a system");
  std::string model_path = "model.ckpt";
  train->add_option("--data", data_path)->required();
  train->add_option("--model", model_path);

  auto *eval = app.add_subcommand("eval", "evaluate a trained system");
  eval->add_option("--data", data_path)->required();
  eval->add_option("--model", model_path);

  auto *parse = app.add_subcommand("parse", "answer one question");
  std::vector<std::string> questions;
  parse->add_option("--model", model_path);
  parse->add_option("question", questions, "earlier questions then the question")->required();

  auto *repl = app.add_subcommand("repl", "interactive session");
  repl->add_option("--model", model_path);

  auto *experiment = app.add_subcommand("experiment", "train on one file, evaluate on another");
  std::string test_path;
  experiment->add_option("--train", data_path)->required();
  experiment->add_option("--test", test_path)->required();
  experiment->add_option("--model", model_path, "also save the trained system here");

  CLI11_PARSE(app, argc, argv);

  try {
    c.mode = ParseMode(o.mode);
    if (gen->parsed()) {
      fs::create_directories(out_dir);
      KnowledgeBase kb = GenerateWorld(world);
      std::ofstream triples(fs::path(out_dir) / "kb.triples"), catalog(fs::path(out_dir) / "kb.catalog");
      WriteKb(kb, triples, catalog);
      test_dialogs.ambiguous_questions = train_dialogs.ambiguous_questions;
      WriteDialogFile((fs::path(out_dir) / "train.jsonl").string(), GenerateDialogs(kb, train_dialogs));
      WriteDialogFile((fs::path(out_dir) / "test.jsonl").string(), GenerateDialogs(kb, test_dialogs));
      std::cout << "wrote " << out_dir << ": " << kb.num_entities() << " entities, "
                << kb.triples().size() << " triples\n";
      return 0;
    }

    KnowledgeBase kb = LoadKbDir(o.kb_dir);
    InvertedIndex index = InvertedIndex::Build(kb, c.index_threshold);

    if (index_cmd->parsed()) {
      InvertedIndex::Stats s = index.stats();
      std::cout << "threshold " << index.threshold() << "\nkeys " << s.keys << "\nentries "
                << s.entries << "\nambiguous keys " << s.ambiguous_keys << "\nmean candidates "
                << s.mean_candidates << '\n';
      if (!lookup.empty()) {
        for (const IndexEntry &e : index.Lookup(Normalize(lookup))) {
          std::cout << kb.EntityName(e.entity) << '\t' << kb.EntityText(e.entity) << '\t' << e.score
                    << '\n';
        }
      }
      return 0;
    }

    if (bfs->parsed()) {
      auto instances = BuildInstances(LoadDialogFile(data_path), kb, c.instances);
      auto start = std::chrono::steady_clock::now();
      std::vector<SearchQuestion> batch;
      for (const QuestionInstance &q : instances) {
        batch.push_back({q.type, q.answer, GoldPools(q, kb)});
        if (show) {
          SearchResult r = BfsSearch(q.answer, batch.back().pools, kb, c.search);
          std::cout << JoinTokens(q.tokens) << '\t'
                    << (r.success() ? Render(r.target().form(), &kb) : "-") << '\n';
        }
      }
      SuccessReport report = SuccessRatio(batch, kb, c.search);
      for (const auto &[type, count] : report.by_type) {
        std::cout << type << '\t' << count.found << '/' << count.total << '\t' << count.ratio() << '\n';
      }
      std::cout << "overall\t" << report.overall.found << '/' << report.overall.total << '\t'
                << report.overall.ratio() << "\nbudget failures\t" << report.budget_failures
                << "\nseconds\t" << Seconds(start) << '\n';
      return 0;
    }

    auto train_system = [&](const std::string &path) {
      auto instances = BuildInstances(LoadDialogFile(path), kb, c.instances);
      Vocabulary vocab = BuildVocabulary(instances, o.min_count);
      TrainingSet data = MakeTrainingSet(instances, kb, vocab, c);
      std::cerr << data.examples.size() << " of " << data.questions << " questions have targets";
      if (data.searched) std::cerr << " (search success " << data.search_success() << ")";
      std::cerr << '\n';
      auto start = std::chrono::steady_clock::now();
      System s = TrainSystem(data, std::move(vocab), kb, c, [&](std::string_view which, const EpochStats &e) {
        std::cerr << which << " epoch " << e.epoch << " loss " << e.loss << " parsing " << e.parsing
                  << " detection " << e.detection << " (" << Seconds(start) << " s)\n";
      });
      TeacherForcedAccuracy acc = Evaluate(*s.parser, data.examples);
      std::cerr << "teacher-forced token accuracy " << acc.token_accuracy() << ", entry accuracy "
                << acc.entry_accuracy() << '\n';
      return s;
    };
    auto evaluate = [&](const System &s, const std::string &path) {
      auto instances = BuildInstances(LoadDialogFile(path), kb, c.instances);
      Evaluation ev = EvaluateSystem(s, instances, kb, index, OptionsFor(s, c));
      Emit(ev.report, o.json);
    };

    if (train->parsed()) {
      SaveSystem(train_system(data_path), model_path);
      return 0;
    }
    if (experiment->parsed()) {
      System s = train_system(data_path);
      if (experiment->count("--model")) SaveSystem(s, model_path);
      evaluate(s, test_path);
      return 0;
    }

    System s = LoadSystem(model_path, c.mode);
    AnswerOptions options = OptionsFor(s, c);
    if (eval->parsed()) {
      evaluate(s, data_path);
    } else if (parse->parsed()) {
      ReplSession session(s, kb, index, options, c.instances);
      for (size_t i = 0; i + 1 < questions.size(); ++i) session.Ask(questions[i]);
      std::vector<std::string> tokens = session.Context(questions.back());
      std::vector<int> input = s.vocab.Encode(tokens);
      input.push_back(Vocabulary::kCtx);
      AnswerResult r = AnswerQuestion(*s.parser, s.detection_model(), kb, index, tokens, input, options);
      for (const Hypothesis &h : r.provenance.hypotheses) {
        std::cout << h.score << '\t' << Render(h.form(), &kb) << '\n';
      }
      std::cout << session.Describe(r);
      return r.answer ? 0 : 2;
    } else if (repl->parsed()) {
      ReplSession session(s, kb, index, options, c.instances);
      session.Run(std::cin, std::cout);
    }
  } catch (const Error &e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
