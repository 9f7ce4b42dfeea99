// End-to-end acceptance run: one PASS/FAIL line per criterion. Criteria 5-8
// share the systems trained on the 200-dialog synthetic corpus.

#include <chrono>
#include <cstdarg>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "convsp/corpus.h"
#include "convsp/errors.h"
#include "convsp/experiment.h"
#include "lf_gen.h"
#include "model_util.h"
#include "naive_eval.h"
#include "program_enum.h"
#include "prune_check.h"
#include "random_kb.h"

namespace convsp {
namespace {

using Clock = std::chrono::steady_clock;

double Since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string Fmt(const char *format, ...) __attribute__((format(printf, 1, 2)));
std::string Fmt(const char *format, ...) {
  char buf[512];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof buf, format, args);
  va_end(args);
  return buf;
}

int failures = 0;

void Run(int number, const char *name, const std::function<Outcome()> &body) {
  auto start = Clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception &e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  if (!o.pass) ++failures;
  std::printf("criterion %d [%s] %s: %s (%.1f s)\n", number, o.pass ? "PASS" : "FAIL", name,
              o.detail.c_str(), Since(start));
  std::fflush(stdout);
}

Outcome ExecutorOracle() {
  std::mt19937 rng(2024);
  auto start = Clock::now();
  int agree = 0;
  const int kCases = 500;
  for (int i = 0; i < kCases; ++i) {
    KnowledgeBase kb = testing::RandomKb(rng, 50);
    LogicalForm lf = testing::RandomForm(1 + i % 4, testing::PoolFor(kb), rng);
    if (kb.triples().size() > 50 || Depth(lf.root) > 4) continue;
    agree += testing::SameValue(Execute(lf, kb).value, testing::NaiveEval(lf.root, kb));
  }
  double seconds = Since(start);
  return {agree == kCases && seconds < 10.0,
          Fmt("%d/%d agree with the naive evaluator in %.2f s (limit 10 s)", agree, kCases, seconds)};
}

Outcome GrammarSoundness() {
  std::mt19937 rng(5);
  testing::EntryPool pool{{EntityId(0), EntityId(1), EntityId(2)},
                          {PredicateId(0), PredicateId(1)},
                          {TypeId(0), TypeId(1)},
                          {1, 5}};
  int violations = 0;
  for (int i = 0; i < 1000; ++i) {
    LogicalForm lf = testing::RandomForm(1 + i % 6, pool, rng);
    if (Deserialize(Serialize(lf)) != lf) ++violations;
    if (ParseLogicalForm(Render(lf)) != lf) ++violations;
  }
  testing::EntryPool small{{EntityId(0), EntityId(1)}, {PredicateId(0)}, {TypeId(0)}, {2}};
  std::set<std::string> from_trees;
  for (const LogicalForm &lf : testing::EnumerateForms(3, small)) {
    from_trees.insert(RenderSteps(Serialize(lf)));
  }
  std::set<std::string> from_legal = testing::LegalClosure({3, 100}, small);
  std::vector<std::string> diff;
  std::set_symmetric_difference(from_trees.begin(), from_trees.end(), from_legal.begin(),
                                from_legal.end(), std::back_inserter(diff));
  violations += diff.size();
  return {violations == 0,
          Fmt("1000 round trips, depth-3 closure %zu sequences vs %zu trees, %d violations",
              from_legal.size(), from_trees.size(), violations)};
}

Outcome BfsOracle() {
  KnowledgeBase kb = GenerateWorld({});
  DialogConfig dc;
  dc.dialogs = 400;
  dc.seed = 31;
  std::vector<QuestionInstance> one_hop;
  for (QuestionInstance &q : BuildInstances(GenerateDialogs(kb, dc), kb)) {
    if (one_hop.size() < 500 && q.form && q.form->root.token == DecodeToken::kA4 &&
        Depth(q.form->root) == 2) {
      one_hop.push_back(std::move(q));
    }
  }
  if (one_hop.size() < 500) return {false, Fmt("only %zu one-hop questions", one_hop.size())};
  SearchConfig search;
  search.buffer_size = 1000;
  auto start = Clock::now();
  int found = 0, reexecuted = 0;
  for (const QuestionInstance &q : one_hop) {
    SearchResult r = BfsSearch(q.answer, GoldPools(q, kb), kb, search);
    if (!r.success()) continue;
    ++found;
    bool all = true;
    for (const GoldProgram &p : r.programs) all = all && Execute(p.form(), kb) == q.answer;
    reexecuted += all;
  }
  double seconds = Since(start);
  double ratio = double(found) / one_hop.size();
  return {ratio == 1.0 && reexecuted == found && seconds < 60.0,
          Fmt("success %.3f on %zu one-hop questions (%d/%d re-execute to gold), %.1f s (limit 60 s)",
              ratio, one_hop.size(), reexecuted, found, seconds)};
}

Outcome GradientChecks() {
  ModelConfig c = testing::ToyConfig();
  c.d_model = 16;
  c.heads = 2;
  Model model(c);
  std::vector<TrainingExample> batch;
  for (int i = 0; i < 4; ++i) batch.push_back(testing::ToyExample(i));
  auto groups = testing::FiniteDifferenceError(model, batch, 4);
  double worst = 0;
  std::string worst_name;
  bool pass = true;
  for (const char *g : {"encoder.embed", "encoder.position", "encoder.layer0", "encoder.layer1",
                        "decoder.embed", "decoder.position", "decoder.layer0", "decoder.layer1",
                        "head.token", "head.predicate", "head.type", "head.entity_pointer",
                        "head.number_pointer", "head.detection"}) {
    auto it = groups.find(g);
    if (it == groups.end() || it->second.analytic_norm == 0) {
      pass = false;
      worst_name = std::string(g) + " (missing or zero gradient)";
      continue;
    }
    if (it->second.error >= 1e-4) pass = false;
    if (it->second.error > worst) {
      worst = it->second.error;
      worst_name = g;
    }
  }
  return {pass, Fmt("d_e=16, 14 groups, worst relative error %.2e in %s (limit 1e-4)", worst,
                    worst_name.c_str())};
}

// Shared synthetic setup for criteria 5-8.
constexpr int kDialogs = 200;
constexpr int kTestDialogs = 100;

struct Corpus {
  KnowledgeBase kb;
  std::vector<QuestionInstance> train, test;
  InvertedIndex index;
};

ExperimentConfig BaseConfig(Mode mode, uint64_t seed) {
  ExperimentConfig c;
  c.mode = mode;
  c.model.d_model = 64;
  c.model.heads = 6;
  c.model.dropout = 0.1;
  c.model.seed = seed;
  c.train.epochs = 25;
  c.train.batch_size = 16;
  c.train.learning_rate = 1e-3;
  c.train.seed = seed;
  return c;
}

Corpus &SharedCorpus() {
  static Corpus *corpus = [] {
    KnowledgeBase kb = GenerateWorld({});
    DialogConfig train;
    train.dialogs = kDialogs;
    DialogConfig test = train;
    test.dialogs = kTestDialogs;
    test.seed = 99;
    auto train_q = BuildInstances(GenerateDialogs(kb, train), kb);
    auto test_q = BuildInstances(GenerateDialogs(kb, test), kb);
    InvertedIndex index = InvertedIndex::Build(kb);
    return new Corpus{std::move(kb), std::move(train_q), std::move(test_q), std::move(index)};
  }();
  return *corpus;
}

struct Trained {
  System system;
  TrainingSet data;
  double seconds = 0;
};

Trained TrainMode(Mode mode, uint64_t seed) {
  Corpus &c = SharedCorpus();
  ExperimentConfig config = BaseConfig(mode, seed);
  Vocabulary vocab = BuildVocabulary(c.train, 2);
  auto start = Clock::now();
  TrainingSet data = MakeTrainingSet(c.train, c.kb, vocab, config);
  System system = TrainSystem(data, std::move(vocab), c.kb, config);
  return {std::move(system), std::move(data), Since(start)};
}

MetricsReport EvaluateOn(const System &system, const std::vector<QuestionInstance> &questions,
                         int beam = 4) {
  Corpus &c = SharedCorpus();
  ExperimentConfig config = BaseConfig(Mode::kFull, 1);
  config.answer.decode.beam_size = beam;
  return EvaluateSystem(system, questions, c.kb, c.index, OptionsFor(system, config)).report;
}

Trained &FullSeed1() {
  static Trained *t = new Trained(TrainMode(Mode::kFull, 1));
  return *t;
}

Outcome Overfit() {
  auto start = Clock::now();
  Trained &t = FullSeed1();
  Corpus &c = SharedCorpus();
  TeacherForcedAccuracy acc = Evaluate(*t.system.parser, t.data.examples);
  MetricsReport report = EvaluateOn(t.system, c.test);
  double seconds = Since(start);
  return {acc.token_accuracy() >= 0.99 && report.overall >= 0.85 && seconds < 1800,
          Fmt("%d dialogs (%zu questions), d_e=64, 6 heads: train token accuracy %.4f (>= 0.99), "
              "held-out overall %.4f (>= 0.85, set F1 %.4f), %.0f s (limit 1800 s)",
              kDialogs, c.train.size(), acc.token_accuracy(), report.overall, report.all.f1(),
              seconds)};
}

Outcome TypeFilter() {
  Corpus &c = SharedCorpus();
  DialogConfig dc;
  dc.dialogs = 100;
  dc.seed = 777;
  dc.ambiguous_questions = 1.0;
  auto questions = BuildInstances(GenerateDialogs(c.kb, dc), c.kb);
  System &s = FullSeed1().system;
  MetricsReport full = EvaluateOn(s, questions);
  s.flags.type_filter = false;
  MetricsReport unfiltered = EvaluateOn(s, questions);
  s.flags.type_filter = true;
  return {full.linking.precision() > unfiltered.linking.precision(),
          Fmt("linking precision full %.4f vs no-type-filter %.4f; overall %.4f vs %.4f",
              full.linking.precision(), unfiltered.linking.precision(), full.overall,
              unfiltered.overall)};
}

Outcome MultiTask() {
  Corpus &c = SharedCorpus();
  double full_f1 = 0, sep_f1 = 0, full_det = 0, sep_det = 0, noboth = 0;
  std::string per_seed;
  for (uint64_t seed = 1; seed <= 3; ++seed) {
    MetricsReport full = seed == 1 ? EvaluateOn(FullSeed1().system, c.test)
                                   : EvaluateOn(TrainMode(Mode::kFull, seed).system, c.test);
    Trained sep = TrainMode(Mode::kSeparate, seed);
    MetricsReport separate = EvaluateOn(sep.system, c.test);
    sep.system.flags = FlagsFor(Mode::kNoBoth);
    MetricsReport both_off = EvaluateOn(sep.system, c.test);
    full_f1 += full.overall / 3;
    sep_f1 += separate.overall / 3;
    full_det += full.detection.f1() / 3;
    sep_det += separate.detection.f1() / 3;
    noboth += both_off.overall / 3;
    per_seed += Fmt(" seed%d %.3f/%.3f", int(seed), full.overall, separate.overall);
  }
  return {full_f1 >= sep_f1 && full_det >= sep_det - 0.01,
          Fmt("mean overall full %.4f vs separate %.4f (no-both %.4f);%s; detection F1 joint %.4f "
              "vs separate %.4f (drop <= 0.01)",
              full_f1, sep_f1, noboth, per_seed.c_str(), full_det, sep_det)};
}

Outcome Beam() {
  // Exhaustive toy problem.
  ModelConfig c = testing::TinyConfig();
  GrammarLimits limits{2, 8};
  std::vector<int> input = {11, 21, 27, 2};
  int exact = 0, problems = 0;
  for (uint64_t seed = 1; seed <= 4; ++seed) {
    c.seed = seed;
    Model model(c);
    EncoderState state = model.Encode(input);
    std::vector<std::vector<Step>> all;
    testing::EnumeratePrograms(c, 3, limits, [](std::span<const Step>) { return true; }, all);
    double best = -1e300;
    std::vector<Step> argbest;
    for (const auto &p : all) {
      double s = ScoreProgram(model, state, p);
      if (s > best) best = s, argbest = p;
    }
    DecodeOptions opt;
    opt.beam_size = static_cast<int>(all.size());
    opt.limits = limits;
    opt.max_expansions = 1 << 30;
    DecodeResult r = BeamDecode(model, state, opt);
    ++problems;
    exact += r.success() && r.hypotheses[0].steps == argbest;
  }
  // Beam 8 against beam 4 on the held-out questions.
  Corpus &corpus = SharedCorpus();
  const System &s = FullSeed1().system;
  ExperimentConfig config = BaseConfig(Mode::kFull, 1);
  AnswerOptions four = OptionsFor(s, config), eight = four;
  eight.decode.beam_size = 8;
  int better_or_equal = 0;
  for (const QuestionInstance &q : corpus.test) {
    std::vector<int> in = EncodeInput(q, s.vocab);
    AnswerResult a = AnswerQuestion(*s.parser, s.detection_model(), corpus.kb, corpus.index,
                                    q.tokens, in, four);
    AnswerResult b = AnswerQuestion(*s.parser, s.detection_model(), corpus.kb, corpus.index,
                                    q.tokens, in, eight);
    if (b.provenance.hypotheses.empty()) continue;
    if (a.provenance.hypotheses.empty() ||
        b.provenance.hypotheses[0].score >= a.provenance.hypotheses[0].score - 1e-12) {
      ++better_or_equal;
    }
  }
  double ratio = double(better_or_equal) / corpus.test.size();
  return {exact == problems && ratio >= 0.95,
          Fmt("exhaustive top-1 match %d/%d; beam-8 top-1 score >= beam-4 on %.4f of %zu questions "
              "(>= 0.95)",
              exact, problems, ratio, corpus.test.size())};
}

Outcome Pruning() {
  std::mt19937 rng(7);
  int pruned = 0, violations = 0, prefixes = 0;
  for (int round = 0; round < 6; ++round) {
    KnowledgeBase kb = testing::RandomKb(rng, 12);
    testing::EntryPool pool;
    pool.entities = {EntityId(0), EntityId(static_cast<int>(1 + rng() % (kb.num_entities() - 1)))};
    pool.predicates = {PredicateId(0)};
    if (kb.num_predicates() > 1) pool.predicates.push_back(PredicateId(1));
    pool.types = {TypeId(0)};
    pool.numbers = {0, 1};
    testing::PruneCheckResult r = testing::CheckPruning(kb, pool, 3);
    pruned += r.pruned;
    violations += r.violations;
    prefixes += r.prefixes;
  }
  return {violations == 0 && pruned > 0,
          Fmt("%d prefixes up to depth 3, %d pruned, %d wrongly discarded", prefixes, pruned,
              violations)};
}

Outcome LabelSpaceSize() {
  std::istringstream triples("a\tp\tb\n");
  std::istringstream catalog("a\tA\tt1\nb\tB\tt2\nc\tC\tt3\n");
  KnowledgeBase kb = LoadKb(triples, catalog);
  LabelSpace space(kb.num_types());
  ModelConfig c;
  c.num_types = kb.num_types();
  return {kb.num_types() == 3 && space.size() == 7 && c.num_labels() == 7,
          Fmt("N_t=%d gives %d labels", kb.num_types(), space.size())};
}

}  // namespace
}  // namespace convsp

int main() {
  using namespace convsp;
  Run(1, "executor oracle", ExecutorOracle);
  Run(2, "grammar soundness", GrammarSoundness);
  Run(3, "bfs oracle", BfsOracle);
  Run(4, "gradient checks", GradientChecks);
  Run(5, "overfit and held-out answers", Overfit);
  Run(6, "type-filter ablation", TypeFilter);
  Run(7, "multi-task ablation", MultiTask);
  Run(8, "beam correctness", Beam);
  Run(9, "pruning soundness", Pruning);
  Run(10, "joint label space", LabelSpaceSize);
  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
