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

#include "convsp/inference.h"

#include <algorithm>
#include <numeric>

#include "convsp/errors.h"

namespace convsp {
namespace {

struct Live {
  std::vector<Step> steps;
  std::vector<DecodeToken> tokens;
  DerivationState derivation;
  std::optional<PartialEvaluator> evaluator;
  double score = 0;
};

struct Candidate {
  int parent;
  Step step;
  double score;
  bool finishes;
};

const Eigen::VectorXd &HeadFor(const StepDistributions &d, DecodeToken token) {
  switch (token) {
    case DecodeToken::kEntity: return d.entity;
    case DecodeToken::kPredicate: return d.predicate;
    case DecodeToken::kType: return d.type;
    default: return d.number;
  }
}

Entry MakeEntry(DecodeToken token, int index) {
  switch (token) {
    case DecodeToken::kEntity: return EntityEntry{std::nullopt, index};
    case DecodeToken::kPredicate: return PredicateId(index);
    case DecodeToken::kType: return TypeId(index);
    default: return NumberEntry{std::nullopt, index};
  }
}

int EntryIndex(const Entry &entry) {
  if (auto *e = std::get_if<EntityEntry>(&entry)) return e->position.value_or(-1);
  if (auto *p = std::get_if<PredicateId>(&entry)) return p->value;
  if (auto *t = std::get_if<TypeId>(&entry)) return t->value;
  return std::get<NumberEntry>(entry).position.value_or(-1);
}

// Indices of the k largest entries, larger first, ties by lower index.
std::vector<int> TopK(const Eigen::VectorXd &v, int k) {
  std::vector<int> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  k = std::min<int>(k, idx.size());
  std::partial_sort(idx.begin(), idx.begin() + k, idx.end(), [&](int a, int b) {
    return v(a) != v(b) ? v(a) > v(b) : a < b;
  });
  idx.resize(k);
  return idx;
}

}  // namespace

DecodeResult BeamDecode(const Model &model, const EncoderState &state,
                        const DecodeOptions &options, const KnowledgeBase *kb,
                        const PointerResolver *resolver) {
  if (options.beam_size < 1) throw Error("beam_size must be at least 1");
  if (options.limits.max_length > model.config().max_decode_length) {
    throw Error("decode length limit exceeds the model's decoder positions");
  }
  const bool prune = options.prune && kb != nullptr;
  const int beam = options.beam_size;
  DecodeResult result;

  std::vector<Live> live(1);
  if (prune) live[0].evaluator.emplace(*kb, resolver, options.exec_budget);
  std::vector<Hypothesis> finished;

  while (!live.empty()) {
    std::vector<Candidate> candidates;
    for (int i = 0; i < static_cast<int>(live.size()); ++i) {
      const Live &h = live[i];
      if (++result.expansions > options.max_expansions) {
        result.budget_exceeded = true;
        live.clear();
        candidates.clear();
        break;
      }
      StepDistributions d = model.Decode(state, h.tokens);
      if (h.derivation.complete()) {
        candidates.push_back({i, Step::Op(DecodeToken::kEnd),
                              h.score + d.token(TokenIndex(DecodeToken::kEnd)), true});
        continue;
      }
      for (DecodeToken token : h.derivation.Legal(&options.limits)) {
        const double base = h.score + d.token(TokenIndex(token));
        if (!IsEntryToken(token)) {
          candidates.push_back({i, Step::Op(token), base, false});
          continue;
        }
        const Eigen::VectorXd &head = HeadFor(d, token);
        for (int k : TopK(head, beam)) {
          Step step{token, MakeEntry(token, k)};
          candidates.push_back({i, step, base + head(k), false});
        }
      }
    }
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const Candidate &a, const Candidate &b) { return a.score > b.score; });

    std::vector<Live> next;
    int selected = 0;
    for (const Candidate &c : candidates) {
      if (selected >= beam) break;
      const Live &parent = live[c.parent];
      if (c.finishes) {
        finished.push_back({parent.steps, c.score});
        ++selected;
        continue;
      }
      Live child = parent;
      child.steps.push_back(c.step);
      child.tokens.push_back(c.step.token);
      child.derivation.Push(c.step.token);
      child.score = c.score;
      if (child.evaluator) {
        child.evaluator->Push(c.step);
        if (child.evaluator->failed() || child.evaluator->verdict() == PartialVerdict::kEmpty) {
          continue;
        }
      }
      next.push_back(std::move(child));
      ++selected;
    }
    live = std::move(next);

    std::stable_sort(finished.begin(), finished.end(),
                     [](const Hypothesis &a, const Hypothesis &b) { return a.score > b.score; });
    if (static_cast<int>(finished.size()) >= beam) {
      double best_live = -std::numeric_limits<double>::infinity();
      for (const Live &h : live) best_live = std::max(best_live, h.score);
      if (best_live <= finished[beam - 1].score) break;
    }
  }
  if (static_cast<int>(finished.size()) > beam) finished.resize(beam);
  result.hypotheses = std::move(finished);
  return result;
}

double ScoreProgram(const Model &model, const EncoderState &state, std::span<const Step> steps) {
  std::vector<DecodeToken> tokens;
  for (const Step &s : steps) tokens.push_back(s.token);
  std::vector<StepDistributions> d = model.DecodeAll(state, tokens);
  double score = 0;
  for (size_t r = 0; r < steps.size(); ++r) {
    score += d[r].token(TokenIndex(steps[r].token));
    if (IsEntryToken(steps[r].token)) {
      if (!steps[r].entry) throw ValidationError("entry step without instantiation");
      int k = EntryIndex(*steps[r].entry);
      const Eigen::VectorXd &head = HeadFor(d[r], steps[r].token);
      if (k < 0 || k >= head.size()) throw ValidationError("instantiation outside the head");
      score += head(k);
    }
  }
  return score + d.back().token(TokenIndex(DecodeToken::kEnd));
}

AnswerResult AnswerQuestion(const Model &parser, const Model &detector, const KnowledgeBase &kb,
                            const InvertedIndex &index, std::span<const std::string> tokens,
                            std::span<const int> input, const AnswerOptions &options) {
  if (tokens.size() + 1 != input.size()) {
    throw InputError("token count must be the encoder input length minus the context token");
  }
  AnswerResult out;
  Provenance &prov = out.provenance;
  EncoderState state = parser.Encode(input);
  EncoderState detector_state = &detector == &parser ? state : detector.Encode(input);
  prov.labels = detector.PredictLabels(detector_state);
  LabelSpace space(kb.num_types());
  std::vector<Mention> mentions = DecodeMentions(prov.labels, tokens, space);
  prov.mentions = LinkMentions(mentions, index, kb, options.type_filter);

  std::vector<std::string> token_copy(tokens.begin(), tokens.end());
  PointerResolver resolver = MakePointerResolver(token_copy, prov.mentions, options.substitution);
  DecodeResult decoded = BeamDecode(parser, state, options.decode, &kb, &resolver);
  prov.hypotheses = decoded.hypotheses;
  if (!decoded.success()) {
    prov.failure = decoded.budget_exceeded ? "decode budget exceeded" : "no complete logical form";
    return out;
  }
  std::string last_error;
  for (size_t i = 0; i < decoded.hypotheses.size(); ++i) {
    try {
      LogicalForm lf = SubstitutePointers(decoded.hypotheses[i].form(), tokens, prov.mentions,
                                          options.substitution);
      Answer answer = Execute(lf, kb, options.decode.exec_budget);
      prov.chosen = static_cast<int>(i);
      prov.executed = std::move(lf);
      out.answer = std::move(answer);
      return out;
    } catch (const Error &e) {
      last_error = e.what();
    }
  }
  prov.failure = "every hypothesis failed: " + last_error;
  return out;
}

}  // namespace convsp
