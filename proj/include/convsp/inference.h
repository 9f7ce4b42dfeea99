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

#ifndef CONVSP_INFERENCE_H_
#define CONVSP_INFERENCE_H_

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "convsp/executor.h"
#include "convsp/grammar.h"
#include "convsp/kb.h"
#include "convsp/linker.h"
#include "convsp/model.h"

namespace convsp {

struct DecodeOptions {
  int beam_size = 4;
  GrammarLimits limits{4, 24};
  // Drop prefixes whose partial execution is provably empty. Needs a KB.
  bool prune = true;
  // Decoder evaluations allowed per question; exhausting it is a failure.
  int64_t max_expansions = 4000;
  int64_t exec_budget = WorkBudget::kDefaultLimit;
};

struct Hypothesis {
  std::vector<Step> steps;  // start rule first; pointers unresolved
  double score = 0;         // summed log-probabilities, end token included

  LogicalForm form() const { return Deserialize(steps); }
};

struct DecodeResult {
  std::vector<Hypothesis> hypotheses;  // finished, best first
  bool budget_exceeded = false;
  int64_t expansions = 0;

  bool success() const { return !hypotheses.empty(); }
};

// Grammar-constrained beam search. Every step draws from the legal next
// tokens; an entry token is expanded with the top `beam_size` choices of its
// instantiation head. `kb` and `resolver` enable early-execution pruning.
DecodeResult BeamDecode(const Model &model, const EncoderState &state,
                        const DecodeOptions &options, const KnowledgeBase *kb = nullptr,
                        const PointerResolver *resolver = nullptr);

// Log-probability of a complete program (start rule first) under the model,
// end token included; the score beam search assigns to it.
double ScoreProgram(const Model &model, const EncoderState &state, std::span<const Step> steps);

struct AnswerOptions {
  DecodeOptions decode;
  bool type_filter = true;
  SubstitutionOptions substitution;
};

struct Provenance {
  std::vector<int> labels;             // predicted detection labels
  std::vector<LinkedMention> mentions;
  std::vector<Hypothesis> hypotheses;
  int chosen = -1;                     // index into hypotheses
  std::optional<LogicalForm> executed; // substituted form that produced the answer
  std::string failure;                 // empty on success
};

struct AnswerResult {
  std::optional<Answer> answer;  // nullopt: unanswered
  Provenance provenance;
};

// Detection, linking, decoding, substitution and execution for one question.
// `tokens` are the content tokens and `input` their encoder ids followed by
// the context id. `detector` may be the parser itself.
AnswerResult AnswerQuestion(const Model &parser, const Model &detector, const KnowledgeBase &kb,
                            const InvertedIndex &index, std::span<const std::string> tokens,
                            std::span<const int> input, const AnswerOptions &options = {});

}  // namespace convsp

#endif  // CONVSP_INFERENCE_H_
