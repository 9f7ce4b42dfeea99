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

#ifndef CONVSP_DATASET_H_
#define CONVSP_DATASET_H_

#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "convsp/bfs.h"
#include "convsp/executor.h"
#include "convsp/grammar.h"
#include "convsp/kb.h"
#include "convsp/linker.h"
#include "convsp/model.h"
#include "convsp/tokenizer.h"

namespace convsp {

struct AnswerSpec {
  enum class Kind { kSet, kNum, kBool };
  Kind kind = Kind::kSet;
  std::vector<std::string> entities;  // string ids
  int64_t number = 0;
  bool truth = false;
  bool operator==(const AnswerSpec &) const = default;
};

// One utterance. User turns that ask something carry a question type and an
// answer; every turn carries one label per token ("O", "B-type", "I-type")
// and one entity id per labeled mention.
struct Turn {
  std::string speaker;
  std::string utterance;
  std::string question_type;
  std::vector<std::string> labels;
  std::vector<std::string> links;
  std::optional<AnswerSpec> answer;
  std::optional<std::string> logical_form;  // canonical text over string ids

  bool is_question() const { return answer.has_value(); }
  bool operator==(const Turn &) const = default;
};

struct Dialog {
  std::string id;
  std::vector<Turn> turns;
  bool operator==(const Dialog &) const = default;
};

// One dialog per line (JSON). Throws ParseError with the line number, or
// DataError naming the turn when labels do not match the tokenization.
std::vector<Dialog> LoadDialogs(std::istream &in);
std::vector<Dialog> LoadDialogFile(const std::string &path);
void WriteDialogs(std::ostream &out, const std::vector<Dialog> &dialogs);
void WriteDialogFile(const std::string &path, const std::vector<Dialog> &dialogs);

struct GoldMention {
  Mention mention;
  EntityId entity;
};

// A question with its dialog context flattened into one token sequence:
// previous turns of the window, each followed by [SEP], then the current
// turn. The context token is appended only when encoding.
struct QuestionInstance {
  std::string dialog_id;
  int turn = 0;
  std::string type;
  std::vector<std::string> tokens;
  std::vector<int> labels;
  std::vector<GoldMention> mentions;
  Answer answer;
  std::optional<LogicalForm> form;  // gold form over KB ids, no pointers
};

struct InstanceOptions {
  int history_window = 2;  // previous turns kept
  int max_tokens = 190;    // content tokens; oldest history turns are dropped first
};

// Throws DataError / ReferenceError for inconsistent records.
std::vector<QuestionInstance> BuildInstances(const std::vector<Dialog> &dialogs,
                                             const KnowledgeBase &kb,
                                             const InstanceOptions &options = {});

// Encoder ids for the tokens followed by the context id.
std::vector<int> EncodeInput(const QuestionInstance &q, const Vocabulary &vocab);

// Gold form anchored to the question: each entity leaf points at the first
// token of the latest mention of that entity, each number at the latest
// token spelling it. nullopt when some leaf is not mentioned.
std::optional<GoldProgram> AnchorProgram(const LogicalForm &form, const QuestionInstance &q);

// Pools for weak supervision from the gold mention links.
EntryPools GoldPools(const QuestionInstance &q, const KnowledgeBase &kb);

// Training target: the anchored gold form when present, otherwise the BFS
// target found from the gold answer. nullopt when neither works.
std::optional<GoldProgram> TargetProgram(const QuestionInstance &q, const KnowledgeBase &kb,
                                         const SearchConfig &search, SearchResult *search_out = nullptr);

// Vocabulary over the tokens of the given instances seen at least
// `min_count` times, in first-seen order. Rarer tokens encode as [UNK], so
// its embedding gets trained too.
Vocabulary BuildVocabulary(const std::vector<QuestionInstance> &instances, int min_count = 1);

Answer ResolveAnswer(const AnswerSpec &spec, const KnowledgeBase &kb);
AnswerSpec MakeAnswerSpec(const Answer &answer, const KnowledgeBase &kb);

}  // namespace convsp

#endif  // CONVSP_DATASET_H_
