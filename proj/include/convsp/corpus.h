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

#ifndef CONVSP_CORPUS_H_
#define CONVSP_CORPUS_H_

#include <cstdint>
#include <string>
#include <vector>

#include "convsp/dataset.h"
#include "convsp/kb.h"

namespace convsp {

// Synthetic world: people, films, bands, record labels, companies, cities and
// countries with the usual relations between them. Names are drawn from small
// word pools so that a few hundred dialogs cover most of the vocabulary.
struct WorldConfig {
  int countries = 20;
  int cities = 80;
  int companies = 50;
  int labels = 40;
  int bands = 100;
  int films = 250;
  int people = 460;
  // Fraction of bands that reuse the name of some film.
  double ambiguity = 0.15;
  uint64_t seed = 7;
};

KnowledgeBase GenerateWorld(const WorldConfig &config);

struct DialogConfig {
  int dialogs = 200;
  int min_questions = 2;
  int max_questions = 6;
  // Probability that a fresh question is about a name shared by two
  // entities of different types.
  double ambiguous_questions = 0.0;
  uint64_t seed = 11;
};

// Dialogs alternating user questions and system answers. Every question
// carries its gold logical form and the answer obtained by executing it.
std::vector<Dialog> GenerateDialogs(const KnowledgeBase &kb, const DialogConfig &config);

// The system reply to an answer: up to three entity names, a number, or
// yes/no.
Turn SystemTurn(const Answer &answer, const KnowledgeBase &kb);

// The ten question categories, in a fixed order.
const std::vector<std::string> &QuestionTypes();

}  // namespace convsp

#endif  // CONVSP_CORPUS_H_
