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

#include "convsp/tokenizer.h"

#include <cctype>

#include "convsp/errors.h"

namespace convsp {
namespace {

bool IsWordByte(unsigned char c) { return std::isalnum(c) || c == '_' || c >= 0x80; }

}  // namespace

std::vector<std::string> Tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string word;
  auto flush = [&] {
    if (!word.empty()) out.push_back(std::move(word));
    word.clear();
  };
  for (char ch : text) {
    unsigned char c = static_cast<unsigned char>(ch);
    if (IsWordByte(c)) {
      word.push_back(static_cast<char>(c < 0x80 ? std::tolower(c) : c));
    } else {
      flush();
      if (!std::isspace(c)) out.emplace_back(1, ch);
    }
  }
  flush();
  return out;
}

std::string JoinTokens(std::span<const std::string> tokens) {
  std::string out;
  for (const std::string &t : tokens) {
    if (!out.empty()) out += ' ';
    out += t;
  }
  return out;
}

std::string Normalize(std::string_view text) {
  std::vector<std::string> tokens = Tokenize(text);
  return JoinTokens(tokens);
}

Vocabulary::Vocabulary() {
  Add("[UNK]");
  Add(kSepToken);
  Add(kCtxToken);
}

int Vocabulary::Add(std::string_view token) {
  auto it = ids_.find(std::string(token));
  if (it != ids_.end()) return it->second;
  int id = size();
  tokens_.emplace_back(token);
  ids_.emplace(tokens_.back(), id);
  return id;
}

int Vocabulary::Id(std::string_view token) const {
  auto it = ids_.find(std::string(token));
  return it == ids_.end() ? kUnk : it->second;
}

std::vector<int> Vocabulary::Encode(std::span<const std::string> tokens) const {
  std::vector<int> out;
  out.reserve(tokens.size());
  for (const std::string &t : tokens) out.push_back(Id(t));
  return out;
}

void Vocabulary::Write(std::ostream &out) const {
  out << "vocab " << size() << '\n';
  for (const std::string &t : tokens_) out << t << '\n';
}

Vocabulary Vocabulary::Read(std::istream &in) {
  std::string tag;
  int n = 0;
  if (!(in >> tag >> n) || tag != "vocab" || n < 3) throw ParseError("bad vocabulary header");
  in.ignore(1, '\n');
  Vocabulary v;
  for (int i = 0; i < n; ++i) {
    std::string token;
    if (!std::getline(in, token)) throw ParseError("truncated vocabulary");
    if (i >= 3) v.Add(token);
  }
  if (v.size() != n) throw ParseError("duplicate vocabulary entries");
  return v;
}

}  // namespace convsp
