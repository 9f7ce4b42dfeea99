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

#ifndef CONVSP_TOKENIZER_H_
#define CONVSP_TOKENIZER_H_

#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace convsp {

// Case-folded tokenization: runs of letters/digits (and non-ASCII bytes)
// form words, every other non-space character is its own token.
std::vector<std::string> Tokenize(std::string_view text);

// Tokens joined with single spaces.
std::string JoinTokens(std::span<const std::string> tokens);

// Normalized form used for index keys: Tokenize then JoinTokens.
std::string Normalize(std::string_view text);

// Encoder vocabulary with three reserved entries.
class Vocabulary {
 public:
  static constexpr int kUnk = 0;
  static constexpr int kSep = 1;
  static constexpr int kCtx = 2;
  static constexpr std::string_view kSepToken = "[SEP]";
  static constexpr std::string_view kCtxToken = "[CTX]";

  Vocabulary();

  int Add(std::string_view token);
  // kUnk for unknown tokens.
  int Id(std::string_view token) const;
  const std::string &Token(int id) const { return tokens_.at(id); }
  int size() const { return static_cast<int>(tokens_.size()); }
  std::vector<int> Encode(std::span<const std::string> tokens) const;

  void Write(std::ostream &out) const;
  static Vocabulary Read(std::istream &in);

  bool operator==(const Vocabulary &other) const { return tokens_ == other.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> ids_;
};

}  // namespace convsp

#endif  // CONVSP_TOKENIZER_H_
