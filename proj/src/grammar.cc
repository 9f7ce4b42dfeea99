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

#include "convsp/grammar.h"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <sstream>

#include "convsp/errors.h"

namespace convsp {
namespace {

using C = Category;
using T = DecodeToken;

const std::array<OperatorDef, 21> kOperators = {{
    {T::kA1, C::kStart, {C::kSet}, "start"},
    {T::kA2, C::kStart, {C::kNum}, "start"},
    {T::kA3, C::kStart, {C::kBool}, "start"},
    {T::kA4, C::kSet, {C::kSet, C::kPredicate}, "find"},
    {T::kA5, C::kNum, {C::kSet}, "count"},
    {T::kA6, C::kBool, {C::kEntity, C::kSet}, "in"},
    {T::kA7, C::kSet, {C::kSet, C::kSet}, "union"},
    {T::kA8, C::kSet, {C::kSet, C::kSet}, "inter"},
    {T::kA9, C::kSet, {C::kSet, C::kSet}, "diff"},
    {T::kA10, C::kSet, {C::kSet, C::kPredicate, C::kNum}, "larger"},
    {T::kA11, C::kSet, {C::kSet, C::kPredicate, C::kNum}, "less"},
    {T::kA12, C::kSet, {C::kSet, C::kPredicate, C::kNum}, "equal"},
    {T::kA13, C::kSet, {C::kSet, C::kPredicate}, "argmax"},
    {T::kA14, C::kSet, {C::kSet, C::kPredicate}, "argmin"},
    {T::kA15, C::kSet, {C::kType, C::kSet}, "filter"},
    {T::kA16, C::kNum, {C::kNumber}, "num"},
    {T::kA17, C::kSet, {C::kEntity}, "set"},
    {T::kA18, C::kEntity, {}, "constant"},
    {T::kA19, C::kPredicate, {}, "constant"},
    {T::kA20, C::kType, {}, "constant"},
    {T::kA21, C::kNumber, {}, "constant"},
}};

// Minimal operator nesting needed to complete a nonterminal.
int MinHeight(Category c) {
  switch (c) {
    case C::kSet:
    case C::kNum:
      return 1;  // set(e), num(u_num)
    case C::kBool:
      return 2;  // in(e, set(e))
    default:
      return 0;
  }
}

// Minimal number of steps needed to complete a nonterminal.
int MinLength(Category c) {
  switch (c) {
    case C::kStart:
      return 3;  // A1 A17 e
    case C::kSet:
    case C::kNum:
      return 2;
    case C::kBool:
      return 4;  // A6 e A17 e
    default:
      return 1;
  }
}

// Operators with no entry-only arguments are the grammar rules that are
// actually emitted; A18..A21 are fused into the entry tokens.
bool IsEmitted(DecodeToken t) { return IsOperator(t) && t <= T::kA17; }

}  // namespace

std::string_view CategoryName(Category c) {
  static constexpr std::string_view kNames[] = {"start", "set", "num", "bool",
                                                "e",     "p",   "tp",  "u_num"};
  return kNames[static_cast<int>(c)];
}

const std::array<OperatorDef, 21> &Operators() { return kOperators; }

const OperatorDef &Operator(DecodeToken op) {
  if (!IsOperator(op)) throw ValidationError("not an operator: " + TokenName(op));
  return kOperators[TokenIndex(op) - TokenIndex(T::kA1)];
}

Category EntryCategory(DecodeToken t) {
  switch (t) {
    case T::kEntity: return C::kEntity;
    case T::kPredicate: return C::kPredicate;
    case T::kType: return C::kType;
    case T::kNumber: return C::kNumber;
    default: throw ValidationError("not an entry token: " + TokenName(t));
  }
}

DecodeToken EntryToken(Category c) {
  switch (c) {
    case C::kEntity: return T::kEntity;
    case C::kPredicate: return T::kPredicate;
    case C::kType: return T::kType;
    case C::kNumber: return T::kNumber;
    default: throw ValidationError("not an entry category");
  }
}

std::string TokenName(DecodeToken t) {
  switch (t) {
    case T::kStart: return "start";
    case T::kEnd: return "end";
    case T::kEntity: return "e";
    case T::kPredicate: return "p";
    case T::kType: return "tp";
    case T::kNumber: return "u_num";
    default: return "A" + std::to_string(TokenIndex(t) - TokenIndex(T::kA1) + 1);
  }
}

std::optional<DecodeToken> ParseTokenName(std::string_view name) {
  for (int i = 0; i < kDecodeVocabSize; ++i) {
    if (TokenName(TokenFromIndex(i)) == name) return TokenFromIndex(i);
  }
  return std::nullopt;
}

Category CategoryOf(const Entry &entry) {
  switch (entry.index()) {
    case 0: return C::kEntity;
    case 1: return C::kPredicate;
    case 2: return C::kType;
    default: return C::kNumber;
  }
}

Step Step::Of(Entry e) {
  DecodeToken t = EntryToken(CategoryOf(e));
  return {t, std::move(e)};
}

Category Node::result() const {
  if (entry) return CategoryOf(*entry);
  return Operator(token).result;
}

Node Node::Leaf(Entry e) {
  Node n;
  n.token = EntryToken(CategoryOf(e));
  n.entry = std::move(e);
  return n;
}

Node Node::Apply(DecodeToken op, std::vector<Node> children) {
  Node n;
  n.token = op;
  n.children = std::move(children);
  return n;
}

namespace {

void ValidateNode(const Node &node, Category expected) {
  if (node.entry) {
    if (node.token != EntryToken(CategoryOf(*node.entry))) {
      throw ValidationError("leaf token does not match its entry");
    }
    if (CategoryOf(*node.entry) != expected) {
      throw ValidationError("expected " + std::string(CategoryName(expected)) + ", found " +
                            std::string(CategoryName(CategoryOf(*node.entry))));
    }
    if (!node.children.empty()) throw ValidationError("leaf with children");
    return;
  }
  if (!IsEmitted(node.token) || node.token <= T::kA3) {
    throw ValidationError("token " + TokenName(node.token) + " cannot label a tree node");
  }
  const OperatorDef &def = Operator(node.token);
  if (def.result != expected) {
    throw ValidationError(TokenName(node.token) + " yields " +
                          std::string(CategoryName(def.result)) + " but " +
                          std::string(CategoryName(expected)) + " is required");
  }
  if (node.children.size() != def.args.size()) {
    throw ValidationError(TokenName(node.token) + " has wrong arity");
  }
  for (size_t i = 0; i < def.args.size(); ++i) ValidateNode(node.children[i], def.args[i]);
}

DecodeToken StartRule(Category root) {
  switch (root) {
    case C::kSet: return T::kA1;
    case C::kNum: return T::kA2;
    case C::kBool: return T::kA3;
    default: throw ValidationError("root must be a set, num or bool expression");
  }
}

void SerializeNode(const Node &node, std::vector<Step> &out) {
  if (node.entry) {
    out.push_back(Step::Of(*node.entry));
    return;
  }
  out.push_back(Step::Op(node.token));
  for (const Node &child : node.children) SerializeNode(child, out);
}

class SequenceParser {
 public:
  explicit SequenceParser(std::span<const Step> steps) : steps_(steps) {}

  Node Parse(Category expected) {
    if (pos_ >= steps_.size()) {
      throw ValidationError("sequence exhausted while " + std::string(CategoryName(expected)) +
                            " remains");
    }
    const Step &step = steps_[pos_];
    size_t at = pos_++;
    if (IsEntry(expected)) {
      if (step.token != EntryToken(expected)) throw Illegal(step, at, expected);
      if (!step.entry || CategoryOf(*step.entry) != expected) {
        throw ValidationError("entry token at position " + std::to_string(at) +
                              " lacks a matching instantiation");
      }
      return Node::Leaf(*step.entry);
    }
    if (!IsEmitted(step.token) || Operator(step.token).result != expected ||
        (expected != C::kStart && step.token <= T::kA3)) {
      throw Illegal(step, at, expected);
    }
    if (step.entry) {
      throw ValidationError("operator at position " + std::to_string(at) +
                            " carries an instantiation");
    }
    const OperatorDef &def = Operator(step.token);
    std::vector<Node> children;
    for (Category arg : def.args) children.push_back(Parse(arg));
    return Node::Apply(step.token, std::move(children));
  }

  size_t position() const { return pos_; }

 private:
  static ValidationError Illegal(const Step &step, size_t at, Category expected) {
    return ValidationError("token " + TokenName(step.token) + " illegal at position " +
                           std::to_string(at) + " (leftmost nonterminal is " +
                           std::string(CategoryName(expected)) + ")");
  }

  std::span<const Step> steps_;
  size_t pos_ = 0;
};

}  // namespace

int Depth(const Node &node) {
  if (node.entry) return 0;
  int deepest = 0;
  for (const Node &child : node.children) deepest = std::max(deepest, Depth(child));
  return deepest + 1;
}

void Validate(const LogicalForm &lf) {
  StartRule(lf.root.result());
  ValidateNode(lf.root, lf.root.result());
}

std::vector<Step> Serialize(const LogicalForm &lf) {
  Validate(lf);
  std::vector<Step> out;
  out.push_back(Step::Op(StartRule(lf.root.result())));
  SerializeNode(lf.root, out);
  return out;
}

LogicalForm Deserialize(std::span<const Step> steps) {
  if (steps.empty()) throw ValidationError("empty sequence");
  SequenceParser parser(steps);
  Node start = parser.Parse(C::kStart);
  if (parser.position() != steps.size()) {
    throw ValidationError("trailing tokens after complete form at position " +
                          std::to_string(parser.position()));
  }
  return LogicalForm{std::move(start.children.front())};
}

DerivationState::DerivationState() { pending_.push_back({C::kStart, 0}); }

int DerivationState::MinRemainingLength() const {
  int total = 0;
  for (const Pending &p : pending_) total += MinLength(p.category);
  return total;
}

bool DerivationState::Allows(DecodeToken token, const GrammarLimits *limits) const {
  if (token == T::kEnd) return complete();
  if (complete() || token == T::kStart) return false;
  const Pending &left = pending_.back();
  int added_length = 0;
  if (IsEntry(left.category)) {
    if (token != EntryToken(left.category)) return false;
  } else {
    if (!IsEmitted(token)) return false;
    const OperatorDef &def = Operator(token);
    if (def.result != left.category) return false;
    if (limits) {
      int height = 0;
      for (Category arg : def.args) height = std::max(height, MinHeight(arg));
      // Start rules sit above depth 1; other operators occupy their own level.
      int bottom = left.category == C::kStart ? height : left.depth + height;
      if (bottom > limits->max_depth) return false;
      for (Category arg : def.args) added_length += MinLength(arg);
    }
  }
  if (limits) {
    int remaining = MinRemainingLength() - MinLength(left.category) + added_length;
    if (length_ + 1 + remaining > limits->max_length) return false;
  }
  return true;
}

std::vector<DecodeToken> DerivationState::Legal(const GrammarLimits *limits) const {
  std::vector<DecodeToken> out;
  for (int i = 0; i < kDecodeVocabSize; ++i) {
    if (Allows(TokenFromIndex(i), limits)) out.push_back(TokenFromIndex(i));
  }
  return out;
}

void DerivationState::Push(DecodeToken token) {
  if (!Allows(token)) {
    throw ValidationError("token " + TokenName(token) + " illegal at position " +
                          std::to_string(length_) +
                          (complete() ? " (form already complete)"
                                      : " (leftmost nonterminal is " +
                                            std::string(CategoryName(leftmost())) + ")"));
  }
  if (token == T::kEnd) return;
  Pending left = pending_.back();
  pending_.pop_back();
  ++length_;
  if (IsEntryToken(token)) return;
  const OperatorDef &def = Operator(token);
  for (auto it = def.args.rbegin(); it != def.args.rend(); ++it) {
    pending_.push_back({*it, left.depth + 1});
  }
}

std::vector<DecodeToken> LegalNext(std::span<const DecodeToken> prefix,
                                   const GrammarLimits *limits) {
  DerivationState state;
  for (DecodeToken t : prefix) state.Push(t);
  return state.Legal(limits);
}

std::vector<DecodeToken> LegalNext(std::span<const Step> prefix, const GrammarLimits *limits) {
  DerivationState state;
  for (const Step &s : prefix) {
    if (IsEntryToken(s.token) != s.entry.has_value()) {
      throw ValidationError("step instantiation does not match its token");
    }
    state.Push(s.token);
  }
  return state.Legal(limits);
}

// ---------------------------------------------------------------------------
// Text rendering.

namespace {

void RenderEntry(const Entry &entry, const KnowledgeBase *kb, std::string &out) {
  auto position = [&](const std::optional<int> &pos) {
    if (pos) out += "@" + std::to_string(*pos);
  };
  if (auto *e = std::get_if<EntityEntry>(&entry)) {
    if (e->id) out += kb ? kb->EntityName(*e->id) : "#" + std::to_string(e->id->value);
    position(e->position);
  } else if (auto *p = std::get_if<PredicateId>(&entry)) {
    out += kb ? kb->PredicateName(*p) : "#" + std::to_string(p->value);
  } else if (auto *t = std::get_if<TypeId>(&entry)) {
    out += kb ? kb->TypeName(*t) : "#" + std::to_string(t->value);
  } else {
    const auto &n = std::get<NumberEntry>(entry);
    if (n.value) out += std::to_string(*n.value);
    position(n.position);
  }
}

void RenderNode(const Node &node, const KnowledgeBase *kb, std::string &out) {
  if (node.entry) {
    RenderEntry(*node.entry, kb, out);
    return;
  }
  out += Operator(node.token).name;
  out += '(';
  for (size_t i = 0; i < node.children.size(); ++i) {
    if (i) out += ", ";
    RenderNode(node.children[i], kb, out);
  }
  out += ')';
}

class TextParser {
 public:
  TextParser(std::string_view text, const KnowledgeBase *kb) : text_(text), kb_(kb) {}

  LogicalForm Parse() {
    Node root = ParseExpr(std::nullopt);
    SkipSpace();
    if (pos_ != text_.size()) Fail("trailing characters");
    LogicalForm lf{std::move(root)};
    try {
      Validate(lf);
    } catch (const ValidationError &e) {
      throw ParseError(e.what());
    }
    return lf;
  }

 private:
  [[noreturn]] void Fail(const std::string &what) const {
    throw ParseError(what + " at offset " + std::to_string(pos_) + " in '" +
                     std::string(text_) + "'");
  }

  void SkipSpace() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  std::string_view Word() {
    SkipSpace();
    size_t begin = pos_;
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (c == '(' || c == ')' || c == ',' || c == '@' ||
          std::isspace(static_cast<unsigned char>(c))) {
        break;
      }
      ++pos_;
    }
    return text_.substr(begin, pos_ - begin);
  }

  bool Consume(char c) {
    SkipSpace();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  std::optional<int> Position() {
    if (!Consume('@')) return std::nullopt;
    std::string_view digits = Word();
    int value = 0;
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
    if (ec != std::errc() || ptr != digits.data() + digits.size() || digits.empty()) {
      Fail("bad pointer position");
    }
    return value;
  }

  template <typename IdT>
  IdT Resolve(std::string_view word, IdT (KnowledgeBase::*find)(std::string_view) const,
              const char *what) {
    if (!word.empty() && word.front() == '#') {
      int value = 0;
      auto [ptr, ec] = std::from_chars(word.data() + 1, word.data() + word.size(), value);
      if (ec != std::errc() || ptr != word.data() + word.size()) Fail("bad numeric id");
      IdT id(value);
      if (kb_ && !kb_->Valid(id)) throw ReferenceError(std::string("unknown ") + what);
      return id;
    }
    if (!kb_) Fail(std::string("named ") + what + " requires a knowledge base");
    IdT id = (kb_->*find)(word);
    if (!id.valid()) throw ReferenceError(std::string("unknown ") + what + " '" +
                                          std::string(word) + "'");
    return id;
  }

  Node ParseEntry(Category expected) {
    size_t begin = pos_;
    std::string_view word = Word();
    switch (expected) {
      case C::kEntity: {
        EntityEntry e;
        if (!word.empty()) e.id = Resolve<EntityId>(word, &KnowledgeBase::FindEntity, "entity");
        e.position = Position();
        if (!e.id && !e.position) Fail("expected entity");
        return Node::Leaf(e);
      }
      case C::kPredicate:
        if (word.empty()) Fail("expected predicate");
        return Node::Leaf(Resolve<PredicateId>(word, &KnowledgeBase::FindPredicate, "predicate"));
      case C::kType:
        if (word.empty()) Fail("expected type");
        return Node::Leaf(Resolve<TypeId>(word, &KnowledgeBase::FindType, "type"));
      default: {
        NumberEntry n;
        if (!word.empty()) {
          int64_t value = 0;
          auto [ptr, ec] = std::from_chars(word.data(), word.data() + word.size(), value);
          if (ec != std::errc() || ptr != word.data() + word.size()) {
            pos_ = begin;
            Fail("expected number");
          }
          n.value = value;
        }
        n.position = Position();
        if (!n.value && !n.position) Fail("expected number");
        return Node::Leaf(n);
      }
    }
  }

  Node ParseExpr(std::optional<Category> expected) {
    if (expected && IsEntry(*expected)) return ParseEntry(*expected);
    std::string_view name = Word();
    const OperatorDef *def = nullptr;
    for (const OperatorDef &op : kOperators) {
      if (op.token > T::kA3 && IsEmitted(op.token) && op.name == name &&
          (!expected || op.result == *expected)) {
        def = &op;
        break;
      }
    }
    if (!def) Fail("unknown operator '" + std::string(name) + "'");
    if (!Consume('(')) Fail("expected '('");
    std::vector<Node> children;
    for (size_t i = 0; i < def->args.size(); ++i) {
      if (i && !Consume(',')) Fail("expected ','");
      children.push_back(ParseExpr(def->args[i]));
    }
    if (!Consume(')')) Fail("expected ')'");
    return Node::Apply(def->token, std::move(children));
  }

  std::string_view text_;
  const KnowledgeBase *kb_;
  size_t pos_ = 0;
};

}  // namespace

std::string Render(const Node &node, const KnowledgeBase *kb) {
  std::string out;
  RenderNode(node, kb, out);
  return out;
}

std::string Render(const LogicalForm &lf, const KnowledgeBase *kb) { return Render(lf.root, kb); }

LogicalForm ParseLogicalForm(std::string_view text, const KnowledgeBase *kb) {
  return TextParser(text, kb).Parse();
}

std::string RenderSteps(std::span<const Step> steps, const KnowledgeBase *kb) {
  std::string out;
  for (const Step &s : steps) {
    if (!out.empty()) out += ' ';
    out += TokenName(s.token);
    if (s.entry) {
      out += ':';
      RenderEntry(*s.entry, kb, out);
    }
  }
  return out;
}

}  // namespace convsp
