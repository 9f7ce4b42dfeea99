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

#include "convsp/model.h"

#include <cmath>
#include <cstdlib>
#include <sstream>

#include "convsp/errors.h"

namespace convsp {
namespace {

constexpr int kCheckpointVersion = 1;

Eigen::VectorXd Row(const Matrix &m, int r) { return m.row(r).transpose(); }

}  // namespace

DecodeTargets MakeTargets(std::span<const Step> program, int content_length) {
  DecodeTargets t;
  t.inputs.push_back(TokenIndex(DecodeToken::kStart));
  for (const Step &step : program) {
    t.inputs.push_back(TokenIndex(step.token));
    t.tokens.push_back(TokenIndex(step.token));
    int p = -1, ty = -1, e = -1, n = -1;
    if (IsEntryToken(step.token)) {
      if (!step.entry || CategoryOf(*step.entry) != EntryCategory(step.token)) {
        throw DataError("entry step " + TokenName(step.token) + " without gold instantiation");
      }
      auto in_range = [&](const std::optional<int> &pos) {
        if (!pos || *pos < 0 || *pos >= content_length) {
          throw DataError("gold pointer outside the question");
        }
        return *pos;
      };
      const Entry &entry = *step.entry;
      if (auto *x = std::get_if<EntityEntry>(&entry)) e = in_range(x->position);
      if (auto *x = std::get_if<NumberEntry>(&entry)) n = in_range(x->position);
      if (auto *x = std::get_if<PredicateId>(&entry)) p = x->value;
      if (auto *x = std::get_if<TypeId>(&entry)) ty = x->value;
    }
    t.predicates.push_back(p);
    t.types.push_back(ty);
    t.entities.push_back(e);
    t.numbers.push_back(n);
  }
  t.tokens.push_back(TokenIndex(DecodeToken::kEnd));
  for (auto *v : {&t.predicates, &t.types, &t.entities, &t.numbers}) v->push_back(-1);
  return t;
}

Model::Model(const ModelConfig &config) : config_(config), rng_(config.seed) {
  if (config.vocab_size < 3 || config.num_predicates < 1 || config.num_types < 1 ||
      config.d_model < 1 || config.heads < 1 || config.max_input_length < 2 ||
      config.max_decode_length < 1 || config.ffn_multiplier < 1) {
    throw Error("invalid model configuration");
  }
  Build();
}

Model::Model(const Model &other) : config_(other.config_), rng_(other.rng_) {
  Build();
  for (size_t i = 0; i < params_.size(); ++i) {
    params_[i]->value = other.params_[i]->value;
    params_[i]->m = other.params_[i]->m;
    params_[i]->v = other.params_[i]->v;
  }
}

Parameter *Model::Add(const std::string &name, int rows, int cols, double range) {
  auto p = std::make_unique<Parameter>(name, rows, cols);
  if (range > 0) {
    std::uniform_real_distribution<double> u(-range, range);
    p->value = Matrix::NullaryExpr(rows, cols, [&] { return u(rng_); });
  }
  Parameter *raw = p.get();
  by_name_[name] = raw;
  params_.push_back(std::move(p));
  return raw;
}

Model::Attn Model::MakeAttn(const std::string &prefix) {
  const int d = config_.d_model, w = config_.attention_width();
  Attn a;
  a.wq = Add(prefix + ".wq", d, w, 1.0 / std::sqrt(d));
  a.bq = Add(prefix + ".bq", 1, w, 0);
  a.wk = Add(prefix + ".wk", d, w, 1.0 / std::sqrt(d));
  a.bk = Add(prefix + ".bk", 1, w, 0);
  a.wv = Add(prefix + ".wv", d, w, 1.0 / std::sqrt(d));
  a.bv = Add(prefix + ".bv", 1, w, 0);
  a.wo = Add(prefix + ".wo", w, d, 1.0 / std::sqrt(w));
  a.bo = Add(prefix + ".bo", 1, d, 0);
  return a;
}

Model::Norm Model::MakeNorm(const std::string &prefix) {
  Norm n;
  n.gain = Add(prefix + ".gain", 1, config_.d_model, 0);
  n.gain->value.setOnes();
  n.bias = Add(prefix + ".bias", 1, config_.d_model, 0);
  return n;
}

Model::Ffn Model::MakeFfn(const std::string &prefix, int in, int out) {
  const int hidden = config_.ffn_multiplier * config_.d_model;
  Ffn f;
  f.w1 = Add(prefix + ".w1", in, hidden, 1.0 / std::sqrt(in));
  f.b1 = Add(prefix + ".b1", 1, hidden, 0);
  f.w2 = Add(prefix + ".w2", hidden, out, 1.0 / std::sqrt(hidden));
  f.b2 = Add(prefix + ".b2", 1, out, 0);
  return f;
}

void Model::Build() {
  const int d = config_.d_model;
  const double embed_range = 1.0 / std::sqrt(d);
  enc_embed_ = Add("encoder.embed", config_.vocab_size, d, embed_range);
  enc_pos_ = Add("encoder.position", config_.max_input_length, d, embed_range);
  for (int l = 0; l < config_.encoder_layers; ++l) {
    std::string p = "encoder.layer" + std::to_string(l);
    EncoderLayer layer;
    layer.self = MakeAttn(p + ".self");
    layer.n1 = MakeNorm(p + ".norm1");
    layer.ffn = MakeFfn(p + ".ffn", d, d);
    layer.n2 = MakeNorm(p + ".norm2");
    encoder_.push_back(layer);
  }
  dec_embed_ = Add("decoder.embed", kDecodeVocabSize, d, embed_range);
  dec_pos_ = Add("decoder.position", config_.max_decode_length + 1, d, embed_range);
  for (int l = 0; l < config_.decoder_layers; ++l) {
    std::string p = "decoder.layer" + std::to_string(l);
    DecoderLayer layer;
    layer.self = MakeAttn(p + ".self");
    layer.n1 = MakeNorm(p + ".norm1");
    layer.cross = MakeAttn(p + ".cross");
    layer.n2 = MakeNorm(p + ".norm2");
    layer.ffn = MakeFfn(p + ".ffn", d, d);
    layer.n3 = MakeNorm(p + ".norm3");
    decoder_.push_back(layer);
  }
  token_head_ = MakeFfn("head.token", d, kDecodeVocabSize);
  predicate_head_ = MakeFfn("head.predicate", 2 * d, config_.num_predicates);
  type_head_ = MakeFfn("head.type", 2 * d, config_.num_types);
  entity_pointer_ = Add("head.entity_pointer", d, d, 1.0 / std::sqrt(d));
  number_pointer_ = Add("head.number_pointer", d, d, 1.0 / std::sqrt(d));
  detection_head_ = MakeFfn("head.detection", d, config_.num_labels());
}

std::vector<Parameter *> Model::parameters() {
  std::vector<Parameter *> out;
  for (auto &p : params_) out.push_back(p.get());
  return out;
}

std::vector<const Parameter *> Model::parameters() const {
  std::vector<const Parameter *> out;
  for (const auto &p : params_) out.push_back(p.get());
  return out;
}

Parameter &Model::parameter(const std::string &name) {
  auto it = by_name_.find(name);
  if (it == by_name_.end()) throw ReferenceError("no parameter " + name);
  return *it->second;
}

int64_t Model::num_weights() const {
  int64_t n = 0;
  for (const auto &p : params_) n += p->value.size();
  return n;
}

void Model::ZeroGrad() {
  for (auto &p : params_) p->grad.setZero();
}

Var Model::Linear(Graph &g, Var x, Parameter *w, Parameter *b) const {
  return g.AddRow(g.MatMul(x, g.Param(*w)), g.Param(*b));
}

Var Model::RunAttn(Graph &g, const Attn &a, Var x, Var memory, bool causal) const {
  Var q = Linear(g, x, a.wq, a.bq);
  Var k = Linear(g, memory, a.wk, a.bk);
  Var v = Linear(g, memory, a.wv, a.bv);
  return Linear(g, g.Attention(q, k, v, config_.heads, causal), a.wo, a.bo);
}

Var Model::RunNorm(Graph &g, const Norm &n, Var x) const {
  return g.LayerNorm(x, g.Param(*n.gain), g.Param(*n.bias));
}

Var Model::RunFfn(Graph &g, const Ffn &f, Var x) const {
  return Linear(g, g.Gelu(Linear(g, x, f.w1, f.b1)), f.w2, f.b2);
}

Var Model::Residual(Graph &g, Var x, Var sub, const Norm &n, bool training) const {
  if (training) sub = g.Dropout(sub, config_.dropout, rng_);
  return RunNorm(g, n, g.Add(x, sub));
}

void Model::CheckInput(std::span<const int> input) const {
  if (input.size() < 2) throw InputError("question needs a content token and the context token");
  if (static_cast<int>(input.size()) > config_.max_input_length) {
    throw InputError("question longer than " + std::to_string(config_.max_input_length));
  }
  for (int id : input) {
    if (id < 0 || id >= config_.vocab_size) {
      throw InputError("token id " + std::to_string(id) + " outside the vocabulary");
    }
  }
}

Var Model::EncodeGraph(Graph &g, std::span<const int> input, bool training) const {
  CheckInput(input);
  const int n = input.size();
  Var x = g.Add(g.Gather(g.Param(*enc_embed_), input), g.Rows(g.Param(*enc_pos_), 0, n));
  for (const EncoderLayer &layer : encoder_) {
    x = Residual(g, x, RunAttn(g, layer.self, x, x, false), layer.n1, training);
    x = Residual(g, x, RunFfn(g, layer.ffn, x), layer.n2, training);
  }
  return x;
}

Var Model::DecodeGraph(Graph &g, Var h, std::span<const int> inputs, bool training) const {
  const int m = inputs.size();
  if (m > config_.max_decode_length + 1) throw InputError("program longer than max_decode_length");
  Var x = g.Add(g.Gather(g.Param(*dec_embed_), inputs), g.Rows(g.Param(*dec_pos_), 0, m));
  for (const DecoderLayer &layer : decoder_) {
    x = Residual(g, x, RunAttn(g, layer.self, x, x, true), layer.n1, training);
    x = Residual(g, x, RunAttn(g, layer.cross, x, h, false), layer.n2, training);
    x = Residual(g, x, RunFfn(g, layer.ffn, x), layer.n3, training);
  }
  return x;
}

Model::HeadLogits Model::Heads(Graph &g, Var s, Var h, int n) const {
  const int m = g.value(s).rows();
  HeadLogits out;
  out.token = RunFfn(g, token_head_, s);
  Var with_ctx = g.ConcatCols(s, g.Repeat(g.Rows(h, n - 1, 1), m));
  out.predicate = RunFfn(g, predicate_head_, with_ctx);
  out.type = RunFfn(g, type_head_, with_ctx);
  Var content = g.Rows(h, 0, n - 1);
  out.entity = g.MatMulT(g.MatMul(s, g.Param(*entity_pointer_)), content);
  out.number = g.MatMulT(g.MatMul(s, g.Param(*number_pointer_)), content);
  return out;
}

Var Model::Loss(Graph &g, const TrainingExample &ex, LossValue *value, bool training) const {
  const int n = ex.input.size();
  Var h = EncodeGraph(g, ex.input, training);
  std::vector<Var> terms;
  LossValue lv;
  if (config_.alpha != 0.0) {
    if (ex.program.empty()) throw DataError("example without a gold program");
    DecodeTargets t = MakeTargets(ex.program, n - 1);
    Var s = DecodeGraph(g, h, t.inputs, training);
    HeadLogits logits = Heads(g, s, h, n);
    const double inv = 1.0 / t.tokens.size();
    std::vector<Var> parts = {
        g.CrossEntropy(logits.token, t.tokens, inv),
        g.CrossEntropy(logits.predicate, t.predicates, inv),
        g.CrossEntropy(logits.type, t.types, inv),
        g.CrossEntropy(logits.entity, t.entities, inv),
        g.CrossEntropy(logits.number, t.numbers, inv),
    };
    Var sp = g.Sum(parts);
    lv.parsing = g.scalar(sp);
    terms.push_back(g.Scale(sp, config_.alpha));
  }
  if (config_.ed_weight != 0.0) {
    if (static_cast<int>(ex.labels.size()) != n - 1) {
      throw DataError("detection labels do not cover the question tokens");
    }
    for (int l : ex.labels) {
      if (l < 0 || l >= config_.num_labels()) throw DataError("detection label out of range");
    }
    Var logits = RunFfn(g, detection_head_, g.Rows(h, 0, n - 1));
    Var ed = g.CrossEntropy(logits, ex.labels, 1.0 / (n - 1));
    lv.detection = g.scalar(ed);
    terms.push_back(g.Scale(ed, config_.ed_weight));
  }
  Var total = g.Sum(terms);
  lv.total = g.scalar(total);
  if (value) *value = lv;
  return total;
}

EncoderState Model::Encode(std::span<const int> input) const {
  Graph g(false);
  return EncoderState{g.value(EncodeGraph(g, input, false))};
}

std::vector<StepDistributions> Model::DecodeAll(const EncoderState &state,
                                                std::span<const DecodeToken> program) const {
  const int n = state.h.rows();
  if (n < 2) throw InputError("encoder state needs a content row and the context row");
  Graph g(false);
  Var h = g.Constant(state.h);
  std::vector<int> inputs = {TokenIndex(DecodeToken::kStart)};
  for (DecodeToken t : program) inputs.push_back(TokenIndex(t));
  Var s = DecodeGraph(g, h, inputs, false);
  HeadLogits logits = Heads(g, s, h, n);
  Matrix tk = LogSoftmaxRows(g.value(logits.token));
  Matrix pr = LogSoftmaxRows(g.value(logits.predicate));
  Matrix ty = LogSoftmaxRows(g.value(logits.type));
  Matrix en = LogSoftmaxRows(g.value(logits.entity));
  Matrix nu = LogSoftmaxRows(g.value(logits.number));
  std::vector<StepDistributions> out;
  for (int r = 0; r < static_cast<int>(inputs.size()); ++r) {
    out.push_back({Row(tk, r), Row(pr, r), Row(ty, r), Row(en, r), Row(nu, r)});
  }
  return out;
}

StepDistributions Model::Decode(const EncoderState &state,
                                std::span<const DecodeToken> prefix) const {
  return DecodeAll(state, prefix).back();
}

Matrix Model::Detection(const EncoderState &state) const {
  const int n = state.h.rows();
  Graph g(false);
  Var logits = RunFfn(g, detection_head_, g.Constant(state.h.topRows(n - 1)));
  return LogSoftmaxRows(g.value(logits));
}

std::vector<int> Model::PredictLabels(const EncoderState &state) const {
  Matrix logp = Detection(state);
  std::vector<int> labels(logp.rows());
  for (int r = 0; r < logp.rows(); ++r) logp.row(r).maxCoeff(&labels[r]);
  return labels;
}

void SaveCheckpoint(std::ostream &out, const Model &model, const Vocabulary &vocab) {
  const ModelConfig &c = model.config();
  out << "convsp-checkpoint " << kCheckpointVersion << '\n';
  out << "vocab_size " << c.vocab_size << '\n'
      << "num_predicates " << c.num_predicates << '\n'
      << "num_types " << c.num_types << '\n'
      << "d_model " << c.d_model << '\n'
      << "heads " << c.heads << '\n'
      << "encoder_layers " << c.encoder_layers << '\n'
      << "decoder_layers " << c.decoder_layers << '\n'
      << "ffn_multiplier " << c.ffn_multiplier << '\n'
      << "max_input_length " << c.max_input_length << '\n'
      << "max_decode_length " << c.max_decode_length << '\n'
      << std::hexfloat << "alpha " << c.alpha << '\n'
      << "ed_weight " << c.ed_weight << '\n'
      << "dropout " << c.dropout << '\n'
      << std::defaultfloat << "seed " << c.seed << '\n'
      << "end_config\n";
  vocab.Write(out);
  std::vector<const Parameter *> all = model.parameters();
  out << "params " << all.size() << '\n';
  out << std::hexfloat;
  for (const Parameter *p : all) {
    out << p->name << ' ' << p->value.rows() << ' ' << p->value.cols() << '\n';
    for (int r = 0; r < p->value.rows(); ++r) {
      for (int col = 0; col < p->value.cols(); ++col) {
        out << (col ? " " : "") << p->value(r, col);
      }
      out << '\n';
    }
  }
  out << std::defaultfloat;
  if (!out) throw Error("failed to write checkpoint");
}

Checkpoint LoadCheckpoint(std::istream &in) {
  std::string tag;
  int version = 0;
  if (!(in >> tag >> version) || tag != "convsp-checkpoint") {
    throw ParseError("not a checkpoint");
  }
  if (version != kCheckpointVersion) {
    throw ParseError("unsupported checkpoint version " + std::to_string(version));
  }
  ModelConfig c;
  std::string key, raw;
  while (in >> key && key != "end_config") {
    if (!(in >> raw)) throw ParseError("truncated checkpoint config");
    auto as_int = [&] { return std::stoi(raw); };
    auto as_double = [&] { return std::strtod(raw.c_str(), nullptr); };
    if (key == "vocab_size") c.vocab_size = as_int();
    else if (key == "num_predicates") c.num_predicates = as_int();
    else if (key == "num_types") c.num_types = as_int();
    else if (key == "d_model") c.d_model = as_int();
    else if (key == "heads") c.heads = as_int();
    else if (key == "encoder_layers") c.encoder_layers = as_int();
    else if (key == "decoder_layers") c.decoder_layers = as_int();
    else if (key == "ffn_multiplier") c.ffn_multiplier = as_int();
    else if (key == "max_input_length") c.max_input_length = as_int();
    else if (key == "max_decode_length") c.max_decode_length = as_int();
    else if (key == "alpha") c.alpha = as_double();
    else if (key == "ed_weight") c.ed_weight = as_double();
    else if (key == "dropout") c.dropout = as_double();
    else if (key == "seed") c.seed = std::stoull(raw);
    else throw ParseError("unknown checkpoint key " + key);
  }
  in.ignore(1, '\n');
  Checkpoint ck;
  ck.vocab = Vocabulary::Read(in);
  if (ck.vocab.size() != c.vocab_size) throw ParseError("vocabulary size mismatch");
  ck.model = std::make_unique<Model>(c);
  int count = 0;
  if (!(in >> tag >> count) || tag != "params") throw ParseError("missing parameter table");
  std::vector<Parameter *> params = ck.model->parameters();
  if (count != static_cast<int>(params.size())) throw ParseError("parameter count mismatch");
  for (int i = 0; i < count; ++i) {
    std::string name;
    int rows = 0, cols = 0;
    if (!(in >> name >> rows >> cols)) throw ParseError("truncated parameter header");
    Parameter &p = ck.model->parameter(name);
    if (rows != p.value.rows() || cols != p.value.cols()) {
      throw ParseError("shape mismatch for " + name);
    }
    for (int r = 0; r < rows; ++r) {
      for (int col = 0; col < cols; ++col) {
        if (!(in >> raw)) throw ParseError("truncated values for " + name);
        char *end = nullptr;
        p.value(r, col) = std::strtod(raw.c_str(), &end);
        if (*end != '\0') throw ParseError("bad number in " + name);
      }
    }
  }
  return ck;
}

}  // namespace convsp
