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

#ifndef CONVSP_MODEL_H_
#define CONVSP_MODEL_H_

#include <istream>
#include <map>
#include <memory>
#include <ostream>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "convsp/autodiff.h"
#include "convsp/grammar.h"
#include "convsp/tokenizer.h"

namespace convsp {

struct ModelConfig {
  int vocab_size = 0;
  int num_predicates = 0;
  int num_types = 0;  // detection label space has 2 * num_types + 1 labels
  int d_model = 64;
  int heads = 6;  // per-head width is ceil(d_model / heads)
  int encoder_layers = 2;
  int decoder_layers = 2;
  int ffn_multiplier = 4;
  int max_input_length = 192;
  int max_decode_length = 64;
  double alpha = 1.5;      // weight of the parsing loss
  double ed_weight = 1.0;  // weight of the detection loss
  double dropout = 0.0;
  uint64_t seed = 1;

  int head_dim() const { return (d_model + heads - 1) / heads; }
  int attention_width() const { return head_dim() * heads; }
  int num_labels() const { return 2 * num_types + 1; }
  bool operator==(const ModelConfig &) const = default;
};

// One question: encoder ids ending with the context token, one detection
// label per content token and the gold program (start rule first, no end
// token). Entity and number steps carry positions, predicate and type
// steps their ids.
struct TrainingExample {
  std::vector<int> input;
  std::vector<int> labels;
  std::vector<Step> program;
};

// Per-step supervision derived from a program; -1 where a head is idle.
struct DecodeTargets {
  std::vector<int> inputs;  // decoder input tokens: start then program tokens
  std::vector<int> tokens;  // program tokens then end
  std::vector<int> predicates, types, entities, numbers;
};
// Throws DataError when an entry step lacks its instantiation or a pointer
// falls outside the content positions.
DecodeTargets MakeTargets(std::span<const Step> program, int content_length);

struct EncoderState {
  Matrix h;  // one row per input position; the last row is the context
  int content_length() const { return static_cast<int>(h.rows()) - 1; }
  Eigen::RowVectorXd context() const { return h.row(h.rows() - 1); }
};

// Log-probabilities for one decode step.
struct StepDistributions {
  Eigen::VectorXd token;      // over the decode vocabulary
  Eigen::VectorXd predicate;  // over predicates
  Eigen::VectorXd type;       // over types
  Eigen::VectorXd entity;     // over content positions
  Eigen::VectorXd number;     // over content positions
};

struct LossValue {
  double total = 0;
  double parsing = 0;    // mean decode-step NLL including instantiations
  double detection = 0;  // mean per-token tagging NLL
};

// Encoder-decoder with the token, predicate, type, pointer and detection
// heads. Post-norm Transformer layers, learned positional embeddings.
class Model {
 public:
  explicit Model(const ModelConfig &config);
  Model(const Model &other);
  Model &operator=(const Model &) = delete;

  const ModelConfig &config() const { return config_; }
  std::vector<Parameter *> parameters();
  std::vector<const Parameter *> parameters() const;
  Parameter &parameter(const std::string &name);
  int64_t num_weights() const;

  // Builds the loss for one example on `graph`; `training` enables dropout.
  // Loss terms whose weight is zero are not built.
  Var Loss(Graph &graph, const TrainingExample &example, LossValue *value = nullptr,
           bool training = false) const;

  EncoderState Encode(std::span<const int> input) const;
  // Distributions for the step after `prefix` (program tokens so far).
  StepDistributions Decode(const EncoderState &state, std::span<const DecodeToken> prefix) const;
  // Distributions for every step of a teacher-forced program (one row per
  // step, end step last).
  std::vector<StepDistributions> DecodeAll(const EncoderState &state,
                                           std::span<const DecodeToken> program) const;
  // Log-probabilities over detection labels, one row per content token.
  Matrix Detection(const EncoderState &state) const;
  std::vector<int> PredictLabels(const EncoderState &state) const;

  void ZeroGrad();

 private:
  struct Attn {
    Parameter *wq, *bq, *wk, *bk, *wv, *bv, *wo, *bo;
  };
  struct Norm {
    Parameter *gain, *bias;
  };
  struct Ffn {
    Parameter *w1, *b1, *w2, *b2;
  };
  struct EncoderLayer {
    Attn self;
    Norm n1;
    Ffn ffn;
    Norm n2;
  };
  struct DecoderLayer {
    Attn self;
    Norm n1;
    Attn cross;
    Norm n2;
    Ffn ffn;
    Norm n3;
  };

  void Build();
  Parameter *Add(const std::string &name, int rows, int cols, double range);
  Attn MakeAttn(const std::string &prefix);
  Norm MakeNorm(const std::string &prefix);
  Ffn MakeFfn(const std::string &prefix, int in, int out);

  Var Linear(Graph &g, Var x, Parameter *w, Parameter *b) const;
  Var RunAttn(Graph &g, const Attn &a, Var x, Var memory, bool causal) const;
  Var RunNorm(Graph &g, const Norm &n, Var x) const;
  Var RunFfn(Graph &g, const Ffn &f, Var x) const;
  Var Residual(Graph &g, Var x, Var sub, const Norm &n, bool training) const;

  Var EncodeGraph(Graph &g, std::span<const int> input, bool training) const;
  Var DecodeGraph(Graph &g, Var h, std::span<const int> inputs, bool training) const;
  // Logits of every head given decoder states `s` and encoder rows `h`.
  struct HeadLogits {
    Var token, predicate, type, entity, number;
  };
  HeadLogits Heads(Graph &g, Var s, Var h, int n) const;

  void CheckInput(std::span<const int> input) const;

  ModelConfig config_;
  std::vector<std::unique_ptr<Parameter>> params_;
  std::map<std::string, Parameter *> by_name_;
  mutable std::mt19937_64 rng_;  // dropout masks

  Parameter *enc_embed_, *enc_pos_, *dec_embed_, *dec_pos_;
  std::vector<EncoderLayer> encoder_;
  std::vector<DecoderLayer> decoder_;
  Ffn token_head_, predicate_head_, type_head_, detection_head_;
  Parameter *entity_pointer_, *number_pointer_;
};

// Versioned structured-text checkpoint: config, vocabulary and every named
// parameter with its shape.
void SaveCheckpoint(std::ostream &out, const Model &model, const Vocabulary &vocab);
struct Checkpoint {
  std::unique_ptr<Model> model;
  Vocabulary vocab;
};
Checkpoint LoadCheckpoint(std::istream &in);

}  // namespace convsp

#endif  // CONVSP_MODEL_H_
