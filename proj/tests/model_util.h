#ifndef CONVSP_TESTS_MODEL_UTIL_H_
#define CONVSP_TESTS_MODEL_UTIL_H_

#include <map>
#include <random>
#include <string>
#include <vector>

#include "convsp/model.h"

namespace convsp::testing {

inline ModelConfig ToyConfig() {
  ModelConfig c;
  c.vocab_size = 30;
  c.num_predicates = 5;
  c.num_types = 2;
  c.d_model = 16;
  c.heads = 2;
  c.max_input_length = 24;
  c.max_decode_length = 16;
  return c;
}

// Learnable toy questions over ToyConfig's vocabulary; the template is
// seed % 4. Token 3, 4, 5 or 6 announces the template, tokens 10..19 are entity words (the first one is pointed
// at and tagged B-type0, a second one I-type0), tokens 20..24 select the
// predicate, token 25 precedes a number word 26..29. The last id is the
// context token.
inline TrainingExample ToyExample(uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  TrainingExample ex;
  int kind = seed % 4;
  int len = pick(5, 9);
  std::vector<int> toks(len);
  for (int &t : toks) t = pick(7, 9);
  toks[0] = 3 + kind;
  int ent = pick(1, len - 3);
  toks[ent] = pick(10, 19);
  toks[ent + 1] = pick(10, 19);
  int pred_pos = ent + 2;
  int pred = pick(0, 4);
  toks[pred_pos] = 20 + pred;
  int num_pos = -1;
  if (kind == 2) {
    toks.push_back(25);
    toks.push_back(pick(26, 29));
    num_pos = toks.size() - 1;
  }
  ex.input = toks;
  ex.input.push_back(2);
  ex.labels.assign(toks.size(), 0);
  ex.labels[ent] = 1;
  ex.labels[ent + 1] = 2;

  auto op = [](DecodeToken t) { return Step::Op(t); };
  auto set_of_e = std::vector<Step>{op(DecodeToken::kA17), op(DecodeToken::kEntity)};
  set_of_e[1].entry = EntityEntry{EntityId(0), ent};
  Step p = Step::Of(PredicateId(pred));
  p.token = DecodeToken::kPredicate;
  if (kind == 0) {  // find
    ex.program = {op(DecodeToken::kA1), op(DecodeToken::kA4), set_of_e[0], set_of_e[1], p};
  } else if (kind == 1) {  // count(find)
    ex.program = {op(DecodeToken::kA2), op(DecodeToken::kA5), op(DecodeToken::kA4),
                  set_of_e[0], set_of_e[1], p};
  } else if (kind == 3) {  // filter(type, find)
    Step ty = Step::Of(TypeId(pred % 2));
    ty.token = DecodeToken::kType;
    ex.program = {op(DecodeToken::kA1), op(DecodeToken::kA15), ty, op(DecodeToken::kA4),
                  set_of_e[0], set_of_e[1], p};
  } else {  // larger(find, p, num)
    Step n = Step::Of(NumberEntry{std::nullopt, num_pos});
    ex.program = {op(DecodeToken::kA1), op(DecodeToken::kA10), op(DecodeToken::kA4),
                  set_of_e[0], set_of_e[1], p, p, op(DecodeToken::kA16), n};
  }
  return ex;
}

struct GroupError {
  double error = 0;          // ||analytic - numeric|| / (||analytic|| + ||numeric||)
  double analytic_norm = 0;  // over the sampled coordinates
};

// Relative error of analytic against central-difference gradients per
// parameter group (name prefix up to the second dot for layers, the first
// for everything else), over `per_param` sampled coordinates per tensor.
inline std::map<std::string, GroupError> FiniteDifferenceError(Model &model,
                                                           const std::vector<TrainingExample> &batch,
                                                           int per_param) {
  auto total = [&] {
    double s = 0;
    for (const TrainingExample &ex : batch) {
      Graph g(false);
      s += g.scalar(model.Loss(g, ex));
    }
    return s;
  };
  model.ZeroGrad();
  for (const TrainingExample &ex : batch) {
    Graph g;
    g.Backward(model.Loss(g, ex));
  }
  std::map<std::string, double> diff_sq, norm_a, norm_n;
  std::mt19937_64 rng(17);
  for (Parameter *p : model.parameters()) {
    std::string group = p->name.substr(0, p->name.find('.'));
    std::string rest = p->name.substr(group.size() + 1);
    std::string second = rest.substr(0, rest.find('.'));
    group += "." + second;
    std::vector<int> coords;
    // Sample coordinates with a nonzero analytic gradient when possible.
    std::vector<int> nonzero;
    for (int i = 0; i < p->grad.size(); ++i) {
      if (p->grad(i) != 0) nonzero.push_back(i);
    }
    const std::vector<int> &pool = nonzero.empty() ? std::vector<int>{0} : nonzero;
    for (int k = 0; k < per_param; ++k) coords.push_back(pool[rng() % pool.size()]);
    for (int i : coords) {
      const double h = 1e-5;
      double keep = p->value(i);
      p->value(i) = keep + h;
      double up = total();
      p->value(i) = keep - h;
      double down = total();
      p->value(i) = keep;
      double numeric = (up - down) / (2 * h);
      double analytic = p->grad(i);
      diff_sq[group] += (analytic - numeric) * (analytic - numeric);
      norm_a[group] += analytic * analytic;
      norm_n[group] += numeric * numeric;
    }
  }
  std::map<std::string, GroupError> out;
  for (const auto &[g, d] : diff_sq) {
    double denom = std::sqrt(norm_a[g]) + std::sqrt(norm_n[g]);
    out[g] = {denom > 0 ? std::sqrt(d) / denom : 0.0, std::sqrt(norm_a[g])};
  }
  return out;
}

}  // namespace convsp::testing

#endif  // CONVSP_TESTS_MODEL_UTIL_H_
