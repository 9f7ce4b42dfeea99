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

#include "convsp/autodiff.h"

#include <cmath>
#include <limits>

#include "convsp/errors.h"

namespace convsp {
namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

void RequireShape(bool ok, const char *op) {
  if (!ok) throw Error(std::string("shape mismatch in ") + op);
}

}  // namespace

Matrix LogSoftmaxRows(const Matrix &logits) {
  Matrix out(logits.rows(), logits.cols());
  for (int r = 0; r < logits.rows(); ++r) {
    double mx = logits.row(r).maxCoeff();
    double lse = mx + std::log((logits.row(r).array() - mx).exp().sum());
    out.row(r) = logits.row(r).array() - lse;
  }
  return out;
}

Var Graph::Push(Matrix value, std::function<void()> backward) {
  Node node;
  node.value = std::move(value);
  if (record_) node.backward = std::move(backward);
  nodes_.push_back(std::move(node));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

Matrix &Graph::Grad(int id) {
  Node &n = nodes_[id];
  if (n.grad.size() == 0) n.grad = Matrix::Zero(n.value.rows(), n.value.cols());
  return n.grad;
}

Var Graph::Constant(Matrix value) { return Push(std::move(value)); }

Var Graph::Param(Parameter &p) {
  int out = size();
  return Push(p.value, [this, out, &p] { p.grad += GradOf(out); });
}

Var Graph::MatMul(Var a, Var b) {
  RequireShape(value(a).cols() == value(b).rows(), "MatMul");
  int out = size();
  return Push(value(a) * value(b), [this, out, a, b] {
    const Matrix &g = GradOf(out);
    Grad(a.id) += g * value(b).transpose();
    Grad(b.id) += value(a).transpose() * g;
  });
}

Var Graph::MatMulT(Var a, Var b) {
  RequireShape(value(a).cols() == value(b).cols(), "MatMulT");
  int out = size();
  return Push(value(a) * value(b).transpose(), [this, out, a, b] {
    const Matrix &g = GradOf(out);
    Grad(a.id) += g * value(b);
    Grad(b.id) += g.transpose() * value(a);
  });
}

Var Graph::Add(Var a, Var b) {
  RequireShape(value(a).rows() == value(b).rows() && value(a).cols() == value(b).cols(), "Add");
  int out = size();
  return Push(value(a) + value(b), [this, out, a, b] {
    Grad(a.id) += GradOf(out);
    Grad(b.id) += GradOf(out);
  });
}

Var Graph::AddRow(Var a, Var row) {
  RequireShape(value(row).rows() == 1 && value(row).cols() == value(a).cols(), "AddRow");
  int out = size();
  Matrix v = value(a).rowwise() + value(row).row(0);
  return Push(std::move(v), [this, out, a, row] {
    Grad(a.id) += GradOf(out);
    Grad(row.id) += GradOf(out).colwise().sum();
  });
}

Var Graph::Scale(Var a, double s) {
  int out = size();
  return Push(value(a) * s, [this, out, a, s] { Grad(a.id) += GradOf(out) * s; });
}

Var Graph::Gelu(Var a) {
  int out = size();
  const Matrix &x = value(a);
  Matrix y = x.unaryExpr([](double v) { return 0.5 * v * (1.0 + std::erf(v * kInvSqrt2)); });
  return Push(std::move(y), [this, out, a] {
    Matrix d = value(a).unaryExpr([](double v) {
      return 0.5 * (1.0 + std::erf(v * kInvSqrt2)) + v * kInvSqrt2Pi * std::exp(-0.5 * v * v);
    });
    Grad(a.id) += GradOf(out).cwiseProduct(d);
  });
}

Var Graph::LayerNorm(Var x, Var gain, Var bias, double eps) {
  const Matrix &in = value(x);
  const int c = in.cols();
  RequireShape(value(gain).cols() == c && value(bias).cols() == c, "LayerNorm");
  Matrix normed(in.rows(), c);
  Eigen::VectorXd inv_std(in.rows());
  for (int r = 0; r < in.rows(); ++r) {
    double mean = in.row(r).mean();
    double var = (in.row(r).array() - mean).square().mean();
    inv_std(r) = 1.0 / std::sqrt(var + eps);
    normed.row(r) = (in.row(r).array() - mean) * inv_std(r);
  }
  Matrix y = (normed.array().rowwise() * value(gain).row(0).array()).matrix();
  y.rowwise() += value(bias).row(0);
  int out = size();
  return Push(std::move(y), [this, out, x, gain, bias, normed, inv_std, c] {
    const Matrix &g = GradOf(out);
    Grad(gain.id) += g.cwiseProduct(normed).colwise().sum();
    Grad(bias.id) += g.colwise().sum();
    Matrix dn = (g.array().rowwise() * value(gain).row(0).array()).matrix();
    Matrix &dx = Grad(x.id);
    for (int r = 0; r < dn.rows(); ++r) {
      double mean_dn = dn.row(r).mean();
      double mean_dn_n = dn.row(r).dot(normed.row(r)) / c;
      dx.row(r).array() +=
          inv_std(r) * (dn.row(r).array() - mean_dn - normed.row(r).array() * mean_dn_n);
    }
  });
}

Var Graph::Attention(Var q, Var k, Var v, int heads, bool causal) {
  const Matrix &Q = value(q), &K = value(k), &V = value(v);
  RequireShape(Q.cols() == K.cols() && K.cols() == V.cols() && K.rows() == V.rows() &&
                   heads > 0 && Q.cols() % heads == 0,
               "Attention");
  const int n = Q.rows(), m = K.rows(), hd = Q.cols() / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(hd));
  std::vector<Matrix> probs(heads);
  Matrix y(n, Q.cols());
  for (int h = 0; h < heads; ++h) {
    Matrix s = Q.middleCols(h * hd, hd) * K.middleCols(h * hd, hd).transpose() * scale;
    for (int i = 0; i < n; ++i) {
      int visible = causal ? std::min(m, i + 1) : m;
      double mx = s.row(i).head(visible).maxCoeff();
      double total = 0;
      for (int j = 0; j < m; ++j) {
        double e = j < visible ? std::exp(s(i, j) - mx) : 0.0;
        s(i, j) = e;
        total += e;
      }
      s.row(i) /= total;
    }
    y.middleCols(h * hd, hd) = s * V.middleCols(h * hd, hd);
    probs[h] = std::move(s);
  }
  int out = size();
  return Push(std::move(y), [this, out, q, k, v, heads, hd, scale, probs = std::move(probs)] {
    const Matrix &g = GradOf(out);
    Matrix &dq = Grad(q.id);
    Matrix &dk = Grad(k.id);
    Matrix &dv = Grad(v.id);
    for (int h = 0; h < heads; ++h) {
      const Matrix &a = probs[h];
      Matrix go = g.middleCols(h * hd, hd);
      Matrix da = go * value(v).middleCols(h * hd, hd).transpose();
      dv.middleCols(h * hd, hd) += a.transpose() * go;
      Eigen::VectorXd dot = a.cwiseProduct(da).rowwise().sum();
      Matrix ds = a.cwiseProduct(da.colwise() - dot) * scale;
      dq.middleCols(h * hd, hd) += ds * value(k).middleCols(h * hd, hd);
      dk.middleCols(h * hd, hd) += ds.transpose() * value(q).middleCols(h * hd, hd);
    }
  });
}

Var Graph::Rows(Var a, int begin, int count) {
  RequireShape(begin >= 0 && count >= 0 && begin + count <= value(a).rows(), "Rows");
  int out = size();
  return Push(value(a).middleRows(begin, count), [this, out, a, begin, count] {
    Grad(a.id).middleRows(begin, count) += GradOf(out);
  });
}

Var Graph::ConcatCols(Var a, Var b) {
  RequireShape(value(a).rows() == value(b).rows(), "ConcatCols");
  Matrix y(value(a).rows(), value(a).cols() + value(b).cols());
  y << value(a), value(b);
  int out = size();
  return Push(std::move(y), [this, out, a, b] {
    const Matrix &g = GradOf(out);
    int ca = value(a).cols();
    Grad(a.id) += g.leftCols(ca);
    Grad(b.id) += g.rightCols(g.cols() - ca);
  });
}

Var Graph::Repeat(Var row, int n) {
  RequireShape(value(row).rows() == 1, "Repeat");
  int out = size();
  return Push(value(row).replicate(n, 1),
              [this, out, row] { Grad(row.id) += GradOf(out).colwise().sum(); });
}

Var Graph::Gather(Var table, std::span<const int> ids) {
  const Matrix &t = value(table);
  Matrix y(ids.size(), t.cols());
  for (size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || ids[i] >= t.rows()) throw InputError("gather index out of range");
    y.row(i) = t.row(ids[i]);
  }
  int out = size();
  std::vector<int> rows(ids.begin(), ids.end());
  return Push(std::move(y), [this, out, table, rows = std::move(rows)] {
    const Matrix &g = GradOf(out);
    Matrix &dt = Grad(table.id);
    for (size_t i = 0; i < rows.size(); ++i) dt.row(rows[i]) += g.row(i);
  });
}

Var Graph::Dropout(Var a, double p, std::mt19937_64 &rng) {
  if (p <= 0.0) return a;
  std::bernoulli_distribution keep(1.0 - p);
  Matrix mask = Matrix::NullaryExpr(value(a).rows(), value(a).cols(),
                                    [&] { return keep(rng) ? 1.0 / (1.0 - p) : 0.0; });
  int out = size();
  return Push(value(a).cwiseProduct(mask),
              [this, out, a, mask] { Grad(a.id) += GradOf(out).cwiseProduct(mask); });
}

Var Graph::CrossEntropy(Var logits, std::span<const int> targets, double scale) {
  const Matrix &z = value(logits);
  RequireShape(static_cast<int>(targets.size()) == z.rows(), "CrossEntropy");
  Matrix logp = LogSoftmaxRows(z);
  double loss = 0;
  for (int r = 0; r < z.rows(); ++r) {
    if (targets[r] < 0) continue;
    if (targets[r] >= z.cols()) throw DataError("cross-entropy target out of range");
    loss -= logp(r, targets[r]);
  }
  Matrix y(1, 1);
  y(0, 0) = loss * scale;
  int out = size();
  std::vector<int> t(targets.begin(), targets.end());
  return Push(std::move(y), [this, out, logits, logp = std::move(logp), t = std::move(t), scale] {
    double g = GradOf(out)(0, 0) * scale;
    Matrix &dz = Grad(logits.id);
    for (int r = 0; r < logp.rows(); ++r) {
      if (t[r] < 0) continue;
      dz.row(r) += g * logp.row(r).array().exp().matrix();
      dz(r, t[r]) -= g;
    }
  });
}

Var Graph::Sum(std::span<const Var> terms) {
  if (terms.empty()) return Constant(Matrix::Zero(1, 1));
  Matrix y = value(terms[0]);
  for (size_t i = 1; i < terms.size(); ++i) {
    RequireShape(value(terms[i]).rows() == y.rows() && value(terms[i]).cols() == y.cols(), "Sum");
    y += value(terms[i]);
  }
  int out = size();
  std::vector<Var> parts(terms.begin(), terms.end());
  return Push(std::move(y), [this, out, parts = std::move(parts)] {
    for (Var p : parts) Grad(p.id) += GradOf(out);
  });
}

void Graph::Backward(Var loss) {
  if (!record_) throw Error("graph was built without a tape");
  Grad(loss.id).setOnes();
  for (int i = loss.id; i >= 0; --i) {
    Node &n = nodes_[i];
    if (n.grad.size() == 0 || !n.backward) continue;
    n.backward();
  }
}

}  // namespace convsp
