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

#ifndef CONVSP_AUTODIFF_H_
#define CONVSP_AUTODIFF_H_

#include <Eigen/Dense>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace convsp {

using Matrix = Eigen::MatrixXd;

// A trainable tensor with its accumulated gradient and Adam moments.
struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;
  Matrix m;
  Matrix v;

  Parameter(std::string n, int rows, int cols)
      : name(std::move(n)),
        value(Matrix::Zero(rows, cols)),
        grad(Matrix::Zero(rows, cols)),
        m(Matrix::Zero(rows, cols)),
        v(Matrix::Zero(rows, cols)) {}
};

// Handle to a node of a Graph.
struct Var {
  int id = -1;
};

// Reverse-mode tape. Sequences are stored one position per row. With
// `record` false no backward closures are kept (inference).
class Graph {
 public:
  explicit Graph(bool record = true) : record_(record) {}

  Var Constant(Matrix value);
  Var Param(Parameter &p);

  Var MatMul(Var a, Var b);   // a * b
  Var MatMulT(Var a, Var b);  // a * b^T
  Var Add(Var a, Var b);
  Var AddRow(Var a, Var row);  // adds a 1 x c row to every row of a
  Var Scale(Var a, double s);
  Var Gelu(Var a);
  // Row-wise normalization with 1 x c gain and bias.
  Var LayerNorm(Var x, Var gain, Var bias, double eps = 1e-5);
  // Scaled dot-product attention over `heads` column blocks of width
  // q.cols() / heads; `causal` hides keys after each query row.
  Var Attention(Var q, Var k, Var v, int heads, bool causal);
  Var Rows(Var a, int begin, int count);
  Var ConcatCols(Var a, Var b);
  Var Repeat(Var row, int n);  // n copies of a 1 x c row
  Var Gather(Var table, std::span<const int> ids);
  // Inverted dropout; identity when p == 0.
  Var Dropout(Var a, double p, std::mt19937_64 &rng);
  // scale * sum over rows with target >= 0 of -log softmax(row)[target].
  Var CrossEntropy(Var logits, std::span<const int> targets, double scale = 1.0);
  Var Sum(std::span<const Var> terms);

  const Matrix &value(Var v) const { return nodes_[v.id].value; }
  double scalar(Var v) const { return nodes_[v.id].value(0, 0); }
  int size() const { return static_cast<int>(nodes_.size()); }

  // Seeds d(loss)/d(loss) = 1 and accumulates into Parameter::grad.
  void Backward(Var loss);

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    std::function<void()> backward;
  };

  Var Push(Matrix value, std::function<void()> backward = {});
  Matrix &Grad(int id);
  const Matrix &GradOf(int id) const { return nodes_[id].grad; }

  bool record_;
  std::vector<Node> nodes_;
};

// Row-wise log-softmax.
Matrix LogSoftmaxRows(const Matrix &logits);

}  // namespace convsp

#endif  // CONVSP_AUTODIFF_H_
