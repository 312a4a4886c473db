#pragma once

// Reverse-mode differentiation over a closed set of matrix operations.
//
// A Tape records nodes in evaluation order; each node refers only to earlier
// nodes, so a single reverse sweep visits every node once. Values are computed
// eagerly when a node is recorded.

#include <cstddef>
#include <vector>

#include "phaselab/matrix.hpp"
#include "phaselab/qsim.hpp"
#include "phaselab/spectral.hpp"

namespace phaselab {

enum class Op {
  constant,
  parameter,
  matmul,
  add,         // same shape, or rhs broadcast from 1x1 / 1xcols
  hadamard,
  scale,       // by a fixed double
  scalar_mul,  // by a 1x1 node
  hilbert_linear,
  envelope,
  phase,
  sum,
  sigmoid,
  tanh,
  silu,
  bce_with_logits,
  qnn_eval,
};

struct Var {
  std::size_t id = 0;
};

class Tape;

// d loss / d node for every node of the tape that the loss depends on.
// Nodes not on the path report a zero matrix of the node's shape.
class Gradients {
 public:
  const Matrix& operator[](Var v) const { return grads_.at(v.id); }

 private:
  friend class Tape;
  std::vector<Matrix> grads_;
};

class Tape {
 public:
  Var constant(Matrix value);
  Var parameter(Matrix value);

  Var matmul(Var a, Var b);
  Var add(Var a, Var b);
  Var hadamard(Var a, Var b);
  Var scale(Var a, double factor);
  Var scalar_mul(Var s, Var a);
  // Standard Hilbert transform along each row.
  Var hilbert_linear(Var a);
  Var envelope(Var re, Var im, double eps = spectral::kDefaultEps);
  Var phase(Var re, Var im, double eps = spectral::kDefaultEps);
  Var sum(Var a);
  Var sigmoid(Var a);
  Var tanh(Var a);
  Var silu(Var a);
  // Elementwise numerically stable binary cross-entropy against fixed labels.
  Var bce_with_logits(Var logits, const Matrix& labels);
  // Rows of `angles` are split into groups of four qubit inputs (the last
  // group zero-padded); each group runs the circuit with the shared 1 x P
  // `params`. Output has the shape of `angles`.
  Var qnn_eval(Var angles, Var params, const qsim::CircuitSpec& spec);

  const Matrix& value(Var v) const { return nodes_.at(v.id).value; }
  Op op(Var v) const { return nodes_.at(v.id).op; }
  std::size_t size() const noexcept { return nodes_.size(); }

  // Throws ContractError unless `loss` is 1x1.
  Gradients backward(Var loss) const;

 private:
  struct Node {
    Op op;
    Var a;
    Var b;
    Matrix value;
    double scalar = 0.0;  // scale factor or eps
    bool needs_grad = false;
    std::size_t extra = 0;  // index into labels_ / circuits_
  };

  Var push(Node node);
  const Node& node(Var v) const { return nodes_.at(v.id); }

  std::vector<Node> nodes_;
  std::vector<Matrix> labels_;
  std::vector<qsim::CircuitSpec> circuits_;
};

Gradients backward(const Tape& tape, Var loss);

}  // namespace phaselab
