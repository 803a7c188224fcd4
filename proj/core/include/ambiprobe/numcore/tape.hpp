#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "ambiprobe/numcore/tensor.hpp"

namespace ambiprobe::ad {

class Tape;

// Handle to a node on a Tape. Cheap to copy; only valid while the tape lives.
class Var {
 public:
  Var() = default;

  const Matrix& value() const;
  Index rows() const { return value().rows(); }
  Index cols() const { return value().cols(); }
  bool requires_grad() const;
  Tape& tape() const { return *tape_; }
  std::size_t id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

// Linear record of operations for one reverse sweep. Nodes are appended in
// evaluation order, so the reverse of insertion order is a valid reverse
// topological order. Gradients accumulate additively across fan-out.
class Tape {
 public:
  // Receives the tape and the gradient flowing into the node.
  using Backward = std::function<void(Tape&, const Matrix&)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Leaf owning its value.
  Var leaf(Matrix value, bool requires_grad);
  Var constant(Matrix value) { return leaf(std::move(value), false); }
  Var variable(Matrix value) { return leaf(std::move(value), true); }
  // Leaf viewing an external matrix (e.g. a model parameter); the matrix must
  // outlive the tape and stay unmodified until backward() returns.
  Var view(const Matrix& value, bool requires_grad);

  // Appends an operation node. `backward` runs during the reverse sweep when
  // the node requires a gradient and something reached it, or always when
  // `always_run` is set (multi-output ops whose sibling may carry the only
  // gradient). It pushes contributions to inputs with accumulate().
  Var record(Matrix value, bool requires_grad, Backward backward, bool always_run = false);

  const Matrix& value(std::size_t id) const;
  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }

  // Gradient of a node; empty (0x0) if nothing reached it.
  const Matrix& grad_of(std::size_t id) const { return nodes_[id].grad; }
  // Gradient shaped like the node's value, zero when nothing reached it.
  Matrix grad(Var v) const;

  void accumulate(std::size_t id, const Eigen::Ref<const Matrix>& g);
  // Zero-initialized gradient buffer for in-place accumulation.
  Matrix& grad_buffer(std::size_t id);

  // Seeds d(loss)/d(loss) = 1 and sweeps in reverse. Throws ContractError if
  // `loss` is not 1x1 or belongs to another tape.
  void backward(Var loss);

  std::size_t size() const noexcept { return nodes_.size(); }

 private:
  struct Node {
    Matrix value;
    const Matrix* external = nullptr;
    Matrix grad;
    bool requires_grad = false;
    bool always_run = false;
    Backward backward;
  };

  std::vector<Node> nodes_;
};

// ---------------------------------------------------------------------------
// Differentiable operations. Shapes follow Eigen (rows x cols); a vector is an
// n x 1 matrix and batched inputs carry one example per column.
// ---------------------------------------------------------------------------

Var matmul(Var a, Var b);
Var add(Var a, Var b);
Var sub(Var a, Var b);
// Elementwise product.
Var mul(Var a, Var b);
// a * x + b elementwise, with scalar a and b.
Var scale_shift(Var x, Scalar a, Scalar b);
// Adds a column vector to every column of x.
Var add_bias(Var x, Var bias);
// W x + b; x may hold several columns.
Var affine(Var weight, Var x, Var bias);

Var tanh(Var x);
Var sigmoid(Var x);
// Elementwise max(0, x - margin); zero slope at the hinge point.
Var hinge(Var x, Scalar margin);

// Column-wise softmax, max-subtracted. Throws NumericDomainError on NaN/Inf.
Var softmax(Var logits);
// Sum over columns j with targets[j] >= 0 of -log softmax(logits.col(j))[targets[j]].
// Columns with a negative target are ignored.
Var softmax_nll(Var logits, std::span<const int> targets);

// Cosine of two equally sized vectors as a 1x1 node. Throws
// UndefinedSimilarityError when either norm is zero.
Var cosine(Var u, Var v);
// Column-wise cosine of two equally shaped matrices, 1 x cols.
Var cosine_columns(Var a, Var b);

Var sum(Var x);
Var mean(Var x);

// Inverted dropout: in training mode zeroes entries with probability `rate`
// and rescales survivors by 1/(1-rate); otherwise returns x unchanged.
Var dropout(Var x, Scalar rate, Rng& rng, bool training);

// Columns of `table` selected by `indices` (embedding lookup).
Var gather_columns(Var table, std::span<const int> indices);
Var concat_rows(Var top, Var bottom);
Var slice_rows(Var x, Index start, Index count);
Var concat_cols(std::span<const Var> parts);

struct LstmState {
  Var h;
  Var c;
};

// Standard LSTM cell without peepholes. Gate rows of the stacked weights are
// ordered input, forget, candidate, output:
//   pre = Wx x + Wh h_prev + b
//   c = sigmoid(f) * c_prev + sigmoid(i) * tanh(g)
//   h = sigmoid(o) * tanh(c)
LstmState lstm_cell(Var x, Var h_prev, Var c_prev, Var wx, Var wh, Var bias);

}  // namespace ambiprobe::ad
