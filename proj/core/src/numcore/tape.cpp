#include "ambiprobe/numcore/tape.hpp"

#include <cmath>
#include <memory>

#include "ambiprobe/error.hpp"

namespace ambiprobe::ad {

const Matrix& Var::value() const { return tape_->value(id_); }
bool Var::requires_grad() const { return tape_->requires_grad(id_); }

Var Tape::leaf(Matrix value, bool requires_grad) {
  nodes_.push_back(Node{std::move(value), nullptr, Matrix(), requires_grad, false, nullptr});
  return Var(this, nodes_.size() - 1);
}

Var Tape::view(const Matrix& value, bool requires_grad) {
  nodes_.push_back(Node{Matrix(), &value, Matrix(), requires_grad, false, nullptr});
  return Var(this, nodes_.size() - 1);
}

Var Tape::record(Matrix value, bool requires_grad, Backward backward, bool always_run) {
  Node n{std::move(value), nullptr, Matrix(), requires_grad, always_run && requires_grad, nullptr};
  if (requires_grad) n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return Var(this, nodes_.size() - 1);
}

const Matrix& Tape::value(std::size_t id) const {
  const auto& n = nodes_[id];
  return n.external != nullptr ? *n.external : n.value;
}

Matrix Tape::grad(Var v) const {
  const auto& g = nodes_[v.id()].grad;
  if (g.size() == 0) return Matrix::Zero(v.rows(), v.cols());
  return g;
}

void Tape::accumulate(std::size_t id, const Eigen::Ref<const Matrix>& g) {
  auto& n = nodes_[id];
  if (!n.requires_grad) return;
  if (n.grad.size() == 0) {
    n.grad = g;
  } else {
    n.grad += g;
  }
}

Matrix& Tape::grad_buffer(std::size_t id) {
  auto& n = nodes_[id];
  if (n.grad.size() == 0) {
    const auto& v = value(id);
    n.grad = Matrix::Zero(v.rows(), v.cols());
  }
  return n.grad;
}

void Tape::backward(Var loss) {
  if (&loss.tape() != this) throw ContractError("backward: loss belongs to another tape");
  const auto& lv = value(loss.id());
  if (lv.rows() != 1 || lv.cols() != 1) {
    throw ContractError("backward: loss must be a scalar, got " + shape_string(lv));
  }
  for (auto& n : nodes_) n.grad.resize(0, 0);
  if (!nodes_[loss.id()].requires_grad) return;
  nodes_[loss.id()].grad = Matrix::Ones(1, 1);
  for (std::size_t i = loss.id() + 1; i-- > 0;) {
    auto& n = nodes_[i];
    if (!n.backward) continue;
    if (n.grad.size() == 0) {
      if (!n.always_run) continue;
      grad_buffer(i);
    }
    n.backward(*this, n.grad);
  }
}

namespace {

void same_tape(Var a, Var b, const char* op) {
  if (&a.tape() != &b.tape()) throw ContractError(std::string(op) + ": operands on different tapes");
}

void same_shape(const Matrix& a, const Matrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError(std::string(op) + ": shape mismatch " + shape_string(a) + " vs " +
                         shape_string(b));
  }
}

}  // namespace

Var matmul(Var a, Var b) {
  same_tape(a, b, "matmul");
  const auto& av = a.value();
  const auto& bv = b.value();
  if (av.cols() != bv.rows()) {
    throw DimensionError("matmul: cannot multiply " + shape_string(av) + " by " + shape_string(bv));
  }
  Matrix out;
  out.noalias() = av * bv;
  auto ia = a.id(), ib = b.id();
  return a.tape().record(std::move(out), a.requires_grad() || b.requires_grad(),
                         [ia, ib](Tape& t, const Matrix& g) {
                           if (t.requires_grad(ia)) t.grad_buffer(ia).noalias() += g * t.value(ib).transpose();
                           if (t.requires_grad(ib)) t.grad_buffer(ib).noalias() += t.value(ia).transpose() * g;
                         });
}

Var add(Var a, Var b) {
  same_tape(a, b, "add");
  same_shape(a.value(), b.value(), "add");
  auto ia = a.id(), ib = b.id();
  return a.tape().record(a.value() + b.value(), a.requires_grad() || b.requires_grad(),
                         [ia, ib](Tape& t, const Matrix& g) {
                           t.accumulate(ia, g);
                           t.accumulate(ib, g);
                         });
}

Var sub(Var a, Var b) {
  same_tape(a, b, "sub");
  same_shape(a.value(), b.value(), "sub");
  auto ia = a.id(), ib = b.id();
  return a.tape().record(a.value() - b.value(), a.requires_grad() || b.requires_grad(),
                         [ia, ib](Tape& t, const Matrix& g) {
                           t.accumulate(ia, g);
                           t.accumulate(ib, -g);
                         });
}

Var mul(Var a, Var b) {
  same_tape(a, b, "mul");
  same_shape(a.value(), b.value(), "mul");
  auto ia = a.id(), ib = b.id();
  return a.tape().record(a.value().cwiseProduct(b.value()), a.requires_grad() || b.requires_grad(),
                         [ia, ib](Tape& t, const Matrix& g) {
                           t.accumulate(ia, g.cwiseProduct(t.value(ib)));
                           t.accumulate(ib, g.cwiseProduct(t.value(ia)));
                         });
}

Var scale_shift(Var x, Scalar a, Scalar b) {
  auto ix = x.id();
  Matrix out = (a * x.value().array() + b).matrix();
  return x.tape().record(std::move(out), x.requires_grad(),
                         [ix, a](Tape& t, const Matrix& g) { t.accumulate(ix, a * g); });
}

Var add_bias(Var x, Var bias) {
  same_tape(x, bias, "add_bias");
  const auto& xv = x.value();
  const auto& bv = bias.value();
  if (bv.cols() != 1 || bv.rows() != xv.rows()) {
    throw DimensionError("add_bias: bias " + shape_string(bv) + " does not fit " + shape_string(xv));
  }
  Matrix out = xv.colwise() + bv.col(0);
  auto ix = x.id(), ib = bias.id();
  return x.tape().record(std::move(out), x.requires_grad() || bias.requires_grad(),
                         [ix, ib](Tape& t, const Matrix& g) {
                           t.accumulate(ix, g);
                           if (t.requires_grad(ib)) t.grad_buffer(ib) += g.rowwise().sum();
                         });
}

Var affine(Var weight, Var x, Var bias) {
  const auto& w = weight.value();
  const auto& xv = x.value();
  const auto& b = bias.value();
  if (w.cols() != xv.rows() || b.rows() != w.rows() || b.cols() != 1) {
    throw DimensionError("affine: W " + shape_string(w) + ", x " + shape_string(xv) + ", b " +
                         shape_string(b) + " do not conform");
  }
  return add_bias(matmul(weight, x), bias);
}

Var tanh(Var x) {
  auto ix = x.id();
  Matrix out = x.value().array().tanh().matrix();
  auto& tape = x.tape();
  auto id = tape.size();
  return tape.record(std::move(out), x.requires_grad(), [ix, id](Tape& t, const Matrix& g) {
    const auto& y = t.value(id);
    t.accumulate(ix, (g.array() * (1.0 - y.array().square())).matrix());
  });
}

namespace {

Matrix sigmoid_of(const Matrix& x) { return (1.0 / (1.0 + (-x.array()).exp())).matrix(); }

}  // namespace

Var sigmoid(Var x) {
  auto ix = x.id();
  auto& tape = x.tape();
  auto id = tape.size();
  return tape.record(sigmoid_of(x.value()), x.requires_grad(), [ix, id](Tape& t, const Matrix& g) {
    const auto& y = t.value(id);
    t.accumulate(ix, (g.array() * y.array() * (1.0 - y.array())).matrix());
  });
}

Var hinge(Var x, Scalar margin) {
  auto ix = x.id();
  Matrix out = (x.value().array() - margin).max(0.0).matrix();
  return x.tape().record(std::move(out), x.requires_grad(), [ix, margin](Tape& t, const Matrix& g) {
    const auto& xv = t.value(ix);
    t.accumulate(ix, (xv.array() > margin).select(g, 0.0).matrix());
  });
}

namespace {

void require_finite(const Matrix& m, const char* op) {
  if (!m.allFinite()) throw NumericDomainError(std::string(op) + ": non-finite input");
}

Matrix column_softmax(const Matrix& logits) {
  Matrix out(logits.rows(), logits.cols());
  for (Index j = 0; j < logits.cols(); ++j) {
    auto col = logits.col(j);
    double m = col.maxCoeff();
    out.col(j) = (col.array() - m).exp().matrix();
    out.col(j) /= out.col(j).sum();
  }
  return out;
}

}  // namespace

Var softmax(Var logits) {
  require_finite(logits.value(), "softmax");
  if (logits.rows() < 1) throw ContractError("softmax: empty input");
  auto ix = logits.id();
  auto& tape = logits.tape();
  auto id = tape.size();
  return tape.record(column_softmax(logits.value()), logits.requires_grad(),
                     [ix, id](Tape& t, const Matrix& g) {
                       const auto& y = t.value(id);
                       Matrix dx(y.rows(), y.cols());
                       for (Index j = 0; j < y.cols(); ++j) {
                         double dot = g.col(j).dot(y.col(j));
                         dx.col(j) = (y.col(j).array() * (g.col(j).array() - dot)).matrix();
                       }
                       t.accumulate(ix, dx);
                     });
}

Var softmax_nll(Var logits, std::span<const int> targets) {
  const auto& x = logits.value();
  if (static_cast<Index>(targets.size()) != x.cols()) {
    throw DimensionError("softmax_nll: " + std::to_string(targets.size()) + " targets for logits " +
                         shape_string(x));
  }
  require_finite(x, "softmax_nll");
  const bool rg = logits.requires_grad();
  auto probs = rg ? std::make_shared<Matrix>(x.rows(), x.cols()) : nullptr;
  std::vector<int> tgt(targets.begin(), targets.end());
  Vector scratch(x.rows());
  double total = 0.0;
  for (Index j = 0; j < x.cols(); ++j) {
    int k = tgt[j];
    if (k < 0) continue;
    if (k >= x.rows()) throw DimensionError("softmax_nll: target out of range");
    auto col = x.col(j);
    double m = col.maxCoeff();
    scratch = (col.array() - m).exp().matrix();
    double z = scratch.sum();
    total += std::log(z) + m - col(k);
    if (rg) probs->col(j) = scratch / z;
  }
  auto ix = logits.id();
  return logits.tape().record(Matrix::Constant(1, 1, total), rg,
                              [ix, probs, tgt = std::move(tgt)](Tape& t, const Matrix& g) {
                                Matrix& dx = t.grad_buffer(ix);
                                double s = g(0, 0);
                                for (Index j = 0; j < probs->cols(); ++j) {
                                  int k = tgt[j];
                                  if (k < 0) continue;
                                  dx.col(j) += s * probs->col(j);
                                  dx(k, j) -= s;
                                }
                              });
}

Var cosine_columns(Var a, Var b) {
  same_tape(a, b, "cosine");
  const auto& av = a.value();
  const auto& bv = b.value();
  same_shape(av, b.value(), "cosine");
  const Index n = av.cols();
  Eigen::RowVectorXd na = av.colwise().norm();
  Eigen::RowVectorXd nb = bv.colwise().norm();
  for (Index j = 0; j < n; ++j) {
    if (na(j) == 0.0 || nb(j) == 0.0) throw UndefinedSimilarityError("cosine: zero-norm vector");
  }
  Matrix out(1, n);
  for (Index j = 0; j < n; ++j) out(0, j) = av.col(j).dot(bv.col(j)) / (na(j) * nb(j));
  auto ia = a.id(), ib = b.id();
  auto& tape = a.tape();
  auto id = tape.size();
  return tape.record(std::move(out), a.requires_grad() || b.requires_grad(),
                     [ia, ib, id, na, nb](Tape& t, const Matrix& g) {
                       const auto& av = t.value(ia);
                       const auto& bv = t.value(ib);
                       const auto& c = t.value(id);
                       const bool ga = t.requires_grad(ia), gb = t.requires_grad(ib);
                       for (Index j = 0; j < av.cols(); ++j) {
                         double s = g(0, j);
                         if (s == 0.0) continue;
                         double inv = 1.0 / (na(j) * nb(j));
                         if (ga) {
                           t.grad_buffer(ia).col(j) +=
                               s * (bv.col(j) * inv - c(0, j) * av.col(j) / (na(j) * na(j)));
                         }
                         if (gb) {
                           t.grad_buffer(ib).col(j) +=
                               s * (av.col(j) * inv - c(0, j) * bv.col(j) / (nb(j) * nb(j)));
                         }
                       }
                     });
}

Var cosine(Var u, Var v) {
  if (u.cols() != 1 || v.cols() != 1 || u.rows() != v.rows()) {
    throw DimensionError("cosine: expected equal-length vectors, got " + shape_string(u.value()) +
                         " and " + shape_string(v.value()));
  }
  return cosine_columns(u, v);
}

Var sum(Var x) {
  auto ix = x.id();
  return x.tape().record(Matrix::Constant(1, 1, x.value().sum()), x.requires_grad(),
                         [ix](Tape& t, const Matrix& g) { t.grad_buffer(ix).array() += g(0, 0); });
}

Var mean(Var x) {
  auto n = static_cast<Scalar>(x.value().size());
  if (n == 0) throw ContractError("mean: empty input");
  return scale_shift(sum(x), 1.0 / n, 0.0);
}

Var dropout(Var x, Scalar rate, Rng& rng, bool training) {
  if (!training || rate <= 0.0) return x;
  if (rate >= 1.0) throw ContractError("dropout: rate must be < 1");
  const auto& xv = x.value();
  auto mask = std::make_shared<Matrix>(xv.rows(), xv.cols());
  const Scalar keep = 1.0 / (1.0 - rate);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (Index i = 0; i < mask->size(); ++i) (*mask)(i) = unit(rng) < rate ? 0.0 : keep;
  auto ix = x.id();
  return x.tape().record(xv.cwiseProduct(*mask), x.requires_grad(),
                         [ix, mask](Tape& t, const Matrix& g) {
                           t.accumulate(ix, g.cwiseProduct(*mask));
                         });
}

Var gather_columns(Var table, std::span<const int> indices) {
  const auto& tv = table.value();
  Matrix out(tv.rows(), static_cast<Index>(indices.size()));
  for (std::size_t j = 0; j < indices.size(); ++j) {
    int k = indices[j];
    if (k < 0 || k >= tv.cols()) {
      throw DimensionError("gather_columns: index " + std::to_string(k) + " outside table " +
                           shape_string(tv));
    }
    out.col(static_cast<Index>(j)) = tv.col(k);
  }
  auto it = table.id();
  std::vector<int> idx(indices.begin(), indices.end());
  return table.tape().record(std::move(out), table.requires_grad(),
                             [it, idx = std::move(idx)](Tape& t, const Matrix& g) {
                               Matrix& dt = t.grad_buffer(it);
                               for (std::size_t j = 0; j < idx.size(); ++j) {
                                 dt.col(idx[j]) += g.col(static_cast<Index>(j));
                               }
                             });
}

Var concat_rows(Var top, Var bottom) {
  same_tape(top, bottom, "concat_rows");
  const auto& a = top.value();
  const auto& b = bottom.value();
  if (a.cols() != b.cols()) {
    throw DimensionError("concat_rows: " + shape_string(a) + " and " + shape_string(b));
  }
  Matrix out(a.rows() + b.rows(), a.cols());
  out << a, b;
  auto ia = top.id(), ib = bottom.id();
  Index ra = a.rows(), rb = b.rows();
  return top.tape().record(std::move(out), top.requires_grad() || bottom.requires_grad(),
                           [ia, ib, ra, rb](Tape& t, const Matrix& g) {
                             t.accumulate(ia, g.topRows(ra));
                             t.accumulate(ib, g.bottomRows(rb));
                           });
}

Var slice_rows(Var x, Index start, Index count) {
  const auto& xv = x.value();
  if (start < 0 || count < 0 || start + count > xv.rows()) {
    throw DimensionError("slice_rows: rows [" + std::to_string(start) + ", " +
                         std::to_string(start + count) + ") outside " + shape_string(xv));
  }
  auto ix = x.id();
  return x.tape().record(xv.middleRows(start, count), x.requires_grad(),
                         [ix, start, count](Tape& t, const Matrix& g) {
                           t.grad_buffer(ix).middleRows(start, count) += g;
                         });
}

Var concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw ContractError("concat_cols: no inputs");
  auto& tape = parts.front().tape();
  Index rows = parts.front().rows();
  Index cols = 0;
  bool rg = false;
  for (const auto& p : parts) {
    if (&p.tape() != &tape) throw ContractError("concat_cols: operands on different tapes");
    if (p.rows() != rows) {
      throw DimensionError("concat_cols: " + shape_string(p.value()) + " vs " +
                           std::to_string(rows) + " rows");
    }
    cols += p.cols();
    rg = rg || p.requires_grad();
  }
  Matrix out(rows, cols);
  std::vector<std::pair<std::size_t, Index>> layout;
  layout.reserve(parts.size());
  Index off = 0;
  for (const auto& p : parts) {
    out.middleCols(off, p.cols()) = p.value();
    layout.emplace_back(p.id(), p.cols());
    off += p.cols();
  }
  return tape.record(std::move(out), rg, [layout = std::move(layout)](Tape& t, const Matrix& g) {
    Index o = 0;
    for (auto [id, c] : layout) {
      t.accumulate(id, g.middleCols(o, c));
      o += c;
    }
  });
}

LstmState lstm_cell(Var x, Var h_prev, Var c_prev, Var wx, Var wh, Var bias) {
  const auto& xv = x.value();
  const auto& hv = h_prev.value();
  const auto& cv = c_prev.value();
  const auto& wxv = wx.value();
  const auto& whv = wh.value();
  const auto& bv = bias.value();
  const Index hidden = whv.cols();
  if (wxv.rows() != 4 * hidden || whv.rows() != 4 * hidden || wxv.cols() != xv.rows() ||
      hv.rows() != hidden || cv.rows() != hidden || hv.cols() != xv.cols() ||
      cv.cols() != xv.cols() || bv.rows() != 4 * hidden || bv.cols() != 1) {
    throw DimensionError("lstm_cell: x " + shape_string(xv) + ", h " + shape_string(hv) + ", c " +
                         shape_string(cv) + ", Wx " + shape_string(wxv) + ", Wh " +
                         shape_string(whv) + ", b " + shape_string(bv) + " do not conform");
  }
  const Index batch = xv.cols();

  // Activated gates, stacked i, f, g, o.
  auto gates = std::make_shared<Matrix>(4 * hidden, batch);
  Matrix& act = *gates;
  act.noalias() = wxv * xv;
  act.noalias() += whv * hv;
  act.colwise() += bv.col(0);
  act.topRows(2 * hidden) = sigmoid_of(act.topRows(2 * hidden));
  act.middleRows(2 * hidden, hidden) = act.middleRows(2 * hidden, hidden).array().tanh().matrix();
  act.bottomRows(hidden) = sigmoid_of(act.bottomRows(hidden));

  auto in_gate = act.topRows(hidden).array();
  auto forget = act.middleRows(hidden, hidden).array();
  auto cand = act.middleRows(2 * hidden, hidden).array();
  auto out_gate = act.bottomRows(hidden).array();

  Matrix c = (forget * cv.array() + in_gate * cand).matrix();
  auto tanh_c = std::make_shared<Matrix>(c.array().tanh().matrix());
  Matrix h = (out_gate * tanh_c->array()).matrix();

  const bool rg = x.requires_grad() || h_prev.requires_grad() || c_prev.requires_grad() ||
                  wx.requires_grad() || wh.requires_grad() || bias.requires_grad();
  auto& tape = x.tape();
  Var c_node = tape.record(std::move(c), rg, [](Tape&, const Matrix&) {});
  const auto ic = c_node.id();
  const auto ix = x.id(), ih = h_prev.id(), icp = c_prev.id();
  const auto iwx = wx.id(), iwh = wh.id(), ib = bias.id();
  Var h_node = tape.record(
      std::move(h), rg,
      [=](Tape& t, const Matrix& dh) {
        const Matrix& act = *gates;
        auto i_g = act.topRows(hidden).array();
        auto f_g = act.middleRows(hidden, hidden).array();
        auto g_g = act.middleRows(2 * hidden, hidden).array();
        auto o_g = act.bottomRows(hidden).array();
        auto tc = tanh_c->array();

        Matrix dc = (dh.array() * o_g * (1.0 - tc.square())).matrix();
        if (t.grad_of(ic).size() != 0) dc += t.grad_of(ic);

        Matrix dpre(4 * hidden, dh.cols());
        dpre.topRows(hidden) = (dc.array() * g_g * i_g * (1.0 - i_g)).matrix();
        dpre.middleRows(hidden, hidden) =
            (dc.array() * t.value(icp).array() * f_g * (1.0 - f_g)).matrix();
        dpre.middleRows(2 * hidden, hidden) = (dc.array() * i_g * (1.0 - g_g.square())).matrix();
        dpre.bottomRows(hidden) = (dh.array() * tc * o_g * (1.0 - o_g)).matrix();

        if (t.requires_grad(icp)) t.accumulate(icp, (dc.array() * f_g).matrix());
        if (t.requires_grad(iwx)) t.grad_buffer(iwx).noalias() += dpre * t.value(ix).transpose();
        if (t.requires_grad(ix)) t.grad_buffer(ix).noalias() += t.value(iwx).transpose() * dpre;
        if (t.requires_grad(iwh)) t.grad_buffer(iwh).noalias() += dpre * t.value(ih).transpose();
        if (t.requires_grad(ih)) t.grad_buffer(ih).noalias() += t.value(iwh).transpose() * dpre;
        if (t.requires_grad(ib)) t.grad_buffer(ib) += dpre.rowwise().sum();
      },
      /*always_run=*/true);
  return {h_node, c_node};
}

}  // namespace ambiprobe::ad
