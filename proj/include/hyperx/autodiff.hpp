#pragma once

// Dense reverse-mode autodiff over row-major double matrices.
//
// A Tape owns every intermediate value. Primitives append a node holding the
// forward value and a closure that pushes the output gradient to the inputs.
// Nodes are stored in a deque so references to values stay valid while the
// tape grows. Tapes are single-use per forward pass and not thread-safe.

#include <cmath>
#include <cstddef>
#include <deque>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hyperx/error.hpp"
#include "hyperx/hypergraph.hpp"

namespace hyperx::ad {

class Tape;

/// Handle to a node on a tape.
class Var {
 public:
  Var() = default;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape& tape() const { return *tape_; }
  std::size_t id() const noexcept { return id_; }
  bool valid() const noexcept { return tape_ != nullptr; }

  const Matrix& value() const;
  /// Gradient after Tape::backward; zero-sized if no gradient reached it.
  const Matrix& grad() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
  double scalar() const { return value()(0, 0); }

 private:
  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, const Matrix& out_grad)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Matrix value) { return push(std::move(value), false, nullptr); }
  Var parameter(Matrix value) { return push(std::move(value), true, nullptr); }

  Var push(Matrix value, bool requires_grad, BackwardFn backward) {
    nodes_.push_back(Node{std::move(value), Matrix(), requires_grad, std::move(backward)});
    return Var(this, nodes_.size() - 1);
  }

  const Matrix& value(std::size_t id) const { return nodes_.at(id).value; }
  const Matrix& grad(std::size_t id) const { return nodes_.at(id).grad; }
  bool requires_grad(std::size_t id) const { return nodes_.at(id).requires_grad; }
  std::size_t size() const noexcept { return nodes_.size(); }

  /// Adds `g` into the gradient slot of node `id` (no-op for constants).
  void accumulate(std::size_t id, const Matrix& g) {
    Node& n = nodes_.at(id);
    if (!n.requires_grad) return;
    if (n.grad.size() == 0)
      n.grad = g;
    else
      n.grad += g;
  }

  template <class Expr>
  void accumulate_expr(std::size_t id, const Expr& g) {
    Node& n = nodes_.at(id);
    if (!n.requires_grad) return;
    if (n.grad.size() == 0)
      n.grad = g;
    else
      n.grad += g;
  }

  void zero_grad() {
    for (auto& n : nodes_) n.grad.resize(0, 0);
  }

  /// Reverse sweep from a 1 x 1 loss. Gradients accumulate across calls.
  void backward(Var loss) {
    if (loss.rows() != 1 || loss.cols() != 1)
      throw Error(ErrorKind::shape_mismatch,
                  "backward needs a scalar loss, got " + std::to_string(loss.rows()) + "x" +
                      std::to_string(loss.cols()));
    accumulate(loss.id(), Matrix::Ones(1, 1));
    for (std::size_t k = loss.id() + 1; k-- > 0;) {
      Node& n = nodes_[k];
      if (!n.requires_grad || !n.backward || n.grad.size() == 0) continue;
      n.backward(*this, n.grad);
    }
  }

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    bool requires_grad;
    BackwardFn backward;
  };
  std::deque<Node> nodes_;
};

inline const Matrix& Var::value() const { return tape_->value(id_); }
inline const Matrix& Var::grad() const { return tape_->grad(id_); }

namespace detail {

inline bool any_grad(std::initializer_list<Var> vars) {
  for (const Var& v : vars)
    if (v.tape().requires_grad(v.id())) return true;
  return false;
}

inline void require_same_tape(const Var& a, const Var& b) {
  if (&a.tape() != &b.tape()) throw Error(ErrorKind::invalid_argument, "operands live on different tapes");
}

inline std::string shape(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

enum class Broadcast { same, row, col, scalar };

// How `b` broadcasts against `a`: same shape, 1 x cols, rows x 1, or 1 x 1.
inline Broadcast broadcast_kind(const Matrix& a, const Matrix& b, const char* op) {
  if (b.rows() == a.rows() && b.cols() == a.cols()) return Broadcast::same;
  if (b.rows() == 1 && b.cols() == 1) return Broadcast::scalar;
  if (b.rows() == 1 && b.cols() == a.cols()) return Broadcast::row;
  if (b.cols() == 1 && b.rows() == a.rows()) return Broadcast::col;
  throw Error(ErrorKind::shape_mismatch,
              std::string(op) + ": cannot broadcast " + shape(b) + " onto " + shape(a));
}

inline Matrix expand(const Matrix& b, Broadcast kind, Eigen::Index rows, Eigen::Index cols) {
  switch (kind) {
    case Broadcast::same: return b;
    case Broadcast::row: return b.replicate(rows, 1);
    case Broadcast::col: return b.replicate(1, cols);
    case Broadcast::scalar: return Matrix::Constant(rows, cols, b(0, 0));
  }
  return b;
}

inline Matrix reduce(const Matrix& g, Broadcast kind) {
  switch (kind) {
    case Broadcast::same: return g;
    case Broadcast::row: return g.colwise().sum();
    case Broadcast::col: return g.rowwise().sum();
    case Broadcast::scalar: return Matrix::Constant(1, 1, g.sum());
  }
  return g;
}

template <class Forward, class Derivative>
Var unary(const Var& a, Forward forward, Derivative derivative) {
  Tape& t = a.tape();
  const std::size_t ia = a.id();
  Matrix out = a.value().unaryExpr(forward);
  return t.push(std::move(out), detail::any_grad({a}), [ia, derivative](Tape& tape, const Matrix& g) {
    const Matrix& x = tape.value(ia);
    tape.accumulate_expr(ia, g.cwiseProduct(x.unaryExpr(derivative)));
  });
}

}  // namespace detail

inline Var matmul(const Var& a, const Var& b) {
  detail::require_same_tape(a, b);
  if (a.cols() != b.rows())
    throw Error(ErrorKind::shape_mismatch,
                "matmul " + detail::shape(a.value()) + " * " + detail::shape(b.value()));
  Tape& t = a.tape();
  const std::size_t ia = a.id(), ib = b.id();
  Matrix out = a.value() * b.value();
  return t.push(std::move(out), detail::any_grad({a, b}), [ia, ib](Tape& tape, const Matrix& g) {
    if (tape.requires_grad(ia)) tape.accumulate_expr(ia, g * tape.value(ib).transpose());
    if (tape.requires_grad(ib)) tape.accumulate_expr(ib, tape.value(ia).transpose() * g);
  });
}

inline Var transpose(const Var& a) {
  Tape& t = a.tape();
  const std::size_t ia = a.id();
  Matrix out = a.value().transpose();
  return t.push(std::move(out), detail::any_grad({a}),
                [ia](Tape& tape, const Matrix& g) { tape.accumulate_expr(ia, g.transpose()); });
}

inline Var add(const Var& a, const Var& b) {
  detail::require_same_tape(a, b);
  const auto kind = detail::broadcast_kind(a.value(), b.value(), "add");
  Tape& t = a.tape();
  const std::size_t ia = a.id(), ib = b.id();
  Matrix out = a.value() + detail::expand(b.value(), kind, a.rows(), a.cols());
  return t.push(std::move(out), detail::any_grad({a, b}), [ia, ib, kind](Tape& tape, const Matrix& g) {
    tape.accumulate(ia, g);
    if (tape.requires_grad(ib)) tape.accumulate(ib, detail::reduce(g, kind));
  });
}

inline Var sub(const Var& a, const Var& b) {
  detail::require_same_tape(a, b);
  const auto kind = detail::broadcast_kind(a.value(), b.value(), "sub");
  Tape& t = a.tape();
  const std::size_t ia = a.id(), ib = b.id();
  Matrix out = a.value() - detail::expand(b.value(), kind, a.rows(), a.cols());
  return t.push(std::move(out), detail::any_grad({a, b}), [ia, ib, kind](Tape& tape, const Matrix& g) {
    tape.accumulate(ia, g);
    if (tape.requires_grad(ib)) tape.accumulate(ib, -detail::reduce(g, kind));
  });
}

/// Elementwise product; `b` may broadcast along rows (1 x cols), columns
/// (rows x 1) or be a scalar.
inline Var mul(const Var& a, const Var& b) {
  detail::require_same_tape(a, b);
  const auto kind = detail::broadcast_kind(a.value(), b.value(), "mul");
  Tape& t = a.tape();
  const std::size_t ia = a.id(), ib = b.id();
  Matrix out = a.value().cwiseProduct(detail::expand(b.value(), kind, a.rows(), a.cols()));
  return t.push(std::move(out), detail::any_grad({a, b}), [ia, ib, kind](Tape& tape, const Matrix& g) {
    const Matrix& av = tape.value(ia);
    const Matrix& bv = tape.value(ib);
    if (tape.requires_grad(ia)) tape.accumulate_expr(ia, g.cwiseProduct(detail::expand(bv, kind, av.rows(), av.cols())));
    if (tape.requires_grad(ib)) tape.accumulate(ib, detail::reduce(g.cwiseProduct(av), kind));
  });
}

inline Var div(const Var& a, const Var& b) {
  detail::require_same_tape(a, b);
  const auto kind = detail::broadcast_kind(a.value(), b.value(), "div");
  Tape& t = a.tape();
  const std::size_t ia = a.id(), ib = b.id();
  Matrix out = a.value().cwiseQuotient(detail::expand(b.value(), kind, a.rows(), a.cols()));
  return t.push(std::move(out), detail::any_grad({a, b}), [ia, ib, kind](Tape& tape, const Matrix& g) {
    const Matrix& av = tape.value(ia);
    const Matrix bv = detail::expand(tape.value(ib), kind, av.rows(), av.cols());
    if (tape.requires_grad(ia)) tape.accumulate_expr(ia, g.cwiseQuotient(bv));
    if (tape.requires_grad(ib)) {
      Matrix gb = -g.cwiseProduct(av).cwiseQuotient(bv.cwiseProduct(bv));
      tape.accumulate(ib, detail::reduce(gb, kind));
    }
  });
}

inline Var neg(const Var& a) {
  return detail::unary(a, [](double x) { return -x; }, [](double) { return -1.0; });
}

inline Var scale(const Var& a, double s) {
  return detail::unary(a, [s](double x) { return s * x; }, [s](double) { return s; });
}

inline Var add_scalar(const Var& a, double s) {
  return detail::unary(a, [s](double x) { return x + s; }, [](double) { return 1.0; });
}

inline Var relu(const Var& a) {
  return detail::unary(a, [](double x) { return x > 0.0 ? x : 0.0; },
                       [](double x) { return x > 0.0 ? 1.0 : 0.0; });
}

namespace detail {
inline double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}
inline double softplus(double x) { return x > 30.0 ? x : std::log1p(std::exp(x)); }
}  // namespace detail

inline Var sigmoid(const Var& a) {
  return detail::unary(a, [](double x) { return detail::sigmoid(x); }, [](double x) {
    const double s = detail::sigmoid(x);
    return s * (1.0 - s);
  });
}

inline Var exp(const Var& a) {
  return detail::unary(a, [](double x) { return std::exp(x); }, [](double x) { return std::exp(x); });
}

inline Var softplus(const Var& a) {
  return detail::unary(a, [](double x) { return detail::softplus(x); },
                       [](double x) { return detail::sigmoid(x); });
}

/// x^p for positive x.
inline Var pow(const Var& a, double p) {
  return detail::unary(a, [p](double x) { return std::pow(x, p); },
                       [p](double x) { return p * std::pow(x, p - 1.0); });
}

/// max(x, lo); the gradient is cut where the floor is active.
inline Var clamp_min(const Var& a, double lo) {
  return detail::unary(a, [lo](double x) { return x > lo ? x : lo; },
                       [lo](double x) { return x > lo ? 1.0 : 0.0; });
}

/// rows x 1 column of row sums.
inline Var row_sum(const Var& a) {
  Tape& t = a.tape();
  const std::size_t ia = a.id();
  const Eigen::Index cols = a.cols();
  Matrix out = a.value().rowwise().sum();
  return t.push(std::move(out), detail::any_grad({a}), [ia, cols](Tape& tape, const Matrix& g) {
    tape.accumulate_expr(ia, g.replicate(1, cols));
  });
}

/// 1 x cols row of column means.
inline Var col_mean(const Var& a) {
  if (a.rows() == 0) throw Error(ErrorKind::shape_mismatch, "col_mean of an empty matrix");
  Tape& t = a.tape();
  const std::size_t ia = a.id();
  const Eigen::Index rows = a.rows();
  Matrix out = a.value().colwise().mean();
  return t.push(std::move(out), detail::any_grad({a}), [ia, rows](Tape& tape, const Matrix& g) {
    tape.accumulate_expr(ia, (g / static_cast<double>(rows)).replicate(rows, 1));
  });
}

/// 1 x 1 sum of all entries.
inline Var sum(const Var& a) {
  Tape& t = a.tape();
  const std::size_t ia = a.id();
  const Eigen::Index rows = a.rows(), cols = a.cols();
  Matrix out = Matrix::Constant(1, 1, a.value().sum());
  return t.push(std::move(out), detail::any_grad({a}), [ia, rows, cols](Tape& tape, const Matrix& g) {
    tape.accumulate_expr(ia, Matrix::Constant(rows, cols, g(0, 0)));
  });
}

/// Row-wise log-softmax, computed with the max-shift.
inline Var log_softmax(const Var& a) {
  Tape& t = a.tape();
  const std::size_t ia = a.id();
  const Matrix& x = a.value();
  Matrix out(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double m = x.row(i).maxCoeff();
    const double lse = m + std::log((x.row(i).array() - m).exp().sum());
    out.row(i) = x.row(i).array() - lse;
  }
  const std::size_t iout = t.size();
  return t.push(std::move(out), detail::any_grad({a}), [ia, iout](Tape& tape, const Matrix& g) {
    const Matrix soft = tape.value(iout).array().exp().matrix();
    const Eigen::VectorXd gs = g.rowwise().sum();
    tape.accumulate_expr(ia, g - (soft.array().colwise() * gs.array()).matrix());
  });
}

/// Mean of a(rows[k], cols[k]) over k; the masked-mean used for
/// cross-entropy on a node subset.
inline Var pick_mean(const Var& a, std::span<const std::size_t> rows, std::span<const int> cols) {
  if (rows.size() != cols.size() || rows.empty())
    throw Error(ErrorKind::invalid_argument, "pick_mean needs a non-empty, aligned selection");
  Tape& t = a.tape();
  const std::size_t ia = a.id();
  const Matrix& x = a.value();
  std::vector<std::size_t> r(rows.begin(), rows.end());
  std::vector<int> c(cols.begin(), cols.end());
  double acc = 0.0;
  for (std::size_t k = 0; k < r.size(); ++k) {
    if (static_cast<Eigen::Index>(r[k]) >= x.rows() || c[k] < 0 || c[k] >= x.cols())
      throw Error(ErrorKind::shape_mismatch, "pick_mean index out of range");
    acc += x(static_cast<Eigen::Index>(r[k]), c[k]);
  }
  const double inv = 1.0 / static_cast<double>(r.size());
  const Eigen::Index nr = x.rows(), nc = x.cols();
  return t.push(Matrix::Constant(1, 1, acc * inv), detail::any_grad({a}),
                [ia, r = std::move(r), c = std::move(c), inv, nr, nc](Tape& tape, const Matrix& g) {
                  Matrix ga = Matrix::Zero(nr, nc);
                  for (std::size_t k = 0; k < r.size(); ++k)
                    ga(static_cast<Eigen::Index>(r[k]), c[k]) += g(0, 0) * inv;
                  tape.accumulate(ia, ga);
                });
}

/// out.row(k) = a.row(index[k]).
inline Var gather_rows(const Var& a, std::span<const std::size_t> index) {
  Tape& t = a.tape();
  const std::size_t ia = a.id();
  const Matrix& x = a.value();
  std::vector<std::size_t> idx(index.begin(), index.end());
  Matrix out(static_cast<Eigen::Index>(idx.size()), x.cols());
  for (std::size_t k = 0; k < idx.size(); ++k) {
    if (static_cast<Eigen::Index>(idx[k]) >= x.rows())
      throw Error(ErrorKind::shape_mismatch, "gather_rows index out of range");
    out.row(static_cast<Eigen::Index>(k)) = x.row(static_cast<Eigen::Index>(idx[k]));
  }
  const Eigen::Index nr = x.rows(), nc = x.cols();
  return t.push(std::move(out), detail::any_grad({a}),
                [ia, idx = std::move(idx), nr, nc](Tape& tape, const Matrix& g) {
                  Matrix ga = Matrix::Zero(nr, nc);
                  for (std::size_t k = 0; k < idx.size(); ++k)
                    ga.row(static_cast<Eigen::Index>(idx[k])) += g.row(static_cast<Eigen::Index>(k));
                  tape.accumulate(ia, ga);
                });
}

/// out.row(s) = sum of a.row(k) over k with segment[k] == s.
inline Var segment_sum(const Var& a, std::span<const std::size_t> segment, std::size_t num_segments) {
  Tape& t = a.tape();
  const std::size_t ia = a.id();
  const Matrix& x = a.value();
  if (static_cast<Eigen::Index>(segment.size()) != x.rows())
    throw Error(ErrorKind::shape_mismatch, "segment_sum needs one segment id per row");
  std::vector<std::size_t> seg(segment.begin(), segment.end());
  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(num_segments), x.cols());
  for (std::size_t k = 0; k < seg.size(); ++k) {
    if (seg[k] >= num_segments) throw Error(ErrorKind::shape_mismatch, "segment id out of range");
    out.row(static_cast<Eigen::Index>(seg[k])) += x.row(static_cast<Eigen::Index>(k));
  }
  const Eigen::Index nc = x.cols();
  return t.push(std::move(out), detail::any_grad({a}), [ia, seg = std::move(seg), nc](Tape& tape, const Matrix& g) {
    Matrix ga(static_cast<Eigen::Index>(seg.size()), nc);
    for (std::size_t k = 0; k < seg.size(); ++k)
      ga.row(static_cast<Eigen::Index>(k)) = g.row(static_cast<Eigen::Index>(seg[k]));
    tape.accumulate(ia, ga);
  });
}

/// Undirected sparse adjacency with differentiable weights.
struct SparsePattern {
  std::size_t num_nodes = 0;
  std::vector<std::size_t> u;  // u[k] != v[k]
  std::vector<std::size_t> v;
};

/// Y = A X for symmetric A with A(u_k, v_k) = A(v_k, u_k) = w_k (repeated
/// pairs add up) and optional diagonal A(i, i) = diag_i. `weights` is E x 1,
/// `diag` is N x 1 or an invalid Var for a zero diagonal.
inline Var sym_spmm(std::shared_ptr<const SparsePattern> shared, const Var& weights, const Var& diag,
                    const Var& x) {
  detail::require_same_tape(weights, x);
  if (!shared) throw Error(ErrorKind::invalid_argument, "sym_spmm needs a sparsity pattern");
  const SparsePattern& pattern = *shared;
  const std::size_t e = pattern.u.size();
  const auto n = static_cast<Eigen::Index>(pattern.num_nodes);
  if (pattern.v.size() != e || weights.rows() != static_cast<Eigen::Index>(e) || weights.cols() != 1)
    throw Error(ErrorKind::shape_mismatch, "sym_spmm weights must be E x 1");
  if (x.rows() != n) throw Error(ErrorKind::shape_mismatch, "sym_spmm operand rows != N");
  if (diag.valid() && (diag.rows() != n || diag.cols() != 1))
    throw Error(ErrorKind::shape_mismatch, "sym_spmm diagonal must be N x 1");

  Tape& t = x.tape();
  const Matrix& xv = x.value();
  const Matrix& wv = weights.value();
  Matrix out = Matrix::Zero(n, xv.cols());
  for (std::size_t k = 0; k < e; ++k) {
    const auto a = static_cast<Eigen::Index>(pattern.u[k]);
    const auto b = static_cast<Eigen::Index>(pattern.v[k]);
    out.row(a) += wv(static_cast<Eigen::Index>(k), 0) * xv.row(b);
    out.row(b) += wv(static_cast<Eigen::Index>(k), 0) * xv.row(a);
  }
  if (diag.valid()) out += (xv.array().colwise() * diag.value().col(0).array()).matrix();

  const bool grad = detail::any_grad({weights, x}) || (diag.valid() && detail::any_grad({diag}));
  const std::size_t iw = weights.id(), ix = x.id();
  const bool has_diag = diag.valid();
  const std::size_t id = has_diag ? diag.id() : 0;
  return t.push(std::move(out), grad, [p = std::move(shared), iw, ix, id, has_diag](Tape& tape, const Matrix& g) {
    const Matrix& xv = tape.value(ix);
    const Matrix& wv = tape.value(iw);
    const std::size_t e = p->u.size();
    if (tape.requires_grad(ix)) {
      Matrix gx = Matrix::Zero(xv.rows(), xv.cols());
      for (std::size_t k = 0; k < e; ++k) {
        const auto a = static_cast<Eigen::Index>(p->u[k]);
        const auto b = static_cast<Eigen::Index>(p->v[k]);
        gx.row(b) += wv(static_cast<Eigen::Index>(k), 0) * g.row(a);
        gx.row(a) += wv(static_cast<Eigen::Index>(k), 0) * g.row(b);
      }
      if (has_diag) gx += (g.array().colwise() * tape.value(id).col(0).array()).matrix();
      tape.accumulate(ix, gx);
    }
    if (tape.requires_grad(iw)) {
      Matrix gw(static_cast<Eigen::Index>(e), 1);
      for (std::size_t k = 0; k < e; ++k) {
        const auto a = static_cast<Eigen::Index>(p->u[k]);
        const auto b = static_cast<Eigen::Index>(p->v[k]);
        gw(static_cast<Eigen::Index>(k), 0) = g.row(a).dot(xv.row(b)) + g.row(b).dot(xv.row(a));
      }
      tape.accumulate(iw, gw);
    }
    if (has_diag && tape.requires_grad(id))
      tape.accumulate(id, g.cwiseProduct(xv).rowwise().sum());
  });
}

}  // namespace hyperx::ad
