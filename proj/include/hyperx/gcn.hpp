#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <memory>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "hyperx/ade.hpp"
#include "hyperx/autodiff.hpp"
#include "hyperx/error.hpp"
#include "hyperx/hypergraph.hpp"
#include "hyperx/random.hpp"

namespace hyperx {

/// paper_literal propagates with the raw adjacency A; normalized uses
/// D^{-1/2} (A + I) D^{-1/2} with D the degrees of A + I.
enum class GcnMode { normalized, paper_literal };

inline const char* to_string(GcnMode mode) {
  return mode == GcnMode::normalized ? "normalized" : "paper-literal";
}

/// Two-layer GCN weights: w1 is b x hidden, w2 is hidden x C.
struct GcnParams {
  Matrix w1;
  Matrix w2;

  static GcnParams glorot(std::size_t in_dim, std::size_t hidden, std::size_t classes, std::uint64_t seed) {
    Engine rng = make_engine(seed, Stream::init, {1});
    GcnParams p;
    p.w1 = ade::glorot_uniform(static_cast<Eigen::Index>(in_dim), static_cast<Eigen::Index>(hidden), rng);
    p.w2 = ade::glorot_uniform(static_cast<Eigen::Index>(hidden), static_cast<Eigen::Index>(classes), rng);
    return p;
  }
};

/// Adjacency operator on a tape: Y = A_hat X.
struct Propagation {
  std::shared_ptr<const ad::SparsePattern> pattern;
  ad::Var weights;  // E x 1, one entry per pattern edge
  ad::Var diag;     // N x 1, or invalid for a zero diagonal

  ad::Var operator()(const ad::Var& x) const { return ad::sym_spmm(pattern, weights, diag, x); }
};

/// Builds the propagation operator from raw (possibly repeated) edge weights.
inline Propagation make_propagation(std::shared_ptr<const ad::SparsePattern> pattern, const ad::Var& edge_weights,
                                    GcnMode mode) {
  if (mode == GcnMode::paper_literal) return {std::move(pattern), edge_weights, ad::Var{}};
  const std::size_t n = pattern->num_nodes;
  ad::Var degree = ad::add_scalar(ad::add(ad::segment_sum(edge_weights, pattern->u, n),
                                          ad::segment_sum(edge_weights, pattern->v, n)),
                                  1.0);
  ad::Var inv_sqrt = ad::pow(degree, -0.5);
  ad::Var w = ad::mul(ad::mul(edge_weights, ad::gather_rows(inv_sqrt, pattern->u)),
                      ad::gather_rows(inv_sqrt, pattern->v));
  ad::Var diag = ad::mul(inv_sqrt, inv_sqrt);
  return {std::move(pattern), w, diag};
}

/// Z = A relu(A X W1) W2, with dropout applied to the hidden layer when a
/// mask (entries 0 or 1/(1-p)) is supplied.
inline ad::Var gcn_forward(const Propagation& propagate, const ad::Var& features, const ad::Var& w1,
                           const ad::Var& w2, const Matrix* dropout_mask = nullptr) {
  if (features.cols() != w1.rows() || w1.cols() != w2.rows())
    throw Error(ErrorKind::shape_mismatch, "GCN weight shapes do not compose with the features");
  ad::Var hidden = ad::relu(propagate(ad::matmul(features, w1)));
  if (dropout_mask) hidden = ad::mul(hidden, features.tape().constant(*dropout_mask));
  return propagate(ad::matmul(hidden, w2));
}

inline std::shared_ptr<const ad::SparsePattern> pattern_from_graph(const WeightedGraph& g) {
  auto p = std::make_shared<ad::SparsePattern>();
  p->num_nodes = g.num_nodes();
  p->u.reserve(g.num_edges());
  p->v.reserve(g.num_edges());
  for (const auto& e : g.edges()) {
    p->u.push_back(e.u);
    p->v.push_back(e.v);
  }
  return p;
}

/// Inference-only forward on a fixed graph.
inline Matrix gcn_forward(const WeightedGraph& graph, const Matrix& features, const GcnParams& params,
                          GcnMode mode) {
  if (static_cast<std::size_t>(features.rows()) != graph.num_nodes())
    throw Error(ErrorKind::shape_mismatch, "feature rows != graph nodes");
  ad::Tape tape;
  Matrix w(static_cast<Eigen::Index>(graph.num_edges()), 1);
  for (std::size_t k = 0; k < graph.num_edges(); ++k) w(static_cast<Eigen::Index>(k), 0) = graph.edges()[k].w;
  const auto prop = make_propagation(pattern_from_graph(graph), tape.constant(std::move(w)), mode);
  return gcn_forward(prop, tape.constant(features), tape.constant(params.w1), tape.constant(params.w2)).value();
}

/// Mean negative log-likelihood of the true class over `nodes`.
inline ad::Var cross_entropy(const ad::Var& logits, std::span<const int> labels, std::span<const std::size_t> nodes) {
  if (nodes.empty()) throw Error(ErrorKind::invalid_argument, "cross-entropy over an empty node set");
  std::vector<int> picked;
  picked.reserve(nodes.size());
  for (std::size_t i : nodes) picked.push_back(labels[i]);
  return ad::neg(ad::pick_mean(ad::log_softmax(logits), nodes, picked));
}

inline double cross_entropy(const Matrix& logits, std::span<const int> labels, std::span<const std::size_t> nodes) {
  ad::Tape tape;
  return cross_entropy(tape.constant(logits), labels, nodes).scalar();
}

inline double accuracy(const Matrix& logits, std::span<const int> labels, std::span<const std::size_t> nodes) {
  if (nodes.empty()) return 0.0;
  std::size_t correct = 0;
  for (std::size_t i : nodes) {
    Eigen::Index arg = 0;
    logits.row(static_cast<Eigen::Index>(i)).maxCoeff(&arg);
    if (arg == labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(nodes.size());
}

struct SplitMask {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
  std::vector<std::size_t> test;
};

/// Uniform random partition; train and validation sizes are floor(p * N),
/// the test set takes the remainder.
inline SplitMask make_splits(std::size_t n, std::array<double, 3> proportions, std::uint64_t seed) {
  const double total = proportions[0] + proportions[1] + proportions[2];
  if (std::abs(total - 1.0) > 1e-9)
    throw Error(ErrorKind::invalid_argument, "split proportions must sum to 1");
  for (double p : proportions)
    if (p < 0.0) throw Error(ErrorKind::invalid_argument, "negative split proportion");
  const auto n_train = static_cast<std::size_t>(std::floor(proportions[0] * static_cast<double>(n) + 1e-9));
  const auto n_val = static_cast<std::size_t>(std::floor(proportions[1] * static_cast<double>(n) + 1e-9));
  if (n_train == 0 || n_val == 0 || n_train + n_val >= n)
    throw Error(ErrorKind::invalid_argument,
                "split proportions leave an empty set for N=" + std::to_string(n));
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Engine rng = make_engine(seed, Stream::splits);
  std::shuffle(perm.begin(), perm.end(), rng);
  SplitMask s;
  s.train.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_train));
  s.validation.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_train),
                      perm.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
  s.test.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), perm.end());
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.validation.begin(), s.validation.end());
  std::sort(s.test.begin(), s.test.end());
  return s;
}

}  // namespace hyperx
