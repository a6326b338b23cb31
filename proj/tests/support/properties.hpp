#pragma once

// Invariant checks for one adaptive expansion. Each returns the list of
// violated properties (empty on success) so callers can aggregate them.

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"

namespace hyperx::oracle {

struct ExpansionCase {
  Hypergraph h;
  ade::GsiNetParams gate;
  ade::KernelParams kernel;
  std::uint64_t seed = 0;
};

/// Random gate weights and bandwidths in [0.3, 3] for `h`.
inline ExpansionCase random_case(Hypergraph h, std::uint64_t seed) {
  ExpansionCase c{std::move(h), {}, {}, seed};
  const std::size_t b = c.h.feature_dim();
  c.gate = ade::GsiNetParams::glorot(b, ade::default_gate_hidden(b), seed);
  Engine rng = make_engine(seed, Stream::bench, {11});
  std::uniform_real_distribution<double> theta(0.3, 3.0);
  ade::RowVector t(static_cast<Eigen::Index>(b));
  for (Eigen::Index d = 0; d < t.size(); ++d) t(d) = theta(rng);
  c.kernel = ade::KernelParams::from_thetas(t);
  return c;
}

inline std::vector<std::string> check_expansion(const ExpansionCase& c) {
  std::vector<std::string> fail;
  auto report = [&](const std::string& what) {
    if (fail.size() < 20) fail.push_back(what);
  };
  const Hypergraph& h = c.h;
  const ade::ExpansionResult r = ade::expand(h, c.gate, c.kernel, c.seed);
  const ade::RowVector theta = c.kernel.thetas();

  // Selection structure and weight normalization.
  std::size_t expected_edges = 0, actual_edges = 0;
  for (std::size_t k = 0; k < h.num_hyperedges(); ++k) {
    const auto e = h.hyperedge(k);
    const auto& s = r.selections[k];
    const auto& w = r.weights[k];
    actual_edges += s.edges.size();
    if (e.size() == 1) {
      if (!s.edges.empty()) report("singleton hyperedge produced edges");
      continue;
    }
    expected_edges += 2 * e.size() - 3;
    if (s.edges.size() != 2 * e.size() - 3) report("|E_e| != 2|e|-3 at e" + std::to_string(k));
    if (s.minus == s.plus) report("degenerate pair at e" + std::to_string(k));
    if (r.signal(s.plus) < r.signal(s.minus)) report("plus carries the smaller signal");
    double lo = r.signal(e[0]), hi = lo;
    for (NodeId v : e) {
      lo = std::min(lo, r.signal(v));
      hi = std::max(hi, r.signal(v));
    }
    if (r.signal(s.plus) - r.signal(s.minus) != hi - lo) report("pair does not maximize the gap");
    std::map<NodeId, int> appearances;
    for (const auto& [i, j] : s.edges) {
      ++appearances[i];
      ++appearances[j];
    }
    for (NodeId m : s.mediators)
      if (appearances[m] != 2) report("mediator not in exactly two edges");
    if (s.edges.front() != std::make_pair(s.minus, s.plus)) report("pair edge missing");
    double sum = 0.0;
    for (double x : w) sum += x;
    if (std::abs(sum - 1.0) > 1e-12) report("weights of e" + std::to_string(k) + " sum to " + std::to_string(sum));
  }
  if (expected_edges != actual_edges) report("edge-count identity");

  // Kernel symmetry, range, and the dimension-wise monotonicity order.
  struct Evaluated {
    std::vector<double> terms;  // U * (Xa_i - Xa_j)^2 per dimension
    double w;
  };
  std::vector<Evaluated> evaluated;
  for (std::size_t k = 0; k < r.selections.size(); ++k) {
    const auto& s = r.selections[k];
    for (std::size_t q = 0; q < s.edges.size(); ++q) {
      const auto [i, j] = s.edges[q];
      const double u = (h.features().row(i) - h.features().row(j)).norm();
      const double u_back = (h.features().row(j) - h.features().row(i)).norm();
      if (u != u_back) report("distance asymmetric");
      const double w = r.raw_weights[k][q];
      if (!(w > 0.0 && w <= 1.0)) report("kernel value out of (0,1]");
      if (ade::kernel_weight(r.scaled, u, theta, j, i) != w) report("kernel asymmetric");
      Evaluated ev{{}, w};
      for (Eigen::Index d = 0; d < r.scaled.cols(); ++d) {
        const double diff = r.scaled(i, d) - r.scaled(j, d);
        ev.terms.push_back(u * diff * diff);
      }
      evaluated.push_back(std::move(ev));
    }
  }
  for (const auto& p : evaluated)
    for (const auto& q : evaluated) {
      bool dominated = true;
      for (std::size_t d = 0; d < p.terms.size() && dominated; ++d) dominated = p.terms[d] <= q.terms[d];
      if (dominated && p.w < q.w) report("monotonicity violated");
    }

  // Assembled adjacency: symmetric, zero diagonal, equal to the per-hyperedge sum.
  const Matrix a = r.graph.to_dense();
  if (!(a - a.transpose()).isZero(0.0)) report("adjacency not symmetric");
  if (!a.diagonal().isZero(0.0)) report("adjacency has a nonzero diagonal");
  Matrix ref = Matrix::Zero(a.rows(), a.cols());
  for (std::size_t k = 0; k < r.selections.size(); ++k)
    for (std::size_t q = 0; q < r.selections[k].edges.size(); ++q) {
      const auto [i, j] = r.selections[k].edges[q];
      ref(i, j) += r.weights[k][q];
      ref(j, i) += r.weights[k][q];
    }
  if ((a - ref).cwiseAbs().maxCoeff() > 1e-12) report("adjacency differs from per-hyperedge sum");
  for (double x : a.reshaped())
    if (!std::isfinite(x)) report("non-finite adjacency entry");
  return fail;
}

/// Uniform features: every in-hyperedge weight equals 1/(2|e|-3). Returns the
/// largest deviation seen.
inline double uniform_feature_deviation(const Hypergraph& h, std::uint64_t seed, double value = 1.0) {
  const Matrix x = Matrix::Constant(h.features().rows(), h.features().cols(), value);
  const ExpansionCase c = random_case(with_features(h, x), seed);
  const ade::ExpansionResult r = ade::expand(c.h, c.gate, c.kernel, c.seed);
  double worst = 0.0;
  for (std::size_t k = 0; k < r.selections.size(); ++k) {
    const std::size_t size = h.hyperedge(k).size();
    if (size < 2) continue;
    const double expected = 1.0 / static_cast<double>(2 * size - 3);
    for (double w : r.weights[k]) worst = std::max(worst, std::abs(w - expected));
  }
  return worst;
}

}  // namespace hyperx::oracle
