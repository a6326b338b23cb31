#pragma once

// Independent reference computations shared by the unit and acceptance
// suites. Nothing here touches the autodiff tape: the GCN and loss are dense
// Eigen evaluations so they can serve as a second route for gradient checks.

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <set>
#include <span>
#include <utility>
#include <vector>

#include "hyperx/hyperx.hpp"

namespace hyperx::oracle {

/// D^{-1/2} (A + I) D^{-1/2}.
inline Matrix normalized_adjacency(const Matrix& a) {
  Matrix s = a + Matrix::Identity(a.rows(), a.cols());
  const Eigen::VectorXd d = s.rowwise().sum();
  for (Eigen::Index i = 0; i < s.rows(); ++i)
    for (Eigen::Index j = 0; j < s.cols(); ++j) s(i, j) /= std::sqrt(d(i) * d(j));
  return s;
}

inline Matrix dense_gcn(const Matrix& a_hat, const Matrix& x, const Matrix& w1, const Matrix& w2) {
  const Matrix hidden = (a_hat * x * w1).cwiseMax(0.0);
  return a_hat * hidden * w2;
}

/// Mean of -log softmax(z_i)[y_i] over `nodes`, via log-sum-exp.
inline double cross_entropy(const Matrix& z, std::span<const int> labels, std::span<const std::size_t> nodes) {
  double total = 0.0;
  for (std::size_t i : nodes) {
    const auto row = z.row(static_cast<Eigen::Index>(i));
    const double m = row.maxCoeff();
    double s = 0.0;
    for (Eigen::Index c = 0; c < row.size(); ++c) s += std::exp(row(c) - m);
    total += (m + std::log(s)) - row(labels[i]);
  }
  return total / static_cast<double>(nodes.size());
}

/// Parameters of the full differentiable pipeline.
struct PipelineParams {
  ade::GsiNetParams gate;
  ade::KernelParams kernel;
  GcnParams gcn;
};

/// Loss of gate -> selection -> kernel -> normalization -> GCN -> CE,
/// evaluated with the plain expansion code and dense matrices.
inline double pipeline_loss(const Hypergraph& h, const PipelineParams& p, GcnMode mode, std::uint64_t seed,
                            std::uint64_t epoch, std::span<const std::size_t> nodes,
                            std::vector<ade::HyperedgeSelection>* selections = nullptr) {
  const ade::ExpansionResult r = ade::expand(h, p.gate, p.kernel, seed, epoch);
  if (selections) *selections = r.selections;
  const Matrix a = r.graph.to_dense();
  const Matrix a_hat = mode == GcnMode::normalized ? normalized_adjacency(a) : a;
  return cross_entropy(dense_gcn(a_hat, r.scaled, p.gcn.w1, p.gcn.w2), h.labels(), nodes);
}

inline bool same_selections(const std::vector<ade::HyperedgeSelection>& a,
                            const std::vector<ade::HyperedgeSelection>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t k = 0; k < a.size(); ++k)
    if (a[k].minus != b[k].minus || a[k].plus != b[k].plus || a[k].edges != b[k].edges) return false;
  return true;
}

/// |a - n| / max(|a|, |n|, floor); the floor keeps gradients that are zero
/// on both routes from dividing noise by noise.
inline double relative_error(double analytic, double numeric, double floor = 1e-6) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
}

/// Central finite difference of f with respect to every entry of *m.
inline Matrix central_difference(Matrix* m, const std::function<double()>& f, double step = 1e-5) {
  Matrix g(m->rows(), m->cols());
  for (Eigen::Index i = 0; i < m->rows(); ++i)
    for (Eigen::Index j = 0; j < m->cols(); ++j) {
      const double saved = (*m)(i, j);
      (*m)(i, j) = saved + step;
      const double up = f();
      (*m)(i, j) = saved - step;
      const double down = f();
      (*m)(i, j) = saved;
      g(i, j) = (up - down) / (2.0 * step);
    }
  return g;
}

/// Random attributed hypergraph for property runs: N in [2, max_nodes],
/// M in [1, max_hyperedges], |e| in [1, min(max_size, N)], features noise.
inline Hypergraph random_hypergraph(std::uint64_t seed, std::size_t max_nodes = 50, std::size_t max_hyperedges = 30,
                                    std::size_t max_size = 8, std::size_t max_dim = 8) {
  Engine rng = make_engine(seed, Stream::bench, {7});
  SynthConfig sc;
  sc.num_nodes = std::uniform_int_distribution<std::size_t>(2, max_nodes)(rng);
  sc.num_hyperedges = std::uniform_int_distribution<std::size_t>(1, max_hyperedges)(rng);
  sc.min_size = 1;
  sc.max_size = std::min(max_size, sc.num_nodes);
  sc.feature_dim = std::uniform_int_distribution<std::size_t>(1, max_dim)(rng);
  sc.num_classes = 2;
  sc.scheme = FeatureScheme::noise;
  sc.sigma = 1.0;
  sc.homophily = 0.0;
  sc.seed = seed;
  return synth_hypergraph(sc);
}

/// k-uniform hypergraph on N nodes with M hyperedges (duplicates allowed).
inline Hypergraph uniform_hypergraph(std::uint64_t seed, std::size_t n, std::size_t m, std::size_t k,
                                     std::size_t dim = 4) {
  SynthConfig sc;
  sc.num_nodes = n;
  sc.num_hyperedges = m;
  sc.min_size = k;
  sc.max_size = k;
  sc.feature_dim = dim;
  sc.scheme = FeatureScheme::noise;
  sc.sigma = 1.0;
  sc.homophily = 0.0;
  sc.seed = seed;
  return synth_hypergraph(sc);
}

/// Same structure, every row equal to `row`.
inline Hypergraph with_features(const Hypergraph& h, const Matrix& x) {
  return Hypergraph(h.num_nodes(), h.hyperedges(), x, h.labels(), h.num_classes());
}

inline std::set<std::pair<NodeId, NodeId>> edge_set(const WeightedGraph& g) {
  std::set<std::pair<NodeId, NodeId>> out;
  for (const auto& e : g.edges()) out.emplace(e.u, e.v);
  return out;
}

}  // namespace hyperx::oracle
