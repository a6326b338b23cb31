#pragma once

// Adaptive expansion of an attributed hypergraph into a weighted graph.
//
// Pipeline: column-mean pooling -> gate network (sigmoid(W2 relu(W1 x_g)))
// -> per-dimension feature scaling -> scalar signal (row sums) -> one
// representative pair per hyperedge (max signal gap) with the remaining
// members as mediators -> kernel weights from original-feature distances and
// scaled-feature differences -> per-hyperedge normalization -> summed
// adjacency.
//
// Everything here is the plain, non-differentiable route. The trainer builds
// the same computation on an autodiff tape and is checked against this one.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "hyperx/error.hpp"
#include "hyperx/hypergraph.hpp"
#include "hyperx/random.hpp"

namespace hyperx::ade {

using RowVector = Eigen::RowVectorXd;

/// Lower bound on the kernel exponent; exp(-60) ~ 8.8e-27 stays normal.
inline constexpr double kExponentFloor = -60.0;
/// Floor on the per-hyperedge normalization denominator.
inline constexpr double kDenominatorFloor = 1e-30;
/// Bandwidth floor added after softplus.
inline constexpr double kThetaEpsilon = 1e-4;

inline std::size_t default_gate_hidden(std::size_t feature_dim) {
  return std::max<std::size_t>(16, (feature_dim + 3) / 4);
}

inline double softplus(double x) {
  return x > 30.0 ? x : std::log1p(std::exp(x));
}

inline double inverse_softplus(double y) {
  return y > 30.0 ? y : std::log(std::expm1(y));
}

/// Glorot-uniform matrix.
template <class Rng>
Matrix glorot_uniform(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
  std::uniform_real_distribution<double> dist(-limit, limit);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = dist(rng);
  return m;
}

/// Gate network weights: w1 is h x b, w2 is b x h.
struct GsiNetParams {
  Matrix w1;
  Matrix w2;

  std::size_t hidden() const noexcept { return static_cast<std::size_t>(w1.rows()); }
  std::size_t feature_dim() const noexcept { return static_cast<std::size_t>(w1.cols()); }

  static GsiNetParams zeros(std::size_t b, std::size_t h) {
    const auto bi = static_cast<Eigen::Index>(b), hi = static_cast<Eigen::Index>(h);
    return {Matrix::Zero(hi, bi), Matrix::Zero(bi, hi)};
  }

  static GsiNetParams glorot(std::size_t b, std::size_t h, std::uint64_t seed) {
    Engine rng = make_engine(seed, Stream::init, {0});
    const auto bi = static_cast<Eigen::Index>(b), hi = static_cast<Eigen::Index>(h);
    Matrix w1 = glorot_uniform(hi, bi, rng);
    Matrix w2 = glorot_uniform(bi, hi, rng);
    return {std::move(w1), std::move(w2)};
  }
};

/// Per-dimension kernel bandwidths, stored unconstrained; the effective
/// bandwidth is softplus(raw) + epsilon.
struct KernelParams {
  RowVector raw;
  double epsilon = kThetaEpsilon;

  std::size_t feature_dim() const noexcept { return static_cast<std::size_t>(raw.size()); }

  double theta(Eigen::Index d) const { return softplus(raw(d)) + epsilon; }

  RowVector thetas() const {
    RowVector t(raw.size());
    for (Eigen::Index d = 0; d < raw.size(); ++d) t(d) = theta(d);
    return t;
  }

  /// Effective bandwidth 1 in every dimension.
  static KernelParams unit(std::size_t b) { return from_thetas(RowVector::Ones(static_cast<Eigen::Index>(b))); }

  static KernelParams from_thetas(const RowVector& theta, double epsilon = kThetaEpsilon) {
    KernelParams k;
    k.epsilon = epsilon;
    k.raw.resize(theta.size());
    for (Eigen::Index d = 0; d < theta.size(); ++d) {
      if (!(theta(d) > epsilon))
        throw Error(ErrorKind::invalid_argument, "bandwidth must exceed the epsilon floor");
      k.raw(d) = inverse_softplus(theta(d) - epsilon);
    }
    return k;
  }
};

inline RowVector global_pool(const Matrix& x) {
  if (x.rows() == 0) throw Error(ErrorKind::invalid_argument, "global_pool needs at least one row");
  return x.colwise().mean();
}

inline double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

/// W_g = sigmoid(W2 relu(W1 x_g^T)), returned as a 1 x b row.
inline RowVector si_net_forward(const RowVector& pooled, const GsiNetParams& p) {
  if (p.w1.cols() != pooled.size() || p.w2.rows() != pooled.size() || p.w2.cols() != p.w1.rows())
    throw Error(ErrorKind::shape_mismatch, "gate network shapes do not compose with pooled features");
  const Eigen::VectorXd hidden = (p.w1 * pooled.transpose()).cwiseMax(0.0);
  const Eigen::VectorXd logits = p.w2 * hidden;
  RowVector gate(logits.size());
  for (Eigen::Index d = 0; d < logits.size(); ++d) gate(d) = sigmoid(logits(d));
  return gate;
}

inline Matrix scale_features(const Matrix& x, const RowVector& gate) {
  if (gate.size() != x.cols()) throw Error(ErrorKind::shape_mismatch, "gate length != feature dim");
  return x.array().rowwise() * gate.array();
}

inline Vector compute_signal(const Matrix& scaled) { return scaled.rowwise().sum(); }

struct HyperedgeSelection {
  std::size_t hyperedge = 0;
  NodeId minus = 0;  // smaller signal
  NodeId plus = 0;   // larger signal
  std::vector<NodeId> mediators;
  std::vector<std::pair<NodeId, NodeId>> edges;  // pair edge first, then (m, minus), (m, plus)

  bool empty() const noexcept { return edges.empty(); }
};

/// Builds the mediator topology for a fixed representative pair.
inline HyperedgeSelection make_selection(std::size_t hyperedge, std::span<const NodeId> members,
                                         NodeId minus, NodeId plus) {
  HyperedgeSelection s;
  s.hyperedge = hyperedge;
  if (members.size() < 2) {
    s.minus = s.plus = members.empty() ? 0 : members[0];
    return s;
  }
  s.minus = minus;
  s.plus = plus;
  s.edges.reserve(2 * members.size() - 3);
  s.edges.emplace_back(minus, plus);
  for (NodeId v : members) {
    if (v == minus || v == plus) continue;
    s.mediators.push_back(v);
    s.edges.emplace_back(v, minus);
    s.edges.emplace_back(v, plus);
  }
  return s;
}

/// Picks the pair maximizing |S_i - S_j| inside the hyperedge. Among tied
/// maximizing pairs one is drawn uniformly from `rng`, which is only touched
/// when a tie exists.
template <class Rng>
HyperedgeSelection select_pair(std::size_t hyperedge, std::span<const NodeId> members,
                               const Vector& signal, Rng& rng) {
  if (members.size() < 2) return make_selection(hyperedge, members, 0, 0);

  double lo = signal(members[0]), hi = lo;
  for (NodeId v : members) {
    lo = std::min(lo, signal(v));
    hi = std::max(hi, signal(v));
  }

  if (hi > lo) {
    std::vector<NodeId> lows, highs;
    for (NodeId v : members) {
      if (signal(v) == lo) lows.push_back(v);
      if (signal(v) == hi) highs.push_back(v);
    }
    std::size_t pick = 0;
    const std::size_t ties = lows.size() * highs.size();
    if (ties > 1) pick = std::uniform_int_distribution<std::size_t>(0, ties - 1)(rng);
    return make_selection(hyperedge, members, lows[pick / highs.size()], highs[pick % highs.size()]);
  }

  // Constant signal: every pair attains the (zero) maximum gap.
  const std::size_t n = members.size();
  std::size_t pick = std::uniform_int_distribution<std::size_t>(0, n * (n - 1) / 2 - 1)(rng);
  std::size_t a = 0;
  while (pick >= n - 1 - a) {
    pick -= n - 1 - a;
    ++a;
  }
  const std::size_t b = a + 1 + pick;
  const NodeId u = members[a], v = members[b];
  return make_selection(hyperedge, members, std::min(u, v), std::max(u, v));
}

inline SplitMix64 tie_break_stream(std::uint64_t seed, std::uint64_t epoch, std::size_t hyperedge) {
  return SplitMix64(derive_seed(seed, Stream::tie_break, {epoch, hyperedge}));
}

inline std::vector<HyperedgeSelection> select_pairs(const Hypergraph& h, const Vector& signal,
                                                    std::uint64_t seed, std::uint64_t epoch = 0) {
  std::vector<HyperedgeSelection> out;
  out.reserve(h.num_hyperedges());
  for (std::size_t k = 0; k < h.num_hyperedges(); ++k) {
    SplitMix64 rng = tie_break_stream(seed, epoch, k);
    out.push_back(select_pair(k, h.hyperedge(k), signal, rng));
  }
  return out;
}

/// Memoized Euclidean distances between rows of the original feature matrix,
/// computed only for pairs that are asked for.
///
/// Storage is an open-addressing table keyed by the packed pair (min << 32 |
/// max). Key 0 would be the pair (0, 0), which is never stored, so it marks
/// empty slots. Load factor stays at or below 1/2.
class DistanceCache {
 public:
  explicit DistanceCache(const Matrix& features) : x_(&features) { rehash(64); }

  double operator()(NodeId i, NodeId j) {
    if (i == j) return 0.0;
    const std::uint64_t key = i < j ? (std::uint64_t{i} << 32) | j : (std::uint64_t{j} << 32) | i;
    Slot* slot = find(key);
    if (slot->key == key) return slot->value;
    if (2 * (size_ + 1) > slots_.size()) {
      rehash(2 * slots_.size());
      slot = find(key);
    }
    slot->key = key;
    slot->value = (x_->row(i) - x_->row(j)).norm();
    ++size_;
    return slot->value;
  }

  /// Pre-sizes the table for `pairs` entries.
  void reserve(std::size_t pairs) {
    std::size_t cap = slots_.size();
    while (cap < 2 * pairs) cap *= 2;
    if (cap != slots_.size()) rehash(cap);
  }

  std::size_t size() const noexcept { return size_; }
  const Matrix& features() const noexcept { return *x_; }

 private:
  struct Slot {
    std::uint64_t key = 0;
    double value = 0.0;
  };

  Slot* find(std::uint64_t key) {
    const std::size_t mask = slots_.size() - 1;
    std::size_t k = static_cast<std::size_t>(mix64(key)) & mask;
    while (slots_[k].key != 0 && slots_[k].key != key) k = (k + 1) & mask;
    return &slots_[k];
  }

  void rehash(std::size_t capacity) {
    std::vector<Slot> old = std::move(slots_);
    slots_.assign(capacity, Slot{});
    for (const Slot& s : old)
      if (s.key != 0) *find(s.key) = s;
  }

  const Matrix* x_;
  std::vector<Slot> slots_;
  std::size_t size_ = 0;
};

inline double pair_distance(NodeId i, NodeId j, DistanceCache& cache) { return cache(i, j); }

/// exp(-(1/b) sum_d U (Xa_id - Xa_jd)^2 / theta_d^2), exponent floored at
/// kExponentFloor.
inline double kernel_weight(const Matrix& scaled, double distance, const RowVector& theta,
                            NodeId i, NodeId j) {
  const Eigen::Index b = scaled.cols();
  double acc = 0.0;
  for (Eigen::Index d = 0; d < b; ++d) {
    const double diff = scaled(i, d) - scaled(j, d);
    acc += distance * diff * diff / (theta(d) * theta(d));
  }
  const double exponent = b > 0 ? -acc / static_cast<double>(b) : 0.0;
  return std::exp(std::max(exponent, kExponentFloor));
}

inline std::vector<double> normalize_weights(std::span<const double> raw) {
  double total = 0.0;
  for (double w : raw) total += w;
  total = std::max(total, kDenominatorFloor);
  std::vector<double> out(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) out[i] = raw[i] / total;
  return out;
}

/// A(i, j) = sum over hyperedges whose edge set contains {i, j} of that
/// hyperedge's normalized weight.
inline WeightedGraph assemble_adjacency(std::size_t num_nodes,
                                        std::span<const HyperedgeSelection> selections,
                                        std::span<const std::vector<double>> weights) {
  if (selections.size() != weights.size())
    throw Error(ErrorKind::shape_mismatch, "one weight list per selection required");
  std::vector<WeightedEdge> contributions;
  for (std::size_t s = 0; s < selections.size(); ++s) {
    const auto& edges = selections[s].edges;
    if (edges.size() != weights[s].size())
      throw Error(ErrorKind::shape_mismatch, "weight count != edge count for a hyperedge");
    for (std::size_t k = 0; k < edges.size(); ++k)
      contributions.push_back({edges[k].first, edges[k].second, weights[s][k]});
  }
  return WeightedGraph::from_contributions(num_nodes, std::move(contributions));
}

struct ExpansionResult {
  WeightedGraph graph;
  RowVector gate;
  Matrix scaled;
  Vector signal;
  std::vector<HyperedgeSelection> selections;
  std::vector<std::vector<double>> raw_weights;  // per selection, aligned with edges
  std::vector<std::vector<double>> weights;      // normalized
};

/// Full adaptive expansion for one round. `epoch` selects the tie-break
/// substream; pass a cache to reuse distances across rounds.
inline ExpansionResult expand(const Hypergraph& h, const GsiNetParams& gate_params,
                              const KernelParams& kernel, std::uint64_t seed,
                              std::uint64_t epoch = 0, DistanceCache* cache = nullptr) {
  if (kernel.feature_dim() != h.feature_dim())
    throw Error(ErrorKind::shape_mismatch, "kernel bandwidth length != feature dim");
  ExpansionResult r;
  r.gate = si_net_forward(global_pool(h.features()), gate_params);
  r.scaled = scale_features(h.features(), r.gate);
  r.signal = compute_signal(r.scaled);
  r.selections = select_pairs(h, r.signal, seed, epoch);

  DistanceCache local(h.features());
  DistanceCache& distances = cache ? *cache : local;
  std::size_t total_edges = 0;
  for (const auto& s : r.selections) total_edges += s.edges.size();
  distances.reserve(distances.size() + total_edges);
  const RowVector theta = kernel.thetas();
  r.raw_weights.reserve(r.selections.size());
  r.weights.reserve(r.selections.size());
  for (const auto& s : r.selections) {
    std::vector<double> raw;
    raw.reserve(s.edges.size());
    for (const auto& [i, j] : s.edges) raw.push_back(kernel_weight(r.scaled, distances(i, j), theta, i, j));
    r.weights.push_back(raw.empty() ? std::vector<double>{} : normalize_weights(raw));
    r.raw_weights.push_back(std::move(raw));
  }
  r.graph = assemble_adjacency(h.num_nodes(), r.selections, r.weights);
  return r;
}

/// Fixed-weight mediator expansion driven by a random projection S = X xi,
/// xi ~ N(0, I); every edge of hyperedge e gets weight 1/(2|e| - 3).
inline ExpansionResult expand_hypergcn_fixed(const Hypergraph& h, std::uint64_t seed) {
  ExpansionResult r;
  Engine rng = make_engine(seed, Stream::hypergcn_signal);
  std::normal_distribution<double> unit(0.0, 1.0);
  Eigen::VectorXd xi(static_cast<Eigen::Index>(h.feature_dim()));
  for (Eigen::Index d = 0; d < xi.size(); ++d) xi(d) = unit(rng);
  r.signal = h.features() * xi;
  r.selections = select_pairs(h, r.signal, seed, 0);
  for (const auto& s : r.selections) {
    const double w = s.edges.empty() ? 0.0 : 1.0 / static_cast<double>(s.edges.size());
    r.raw_weights.emplace_back(s.edges.size(), 1.0);
    r.weights.emplace_back(s.edges.size(), w);
  }
  r.graph = assemble_adjacency(h.num_nodes(), r.selections, r.weights);
  return r;
}

/// Structure-only expansion from externally fixed representative pairs with
/// uniform in-hyperedge weights.
inline WeightedGraph expand_with_selections(std::size_t num_nodes,
                                            std::span<const HyperedgeSelection> selections) {
  std::vector<std::vector<double>> weights;
  weights.reserve(selections.size());
  for (const auto& s : selections)
    weights.emplace_back(s.edges.size(), s.edges.empty() ? 0.0 : 1.0 / static_cast<double>(s.edges.size()));
  return assemble_adjacency(num_nodes, selections, weights);
}

}  // namespace hyperx::ade
