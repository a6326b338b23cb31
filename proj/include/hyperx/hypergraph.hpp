#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "hyperx/error.hpp"

namespace hyperx {

using NodeId = std::uint32_t;
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

/// Attributed hypergraph with node labels. Immutable once constructed.
class Hypergraph {
 public:
  Hypergraph() = default;

  /// Validates every invariant; throws hyperx::Error on violation.
  Hypergraph(std::size_t num_nodes, std::vector<std::vector<NodeId>> hyperedges, Matrix features,
             std::vector<int> labels, int num_classes)
      : num_nodes_(num_nodes),
        hyperedges_(std::move(hyperedges)),
        features_(std::move(features)),
        labels_(std::move(labels)),
        num_classes_(num_classes) {
    validate();
  }

  std::size_t num_nodes() const noexcept { return num_nodes_; }
  std::size_t num_hyperedges() const noexcept { return hyperedges_.size(); }
  std::size_t feature_dim() const noexcept { return static_cast<std::size_t>(features_.cols()); }
  int num_classes() const noexcept { return num_classes_; }

  const std::vector<std::vector<NodeId>>& hyperedges() const noexcept { return hyperedges_; }
  std::span<const NodeId> hyperedge(std::size_t e) const { return hyperedges_.at(e); }
  const Matrix& features() const noexcept { return features_; }
  const std::vector<int>& labels() const noexcept { return labels_; }

  /// Number of incidence pairs, E = sum_e |e|.
  std::size_t num_incidences() const noexcept {
    std::size_t total = 0;
    for (const auto& e : hyperedges_) total += e.size();
    return total;
  }

 private:
  void validate() const {
    std::vector<std::uint32_t> seen(num_nodes_, 0);
    for (std::size_t k = 0; k < hyperedges_.size(); ++k) {
      const auto& e = hyperedges_[k];
      if (e.empty()) throw Error(ErrorKind::empty_hyperedge, "hyperedge e" + std::to_string(k));
      for (NodeId v : e) {
        if (v >= num_nodes_)
          throw Error(ErrorKind::node_out_of_range,
                      "node " + std::to_string(v) + " in e" + std::to_string(k) +
                          " >= N=" + std::to_string(num_nodes_));
        // seen[] holds k+1 for nodes already visited in hyperedge k
        if (seen[v] == k + 1)
          throw Error(ErrorKind::duplicate_node,
                      "node " + std::to_string(v) + " repeated in e" + std::to_string(k));
        seen[v] = static_cast<std::uint32_t>(k + 1);
      }
    }
    if (static_cast<std::size_t>(features_.rows()) != num_nodes_)
      throw Error(ErrorKind::row_count_mismatch,
                  "feature rows " + std::to_string(features_.rows()) + " != N=" +
                      std::to_string(num_nodes_));
    if (labels_.size() != num_nodes_)
      throw Error(ErrorKind::row_count_mismatch,
                  "label count " + std::to_string(labels_.size()) + " != N=" +
                      std::to_string(num_nodes_));
    if (num_classes_ < 0) throw Error(ErrorKind::invalid_argument, "negative class count");
    for (std::size_t i = 0; i < labels_.size(); ++i)
      if (labels_[i] < 0 || labels_[i] >= num_classes_)
        throw Error(ErrorKind::label_out_of_range,
                    "label " + std::to_string(labels_[i]) + " at node " + std::to_string(i));
  }

  std::size_t num_nodes_ = 0;
  std::vector<std::vector<NodeId>> hyperedges_;
  Matrix features_;
  std::vector<int> labels_;
  int num_classes_ = 0;
};

struct DegreeStats {
  std::vector<std::size_t> node_degree;       // d(v)
  std::vector<std::size_t> hyperedge_degree;  // d(e)
  double mean_node_degree = 0.0;
  double mean_hyperedge_degree = 0.0;
  std::vector<NodeId> isolated;  // nodes with d(v) = 0
};

inline DegreeStats degree_stats(const Hypergraph& h) {
  DegreeStats s;
  s.node_degree.assign(h.num_nodes(), 0);
  s.hyperedge_degree.reserve(h.num_hyperedges());
  std::size_t incidences = 0;
  for (const auto& e : h.hyperedges()) {
    s.hyperedge_degree.push_back(e.size());
    incidences += e.size();
    for (NodeId v : e) ++s.node_degree[v];
  }
  for (std::size_t v = 0; v < h.num_nodes(); ++v)
    if (s.node_degree[v] == 0) s.isolated.push_back(static_cast<NodeId>(v));
  if (h.num_nodes() > 0)
    s.mean_node_degree = static_cast<double>(incidences) / static_cast<double>(h.num_nodes());
  if (h.num_hyperedges() > 0)
    s.mean_hyperedge_degree =
        static_cast<double>(incidences) / static_cast<double>(h.num_hyperedges());
  return s;
}

using IncidenceMatrix = Eigen::SparseMatrix<int, Eigen::ColMajor>;

/// N x M binary matrix with H(v, e) = 1 iff v is in e.
inline IncidenceMatrix incidence_matrix(const Hypergraph& h) {
  std::vector<Eigen::Triplet<int>> triplets;
  triplets.reserve(h.num_incidences());
  for (std::size_t e = 0; e < h.num_hyperedges(); ++e)
    for (NodeId v : h.hyperedge(e))
      triplets.emplace_back(static_cast<int>(v), static_cast<int>(e), 1);
  IncidenceMatrix m(static_cast<Eigen::Index>(h.num_nodes()),
                    static_cast<Eigen::Index>(h.num_hyperedges()));
  m.setFromTriplets(triplets.begin(), triplets.end());
  return m;
}

struct WeightedEdge {
  NodeId u;
  NodeId v;
  double w;

  friend bool operator==(const WeightedEdge&, const WeightedEdge&) = default;
};

/// Undirected weighted graph stored as a canonical edge list: u < v, sorted by
/// (u, v), no duplicates, all weights > 0.
class WeightedGraph {
 public:
  WeightedGraph() = default;
  explicit WeightedGraph(std::size_t num_nodes) : num_nodes_(num_nodes) {}

  /// Canonicalizes arbitrary (u, v, w) contributions: orients u < v, sums
  /// duplicates, drops self-loops and non-positive totals.
  static WeightedGraph from_contributions(std::size_t num_nodes,
                                          std::vector<WeightedEdge> contributions) {
    WeightedGraph g(num_nodes);
    for (auto& c : contributions) {
      if (c.u > c.v) std::swap(c.u, c.v);
      if (c.v >= num_nodes)
        throw Error(ErrorKind::node_out_of_range, "edge endpoint " + std::to_string(c.v));
    }
    // Bucket by u (counting sort) then order each bucket by v; linear in the
    // number of contributions up to the per-row sort.
    std::vector<std::size_t> offset(num_nodes + 1, 0);
    for (const auto& c : contributions) ++offset[c.u + 1];
    for (std::size_t i = 0; i < num_nodes; ++i) offset[i + 1] += offset[i];
    std::vector<WeightedEdge> bucketed(contributions.size());
    {
      std::vector<std::size_t> cursor(offset.begin(), offset.end() - 1);
      for (const auto& c : contributions) bucketed[cursor[c.u]++] = c;
    }
    g.edges_.reserve(contributions.size());
    for (std::size_t u = 0; u < num_nodes; ++u) {
      auto first = bucketed.begin() + static_cast<std::ptrdiff_t>(offset[u]);
      auto last = bucketed.begin() + static_cast<std::ptrdiff_t>(offset[u + 1]);
      // stable so that summation order of duplicates follows input order
      std::stable_sort(first, last,
                       [](const WeightedEdge& a, const WeightedEdge& b) { return a.v < b.v; });
      for (auto it = first; it != last;) {
        const NodeId v = it->v;
        double w = 0.0;
        for (; it != last && it->v == v; ++it) w += it->w;
        if (v != u && w > 0.0) g.edges_.push_back({static_cast<NodeId>(u), v, w});
      }
    }
    return g;
  }

  std::size_t num_nodes() const noexcept { return num_nodes_; }
  std::size_t num_edges() const noexcept { return edges_.size(); }
  const std::vector<WeightedEdge>& edges() const noexcept { return edges_; }

  /// A(u, v); 0 when absent or u == v.
  double weight(NodeId u, NodeId v) const {
    if (u == v) return 0.0;
    if (u > v) std::swap(u, v);
    auto it = std::lower_bound(edges_.begin(), edges_.end(), std::pair{u, v},
                               [](const WeightedEdge& e, const std::pair<NodeId, NodeId>& key) {
                                 return std::pair{e.u, e.v} < key;
                               });
    return (it != edges_.end() && it->u == u && it->v == v) ? it->w : 0.0;
  }

  bool has_edge(NodeId u, NodeId v) const { return weight(u, v) > 0.0; }

  std::vector<std::vector<NodeId>> adjacency_lists() const {
    std::vector<std::vector<NodeId>> adj(num_nodes_);
    for (const auto& e : edges_) {
      adj[e.u].push_back(e.v);
      adj[e.v].push_back(e.u);
    }
    return adj;
  }

  Matrix to_dense() const {
    Matrix a = Matrix::Zero(static_cast<Eigen::Index>(num_nodes_),
                            static_cast<Eigen::Index>(num_nodes_));
    for (const auto& e : edges_) {
      a(e.u, e.v) = e.w;
      a(e.v, e.u) = e.w;
    }
    return a;
  }

 private:
  std::size_t num_nodes_ = 0;
  std::vector<WeightedEdge> edges_;
};

}  // namespace hyperx
