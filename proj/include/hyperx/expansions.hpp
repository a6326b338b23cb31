#pragma once

// Clique, star, and line expansion baselines.

#include <algorithm>
#include <cstddef>
#include <ostream>
#include <utility>
#include <vector>

#include "hyperx/hypergraph.hpp"
#include "hyperx/io.hpp"

namespace hyperx {

enum class CliqueWeight { unit, inverse_size };

/// A_c(i, j) = sum_e H(i, e) H(j, e) w_e, with w_e = 1 or 1/|e|.
inline WeightedGraph clique_expand(const Hypergraph& h, CliqueWeight rule = CliqueWeight::unit) {
  std::vector<WeightedEdge> contributions;
  for (const auto& e : h.hyperedges()) {
    const double w = rule == CliqueWeight::unit ? 1.0 : 1.0 / static_cast<double>(e.size());
    for (std::size_t a = 0; a < e.size(); ++a)
      for (std::size_t b = a + 1; b < e.size(); ++b) contributions.push_back({e[a], e[b], w});
  }
  return WeightedGraph::from_contributions(h.num_nodes(), std::move(contributions));
}

/// Bipartite incidence graph: left side = original nodes, right side = one
/// node per hyperedge.
struct BipartiteGraph {
  std::size_t num_left = 0;
  std::size_t num_right = 0;
  std::vector<std::pair<NodeId, std::size_t>> edges;  // (node, hyperedge)
};

inline BipartiteGraph star_expand(const Hypergraph& h) {
  BipartiteGraph g{h.num_nodes(), h.num_hyperedges(), {}};
  g.edges.reserve(h.num_incidences());
  for (std::size_t k = 0; k < h.num_hyperedges(); ++k)
    for (NodeId v : h.hyperedge(k)) g.edges.emplace_back(v, k);
  return g;
}

/// Rebuilds hyperedge membership from a star expansion.
inline std::vector<std::vector<NodeId>> hyperedges_from_star(const BipartiteGraph& g) {
  std::vector<std::vector<NodeId>> out(g.num_right);
  for (const auto& [v, k] : g.edges) out[k].push_back(v);
  return out;
}

/// Vertices are incidence pairs (v, e), enumerated hyperedge by hyperedge.
/// (v, e) ~ (u, f) iff v == u or e == f.
struct LineGraph {
  std::vector<std::pair<NodeId, std::size_t>> vertices;
  std::vector<std::pair<std::size_t, std::size_t>> edges;  // a < b

  std::vector<std::size_t> degrees() const {
    std::vector<std::size_t> deg(vertices.size(), 0);
    for (const auto& [a, b] : edges) {
      ++deg[a];
      ++deg[b];
    }
    return deg;
  }
};

inline LineGraph line_expand(const Hypergraph& h) {
  LineGraph g;
  g.vertices.reserve(h.num_incidences());
  std::vector<std::vector<std::size_t>> by_node(h.num_nodes());
  for (std::size_t k = 0; k < h.num_hyperedges(); ++k) {
    const std::size_t first = g.vertices.size();
    for (NodeId v : h.hyperedge(k)) {
      const std::size_t id = g.vertices.size();
      g.vertices.emplace_back(v, k);
      by_node[v].push_back(id);
      // shared hyperedge
      for (std::size_t other = first; other < id; ++other) g.edges.emplace_back(other, id);
    }
  }
  // shared node; a node never repeats within a hyperedge, so no pair is
  // counted twice
  for (const auto& ids : by_node)
    for (std::size_t a = 0; a < ids.size(); ++a)
      for (std::size_t b = a + 1; b < ids.size(); ++b) g.edges.emplace_back(ids[a], ids[b]);
  std::sort(g.edges.begin(), g.edges.end());
  return g;
}

inline void write_star_edge_list(std::ostream& out, const BipartiteGraph& g) {
  for (const auto& [v, k] : g.edges) out << v << "\th" << k << '\t' << io::format_real(1.0) << '\n';
}

inline void write_line_edge_list(std::ostream& out, const LineGraph& g) {
  for (const auto& [a, b] : g.edges) out << a << '\t' << b << '\t' << io::format_real(1.0) << '\n';
}

}  // namespace hyperx
