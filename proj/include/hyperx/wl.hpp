#pragma once

// Color refinement on graphs (1-WL) and hypergraphs (1-GWL), plus the
// randomized harness relating the two through the adaptive expansion.
//
// Colors are produced by a ColorCompressor: a dictionary from signature to a
// fresh integer. Two structures are only comparable when refined against the
// same compressor, which is why every refine call takes one.

#include <algorithm>
#include <cstdint>
#include <map>
#include <random>
#include <span>
#include <vector>

#include "hyperx/ade.hpp"
#include "hyperx/error.hpp"
#include "hyperx/hypergraph.hpp"
#include "hyperx/parallel.hpp"
#include "hyperx/random.hpp"
#include "hyperx/synth.hpp"

namespace hyperx::wl {

using Color = std::int64_t;

/// Injective map from signatures to dense color ids.
class ColorCompressor {
 public:
  Color operator()(const std::vector<Color>& signature) {
    auto [it, inserted] = table_.try_emplace(signature, static_cast<Color>(table_.size()));
    return it->second;
  }
  std::size_t size() const noexcept { return table_.size(); }

 private:
  std::map<std::vector<Color>, Color> table_;
};

/// nodes[t] holds node colors after t rounds; hyperedges[t] is filled only
/// by the hypergraph refinement (hyperedges[0] is the uniform initial color).
struct ColorHistory {
  std::vector<std::vector<Color>> nodes;
  std::vector<std::vector<Color>> hyperedges;

  std::size_t iterations() const noexcept { return nodes.empty() ? 0 : nodes.size() - 1; }
};

// Signature tags keep node, hyperedge, and initial signatures disjoint.
inline constexpr Color kInitialTag = -1;
inline constexpr Color kGraphTag = -2;
inline constexpr Color kHyperedgeTag = -3;
inline constexpr Color kHypernodeTag = -4;

inline std::size_t distinct_colors(const std::vector<Color>& colors) {
  std::vector<Color> c = colors;
  std::sort(c.begin(), c.end());
  return static_cast<std::size_t>(std::unique(c.begin(), c.end()) - c.begin());
}

/// 1-WL on the unweighted structure of `g`. With `stop_when_stable` the
/// history ends at the first round that splits no color class.
inline ColorHistory wl_refine(const WeightedGraph& g, std::size_t iterations, ColorCompressor& compress,
                              bool stop_when_stable = false) {
  const auto adj = g.adjacency_lists();
  ColorHistory hist;
  hist.nodes.emplace_back(g.num_nodes(), compress({kInitialTag}));
  for (std::size_t t = 1; t <= iterations; ++t) {
    const auto& prev = hist.nodes.back();
    std::vector<Color> next(g.num_nodes());
    std::vector<Color> sig;
    for (std::size_t i = 0; i < g.num_nodes(); ++i) {
      sig.assign({kGraphTag, static_cast<Color>(t), prev[i]});
      const std::size_t head = sig.size();
      for (NodeId j : adj[i]) sig.push_back(prev[j]);
      std::sort(sig.begin() + static_cast<std::ptrdiff_t>(head), sig.end());
      next[i] = compress(sig);
    }
    const bool stable = distinct_colors(next) == distinct_colors(prev);
    hist.nodes.push_back(std::move(next));
    if (stop_when_stable && stable) break;
  }
  return hist;
}

inline ColorHistory wl_refine(const WeightedGraph& g, std::size_t iterations) {
  ColorCompressor compress;
  return wl_refine(g, iterations, compress, true);
}

/// 1-GWL: each round recolors hyperedges from the multiset of member colors,
/// then nodes from (own color, multiset of incident hyperedge colors). Node
/// and hyperedge colors start identical.
inline ColorHistory gwl_refine(const Hypergraph& h, std::size_t iterations, ColorCompressor& compress,
                               bool stop_when_stable = false) {
  const std::size_t n = h.num_nodes(), m = h.num_hyperedges();
  std::vector<std::vector<std::size_t>> incident(n);
  for (std::size_t k = 0; k < m; ++k)
    for (NodeId v : h.hyperedge(k)) incident[v].push_back(k);

  ColorHistory hist;
  const Color initial = compress({kInitialTag});
  hist.nodes.emplace_back(n, initial);
  hist.hyperedges.emplace_back(m, initial);
  std::vector<Color> sig;
  for (std::size_t t = 1; t <= iterations; ++t) {
    const auto& prev = hist.nodes.back();
    std::vector<Color> edge_colors(m);
    for (std::size_t k = 0; k < m; ++k) {
      sig.assign({kHyperedgeTag, static_cast<Color>(t)});
      for (NodeId v : h.hyperedge(k)) sig.push_back(prev[v]);
      std::sort(sig.begin() + 2, sig.end());
      edge_colors[k] = compress(sig);
    }
    std::vector<Color> next(n);
    for (std::size_t v = 0; v < n; ++v) {
      sig.assign({kHypernodeTag, static_cast<Color>(t), prev[v]});
      for (std::size_t k : incident[v]) sig.push_back(edge_colors[k]);
      std::sort(sig.begin() + 3, sig.end());
      next[v] = compress(sig);
    }
    const bool stable = distinct_colors(next) == distinct_colors(prev);
    hist.nodes.push_back(std::move(next));
    hist.hyperedges.push_back(std::move(edge_colors));
    if (stop_when_stable && stable) break;
  }
  return hist;
}

inline ColorHistory gwl_refine(const Hypergraph& h, std::size_t iterations) {
  ColorCompressor compress;
  return gwl_refine(h, iterations, compress, true);
}

/// True iff the node-color multisets differ at some round. Both histories
/// must come from the same compressor and have the same length.
inline bool distinguish(const ColorHistory& a, const ColorHistory& b) {
  if (a.nodes.size() != b.nodes.size())
    throw Error(ErrorKind::invalid_argument, "color histories have different iteration counts");
  for (std::size_t t = 0; t < a.nodes.size(); ++t) {
    std::vector<Color> x = a.nodes[t], y = b.nodes[t];
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    if (x != y) return true;
  }
  return false;
}

/// Relabels node v as perm[v]; hyperedge order is kept, members re-sorted.
inline Hypergraph permute(const Hypergraph& h, std::span<const NodeId> perm) {
  const std::size_t n = h.num_nodes();
  if (perm.size() != n) throw Error(ErrorKind::invalid_argument, "permutation length != N");
  std::vector<bool> hit(n, false);
  for (NodeId p : perm) {
    if (p >= n || hit[p]) throw Error(ErrorKind::invalid_argument, "not a permutation");
    hit[p] = true;
  }
  std::vector<std::vector<NodeId>> edges;
  edges.reserve(h.num_hyperedges());
  for (const auto& e : h.hyperedges()) {
    std::vector<NodeId> mapped;
    mapped.reserve(e.size());
    for (NodeId v : e) mapped.push_back(perm[v]);
    std::sort(mapped.begin(), mapped.end());
    edges.push_back(std::move(mapped));
  }
  Matrix x(h.features().rows(), h.features().cols());
  std::vector<int> labels(n);
  for (std::size_t v = 0; v < n; ++v) {
    x.row(perm[v]) = h.features().row(static_cast<Eigen::Index>(v));
    labels[perm[v]] = h.labels()[v];
  }
  return Hypergraph(n, std::move(edges), std::move(x), std::move(labels), h.num_classes());
}

inline std::vector<NodeId> random_permutation(std::size_t n, Engine& rng) {
  std::vector<NodeId> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = static_cast<NodeId>(i);
  std::shuffle(perm.begin(), perm.end(), rng);
  return perm;
}

/// Same structure with every feature set to 1 (one column).
inline Hypergraph with_uniform_features(const Hypergraph& h) {
  return Hypergraph(h.num_nodes(), h.hyperedges(), Matrix::Ones(static_cast<Eigen::Index>(h.num_nodes()), 1),
                    h.labels(), h.num_classes());
}

/// Adaptive expansion of `h` under uniform features; returns the selections.
inline std::vector<ade::HyperedgeSelection> uniform_selections(const Hypergraph& h, std::uint64_t seed) {
  const Hypergraph u = with_uniform_features(h);
  const auto gate = ade::GsiNetParams::glorot(1, ade::default_gate_hidden(1), seed);
  return ade::expand(u, gate, ade::KernelParams::unit(1), seed).selections;
}

/// Carries each representative pair of `h` through `perm` onto π(h).
inline std::vector<ade::HyperedgeSelection> couple_selections(const Hypergraph& permuted,
                                                              std::span<const ade::HyperedgeSelection> selections,
                                                              std::span<const NodeId> perm) {
  std::vector<ade::HyperedgeSelection> out;
  out.reserve(selections.size());
  for (const auto& s : selections) {
    const auto members = permuted.hyperedge(s.hyperedge);
    if (s.empty())
      out.push_back(ade::make_selection(s.hyperedge, members, 0, 0));
    else
      out.push_back(ade::make_selection(s.hyperedge, members, perm[s.minus], perm[s.plus]));
  }
  return out;
}

struct TrialOutcome {
  bool gwl_distinguished = false;
  bool wl_distinguished = false;
  /// GWL failed to separate the inputs but WL separated their expansions.
  bool violation() const noexcept { return !gwl_distinguished && wl_distinguished; }
};

/// Isomorphic trial: compares h with π(h) under 1-GWL, and their adaptive
/// expansions (uniform features, selections coupled through π) under 1-WL.
inline TrialOutcome expressiveness_trial(const Hypergraph& h, std::span<const NodeId> perm, std::size_t iterations,
                                         std::uint64_t seed) {
  const Hypergraph hp = permute(h, perm);
  TrialOutcome out;
  {
    ColorCompressor compress;
    out.gwl_distinguished = distinguish(gwl_refine(h, iterations, compress), gwl_refine(hp, iterations, compress));
  }
  const auto sel = uniform_selections(h, seed);
  const auto sel_p = couple_selections(hp, sel, perm);
  const WeightedGraph g = ade::expand_with_selections(h.num_nodes(), sel);
  const WeightedGraph gp = ade::expand_with_selections(hp.num_nodes(), sel_p);
  ColorCompressor compress;
  out.wl_distinguished = distinguish(wl_refine(g, iterations, compress), wl_refine(gp, iterations, compress));
  return out;
}

/// Non-isomorphic comparison with independent tie-breaking; informational.
inline TrialOutcome perturbed_trial(const Hypergraph& a, const Hypergraph& b, std::size_t iterations,
                                    std::uint64_t seed) {
  if (a.num_nodes() != b.num_nodes()) throw Error(ErrorKind::invalid_argument, "node counts differ");
  TrialOutcome out;
  {
    ColorCompressor compress;
    out.gwl_distinguished = distinguish(gwl_refine(a, iterations, compress), gwl_refine(b, iterations, compress));
  }
  const WeightedGraph ga = ade::expand_with_selections(a.num_nodes(), uniform_selections(a, seed));
  const WeightedGraph gb =
      ade::expand_with_selections(b.num_nodes(), uniform_selections(b, derive_seed(seed, Stream::wl_trial, {1})));
  ColorCompressor compress;
  out.wl_distinguished = distinguish(wl_refine(ga, iterations, compress), wl_refine(gb, iterations, compress));
  return out;
}

/// Replaces one member of one hyperedge with a node outside it. Returns a
/// 0-node hypergraph when every hyperedge already spans all nodes.
inline Hypergraph rewire_one(const Hypergraph& h, Engine& rng) {
  std::vector<std::size_t> eligible;
  for (std::size_t k = 0; k < h.num_hyperedges(); ++k)
    if (h.hyperedge(k).size() < h.num_nodes()) eligible.push_back(k);
  if (eligible.empty()) return Hypergraph();
  const std::size_t k = eligible[std::uniform_int_distribution<std::size_t>(0, eligible.size() - 1)(rng)];
  auto edges = h.hyperedges();
  auto& e = edges[k];
  std::vector<NodeId> outside;
  for (NodeId v = 0; v < h.num_nodes(); ++v)
    if (!std::binary_search(e.begin(), e.end(), v)) outside.push_back(v);
  const std::size_t drop = std::uniform_int_distribution<std::size_t>(0, e.size() - 1)(rng);
  e[drop] = outside[std::uniform_int_distribution<std::size_t>(0, outside.size() - 1)(rng)];
  std::sort(e.begin(), e.end());
  return Hypergraph(h.num_nodes(), std::move(edges), h.features(), h.labels(), h.num_classes());
}

struct HarnessConfig {
  std::size_t trials = 500;
  std::size_t max_nodes = 30;
  std::size_t max_hyperedges = 20;
  std::size_t max_size = 8;
  std::size_t iterations = 10;
  std::uint64_t seed = 0;
};

struct TrialRecord {
  std::size_t index = 0;
  std::uint64_t seed = 0;
  std::size_t num_nodes = 0;
  std::size_t num_hyperedges = 0;
  TrialOutcome coupled;
  bool perturbed_available = false;
  TrialOutcome perturbed;
};

/// Random structure for trial `index`: N in [2, max_nodes], M in
/// [1, max_hyperedges], sizes in [1, min(max_size, N)].
inline Hypergraph trial_hypergraph(const HarnessConfig& cfg, std::uint64_t trial_seed) {
  if (cfg.max_nodes < 2 || cfg.max_hyperedges < 1 || cfg.max_size < 1)
    throw Error(ErrorKind::invalid_argument, "harness needs max_nodes >= 2 and max_hyperedges, max_size >= 1");
  Engine rng = make_engine(trial_seed, Stream::structure, {0});
  SynthConfig sc;
  sc.num_nodes = std::uniform_int_distribution<std::size_t>(2, cfg.max_nodes)(rng);
  sc.num_hyperedges = std::uniform_int_distribution<std::size_t>(1, cfg.max_hyperedges)(rng);
  sc.min_size = 1;
  sc.max_size = std::min(cfg.max_size, sc.num_nodes);
  sc.num_classes = 1;
  sc.feature_dim = 1;
  sc.scheme = FeatureScheme::constant;
  sc.homophily = 0.0;
  sc.seed = trial_seed;
  return synth_hypergraph(sc);
}

inline TrialRecord run_trial(const HarnessConfig& cfg, std::size_t index) {
  TrialRecord r;
  r.index = index;
  r.seed = derive_seed(cfg.seed, Stream::wl_trial, {index});
  const Hypergraph h = trial_hypergraph(cfg, r.seed);
  r.num_nodes = h.num_nodes();
  r.num_hyperedges = h.num_hyperedges();
  Engine rng = make_engine(r.seed, Stream::wl_trial, {2});
  const auto perm = random_permutation(h.num_nodes(), rng);
  r.coupled = expressiveness_trial(h, perm, cfg.iterations, r.seed);
  const Hypergraph other = rewire_one(h, rng);
  if (other.num_nodes() == h.num_nodes()) {
    r.perturbed_available = true;
    r.perturbed = perturbed_trial(h, other, cfg.iterations, r.seed);
  }
  return r;
}

/// All trials, in index order regardless of scheduling.
inline std::vector<TrialRecord> run_harness(const HarnessConfig& cfg) {
  std::vector<TrialRecord> out(cfg.trials);
  parallel_for(cfg.trials, [&](std::size_t i) { out[i] = run_trial(cfg, i); });
  return out;
}

struct HarnessSummary {
  std::size_t trials = 0;
  std::size_t violations = 0;
  std::size_t perturbed = 0;
  std::size_t perturbed_gwl_distinguished = 0;
  std::size_t perturbed_wl_distinguished = 0;
};

inline HarnessSummary summarize(std::span<const TrialRecord> records) {
  HarnessSummary s;
  s.trials = records.size();
  for (const auto& r : records) {
    if (r.coupled.violation()) ++s.violations;
    if (!r.perturbed_available) continue;
    ++s.perturbed;
    if (r.perturbed.gwl_distinguished) ++s.perturbed_gwl_distinguished;
    if (r.perturbed.wl_distinguished) ++s.perturbed_wl_distinguished;
  }
  return s;
}

}  // namespace hyperx::wl
