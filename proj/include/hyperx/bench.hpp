#pragma once

// Timing ladder for one adaptive-expansion round. Rung r has 2^r times the
// nodes and hyperedges of rung 0, so E roughly doubles per rung.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <vector>

#include "hyperx/ade.hpp"
#include "hyperx/error.hpp"
#include "hyperx/synth.hpp"

namespace hyperx {

struct BenchConfig {
  std::size_t ladder_depth = 4;
  std::size_t base_nodes = 20000;
  std::size_t base_hyperedges = 20000;
  std::size_t min_size = 2;
  std::size_t max_size = 8;
  std::size_t feature_dim = 8;
  std::size_t warmup = 1;
  std::size_t reps = 5;
  std::uint64_t seed = 0;
};

struct BenchRow {
  std::size_t rung = 0;
  std::size_t num_incidences = 0;  // E
  double median_ms = 0.0;
};

inline SynthConfig bench_rung_config(const BenchConfig& cfg, std::size_t rung) {
  SynthConfig sc;
  sc.num_nodes = cfg.base_nodes << rung;
  sc.num_hyperedges = cfg.base_hyperedges << rung;
  sc.min_size = cfg.min_size;
  sc.max_size = cfg.max_size;
  sc.feature_dim = cfg.feature_dim;
  sc.homophily = 0.0;
  sc.seed = derive_seed(cfg.seed, Stream::bench, {rung});
  return sc;
}

/// Median wall-clock of a full expansion round (distances included, since a
/// fresh cache is used per repetition).
inline double time_expand(const Hypergraph& h, std::size_t warmup, std::size_t reps, std::uint64_t seed) {
  const auto gate = ade::GsiNetParams::glorot(h.feature_dim(), ade::default_gate_hidden(h.feature_dim()), seed);
  const auto kernel = ade::KernelParams::unit(h.feature_dim());
  std::vector<double> ms;
  for (std::size_t r = 0; r < warmup + reps; ++r) {
    const auto start = std::chrono::steady_clock::now();
    const auto result = ade::expand(h, gate, kernel, seed, r);
    const auto stop = std::chrono::steady_clock::now();
    if (result.graph.num_nodes() != h.num_nodes()) throw Error(ErrorKind::invalid_argument, "bench: bad expansion");
    if (r >= warmup) ms.push_back(std::chrono::duration<double, std::milli>(stop - start).count());
  }
  std::sort(ms.begin(), ms.end());
  return ms[ms.size() / 2];
}

inline std::vector<BenchRow> bench_scaling(const BenchConfig& cfg) {
  if (cfg.ladder_depth < 2) throw Error(ErrorKind::invalid_argument, "ladder depth must be >= 2");
  if (cfg.reps < 1) throw Error(ErrorKind::invalid_argument, "bench needs at least one repetition");
  std::vector<BenchRow> rows;
  for (std::size_t r = 0; r < cfg.ladder_depth; ++r) {
    const Hypergraph h = synth_hypergraph(bench_rung_config(cfg, r));
    rows.push_back({r, h.num_incidences(), time_expand(h, cfg.warmup, cfg.reps, cfg.seed)});
  }
  return rows;
}

/// time(top) / time(top - 1), normalized by the E ratio of the two rungs.
inline double top_rung_ratio(const std::vector<BenchRow>& rows) {
  if (rows.size() < 2) throw Error(ErrorKind::invalid_argument, "need at least two rungs");
  const auto& a = rows[rows.size() - 2];
  const auto& b = rows.back();
  const double e_ratio = static_cast<double>(b.num_incidences) / static_cast<double>(a.num_incidences);
  return (b.median_ms / a.median_ms) * (2.0 / e_ratio);
}

}  // namespace hyperx
