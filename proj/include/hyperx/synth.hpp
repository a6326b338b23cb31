#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <unordered_set>
#include <vector>

#include "hyperx/error.hpp"
#include "hyperx/hypergraph.hpp"
#include "hyperx/random.hpp"

namespace hyperx {

enum class FeatureScheme {
  label_gaussian,  // x_i = mu_{y_i} + sigma * eps_i, mu_c ~ N(0, I) once per class
  constant,        // every entry 1.0 (uniform attributes)
  noise,           // x_i = sigma * eps_i, label independent
};

struct SynthConfig {
  std::size_t num_nodes = 100;
  std::size_t num_hyperedges = 50;
  std::size_t min_size = 2;
  std::size_t max_size = 5;
  int num_classes = 2;
  std::size_t feature_dim = 16;
  FeatureScheme scheme = FeatureScheme::label_gaussian;
  double sigma = 0.6;
  /// Probability that a hyperedge draws all members from one class.
  double homophily = 0.8;
  std::uint64_t seed = 0;
};

namespace detail {

// Floyd's algorithm: `count` distinct picks from pool, O(count) expected.
inline std::vector<NodeId> sample_distinct(const std::vector<NodeId>& pool, std::size_t count,
                                           Engine& rng) {
  std::unordered_set<std::size_t> chosen;
  std::vector<NodeId> out;
  out.reserve(count);
  const std::size_t n = pool.size();
  for (std::size_t j = n - count; j < n; ++j) {
    std::uniform_int_distribution<std::size_t> pick(0, j);
    std::size_t t = pick(rng);
    if (!chosen.insert(t).second) {
      chosen.insert(j);
      t = j;
    }
    out.push_back(pool[t]);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace detail

inline Hypergraph synth_hypergraph(const SynthConfig& cfg) {
  if (cfg.min_size < 1) throw Error(ErrorKind::invalid_argument, "min hyperedge size must be >= 1");
  if (cfg.max_size < cfg.min_size) throw Error(ErrorKind::invalid_argument, "max size < min size");
  if (cfg.max_size > cfg.num_nodes)
    throw Error(ErrorKind::invalid_argument,
                "max hyperedge size " + std::to_string(cfg.max_size) + " exceeds N=" +
                    std::to_string(cfg.num_nodes));
  if (cfg.sigma < 0.0) throw Error(ErrorKind::invalid_argument, "sigma must be >= 0");
  if (cfg.num_classes < 1) throw Error(ErrorKind::invalid_argument, "need at least one class");

  const std::size_t n = cfg.num_nodes;
  const auto classes = static_cast<std::size_t>(cfg.num_classes);

  // Balanced labels, shuffled.
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<int>(i % classes);
  {
    Engine rng = make_engine(cfg.seed, Stream::labels);
    std::shuffle(labels.begin(), labels.end(), rng);
  }

  std::vector<NodeId> all(n);
  std::iota(all.begin(), all.end(), NodeId{0});
  std::vector<std::vector<NodeId>> by_class(classes);
  for (std::size_t i = 0; i < n; ++i) by_class[static_cast<std::size_t>(labels[i])].push_back(static_cast<NodeId>(i));

  std::vector<std::vector<NodeId>> edges;
  edges.reserve(cfg.num_hyperedges);
  {
    Engine rng = make_engine(cfg.seed, Stream::structure);
    std::uniform_int_distribution<std::size_t> size_dist(cfg.min_size, cfg.max_size);
    std::uniform_int_distribution<std::size_t> class_dist(0, classes - 1);
    std::bernoulli_distribution homophilous(std::clamp(cfg.homophily, 0.0, 1.0));
    for (std::size_t k = 0; k < cfg.num_hyperedges; ++k) {
      const std::size_t size = size_dist(rng);
      const std::vector<NodeId>* pool = &all;
      if (homophilous(rng)) {
        const auto& members = by_class[class_dist(rng)];
        if (members.size() >= size) pool = &members;
      }
      edges.push_back(detail::sample_distinct(*pool, size, rng));
    }
  }

  const auto rows = static_cast<Eigen::Index>(n);
  const auto cols = static_cast<Eigen::Index>(cfg.feature_dim);
  Matrix x = Matrix::Zero(rows, cols);
  std::normal_distribution<double> unit(0.0, 1.0);
  switch (cfg.scheme) {
    case FeatureScheme::constant:
      x.setOnes();
      break;
    case FeatureScheme::label_gaussian: {
      Matrix means(static_cast<Eigen::Index>(classes), cols);
      Engine mean_rng = make_engine(cfg.seed, Stream::class_means);
      for (Eigen::Index c = 0; c < means.rows(); ++c)
        for (Eigen::Index d = 0; d < cols; ++d) means(c, d) = unit(mean_rng);
      Engine noise_rng = make_engine(cfg.seed, Stream::feature_noise);
      for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index d = 0; d < cols; ++d)
          x(i, d) = means(labels[static_cast<std::size_t>(i)], d) + cfg.sigma * unit(noise_rng);
      break;
    }
    case FeatureScheme::noise: {
      Engine noise_rng = make_engine(cfg.seed, Stream::feature_noise);
      for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index d = 0; d < cols; ++d) x(i, d) = cfg.sigma * unit(noise_rng);
      break;
    }
  }

  return Hypergraph(n, std::move(edges), std::move(x), std::move(labels), cfg.num_classes);
}

/// Class means used by the label-gaussian scheme for a given seed.
inline Matrix synth_class_means(const SynthConfig& cfg) {
  Matrix means(cfg.num_classes, static_cast<Eigen::Index>(cfg.feature_dim));
  Engine rng = make_engine(cfg.seed, Stream::class_means);
  std::normal_distribution<double> unit(0.0, 1.0);
  for (Eigen::Index c = 0; c < means.rows(); ++c)
    for (Eigen::Index d = 0; d < means.cols(); ++d) means(c, d) = unit(rng);
  return means;
}

}  // namespace hyperx
