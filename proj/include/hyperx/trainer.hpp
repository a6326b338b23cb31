#pragma once

// End-to-end training: every epoch re-expands the hypergraph with the current
// gate and kernel parameters, runs the two-layer GCN on the expanded graph,
// and takes one Adam step on all parameters. The representative-pair choice
// is discrete; gradients reach the gate through the scaled features inside
// the kernel and the GCN, not through the selection.

#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "hyperx/adam.hpp"
#include "hyperx/ade.hpp"
#include "hyperx/autodiff.hpp"
#include "hyperx/error.hpp"
#include "hyperx/gcn.hpp"
#include "hyperx/hypergraph.hpp"
#include "hyperx/parallel.hpp"
#include "hyperx/random.hpp"

namespace hyperx {

/// Graph construction used in front of the GCN.
///   ade            learned gate selects pairs, kernel weights
///   ade_no_gate    clique structure on raw features, kernel weights
///   ade_no_kernel  learned gate selects pairs, fixed 1/(2|e|-3) weights
///   clique         clique structure, unit weights
///   hypergcn_fixed random-projection pairs, fixed 1/(2|e|-3) weights
enum class ExpansionMethod { ade, ade_no_gate, ade_no_kernel, clique, hypergcn_fixed };

inline const char* to_string(ExpansionMethod m) {
  switch (m) {
    case ExpansionMethod::ade: return "ade";
    case ExpansionMethod::ade_no_gate: return "ade-no-gate";
    case ExpansionMethod::ade_no_kernel: return "ade-no-kernel";
    case ExpansionMethod::clique: return "ce";
    case ExpansionMethod::hypergcn_fixed: return "hypergcn-fixed";
  }
  return "?";
}

inline ExpansionMethod parse_method(std::string_view s) {
  if (s == "ade") return ExpansionMethod::ade;
  if (s == "ade-no-gate") return ExpansionMethod::ade_no_gate;
  if (s == "ade-no-kernel") return ExpansionMethod::ade_no_kernel;
  if (s == "ce") return ExpansionMethod::clique;
  if (s == "hypergcn-fixed") return ExpansionMethod::hypergcn_fixed;
  throw Error(ErrorKind::invalid_argument, "unknown method '" + std::string(s) + "'");
}

struct TrainConfig {
  std::uint64_t seed = 0;
  std::size_t epochs = 500;
  double lr = 0.01;
  double weight_decay = 5e-4;
  double dropout = 0.5;
  std::size_t gate_hidden = 0;  // 0: ade::default_gate_hidden(b)
  std::size_t gcn_hidden = 64;
  GcnMode mode = GcnMode::normalized;
  ExpansionMethod method = ExpansionMethod::ade;
  std::array<double, 3> splits{0.2, 0.2, 0.6};
  bool keep_embeddings = false;
};

struct EpochRecord {
  double loss = 0.0;
  double train_acc = 0.0;
  double val_acc = 0.0;
};

struct RunReport {
  TrainConfig config;
  std::vector<EpochRecord> curve;
  std::size_t best_epoch = 0;  // 1-based epoch of the best validation snapshot
  double best_val_acc = 0.0;
  double test_acc = 0.0;        // measured on the best validation snapshot
  double final_train_acc = 0.0;
  double wall_clock_ms = 0.0;
  Matrix embeddings;            // logits of the best snapshot when requested
};

/// Parameters and forward pass of expansion + GCN for one hypergraph.
class AdeGcnModel {
 public:
  struct Leaves {
    ad::Var gate_w1, gate_w2, theta_raw, gcn_w1, gcn_w2;
  };

  struct Pass {
    Leaves leaves;
    ad::Var scaled;   // N x b features fed to the GCN
    ad::Var logits;   // N x C
    std::vector<ade::HyperedgeSelection> selections;  // empty for fixed structures
  };

  AdeGcnModel(const Hypergraph& h, const TrainConfig& cfg)
      : h_(&h), cfg_(cfg), distances_(h.features()) {
    const std::size_t b = h.feature_dim();
    const std::size_t gate_hidden = cfg.gate_hidden ? cfg.gate_hidden : ade::default_gate_hidden(b);
    gate_ = ade::GsiNetParams::glorot(b, gate_hidden, cfg.seed);
    kernel_ = ade::KernelParams::unit(b);
    gcn_ = GcnParams::glorot(b, cfg.gcn_hidden, static_cast<std::size_t>(h.num_classes()), cfg.seed);
    if (!uses_gate() || !dynamic_structure()) build_static_structure();
  }

  bool uses_gate() const {
    return cfg_.method == ExpansionMethod::ade || cfg_.method == ExpansionMethod::ade_no_kernel;
  }
  bool uses_kernel() const {
    return cfg_.method == ExpansionMethod::ade || cfg_.method == ExpansionMethod::ade_no_gate;
  }
  bool dynamic_structure() const { return uses_gate(); }

  ade::GsiNetParams& gate() { return gate_; }
  ade::KernelParams& kernel() { return kernel_; }
  GcnParams& gcn() { return gcn_; }
  const ade::GsiNetParams& gate() const { return gate_; }
  const ade::KernelParams& kernel() const { return kernel_; }
  const GcnParams& gcn() const { return gcn_; }
  const TrainConfig& config() const { return cfg_; }

  /// Parameters updated by the optimizer, in a fixed order.
  std::vector<Matrix*> parameters() {
    std::vector<Matrix*> out;
    if (uses_gate()) {
      out.push_back(&gate_.w1);
      out.push_back(&gate_.w2);
    }
    if (uses_kernel()) out.push_back(&theta_raw_matrix());
    out.push_back(&gcn_.w1);
    out.push_back(&gcn_.w2);
    return out;
  }

  static std::vector<Matrix> gradients(const Leaves& l, bool gate, bool kernel) {
    std::vector<Matrix> out;
    if (gate) {
      out.push_back(l.gate_w1.grad());
      out.push_back(l.gate_w2.grad());
    }
    if (kernel) out.push_back(l.theta_raw.grad());
    out.push_back(l.gcn_w1.grad());
    out.push_back(l.gcn_w2.grad());
    return out;
  }

  /// Records one forward pass on `tape`. `epoch` picks the tie-break
  /// substream; `dropout_mask` (N x hidden) is applied when non-null.
  Pass forward(ad::Tape& tape, std::uint64_t epoch, const Matrix* dropout_mask = nullptr) {
    Pass pass;
    Leaves& l = pass.leaves;
    const Hypergraph& h = *h_;
    ad::Var x = tape.constant(h.features());

    if (uses_gate()) {
      l.gate_w1 = tape.parameter(gate_.w1);
      l.gate_w2 = tape.parameter(gate_.w2);
      ad::Var pooled = ad::col_mean(x);                                              // 1 x b
      ad::Var hidden = ad::relu(ad::matmul(pooled, ad::transpose(l.gate_w1)));      // 1 x h
      ad::Var gate = ad::sigmoid(ad::matmul(hidden, ad::transpose(l.gate_w2)));     // 1 x b
      pass.scaled = ad::mul(x, gate);
    } else {
      pass.scaled = x;
    }

    const Structure* structure = &static_;
    Structure dynamic;
    if (dynamic_structure()) {
      const Vector signal = pass.scaled.value().rowwise().sum();
      pass.selections = ade::select_pairs(h, signal, cfg_.seed, epoch);
      dynamic = structure_from_selections(pass.selections);
      structure = &dynamic;
    }

    ad::Var weights;
    if (uses_kernel()) {
      l.theta_raw = tape.parameter(theta_raw_matrix());
      weights = kernel_weights(tape, *structure, pass.scaled, l.theta_raw);
    } else {
      weights = tape.constant(structure->fixed_weight);
    }

    const Propagation propagate = make_propagation(structure->pattern, weights, cfg_.mode);
    l.gcn_w1 = tape.parameter(gcn_.w1);
    l.gcn_w2 = tape.parameter(gcn_.w2);
    pass.logits = gcn_forward(propagate, pass.scaled, l.gcn_w1, l.gcn_w2, dropout_mask);
    return pass;
  }

 private:
  // Flattened per-hyperedge edge sets; `segment` is the owning hyperedge.
  struct Structure {
    std::shared_ptr<ad::SparsePattern> pattern;
    std::vector<std::size_t> segment;
    Matrix distance;      // E x 1, original-feature distances
    Matrix fixed_weight;  // E x 1, used when the kernel is off
  };

  Matrix& theta_raw_matrix() {
    // KernelParams stores a row vector; expose it as a 1 x b matrix view.
    if (theta_storage_.cols() != kernel_.raw.size()) theta_storage_ = kernel_.raw;
    return theta_storage_;
  }

 public:
  /// Effective kernel parameters (bandwidths follow the optimized raw values).
  ade::KernelParams kernel_params() {
    ade::KernelParams k = kernel_;
    k.raw = theta_raw_matrix().row(0);
    return k;
  }

 private:
  Structure structure_from_selections(const std::vector<ade::HyperedgeSelection>& selections) {
    Structure s;
    s.pattern = std::make_shared<ad::SparsePattern>();
    s.pattern->num_nodes = h_->num_nodes();
    std::size_t total = 0;
    for (const auto& sel : selections) total += sel.edges.size();
    s.pattern->u.reserve(total);
    s.pattern->v.reserve(total);
    s.segment.reserve(total);
    s.distance.resize(static_cast<Eigen::Index>(total), 1);
    s.fixed_weight.resize(static_cast<Eigen::Index>(total), 1);
    Eigen::Index k = 0;
    for (const auto& sel : selections) {
      const double fixed = sel.edges.empty() ? 0.0 : 1.0 / static_cast<double>(sel.edges.size());
      for (const auto& [i, j] : sel.edges) {
        s.pattern->u.push_back(i);
        s.pattern->v.push_back(j);
        s.segment.push_back(sel.hyperedge);
        s.distance(k, 0) = distances_(i, j);
        s.fixed_weight(k, 0) = fixed;
        ++k;
      }
    }
    return s;
  }

  void build_static_structure() {
    if (cfg_.method == ExpansionMethod::hypergcn_fixed) {
      static_ = structure_from_selections(ade::expand_hypergcn_fixed(*h_, cfg_.seed).selections);
      return;
    }
    // clique edge sets, one segment per hyperedge
    std::vector<ade::HyperedgeSelection> cliques;
    cliques.reserve(h_->num_hyperedges());
    for (std::size_t k = 0; k < h_->num_hyperedges(); ++k) {
      ade::HyperedgeSelection sel;
      sel.hyperedge = k;
      const auto e = h_->hyperedge(k);
      for (std::size_t a = 0; a < e.size(); ++a)
        for (std::size_t b = a + 1; b < e.size(); ++b) sel.edges.emplace_back(e[a], e[b]);
      cliques.push_back(std::move(sel));
    }
    static_ = structure_from_selections(cliques);
    if (cfg_.method == ExpansionMethod::clique) static_.fixed_weight.setOnes();
  }

  ad::Var kernel_weights(ad::Tape& tape, const Structure& s, const ad::Var& scaled, const ad::Var& theta_raw) const {
    const auto b = static_cast<double>(h_->feature_dim());
    ad::Var diff = ad::sub(ad::gather_rows(scaled, s.pattern->u), ad::gather_rows(scaled, s.pattern->v));
    ad::Var theta = ad::add_scalar(ad::softplus(theta_raw), kernel_.epsilon);
    ad::Var spread = ad::row_sum(ad::mul(ad::mul(diff, diff), ad::pow(theta, -2.0)));  // E x 1
    ad::Var exponent = ad::scale(ad::mul(spread, tape.constant(s.distance)), -1.0 / b);
    ad::Var raw = ad::exp(ad::clamp_min(exponent, ade::kExponentFloor));
    ad::Var total = ad::clamp_min(ad::segment_sum(raw, s.segment, h_->num_hyperedges()), ade::kDenominatorFloor);
    return ad::div(raw, ad::gather_rows(total, s.segment));
  }

  const Hypergraph* h_;
  TrainConfig cfg_;
  ade::DistanceCache distances_;
  ade::GsiNetParams gate_;
  ade::KernelParams kernel_;
  Matrix theta_storage_;
  GcnParams gcn_;
  Structure static_;
};

inline Matrix dropout_mask(Eigen::Index rows, Eigen::Index cols, double rate, std::uint64_t seed, std::uint64_t epoch) {
  Engine rng = make_engine(seed, Stream::dropout, {epoch});
  std::bernoulli_distribution keep(1.0 - rate);
  const double scale = 1.0 / (1.0 - rate);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = keep(rng) ? scale : 0.0;
  return m;
}

/// One training run. Test accuracy is read from the epoch with the best
/// validation accuracy (earliest epoch on ties).
inline RunReport train(const Hypergraph& h, const TrainConfig& cfg, const SplitMask& splits) {
  if (cfg.epochs == 0) throw Error(ErrorKind::invalid_argument, "epochs must be >= 1");
  if (cfg.dropout < 0.0 || cfg.dropout >= 1.0) throw Error(ErrorKind::invalid_argument, "dropout must be in [0, 1)");
  if (h.num_classes() < 1) throw Error(ErrorKind::invalid_argument, "training needs labels");
  const auto start = std::chrono::steady_clock::now();

  AdeGcnModel model(h, cfg);
  AdamConfig adam{cfg.lr, 0.9, 0.999, 1e-8, cfg.weight_decay};
  AdamState state;
  const auto& labels = h.labels();

  RunReport report;
  report.config = cfg;
  report.curve.reserve(cfg.epochs);
  bool have_best = false;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    EpochRecord rec;
    {
      ad::Tape tape;
      std::optional<Matrix> mask;
      if (cfg.dropout > 0.0)
        mask = dropout_mask(static_cast<Eigen::Index>(h.num_nodes()), static_cast<Eigen::Index>(cfg.gcn_hidden),
                            cfg.dropout, cfg.seed, epoch);
      auto pass = model.forward(tape, epoch, mask ? &*mask : nullptr);
      ad::Var loss = cross_entropy(pass.logits, labels, splits.train);
      tape.backward(loss);
      rec.loss = loss.scalar();
      auto params = model.parameters();
      const auto grads = AdeGcnModel::gradients(pass.leaves, model.uses_gate(), model.uses_kernel());
      adam_step(params, grads, state, adam);
    }
    {
      ad::Tape tape;
      auto pass = model.forward(tape, epoch, nullptr);
      const Matrix& z = pass.logits.value();
      rec.train_acc = accuracy(z, labels, splits.train);
      rec.val_acc = accuracy(z, labels, splits.validation);
      if (!have_best || rec.val_acc > report.best_val_acc) {
        have_best = true;
        report.best_val_acc = rec.val_acc;
        report.best_epoch = epoch + 1;
        report.test_acc = accuracy(z, labels, splits.test);
        if (cfg.keep_embeddings) report.embeddings = z;
      }
    }
    report.curve.push_back(rec);
  }
  report.final_train_acc = report.curve.back().train_acc;
  report.wall_clock_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return report;
}

inline RunReport train(const Hypergraph& h, const TrainConfig& cfg) {
  return train(h, cfg, make_splits(h.num_nodes(), cfg.splits, cfg.seed));
}

/// Seed of the r-th repeat of a base configuration.
inline std::uint64_t repeat_seed(std::uint64_t base, std::size_t r) {
  return derive_seed(base, Stream::repeat, {r});
}

struct Summary {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation (n - 1)
};

inline Summary summarize(const std::vector<double>& xs) {
  Summary s;
  if (xs.empty()) return s;
  for (double x : xs) s.mean += x;
  s.mean /= static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - s.mean) * (x - s.mean);
    s.std = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  }
  return s;
}

struct GridCell {
  TrainConfig config;
  std::vector<RunReport> runs;  // one per seed, in seed order
  Summary validation;
  Summary test;
};

struct GridResult {
  std::vector<GridCell> cells;
  std::size_t best = 0;
};

/// Evaluates every (cell, seed) pair; the best cell has the highest mean
/// validation accuracy, earliest cell on ties. Jobs run in parallel; results
/// are placed by (cell, seed) so the outcome does not depend on scheduling.
inline GridResult grid_search(const Hypergraph& h, const std::vector<TrainConfig>& grid,
                              const std::vector<std::uint64_t>& seeds) {
  if (grid.empty()) throw Error(ErrorKind::invalid_argument, "empty hyper-parameter grid");
  if (seeds.empty()) throw Error(ErrorKind::invalid_argument, "grid search needs at least one seed");
  GridResult result;
  result.cells.resize(grid.size());
  for (std::size_t c = 0; c < grid.size(); ++c) {
    result.cells[c].config = grid[c];
    result.cells[c].runs.resize(seeds.size());
  }
  parallel_for(grid.size() * seeds.size(), [&](std::size_t job) {
    const std::size_t c = job / seeds.size(), s = job % seeds.size();
    TrainConfig cfg = grid[c];
    cfg.seed = seeds[s];
    result.cells[c].runs[s] = train(h, cfg);
  });
  for (auto& cell : result.cells) {
    std::vector<double> val, test;
    for (const auto& r : cell.runs) {
      val.push_back(r.best_val_acc);
      test.push_back(r.test_acc);
    }
    cell.validation = summarize(val);
    cell.test = summarize(test);
  }
  for (std::size_t c = 1; c < result.cells.size(); ++c)
    if (result.cells[c].validation.mean > result.cells[result.best].validation.mean) result.best = c;
  return result;
}

/// Cartesian product of learning rates and weight decays over a base config.
inline std::vector<TrainConfig> default_grid(const TrainConfig& base) {
  std::vector<TrainConfig> out;
  for (double lr : {0.01, 0.001})
    for (double wd : {5e-4, 0.0}) {
      TrainConfig c = base;
      c.lr = lr;
      c.weight_decay = wd;
      out.push_back(c);
    }
  return out;
}

}  // namespace hyperx
