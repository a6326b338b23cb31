#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "../support/oracles.hpp"
#include "hyperx/hyperx.hpp"

using namespace hyperx;

namespace {

Hypergraph separable(std::size_t n, std::uint64_t seed) {
  SynthConfig sc;
  sc.num_nodes = n;
  sc.num_hyperedges = n / 2;
  sc.feature_dim = 8;
  sc.sigma = 0.2;
  sc.seed = seed;
  return synth_hypergraph(sc);
}

TrainConfig quick(std::uint64_t seed, std::size_t epochs) {
  TrainConfig cfg;
  cfg.seed = seed;
  cfg.epochs = epochs;
  cfg.gcn_hidden = 16;
  return cfg;
}

}  // namespace

TEST(Trainer, FitsSeparableData) {
  const Hypergraph h = separable(40, 3);
  TrainConfig cfg = quick(3, 200);
  cfg.dropout = 0.0;
  const RunReport r = train(h, cfg);
  const bool reached = std::any_of(r.curve.begin(), r.curve.end(), [](const EpochRecord& e) { return e.train_acc == 1.0; });
  EXPECT_TRUE(reached) << "final train accuracy " << r.final_train_acc;
}

TEST(Trainer, DeterministicReport) {
  const Hypergraph h = separable(40, 4);
  const TrainConfig cfg = quick(4, 30);
  const RunReport a = train(h, cfg), b = train(h, cfg);
  ASSERT_EQ(a.curve.size(), b.curve.size());
  for (std::size_t k = 0; k < a.curve.size(); ++k) {
    EXPECT_EQ(a.curve[k].loss, b.curve[k].loss);
    EXPECT_EQ(a.curve[k].train_acc, b.curve[k].train_acc);
    EXPECT_EQ(a.curve[k].val_acc, b.curve[k].val_acc);
  }
  EXPECT_EQ(a.best_epoch, b.best_epoch);
  EXPECT_EQ(a.test_acc, b.test_acc);
}

TEST(Trainer, TestAccuracyFromBestValidationSnapshot) {
  const Hypergraph h = separable(60, 5);
  TrainConfig cfg = quick(5, 40);
  const RunReport full = train(h, cfg);
  const auto first_max = std::max_element(full.curve.begin(), full.curve.end(),
                                          [](const EpochRecord& a, const EpochRecord& b) { return a.val_acc < b.val_acc; });
  EXPECT_EQ(full.best_epoch, static_cast<std::size_t>(first_max - full.curve.begin()) + 1);
  EXPECT_EQ(full.best_val_acc, first_max->val_acc);

  // Replaying up to the best epoch reproduces the snapshot; its logits give
  // the reported test accuracy.
  cfg.epochs = full.best_epoch;
  cfg.keep_embeddings = true;
  const RunReport prefix = train(h, cfg);
  EXPECT_EQ(prefix.best_epoch, full.best_epoch);
  const SplitMask s = make_splits(h.num_nodes(), cfg.splits, cfg.seed);
  EXPECT_EQ(accuracy(prefix.embeddings, h.labels(), s.test), full.test_acc);
}

TEST(Trainer, LossMostlyDecreasesWithoutDropout) {
  const Hypergraph h = separable(60, 6);
  TrainConfig cfg = quick(6, 200);
  cfg.dropout = 0.0;
  // Weight decay makes the optimized objective CE + L2, so the reported CE
  // alone may creep up once it is near zero; without it the two coincide.
  cfg.weight_decay = 0.0;
  const RunReport r = train(h, cfg);
  for (std::size_t start = 0; start + 50 <= r.curve.size(); start += 50) {
    std::size_t upticks = 0;
    for (std::size_t k = start + 1; k < start + 50; ++k)
      if (r.curve[k].loss > r.curve[k - 1].loss) ++upticks;
    EXPECT_LE(upticks, 2u) << "window at epoch " << start;  // 5% of 49 steps
  }
  EXPECT_LT(r.curve.back().loss, r.curve.front().loss);
}

TEST(Trainer, FullPipelineGradientMatchesFiniteDifferences) {
  for (std::uint64_t point = 0; point < 10; ++point) {
    SynthConfig sc;
    sc.num_nodes = 9;
    sc.num_hyperedges = 5;
    sc.max_size = 4;
    sc.feature_dim = 3;
    sc.sigma = 0.7;
    sc.seed = 100 + point;
    const Hypergraph h = synth_hypergraph(sc);
    TrainConfig cfg;
    cfg.seed = point;
    cfg.dropout = 0.0;
    cfg.gcn_hidden = 4;
    cfg.mode = point % 2 ? GcnMode::paper_literal : GcnMode::normalized;
    AdeGcnModel model(h, cfg);
    Engine rng = make_engine(point, Stream::bench, {5});
    std::normal_distribution<double> jitter(0.0, 0.4);
    Matrix& theta = *model.parameters()[2];
    for (Eigen::Index d = 0; d < theta.cols(); ++d) theta(0, d) += jitter(rng);

    std::vector<std::size_t> nodes(h.num_nodes());
    for (std::size_t i = 0; i < nodes.size(); ++i) nodes[i] = i;
    ad::Tape tape;
    auto pass = model.forward(tape, point);
    tape.backward(cross_entropy(pass.logits, h.labels(), nodes));
    const auto analytic = AdeGcnModel::gradients(pass.leaves, true, true);

    oracle::PipelineParams p{model.gate(), model.kernel_params(), model.gcn()};
    Matrix theta_copy = theta;
    std::vector<ade::HyperedgeSelection> base;
    oracle::pipeline_loss(h, p, cfg.mode, cfg.seed, point, nodes, &base);
    bool flipped = false;
    const auto loss = [&] {
      p.kernel.raw = theta_copy.row(0);
      std::vector<ade::HyperedgeSelection> sel;
      const double l = oracle::pipeline_loss(h, p, cfg.mode, cfg.seed, point, nodes, &sel);
      flipped = flipped || !oracle::same_selections(sel, base);
      return l;
    };
    std::vector<Matrix*> targets{&p.gate.w1, &p.gate.w2, &theta_copy, &p.gcn.w1, &p.gcn.w2};
    for (std::size_t k = 0; k < targets.size(); ++k) {
      const Matrix numeric = oracle::central_difference(targets[k], loss);
      for (Eigen::Index i = 0; i < numeric.rows(); ++i)
        for (Eigen::Index j = 0; j < numeric.cols(); ++j)
          EXPECT_LT(oracle::relative_error(analytic[k](i, j), numeric(i, j)), 1e-4)
              << "point " << point << " block " << k << " (" << i << "," << j << ")";
    }
    EXPECT_FALSE(flipped) << "point " << point;
  }
}

TEST(Trainer, RejectsBadConfig) {
  const Hypergraph h = separable(20, 1);
  TrainConfig cfg = quick(1, 0);
  EXPECT_THROW(train(h, cfg), Error);
  cfg.epochs = 5;
  cfg.dropout = 1.0;
  EXPECT_THROW(train(h, cfg), Error);
}

TEST(Trainer, EveryMethodAndModeRuns) {
  const Hypergraph h = separable(30, 7);
  for (ExpansionMethod m : {ExpansionMethod::ade, ExpansionMethod::ade_no_gate, ExpansionMethod::ade_no_kernel,
                            ExpansionMethod::clique, ExpansionMethod::hypergcn_fixed})
    for (GcnMode mode : {GcnMode::normalized, GcnMode::paper_literal}) {
      TrainConfig cfg = quick(7, 15);
      cfg.method = m;
      cfg.mode = mode;
      const RunReport r = train(h, cfg);
      ASSERT_EQ(r.curve.size(), 15u);
      for (const auto& e : r.curve) EXPECT_TRUE(std::isfinite(e.loss)) << to_string(m);
      EXPECT_EQ(parse_method(to_string(m)), m);
    }
  EXPECT_THROW(parse_method("nope"), Error);
}

TEST(Grid, SingleCellEqualsTrain) {
  const Hypergraph h = separable(30, 8);
  const TrainConfig cfg = quick(0, 20);
  const std::vector<std::uint64_t> seeds{11, 12};
  const GridResult g = grid_search(h, {cfg}, seeds);
  ASSERT_EQ(g.cells.size(), 1u);
  for (std::size_t s = 0; s < seeds.size(); ++s) {
    TrainConfig c = cfg;
    c.seed = seeds[s];
    const RunReport direct = train(h, c);
    EXPECT_EQ(g.cells[0].runs[s].test_acc, direct.test_acc);
    EXPECT_EQ(g.cells[0].runs[s].best_epoch, direct.best_epoch);
  }
}

TEST(Grid, FrozenCellLoses) {
  const Hypergraph h = separable(60, 9);
  TrainConfig good = quick(0, 60);
  TrainConfig frozen = good;
  frozen.lr = 0.0;
  frozen.weight_decay = 0.0;
  const GridResult g = grid_search(h, {frozen, good}, {1, 2, 3});
  EXPECT_EQ(g.best, 1u);
  EXPECT_GT(g.cells[1].validation.mean, g.cells[0].validation.mean);
}

TEST(Grid, SummaryMatchesRecomputation) {
  const Hypergraph h = separable(30, 10);
  const GridResult g = grid_search(h, {quick(0, 15)}, {1, 2, 3, 4});
  const auto& runs = g.cells[0].runs;
  double mean = 0.0;
  for (const auto& r : runs) mean += r.test_acc;
  mean /= 4.0;
  double ss = 0.0;
  for (const auto& r : runs) ss += (r.test_acc - mean) * (r.test_acc - mean);
  EXPECT_NEAR(g.cells[0].test.mean, mean, 1e-15);
  EXPECT_NEAR(g.cells[0].test.std, std::sqrt(ss / 3.0), 1e-15);
  EXPECT_THROW(grid_search(h, {}, {1}), Error);
  EXPECT_THROW(grid_search(h, {quick(0, 1)}, {}), Error);
}

TEST(Grid, DefaultGridHasFourCells) {
  const auto grid = default_grid(TrainConfig{});
  ASSERT_EQ(grid.size(), 4u);
  EXPECT_EQ(grid[0].lr, 0.01);
  EXPECT_EQ(grid[3].weight_decay, 0.0);
}

TEST(Trainer, RepeatSeedsDiffer) {
  EXPECT_NE(repeat_seed(1, 0), repeat_seed(1, 1));
  EXPECT_EQ(repeat_seed(1, 3), repeat_seed(1, 3));
}
