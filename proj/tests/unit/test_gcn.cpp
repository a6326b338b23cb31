#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "../support/oracles.hpp"
#include "hyperx/hyperx.hpp"

using namespace hyperx;

namespace {

Matrix random_matrix(Eigen::Index r, Eigen::Index c, std::uint64_t seed) {
  Engine rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = dist(rng);
  return m;
}

std::vector<std::size_t> all_nodes(std::size_t n) {
  std::vector<std::size_t> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = i;
  return v;
}

}  // namespace

TEST(Gcn, EmptyGraphPaperLiteralIsZero) {
  const WeightedGraph g(5);
  const auto p = GcnParams::glorot(3, 4, 2, 1);
  EXPECT_TRUE(gcn_forward(g, random_matrix(5, 3, 2), p, GcnMode::paper_literal).isZero(0.0));
}

TEST(Gcn, SingleNodeNormalizedIsPlainMlp) {
  const WeightedGraph g(1);
  const auto p = GcnParams::glorot(3, 4, 2, 1);
  const Matrix x = random_matrix(1, 3, 3);
  const Matrix expected = (x * p.w1).cwiseMax(0.0) * p.w2;
  EXPECT_TRUE(gcn_forward(g, x, p, GcnMode::normalized).isApprox(expected, 1e-14));
}

TEST(Gcn, MatchesDenseOracle) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Hypergraph h = oracle::random_hypergraph(seed);
    const auto r = ade::expand(h, ade::GsiNetParams::glorot(h.feature_dim(), 8, seed),
                               ade::KernelParams::unit(h.feature_dim()), seed);
    const auto p = GcnParams::glorot(h.feature_dim(), 5, 3, seed);
    const Matrix a = r.graph.to_dense();
    for (GcnMode mode : {GcnMode::normalized, GcnMode::paper_literal}) {
      const Matrix a_hat = mode == GcnMode::normalized ? oracle::normalized_adjacency(a) : a;
      const Matrix expected = oracle::dense_gcn(a_hat, h.features(), p.w1, p.w2);
      const Matrix got = gcn_forward(r.graph, h.features(), p, mode);
      EXPECT_LE((got - expected).cwiseAbs().maxCoeff(), 1e-12 * (1.0 + expected.cwiseAbs().maxCoeff()))
          << "seed " << seed << " mode " << to_string(mode);
    }
  }
}

TEST(Gcn, FeatureRowMismatch) {
  EXPECT_THROW(gcn_forward(WeightedGraph(3), Matrix::Zero(4, 2), GcnParams::glorot(2, 2, 2, 0), GcnMode::normalized),
               Error);
}

TEST(CrossEntropy, ConfidentLogitsGiveNearZero) {
  Matrix z(2, 3);
  z << 50, 0, 0, 0, 0, 50;
  const std::vector<int> labels{0, 2};
  EXPECT_LT(cross_entropy(z, labels, all_nodes(2)), 1e-20);
}

TEST(CrossEntropy, UniformLogitsGiveLogC) {
  const std::vector<int> labels{0, 1, 3, 2};
  EXPECT_NEAR(cross_entropy(Matrix::Constant(4, 4, 0.7), labels, all_nodes(4)), std::log(4.0), 1e-15);
}

TEST(CrossEntropy, MatchesLogSumExpOracle) {
  const Matrix z = random_matrix(30, 5, 8) * 40.0;
  std::vector<int> labels(30);
  for (std::size_t i = 0; i < 30; ++i) labels[i] = static_cast<int>(i % 5);
  const std::vector<std::size_t> nodes{0, 3, 4, 9, 17, 29};
  EXPECT_NEAR(cross_entropy(z, labels, nodes), oracle::cross_entropy(z, labels, nodes), 1e-12);
}

TEST(CrossEntropy, EmptyMaskRejected) {
  const std::vector<int> labels{0};
  EXPECT_THROW(cross_entropy(Matrix::Zero(1, 2), labels, std::vector<std::size_t>{}), Error);
}

TEST(CrossEntropy, SoftmaxRowsSumToOne) {
  ad::Tape t;
  const Matrix z = random_matrix(10, 4, 2) * 30.0;
  const Matrix p = ad::log_softmax(t.constant(z)).value().array().exp();
  for (Eigen::Index i = 0; i < p.rows(); ++i) EXPECT_NEAR(p.row(i).sum(), 1.0, 1e-14);
}

TEST(Splits, SizesOfTen) {
  const SplitMask s = make_splits(10, {0.2, 0.2, 0.6}, 1);
  EXPECT_EQ(s.train.size(), 2u);
  EXPECT_EQ(s.validation.size(), 2u);
  EXPECT_EQ(s.test.size(), 6u);
}

TEST(Splits, DeterministicDisjointExhaustive) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const SplitMask a = make_splits(137, {0.2, 0.2, 0.6}, seed);
    const SplitMask b = make_splits(137, {0.2, 0.2, 0.6}, seed);
    EXPECT_EQ(a.train, b.train);
    EXPECT_EQ(a.validation, b.validation);
    EXPECT_EQ(a.test, b.test);
    std::set<std::size_t> all;
    for (const auto* part : {&a.train, &a.validation, &a.test}) all.insert(part->begin(), part->end());
    EXPECT_EQ(all.size(), 137u);
    EXPECT_EQ(a.train.size() + a.validation.size() + a.test.size(), 137u);
  }
  EXPECT_NE(make_splits(137, {0.2, 0.2, 0.6}, 1).train, make_splits(137, {0.2, 0.2, 0.6}, 2).train);
}

TEST(Splits, Errors) {
  EXPECT_THROW(make_splits(10, {0.5, 0.5, 0.5}, 0), Error);
  EXPECT_THROW(make_splits(10, {-0.2, 0.6, 0.6}, 0), Error);
  EXPECT_THROW(make_splits(3, {0.2, 0.2, 0.6}, 0), Error);
}
