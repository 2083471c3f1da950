#include <lrarl/core.hpp>
#include <lrarl/design.hpp>

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

using namespace lrarl;

namespace {

std::vector<Eigen::VectorXd> random_vectors(int n, int m, Rng& rng) {
  std::vector<Eigen::VectorXd> v;
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd x(m);
    for (int k = 0; k < m; ++k) x(k) = 2.0 * uniform01(rng) - 1.0;
    v.push_back(x);
  }
  return v;
}

// Leverages recomputed from scratch: Gram by explicit sums, inverse by a
// full-rank LU solve on an orthonormal basis of the span.
Eigen::VectorXd independent_leverages(const std::vector<Eigen::VectorXd>& v, const Eigen::VectorXd& w) {
  const int m = static_cast<int>(v[0].size());
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(m, m);
  for (std::size_t i = 0; i < v.size(); ++i)
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b) g(a, b) += w(i) * v[i](a) * v[i](b);
  Eigen::MatrixXd stacked(m, v.size());
  for (std::size_t i = 0; i < v.size(); ++i) stacked.col(i) = v[i];
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(stacked, Eigen::ComputeThinU);
  int r = 0;
  for (int k = 0; k < svd.singularValues().size(); ++k) r += svd.singularValues()(k) > 1e-9 * svd.singularValues()(0);
  const Eigen::MatrixXd u = svd.matrixU().leftCols(r);
  const Eigen::MatrixXd reduced = u.transpose() * g * u;
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(reduced);
  Eigen::VectorXd out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Eigen::VectorXd y = u.transpose() * v[i];
    out(i) = y.dot(lu.solve(y));
  }
  return out;
}

int span_rank(const std::vector<Eigen::VectorXd>& v) {
  Eigen::MatrixXd stacked(v[0].size(), v.size());
  for (std::size_t i = 0; i < v.size(); ++i) stacked.col(i) = v[i];
  Eigen::FullPivLU<Eigen::MatrixXd> lu(stacked);
  lu.setThreshold(1e-9);
  return static_cast<int>(lu.rank());
}

}  // namespace

TEST(GOptimalDesign, StandardBasisIsUniform) {
  for (int m = 1; m <= 6; ++m) {
    std::vector<Eigen::VectorXd> basis;
    for (int i = 0; i < m; ++i) basis.push_back(Eigen::VectorXd::Unit(m, i));
    const auto d = g_optimal_design(basis);
    for (int i = 0; i < m; ++i) {
      EXPECT_NEAR(d.weights(i), 1.0 / m, 1e-15);
      EXPECT_NEAR(d.leverage(i), m, 1e-12);
    }
    EXPECT_EQ(d.rank, m);
  }
}

TEST(GOptimalDesign, SingleVector) {
  const auto d = g_optimal_design({Eigen::Vector3d(0.3, -0.4, 0.5)});
  EXPECT_EQ(d.weights(0), 1.0);
  EXPECT_NEAR(d.leverage(0), 1.0, 1e-12);
  EXPECT_EQ(d.rank, 1);
}

TEST(GOptimalDesign, ZeroVectorsGetNoWeight) {
  const auto d = g_optimal_design({Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 0)});
  EXPECT_EQ(d.weights(0), 0.0);
  EXPECT_EQ(d.weights(1), 1.0);
}

TEST(GOptimalDesign, RejectsAllZeroAndEmpty) {
  EXPECT_THROW(g_optimal_design({Eigen::Vector2d::Zero(), Eigen::Vector2d::Zero()}), std::invalid_argument);
  EXPECT_THROW(g_optimal_design({}), std::invalid_argument);
}

TEST(GOptimalDesign, RandomSetsMeetLeverageBoundIndependently) {
  Rng rng(2024);
  for (int rep = 0; rep < 20; ++rep) {
    const auto v = random_vectors(100, 5, rng);
    const auto d = g_optimal_design(v, {0.01, -1, 1e-10});
    EXPECT_NEAR(d.weights.sum(), 1.0, 1e-12);
    EXPECT_GE(d.weights.minCoeff(), 0.0);
    const Eigen::VectorXd lev = independent_leverages(v, d.weights);
    EXPECT_LE(lev.maxCoeff(), 5.05 + 1e-9);
    EXPECT_LE((lev - d.leverage).cwiseAbs().maxCoeff(), 1e-8);
  }
}

TEST(GOptimalDesign, RankDeficientUsesSpanRank) {
  Rng rng(5);
  std::vector<Eigen::VectorXd> v;
  for (int i = 0; i < 30; ++i) {
    const double a = 2 * uniform01(rng) - 1, b = 2 * uniform01(rng) - 1;
    Eigen::VectorXd x(4);
    x << a, b, a + b, 0.0;
    v.push_back(x);
  }
  const auto d = g_optimal_design(v);
  EXPECT_EQ(d.rank, 2);
  EXPECT_EQ(span_rank(v), 2);
  EXPECT_LE(independent_leverages(v, d.weights).maxCoeff(), 2 * 1.01 + 1e-9);
}

TEST(GOptimalDesign, PermutationInvariant) {
  Rng rng(77);
  const auto v = random_vectors(40, 4, rng);
  std::vector<int> perm(v.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::reverse(perm.begin(), perm.end());
  std::rotate(perm.begin(), perm.begin() + 7, perm.end());
  std::vector<Eigen::VectorXd> pv;
  for (int i : perm) pv.push_back(v[i]);
  const auto a = g_optimal_design(v), b = g_optimal_design(pv);
  for (std::size_t k = 0; k < perm.size(); ++k) EXPECT_NEAR(b.weights(k), a.weights(perm[k]), 1e-9);
}

TEST(GOptimalDesign, ReportsNonConvergence) {
  std::vector<Eigen::VectorXd> v = {Eigen::Vector2d(1, 0), Eigen::Vector2d(0.99, 0.01), Eigen::Vector2d(0.98, 0.02),
                                    Eigen::Vector2d(0, 1)};
  try {
    g_optimal_design(v, {0.01, 0, 1e-10});
    FAIL() << "expected ConvergenceError";
  } catch (const ConvergenceError& e) {
    EXPECT_GT(e.best_leverage(), 2.02);
  }
}

TEST(ExpWeights, UniformCases) {
  ExpWeightsState s(4, 0.7);
  EXPECT_LE((exp_weights(s).array() - 0.25).abs().maxCoeff(), 1e-15);
  ExpWeightsState tiny(3, 1e-12);
  tiny.cumulative << 0.0, 5.0, 100.0;
  EXPECT_LE((exp_weights(tiny).array() - 1.0 / 3).abs().maxCoeff(), 1e-9);
  EXPECT_THROW(ExpWeightsState(2, 0.0), std::invalid_argument);
}

TEST(ExpWeights, HandSoftmax) {
  ExpWeightsState s(2, 1.0);
  s.cumulative << 0.0, 0.5;
  const auto p = exp_weights(s);
  EXPECT_NEAR(p(0), 0.62246, 1e-5);
  EXPECT_NEAR(p(1), 0.37754, 1e-5);
}

TEST(ExpWeights, ShiftInvariantAndStable) {
  Rng rng(3);
  for (int i = 0; i < 100; ++i) {
    ExpWeightsState s(6, 0.1 + uniform01(rng));
    for (int k = 0; k < 6; ++k) s.cumulative(k) = 50 * uniform01(rng);
    auto shifted = s;
    shifted.cumulative.array() += 1e4 * uniform01(rng);
    const auto p = exp_weights(s);
    EXPECT_NEAR(p.sum(), 1.0, 1e-12);
    EXPECT_LE((p - exp_weights(shifted)).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(RegretCheck, TrivialCases) {
  const auto same = exp_weights_regret_check(Eigen::MatrixXd::Constant(50, 3, 0.4), 0.1);
  EXPECT_NEAR(same.realized, 0.0, 1e-12);
  const auto single = exp_weights_regret_check(Eigen::MatrixXd::Constant(50, 1, 0.9), 1.0);
  EXPECT_NEAR(single.realized, 0.0, 1e-12);
}

TEST(RegretCheck, RandomMatricesSatisfyBound) {
  Rng rng(99);
  for (int i = 0; i < 1000; ++i) {
    const int T = 20 + static_cast<int>(rng() % 80), N = 1 + static_cast<int>(rng() % 10);
    Eigen::MatrixXd g(T, N);
    for (Eigen::Index k = 0; k < g.size(); ++k) g.data()[k] = uniform01(rng);
    const double eta = std::array<double, 3>{0.01, 0.1, 1.0}[i % 3];
    const auto rc = exp_weights_regret_check(g, eta);
    EXPECT_LE(rc.realized, rc.bound);
  }
}

TEST(RegretCheck, SignedLossesWithinCondition) {
  Rng rng(7);
  for (int i = 0; i < 200; ++i) {
    Eigen::MatrixXd g(40, 5);
    for (Eigen::Index k = 0; k < g.size(); ++k) g.data()[k] = 4.0 * uniform01(rng) - 2.0;
    const auto rc = exp_weights_regret_check(g, 0.5);
    EXPECT_LE(rc.realized, rc.bound);
  }
}

TEST(RegretCheck, RejectsConditionViolation) {
  Eigen::MatrixXd g = Eigen::MatrixXd::Constant(3, 2, -3.0);
  EXPECT_THROW(exp_weights_regret_check(g, 1.0), std::domain_error);
}
