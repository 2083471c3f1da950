#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace lrarl;
using lrarl::testing::random_spec;

TEST(Instance, RankOneHasSingleLatentKernel) {
  const auto mdp = gen_simplex_mdp({{1, 4, 5}, 3, 1, FeatureStyle::Simplex, 12});
  for (int h = 0; h + 1 < mdp.horizon(); ++h) {
    EXPECT_LE((mdp.phi(h).array() - 1.0).abs().maxCoeff(), 1e-15);
    const auto& k = mdp.kernel(h);
    for (Eigen::Index r = 1; r < k.rows(); ++r) EXPECT_LE((k.row(r) - k.row(0)).cwiseAbs().maxCoeff(), 1e-15);
  }
}

TEST(Instance, TabularEmbeddingRecoversKernels) {
  Rng rng(2);
  std::vector<Eigen::MatrixXd> kernels;
  Eigen::MatrixXd k0(2, 3);
  k0 << 0.2, 0.3, 0.5, 1.0, 0.0, 0.0;
  Eigen::MatrixXd k1 = Eigen::MatrixXd::Zero(6, 2);
  for (int r = 0; r < 6; ++r) k1(r, r % 2) = 1.0;
  const auto mdp = LowRankMDP::from_kernels({1, 3, 2}, 2, {k0, k1});
  EXPECT_TRUE(validate_mdp(mdp).empty());
  EXPECT_LE((mdp.kernel(0) - k0).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LE((mdp.kernel(1) - k1).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Instance, FiftyRandomSpecsAreValid) {
  Rng rng(8);
  for (int i = 0; i < 50; ++i) {
    auto spec = random_spec(rng, 5, 7, 4, 5);
    spec.style = i % 5 == 0 ? FeatureStyle::OneHot : FeatureStyle::Simplex;
    EXPECT_TRUE(validate_mdp(gen_simplex_mdp(spec)).empty());
  }
}

TEST(Instance, DeterministicAndRejectsInfeasible) {
  const InstanceSpec s{{1, 3, 3}, 2, 2, FeatureStyle::Simplex, 42};
  const auto a = gen_simplex_mdp(s), b = gen_simplex_mdp(s);
  for (int h = 0; h < 3; ++h) {
    EXPECT_EQ(a.phi(h), b.phi(h));
    EXPECT_EQ(a.mu(h), b.mu(h));
  }
  EXPECT_THROW(gen_simplex_mdp({{1, 2}, 2, 5, FeatureStyle::Simplex, 1}), std::invalid_argument);
  EXPECT_THROW(gen_simplex_mdp({{2, 2}, 2, 2, FeatureStyle::Simplex, 1}), std::invalid_argument);
  EXPECT_THROW(gen_simplex_mdp({{1, 0}, 2, 1, FeatureStyle::Simplex, 1}), std::invalid_argument);
}

TEST(LinearLosses, WitnessCases) {
  const auto mdp = gen_simplex_mdp({{1, 3, 3}, 2, 3, FeatureStyle::Simplex, 4});
  const int d = 3;
  const auto zero = make_linear_loss(mdp, std::vector<Eigen::VectorXd>(3, Eigen::VectorXd::Zero(d)));
  for (const auto& m : zero.ell) EXPECT_EQ(m.cwiseAbs().maxCoeff(), 0.0);
  const auto flat = make_linear_loss(mdp, std::vector<Eigen::VectorXd>(3, Eigen::VectorXd::Constant(d, 1 / std::sqrt(3.0))));
  for (const auto& m : flat.ell) EXPECT_LE((m.array() - 1 / std::sqrt(3.0)).abs().maxCoeff(), 1e-15);
}

TEST(LinearLosses, RangeAndWitnessResidual) {
  const auto mdp = gen_simplex_mdp({{1, 5, 5, 5}, 3, 4, FeatureStyle::Simplex, 5});
  AdversarySpec spec;
  spec.T = 2500;
  spec.seed = 19;
  const auto seq = gen_linear_losses(mdp, spec);
  ASSERT_EQ(seq.size(), 2500u);
  for (const auto& l : seq) {
    ASSERT_TRUE(l.witness.has_value());
    for (int h = 0; h < mdp.horizon(); ++h) {
      const auto& g = (*l.witness)[h];
      EXPECT_LE(g.norm(), 1.0 + 1e-15);
      EXPECT_GE(g.minCoeff(), 0.0);
      EXPECT_GE(l.ell[h].minCoeff(), 0.0);
      EXPECT_LE(l.ell[h].maxCoeff(), 1.0);
      for (int x = 0; x < mdp.states(h); ++x)
        for (int a = 0; a < 3; ++a) EXPECT_LE(std::abs(l(h, x, a) - mdp.phi(h, x, a).dot(g)), 1e-12);
    }
  }
  EXPECT_EQ(gen_linear_losses(mdp, spec)[17].ell[2], seq[17].ell[2]);
}

TEST(LinearLosses, RejectsNonSimplexFeatures) {
  std::vector<Eigen::MatrixXd> phi(2), mu(2);
  phi[0] = Eigen::MatrixXd::Constant(1, 2, 0.4);
  phi[1] = Eigen::MatrixXd::Constant(2, 2, 0.5);
  mu[1] = Eigen::MatrixXd::Constant(2, 2, 1.25);
  const LowRankMDP mdp({1, 2}, 1, 2, phi, mu);
  AdversarySpec spec;
  EXPECT_THROW(gen_linear_losses(mdp, spec), std::invalid_argument);
}

TEST(AdaptiveLosses, ZeroStrengthIsOblivious) {
  const auto mdp = gen_simplex_mdp({{1, 3, 3}, 2, 2, FeatureStyle::Simplex, 4});
  AdversarySpec spec;
  spec.kind = AdversaryKind::AdaptiveTargeting;
  spec.targeting_strength = 0.0;
  Rng rng(1);
  std::vector<Trajectory> hist;
  const auto first = gen_adaptive_losses(mdp, hist, spec);
  for (int i = 0; i < 5; ++i) {
    hist.push_back(sample_trajectory(mdp, uniform_policy(mdp), first, rng));
    const auto next = gen_adaptive_losses(mdp, hist, spec);
    for (int h = 0; h < 3; ++h) EXPECT_EQ(next.ell[h], first.ell[h]);
  }
}

TEST(AdaptiveLosses, DeterministicInHistory) {
  const auto mdp = gen_simplex_mdp({{1, 3, 3}, 2, 2, FeatureStyle::Simplex, 4});
  AdversarySpec spec;
  spec.kind = AdversaryKind::AdaptiveTargeting;
  Rng rng(3);
  std::vector<Trajectory> hist;
  for (int i = 0; i < 4; ++i) hist.push_back(sample_trajectory(mdp, uniform_policy(mdp), zero_loss(mdp), rng));
  const auto a = gen_adaptive_losses(mdp, hist, spec), b = gen_adaptive_losses(mdp, hist, spec);
  for (int h = 0; h < 3; ++h) EXPECT_EQ(a.ell[h], b.ell[h]);
  for (int h = 0; h < 3; ++h) {
    EXPECT_LE((*a.witness)[h].norm(), 1.0 + 1e-15);
    EXPECT_GE(a.ell[h].minCoeff(), 0.0);
    EXPECT_LE(a.ell[h].maxCoeff(), 1.0);
  }
}

TEST(AdaptiveLosses, TargetsPreviouslyPlayedAction) {
  std::vector<Eigen::MatrixXd> phi(1), mu(1);
  phi[0] = Eigen::MatrixXd::Identity(2, 2);
  const LowRankMDP mdp({1}, 2, 2, phi, mu);
  AdversarySpec spec;
  spec.kind = AdversaryKind::AdaptiveTargeting;
  spec.targeting_strength = 1.0;
  for (int played = 0; played < 2; ++played) {
    Trajectory t;
    t.steps.push_back({0, played, 0.0});
    const std::vector<Trajectory> hist = {t};
    const auto l = gen_adaptive_losses(mdp, hist, spec);
    EXPECT_GT(l(0, 0, played), l(0, 0, 1 - played));
  }
  AdversarySpec wrong;
  EXPECT_THROW(gen_adaptive_losses(mdp, {}, wrong), std::invalid_argument);
}

TEST(AdaptiveLosses, TargetingAdversaryMatchesFunction) {
  const auto mdp = gen_simplex_mdp({{1, 2, 2}, 2, 2, FeatureStyle::Simplex, 9});
  AdversarySpec spec;
  spec.kind = AdversaryKind::AdaptiveTargeting;
  TargetingAdversary adv(mdp, spec);
  EXPECT_TRUE(adv.adaptive());
  Rng rng(1);
  std::vector<Trajectory> hist = {sample_trajectory(mdp, uniform_policy(mdp), zero_loss(mdp), rng)};
  EXPECT_EQ(adv.next_loss(hist).ell[1], gen_adaptive_losses(mdp, hist, spec).ell[1]);
}

TEST(LowerBound, GapFormulaAndConstruction) {
  EXPECT_NEAR(lower_bound_gap(4, 4, 160000, 0.25), 1.5625e-4, 1e-18);
  Rng rng(1);
  const auto env = gen_lower_bound_env(4, 4, 400, 0.25, rng);
  EXPECT_TRUE(validate_mdp(env.mdp).empty());
  EXPECT_EQ(env.losses.size(), 400u);
  for (int s = 0; s < 4; ++s) {
    int optimal = 0;
    for (int a = 0; a < 4; ++a) {
      if (a == env.optimal_arm[s]) {
        ++optimal;
        continue;
      }
      EXPECT_NEAR(env.arm_means[s][a] - env.arm_means[s][env.optimal_arm[s]], env.delta, 1e-15);
    }
    EXPECT_EQ(optimal, 1);
  }
  for (int s = 0; s < 4; ++s) EXPECT_NEAR(transition_row(env.mdp, 0, 0, 2)(s), 0.25, 1e-15);
  EXPECT_THROW(gen_lower_bound_env(4, 4, 256, 0.25, rng), std::invalid_argument);
}

TEST(LowerBound, EmpiricalArmMeans) {
  Rng rng(5);
  const int T = 100000;
  const auto env = gen_lower_bound_env(2, 2, T, 60.0, rng);  // large gap keeps the two means distinguishable
  for (int s = 0; s < 2; ++s)
    for (int a = 0; a < 2; ++a) {
      double sum = 0.0;
      for (const auto& l : env.losses) sum += l(1, s, a);
      const double mean = sum / T, p = env.arm_means[s][a];
      EXPECT_LE(std::abs(mean - p), 3.0 * std::sqrt(p * (1 - p) / T));
    }
  EXPECT_GT(env.delta, 0.0);
  EXPECT_LT(env.delta, 0.5);
}
