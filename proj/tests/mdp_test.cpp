#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace lrarl;
using lrarl::testing::brute_paths;
using lrarl::testing::random_loss;
using lrarl::testing::random_policy;
using lrarl::testing::random_spec;

namespace {

// Two-state chain: every action of x_0 goes to state a of layer 1.
LowRankMDP deterministic_chain() {
  std::vector<Eigen::MatrixXd> phi(2), mu(2);
  phi[0] = Eigen::MatrixXd::Identity(2, 2);
  phi[1] = Eigen::MatrixXd::Zero(4, 2);
  phi[1](0, 0) = phi[1](1, 1) = phi[1](2, 0) = phi[1](3, 1) = 1.0;
  mu[1] = Eigen::MatrixXd::Identity(2, 2);
  return LowRankMDP({1, 2}, 2, 2, phi, mu);
}

}  // namespace

TEST(Validate, OneHotValidInstanceHasEmptyReport) {
  EXPECT_TRUE(validate_mdp(deterministic_chain()).empty());
}

TEST(Validate, ShortKernelRowIsReportedOnce) {
  std::vector<Eigen::MatrixXd> phi(2), mu(2);
  phi[0] = Eigen::MatrixXd::Identity(2, 2);
  phi[0](1, 1) = 0.9;
  phi[1] = Eigen::MatrixXd::Constant(4, 2, 0.5);
  mu[1] = Eigen::MatrixXd::Identity(2, 2);
  const auto report = validate_mdp(LowRankMDP({1, 2}, 2, 2, phi, mu));
  ASSERT_EQ(report.size(), 1u);
  EXPECT_EQ(report[0].kind, "kernel-sum");
  EXPECT_EQ(report[0].layer, 0);
  EXPECT_EQ(report[0].state, 0);
  EXPECT_EQ(report[0].action, 1);
  EXPECT_NEAR(report[0].residual, -0.1, 1e-12);  // row sum minus one
}

TEST(Validate, OversizedFeatureAndNegativeEntryAreReported) {
  std::vector<Eigen::MatrixXd> phi(2), mu(2);
  phi[0] = Eigen::MatrixXd(1, 2);
  phi[0] << 1.5, -0.5;
  phi[1] = Eigen::MatrixXd::Constant(2, 2, 0.5);
  mu[1] = Eigen::MatrixXd::Identity(2, 2);
  const auto report = validate_mdp(LowRankMDP({1, 2}, 1, 2, phi, mu));
  bool norm = false, negative = false;
  for (const auto& v : report) {
    norm |= v.kind == "phi-norm";
    negative |= v.kind == "negative-probability" && v.next_state == 1;
  }
  EXPECT_TRUE(norm);
  EXPECT_TRUE(negative);
}

TEST(Validate, GeneratedInstancesAreValid) {
  Rng rng(11);
  for (int i = 0; i < 50; ++i) {
    const auto mdp = gen_simplex_mdp(random_spec(rng, 4, 8, 3, 4));
    EXPECT_TRUE(validate_mdp(mdp).empty()) << "instance " << i;
  }
}

TEST(Validate, MuNormalizationUsesVertexMaximum) {
  // Two states with mu rows (1,0) and (1,0): the all-ones vertex has norm 2 > sqrt(2)
  std::vector<Eigen::MatrixXd> phi(2), mu(2);
  phi[0] = Eigen::MatrixXd(1, 2);
  phi[0] << 0.5, 0.0;
  phi[1] = Eigen::MatrixXd::Zero(2, 2);
  mu[1] = Eigen::MatrixXd(2, 2);
  mu[1] << 1.0, 0.0, 1.0, 0.0;
  const auto report = validate_mdp(LowRankMDP({1, 2}, 1, 2, phi, mu));
  bool found = false;
  for (const auto& v : report) found |= v.kind == "mu-normalization";
  EXPECT_TRUE(found);
}

TEST(Transition, DeterministicAndMixedRows) {
  const auto mdp = deterministic_chain();
  EXPECT_EQ(transition_row(mdp, 0, 0, 1), Eigen::Vector2d(0, 1));
  std::vector<Eigen::MatrixXd> phi(2), mu(2);
  phi[0] = Eigen::MatrixXd::Constant(1, 2, 0.5);
  phi[1] = Eigen::MatrixXd::Constant(2, 2, 0.5);
  mu[1] = Eigen::MatrixXd::Identity(2, 2);
  const auto mixed = LowRankMDP({1, 2}, 1, 2, phi, mu);
  EXPECT_EQ(transition_row(mixed, 0, 0, 0), Eigen::Vector2d(0.5, 0.5));
  EXPECT_THROW(transition_row(mixed, 1, 0, 0), std::out_of_range);
  EXPECT_THROW(transition_row(mixed, -1, 0, 0), std::out_of_range);
}

TEST(Transition, MatchesRawDotProducts) {
  Rng rng(3);
  for (int i = 0; i < 20; ++i) {
    const auto mdp = gen_simplex_mdp(random_spec(rng));
    for (int h = 0; h + 1 < mdp.horizon(); ++h)
      for (int x = 0; x < mdp.states(h); ++x)
        for (int a = 0; a < mdp.action_count(); ++a) {
          const auto row = transition_row(mdp, h, x, a);
          EXPECT_NEAR(row.sum(), 1.0, 1e-10);
          for (int y = 0; y < mdp.states(h + 1); ++y)
            EXPECT_NEAR(row(y), lrarl::testing::raw_transition(mdp, h, x, a, y), 1e-14);
        }
  }
}

TEST(Occupancy, SingleLayerIsPolicyRow) {
  InstanceSpec s{{1}, 3, 2, FeatureStyle::Simplex, 5};
  const auto mdp = gen_simplex_mdp(s);
  Rng rng(1);
  const auto pi = random_policy(mdp, rng);
  EXPECT_EQ(occupancy(mdp, pi).layers[0], pi.layers[0]);
}

TEST(Occupancy, DeterministicChainPutsMassOnPath) {
  const auto mdp = deterministic_chain();
  const auto pi = deterministic_policy(mdp, {{1}, {0, 1}});
  const auto occ = occupancy(mdp, pi);
  EXPECT_EQ(occ.layers[0](0, 1), 1.0);
  EXPECT_EQ(occ.layers[1](1, 1), 1.0);
  EXPECT_EQ(occ.layers[1].sum(), 1.0);
}

TEST(Occupancy, MatchesBruteForceEnumeration) {
  Rng rng(17);
  for (int i = 0; i < 10; ++i) {
    InstanceSpec s{{1, 4, 4}, 3, 1 + static_cast<int>(rng() % 4), FeatureStyle::Simplex, rng()};
    const auto mdp = gen_simplex_mdp(s);
    const auto pi = random_policy(mdp, rng);
    std::vector<Eigen::MatrixXd> brute(3);
    for (int h = 0; h < 3; ++h) brute[h] = Eigen::MatrixXd::Zero(mdp.states(h), 3);
    brute_paths(mdp, pi, [&](double p, const std::vector<int>& xs, const std::vector<int>& as) {
      for (int h = 0; h < 3; ++h) brute[h](xs[h], as[h]) += p;
    });
    const auto occ = occupancy(mdp, pi);
    for (int h = 0; h < 3; ++h) {
      EXPECT_LE((occ.layers[h] - brute[h]).cwiseAbs().maxCoeff(), 1e-12);
      EXPECT_NEAR(occ.layers[h].sum(), 1.0, 1e-10);
    }
  }
}

TEST(Occupancy, LowRankFactorizationHolds) {
  Rng rng(23);
  for (int i = 0; i < 50; ++i) {
    const auto mdp = gen_simplex_mdp(random_spec(rng));
    for (int j = 0; j < 5; ++j) {
      const auto pi = random_policy(mdp, rng);
      const auto occ = occupancy(mdp, pi);
      for (int h = 1; h < mdp.horizon(); ++h) {
        const Eigen::VectorXd predicted = mdp.mu(h) * expected_feature(mdp, occ, h - 1);
        EXPECT_LE((occ.state_marginal(h) - predicted).cwiseAbs().maxCoeff(), 1e-10);
      }
    }
  }
}

TEST(Occupancy, RejectsMismatchedPolicy) {
  const auto mdp = deterministic_chain();
  Policy bad;
  bad.layers.push_back(Eigen::MatrixXd::Constant(1, 2, 0.5));
  EXPECT_THROW(occupancy(mdp, bad), std::invalid_argument);
}

TEST(ExpectedFeature, UniformOverTwoBasisFeatures) {
  std::vector<Eigen::MatrixXd> phi(1), mu(1);
  phi[0] = Eigen::MatrixXd::Identity(2, 2);
  const LowRankMDP mdp({1}, 2, 2, phi, mu);
  EXPECT_EQ(expected_feature(mdp, uniform_policy(mdp), 0), Eigen::Vector2d(0.5, 0.5));
  EXPECT_THROW(expected_feature(mdp, uniform_policy(mdp), 1), std::out_of_range);
}

TEST(ExpectedFeature, DeterministicChainGivesVisitedFeature) {
  const auto mdp = deterministic_chain();
  const auto pi = deterministic_policy(mdp, {{1}, {0, 1}});
  EXPECT_EQ(expected_feature(mdp, pi, 1), mdp.phi(1, 1, 1));
}

TEST(ExpectedFeature, MatchesMonteCarloMean) {
  InstanceSpec s{{1, 3, 3}, 2, 3, FeatureStyle::Simplex, 99};
  const auto mdp = gen_simplex_mdp(s);
  Rng rng(4);
  const auto pi = random_policy(mdp, rng);
  const auto loss = zero_loss(mdp);
  const int n = 200000;
  const int h = 2;
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(3), sq = Eigen::VectorXd::Zero(3);
  for (int i = 0; i < n; ++i) {
    const auto tr = sample_trajectory(mdp, pi, loss, rng);
    const Eigen::VectorXd f = mdp.phi(h, tr.steps[h].state, tr.steps[h].action);
    sum += f;
    sq += f.cwiseProduct(f);
  }
  const Eigen::VectorXd mean = sum / n;
  const Eigen::VectorXd var = sq / n - mean.cwiseProduct(mean);
  const Eigen::VectorXd exact = expected_feature(mdp, pi, h);
  for (int k = 0; k < 3; ++k) EXPECT_LE(std::abs(mean(k) - exact(k)), 3.0 * std::sqrt(var(k) / n) + 1e-12);
}

TEST(QValues, ZeroLossAndSingleLayer) {
  Rng rng(8);
  const auto mdp = gen_simplex_mdp({{1, 3, 2}, 2, 2, FeatureStyle::Simplex, 1});
  const auto pi = random_policy(mdp, rng);
  for (const auto& q : q_values(mdp, pi, zero_loss(mdp))) EXPECT_EQ(q.cwiseAbs().maxCoeff(), 0.0);

  const auto one = gen_simplex_mdp({{1}, 3, 2, FeatureStyle::Simplex, 1});
  const auto pi1 = random_policy(one, rng);
  const auto l = random_loss(one, rng);
  EXPECT_EQ(q_values(one, pi1, l)[0], l.ell[0]);
  EXPECT_NEAR(value(one, pi1, l), pi1.layers[0].row(0).dot(l.ell[0].row(0)), 1e-15);
}

TEST(QValues, MatchesBruteForceAndRange) {
  Rng rng(29);
  for (int i = 0; i < 20; ++i) {
    const auto mdp = gen_simplex_mdp({{1, 3, 3, 2}, 2, 1 + static_cast<int>(rng() % 3), FeatureStyle::Simplex, rng()});
    const auto pi = random_policy(mdp, rng);
    const auto loss = random_loss(mdp, rng);
    double brute = 0.0;
    brute_paths(mdp, pi, [&](double p, const std::vector<int>& xs, const std::vector<int>& as) {
      for (int h = 0; h < mdp.horizon(); ++h) brute += p * loss.ell[h](xs[h], as[h]);
    });
    EXPECT_NEAR(value(mdp, pi, loss), brute, 1e-12);
    EXPECT_NEAR(value_from_occupancy(occupancy(mdp, pi), loss), brute, 1e-12);
    const auto q = q_values(mdp, pi, loss);
    for (int h = 0; h < mdp.horizon(); ++h) {
      EXPECT_GE(q[h].minCoeff(), 0.0);
      EXPECT_LE(q[h].maxCoeff(), mdp.horizon() - h + 1e-12);
    }
  }
}

TEST(QValues, ValueIsLinearInLoss) {
  Rng rng(31);
  for (int i = 0; i < 20; ++i) {
    const auto mdp = gen_simplex_mdp(random_spec(rng));
    const auto pi = random_policy(mdp, rng);
    const auto l1 = random_loss(mdp, rng), l2 = random_loss(mdp, rng);
    const double alpha = uniform01(rng);
    LossFunction mix;
    for (int h = 0; h < mdp.horizon(); ++h) mix.ell.push_back(alpha * l1.ell[h] + (1 - alpha) * l2.ell[h]);
    EXPECT_NEAR(value(mdp, pi, mix), alpha * value(mdp, pi, l1) + (1 - alpha) * value(mdp, pi, l2), 1e-12);
  }
}

TEST(Sampling, DeterministicInstanceGivesUniquePath) {
  const auto mdp = deterministic_chain();
  const auto pi = deterministic_policy(mdp, {{0}, {1, 0}});
  auto loss = zero_loss(mdp);
  loss.ell[1](0, 1) = 0.25;
  for (std::uint64_t seed : {1ull, 2ull, 77ull}) {
    Rng rng(seed);
    const auto tr = sample_trajectory(mdp, pi, loss, rng);
    EXPECT_EQ(tr.steps[0].action, 0);
    EXPECT_EQ(tr.steps[1].state, 0);
    EXPECT_EQ(tr.steps[1].action, 1);
    EXPECT_EQ(tr.loss_sum(), 0.25);
  }
}

TEST(Sampling, SameSeedSameTrajectory) {
  const auto mdp = gen_simplex_mdp({{1, 4, 4}, 3, 3, FeatureStyle::Simplex, 2});
  Rng prng(5);
  const auto pi = random_policy(mdp, prng);
  const auto loss = random_loss(mdp, prng);
  Rng a(123), b(123);
  for (int i = 0; i < 50; ++i) EXPECT_EQ(sample_trajectory(mdp, pi, loss, a), sample_trajectory(mdp, pi, loss, b));
}

TEST(Sampling, StateFrequenciesPassChiSquare) {
  const auto mdp = gen_simplex_mdp({{1, 4, 5}, 3, 3, FeatureStyle::Simplex, 41});
  Rng rng(6);
  const auto pi = random_policy(mdp, rng);
  const auto occ = occupancy(mdp, pi);
  const auto loss = zero_loss(mdp);
  const int n = 100000;
  std::vector<Eigen::VectorXd> counts = {Eigen::VectorXd::Zero(1), Eigen::VectorXd::Zero(4), Eigen::VectorXd::Zero(5)};
  for (int i = 0; i < n; ++i) {
    const auto tr = sample_trajectory(mdp, pi, loss, rng);
    for (int h = 0; h < 3; ++h) counts[h](tr.steps[h].state) += 1;
  }
  // chi-square critical values at p = 0.001 for 3 and 4 degrees of freedom
  const double crit[3] = {0.0, 16.266, 18.467};
  for (int h = 1; h < 3; ++h) {
    const Eigen::VectorXd p = occ.state_marginal(h);
    double chi = 0.0;
    for (int x = 0; x < p.size(); ++x) chi += std::pow(counts[h](x) - n * p(x), 2) / (n * p(x));
    EXPECT_LT(chi, crit[h]) << "layer " << h;
  }
}

TEST(Compose, SwitchLayersAndMixing) {
  Rng rng(9);
  const auto mdp = gen_simplex_mdp({{1, 3, 3}, 3, 2, FeatureStyle::Simplex, 4});
  const auto p = random_policy(mdp, rng), q = random_policy(mdp, rng);
  const auto at0 = compose_policies(p, q, 0);
  for (int h = 0; h < 3; ++h) EXPECT_EQ(at0.layers[h], q.layers[h]);
  const auto at2 = compose_policies(p, q, 2);
  EXPECT_EQ(at2.layers[1], p.layers[1]);
  EXPECT_EQ(at2.layers[2], q.layers[2]);
  EXPECT_THROW(compose_policies(p, q, 4), std::out_of_range);
  EXPECT_THROW(compose_policies(p, q, -1), std::out_of_range);

  const auto u = uniform_mix(p, 1.0);
  for (const auto& m : u.layers) EXPECT_LE((m.array() - 1.0 / 3).abs().maxCoeff(), 1e-15);
  const auto det = deterministic_policy(mdp, {{0}, {0, 0, 0}, {0, 0, 0}});
  const auto mixed = uniform_mix(det, 1.0 / 3);
  EXPECT_NEAR(mixed.layers[0](0, 0), 7.0 / 9, 1e-15);
  EXPECT_NEAR(mixed.layers[0](0, 1), 1.0 / 9, 1e-15);
  EXPECT_NEAR(mixed.layers[0](0, 2), 1.0 / 9, 1e-15);
  EXPECT_THROW(uniform_mix(p, 1.5), std::invalid_argument);
}

TEST(Enumeration, CountsAndDistinctness) {
  const auto mdp = gen_simplex_mdp({{1, 2, 2}, 2, 2, FeatureStyle::Simplex, 3});
  const auto all = enumerate_deterministic_policies(mdp);
  ASSERT_EQ(all.size(), 32u);
  for (std::size_t i = 0; i < all.size(); ++i)
    for (std::size_t j = i + 1; j < all.size(); ++j) {
      bool same = true;
      for (int h = 0; h < 3; ++h) same &= all[i].layers[h] == all[j].layers[h];
      EXPECT_FALSE(same);
    }
  EXPECT_EQ(layer_constant_policies(mdp).size(), 8u);
  EXPECT_EQ(reaching_policies(mdp).size(), 5u);
}

TEST(Lemmas, PdlIdentityBothOrientations) {
  Rng rng(12);
  for (int i = 0; i < 100; ++i) {
    const auto mdp = gen_simplex_mdp(random_spec(rng));
    const auto p = random_policy(mdp, rng), q = random_policy(mdp, rng);
    const auto g = pdl_gap(mdp, p, q, random_loss(mdp, rng));
    EXPECT_LE(g.residual, 1e-10);
    EXPECT_LE(g.residual_alt, 1e-10);
  }
  const auto mdp = gen_simplex_mdp({{1, 2}, 2, 2, FeatureStyle::Simplex, 1});
  const auto p = random_policy(mdp, rng);
  const auto same = pdl_gap(mdp, p, p, random_loss(mdp, rng));
  EXPECT_EQ(same.lhs, 0.0);
  EXPECT_EQ(same.rhs, 0.0);
  const auto zero = pdl_gap(mdp, p, random_policy(mdp, rng), zero_loss(mdp));
  EXPECT_EQ(zero.lhs, 0.0);
  EXPECT_EQ(zero.rhs, 0.0);
}

namespace {
LowRankMDP perturb(const LowRankMDP& mdp, double l1, Rng& rng) {
  std::vector<Eigen::MatrixXd> kernels;
  for (int h = 0; h + 1 < mdp.horizon(); ++h) {
    Eigen::MatrixXd k = mdp.kernel(h);
    for (Eigen::Index r = 0; r < k.rows(); ++r) {
      Eigen::VectorXd target(k.cols());
      for (Eigen::Index c = 0; c < k.cols(); ++c) target(c) = uniform01(rng);
      target /= target.sum();
      const double dist = (target.transpose() - k.row(r)).cwiseAbs().sum();
      const double lam = dist > 0.0 ? std::min(1.0, l1 / dist) : 0.0;
      k.row(r) = (1 - lam) * k.row(r) + lam * target.transpose();
    }
    kernels.push_back(k);
  }
  return LowRankMDP::from_kernels(mdp.states_per_layer(), mdp.action_count(), kernels);
}
}  // namespace

TEST(Lemmas, SimulationAndOccupancyGapBounds) {
  Rng rng(13);
  for (int i = 0; i < 100; ++i) {
    const auto mdp = gen_simplex_mdp(random_spec(rng));
    const auto est = perturb(mdp, 0.05, rng);
    const auto pi = random_policy(mdp, rng);
    const auto g = simulation_gap(est, mdp, pi, random_loss(mdp, rng));
    EXPECT_LE(g.value_gap, g.value_bound + 1e-10);
    for (std::size_t h = 0; h < g.occupancy_gap.size(); ++h)
      EXPECT_LE(g.occupancy_gap[h], g.occupancy_bound[h] + 1e-10);
  }
}

TEST(Lemmas, SimulationGapTrivialCases) {
  Rng rng(14);
  const auto mdp = gen_simplex_mdp({{1, 3, 3}, 2, 2, FeatureStyle::Simplex, 8});
  const auto pi = random_policy(mdp, rng);
  const auto loss = random_loss(mdp, rng);
  const auto self = simulation_gap(mdp, mdp, pi, loss);
  EXPECT_NEAR(self.value_gap, 0.0, 1e-15);
  EXPECT_EQ(self.value_bound, 0.0);
  const auto one = gen_simplex_mdp({{1}, 2, 2, FeatureStyle::Simplex, 8});
  const auto pi1 = random_policy(one, rng);
  EXPECT_EQ(simulation_gap(one, one, pi1, random_loss(one, rng)).value_gap, 0.0);
  const auto other = gen_simplex_mdp({{1, 2, 3}, 2, 2, FeatureStyle::Simplex, 8});
  EXPECT_THROW(simulation_gap(other, mdp, pi, loss), std::invalid_argument);
}

TEST(Trajectories, EnumerationSumsToOneAndMatchesValue) {
  Rng rng(15);
  const auto mdp = gen_simplex_mdp({{1, 3, 2}, 2, 2, FeatureStyle::Simplex, 21});
  const auto pi = random_policy(mdp, rng);
  const auto loss = random_loss(mdp, rng);
  double mass = 0.0, v = 0.0;
  enumerate_trajectories(mdp, pi, loss, [&](double p, const Trajectory& t) {
    mass += p;
    v += p * t.loss_sum();
  });
  EXPECT_NEAR(mass, 1.0, 1e-12);
  EXPECT_NEAR(v, value(mdp, pi, loss), 1e-12);
}
