#pragma once

// Transition estimation from warm-up episodes. The oracle mode returns the
// true model; the empirical mode returns a tabular count estimate.

#include <lrarl/core.hpp>
#include <lrarl/mdp.hpp>
#include <lrarl/params.hpp>

#include <span>
#include <vector>

namespace lrarl {

struct StateAction {
  int layer = 0;
  int state = 0;
  int action = 0;
};

struct TransitionEstimate {
  LowRankMDP model;
  double l1_error = 0.0;  // max over Markov policies of sum_h E ||P_est - P||_1
  std::vector<StateAction> unvisited;
  int episodes = 0;
};

/// max over all Markov policies of sum_h E^pi[err_h(x_h, a_h)], by backward DP.
inline double max_policy_error(const LowRankMDP& mdp, const std::vector<Eigen::VectorXd>& row_error) {
  const int H = mdp.horizon(), A = mdp.action_count();
  Eigen::VectorXd v = Eigen::VectorXd::Zero(mdp.states(H - 1));
  for (int h = H - 2; h >= 0; --h) {
    const Eigen::VectorXd q = row_error[h] + mdp.kernel(h) * v;
    Eigen::VectorXd nv(mdp.states(h));
    for (int x = 0; x < mdp.states(h); ++x) nv(x) = q.segment(x * A, A).maxCoeff();
    v = nv;
  }
  return H > 1 ? v(0) : 0.0;
}

inline std::vector<Eigen::VectorXd> kernel_row_errors(const LowRankMDP& est, const LowRankMDP& truth) {
  std::vector<Eigen::VectorXd> err;
  for (int h = 0; h + 1 < truth.horizon(); ++h)
    err.push_back((est.kernel(h) - truth.kernel(h)).cwiseAbs().rowwise().sum());
  return err;
}

/// Builds the estimate from already-played episodes. Visited rows use
/// empirical frequencies; unvisited rows are uniform and reported.
inline TransitionEstimate estimate_from_trajectories(const LowRankMDP& mdp, std::span<const Trajectory> episodes,
                                                     WarmupMode mode) {
  if (mode == WarmupMode::Oracle) return {mdp, 0.0, {}, static_cast<int>(episodes.size())};
  if (episodes.empty()) throw std::invalid_argument("estimate_transition: empirical mode needs at least one episode");
  const int H = mdp.horizon(), A = mdp.action_count();
  std::vector<Eigen::MatrixXd> counts;
  for (int h = 0; h + 1 < H; ++h) counts.push_back(Eigen::MatrixXd::Zero(mdp.states(h) * A, mdp.states(h + 1)));
  for (const auto& tr : episodes)
    for (int h = 0; h + 1 < H; ++h) counts[h](tr.steps[h].state * A + tr.steps[h].action, tr.steps[h + 1].state) += 1.0;
  TransitionEstimate out{mdp, 0.0, {}, static_cast<int>(episodes.size())};
  for (int h = 0; h + 1 < H; ++h) {
    auto& k = counts[h];
    for (Eigen::Index r = 0; r < k.rows(); ++r) {
      const double n = k.row(r).sum();
      if (n > 0.0) {
        k.row(r) /= n;
      } else {
        k.row(r).setConstant(1.0 / static_cast<double>(k.cols()));
        out.unvisited.push_back({h, static_cast<int>(r / A), static_cast<int>(r % A)});
      }
    }
  }
  out.model = LowRankMDP::from_kernels(mdp.states_per_layer(), A, counts);
  out.l1_error = max_policy_error(mdp, kernel_row_errors(out.model, mdp));
  return out;
}

/// Runs T0 uniform episodes with zero loss and returns the estimate.
inline TransitionEstimate estimate_transition(const LowRankMDP& mdp, WarmupMode mode, int T0, Rng& rng) {
  if (mode == WarmupMode::Empirical && T0 < 1) throw std::invalid_argument("estimate_transition: T0 must be >= 1");
  const Policy unif = uniform_policy(mdp);
  const LossFunction zero = zero_loss(mdp);
  std::vector<Trajectory> eps;
  eps.reserve(static_cast<std::size_t>(std::max(T0, 0)));
  for (int t = 0; t < T0; ++t) eps.push_back(sample_trajectory(mdp, unif, zero, rng));
  return estimate_from_trajectories(mdp, eps, mode);
}

}  // namespace lrarl
