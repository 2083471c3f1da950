#pragma once

// Model-free learner for oblivious losses: a policy cover for exploration,
// least-squares Q regression per epoch, and per-state exponential weights.

#include <lrarl/cover.hpp>
#include <lrarl/learner_common.hpp>
#include <lrarl/regression.hpp>

#include <cmath>

namespace lrarl {

/// A finite feature class: Phi[k][h] is the layer-h table of the k-th map.
using FeatureClass = std::vector<FeatureMap>;

inline int epoch_count(const AlgoParams& p) { return (p.T - p.T0) / p.N_reg; }

namespace detail {

inline void require_feature_class(const FeatureClass& Phi, const LowRankMDP& mdp, const char* who) {
  if (Phi.empty()) throw std::invalid_argument(std::string(who) + ": empty feature class");
  for (const auto& f : Phi) {
    if (static_cast<int>(f.size()) != mdp.horizon())
      throw std::invalid_argument(std::string(who) + ": feature map has wrong horizon");
    for (int h = 0; h < mdp.horizon(); ++h)
      if (f[h].rows() != mdp.states(h) * mdp.action_count())
        throw std::invalid_argument(std::string(who) + ": feature table has wrong row count");
  }
}

}  // namespace detail

struct OracleEfficientDiagnostics {
  PolicyCover cover;
  std::vector<Policy> cover_class;
};

inline RunRecord oracle_efficient_run(const LowRankMDP& mdp, const FeatureClass& Phi, const LossSequence& losses,
                                      const AlgoParams& p, Rng& rng, OracleEfficientDiagnostics* diag = nullptr) {
  validate_params(p);
  detail::require_losses(losses, mdp, p.T, "oracle_efficient_run");
  detail::require_feature_class(Phi, mdp, "oracle_efficient_run");
  const int K = epoch_count(p);
  if (K < 1) throw std::invalid_argument("oracle_efficient_run: T too small for one epoch (T - T0 < N_reg)");
  const int H = mdp.horizon(), d = mdp.rank();
  const double radius = p.ls_radius > 0.0 ? p.ls_radius : H * std::sqrt(static_cast<double>(d));

  RunRecord rec = detail::start_record("oracle-efficient", p);
  detail::play_warmup(mdp, losses, p.T0, rng, rec);

  const std::vector<Policy> cover_class = reaching_policies(mdp);
  const PolicyCover cover = policy_cover_exact(mdp, cover_class, p.alpha, p.epsilon);
  if (!cover.feasible) rec.log.push_back("policy cover: alpha not met, worst ratio " + std::to_string(cover.worst_alpha()));
  const Policy unif = uniform_policy(mdp);

  auto cumulative = zero_tables(mdp);
  for (int k = 0; k < K; ++k) {
    auto pi_hat = std::make_shared<const Policy>(per_state_policy(cumulative, p.eta));
    // explore[h][j]: cover member j rolled in to layer h, uniform at h, pi_hat after
    std::vector<std::vector<std::shared_ptr<const Policy>>> explore(H);
    auto dist = std::make_shared<PlayDistribution>();
    dist->push_back({1.0 - p.nu, pi_hat, -1});
    for (int h = 0; h < H; ++h)
      for (int j : cover.members[h]) {
        explore[h].push_back(
            std::make_shared<const Policy>(compose_policies(cover_class[j], compose_policies(unif, *pi_hat, h + 1), h)));
        if (p.nu > 0.0)
          dist->push_back({p.nu / (H * static_cast<double>(cover.members[h].size())), explore[h].back(), -1});
      }
    const std::shared_ptr<const PlayDistribution> play = dist;

    const int first = p.T0 + k * p.N_reg;
    std::vector<std::vector<int>> retained(H);
    std::vector<std::vector<double>> target(H);
    std::vector<Trajectory> trajs;
    trajs.reserve(p.N_reg);
    for (int t = first; t < first + p.N_reg; ++t) {
      const bool zeta = bernoulli(p.nu, rng);
      const int h_t = static_cast<int>(rng() % static_cast<std::uint64_t>(H));
      const int j = static_cast<int>(rng() % static_cast<std::uint64_t>(explore[h_t].size()));
      const Policy& played = zeta ? *explore[h_t][j] : *pi_hat;
      Trajectory tr = sample_trajectory(mdp, played, losses[t], rng);
      for (int h = 0; h < H; ++h)
        if (!zeta || h_t <= h) {
          retained[h].push_back(static_cast<int>(trajs.size()));
          target[h].push_back(tr.loss_to_go(h));
        }
      const double sum = tr.loss_sum();
      trajs.push_back(tr);
      rec.rounds.push_back({play, std::move(tr), sum, false});
    }

    EpochSnapshot snap;
    snap.epoch = k;
    snap.first_round = first;
    snap.rounds = p.N_reg;
    snap.policy = pi_hat;
    for (int h = 0; h < H; ++h) {
      LsProblem prob;
      const auto n = static_cast<Eigen::Index>(retained[h].size());
      prob.target = Eigen::Map<const Eigen::VectorXd>(target[h].data(), n);
      for (const auto& phi : Phi) {
        Eigen::MatrixXd X(n, phi[h].cols());
        for (Eigen::Index i = 0; i < n; ++i) {
          const Step& s = trajs[retained[h][i]].steps[h];
          X.row(i) = phi[h].row(s.state * mdp.action_count() + s.action);
        }
        prob.design.push_back(std::move(X));
      }
      const LsFit fit = qfn_regression_ls(prob, radius);
      snap.theta.push_back(fit.theta);
      snap.feature_index.push_back(fit.feature_index);
      snap.samples.push_back(static_cast<int>(n));
      snap.q_hat.push_back(detail::unflatten(Phi[fit.feature_index][h] * fit.theta, mdp.states(h), mdp.action_count()));
      cumulative[h] += snap.q_hat.back();
    }
    rec.epochs.push_back(std::move(snap));
  }

  // rounds past K * N_reg play the latest weights without exploration
  const int tail = p.T0 + K * p.N_reg;
  if (tail < p.T) {
    auto last = std::make_shared<const Policy>(per_state_policy(cumulative, p.eta));
    const auto play = single_play(last);
    for (int t = tail; t < p.T; ++t) {
      Trajectory tr = sample_trajectory(mdp, *last, losses[t], rng);
      const double sum = tr.loss_sum();
      rec.rounds.push_back({play, std::move(tr), sum, false});
    }
  }
  if (diag) *diag = {cover, cover_class};
  return rec;
}

}  // namespace lrarl
