#pragma once

// Model-free learner for adaptive adversaries: cover, representation
// selection, and spanners over stacked [loss, representation] features, with
// L1 Q regression against aggregated spanner rollouts.

#include <lrarl/adversary.hpp>
#include <lrarl/cover.hpp>
#include <lrarl/oracle_efficient.hpp>
#include <lrarl/regression.hpp>
#include <lrarl/replearn.hpp>
#include <lrarl/spanner.hpp>

#include <cmath>
#include <memory>

namespace lrarl {

struct AdaptivePipeline {
  std::vector<Policy> cover_class;
  PolicyCover cover;
  std::vector<RepLearnResult> rep;  // layers 0..H-2
  FeatureMap stacked;               // per layer [phi_loss, phi_rep], dimension 2d
  std::vector<Policy> spanner_class;
  std::vector<SpannerResult> spanners;
};

/// Deterministic policies when there are at most `limit`, otherwise the
/// reaching and layer-constant policies.
inline std::vector<Policy> default_spanner_class(const LowRankMDP& mdp, std::uint64_t limit = 4096) {
  if (deterministic_policy_count(mdp, limit) <= limit) return enumerate_deterministic_policies(mdp, limit);
  auto out = reaching_policies(mdp);
  for (auto& pi : layer_constant_policies(mdp)) out.push_back(std::move(pi));
  return out;
}

inline AdaptivePipeline build_adaptive_pipeline(const LowRankMDP& mdp, const FeatureClass& Phi, const FeatureMap& phi_loss,
                                                const AlgoParams& p, Rng& rng) {
  const int H = mdp.horizon(), A = mdp.action_count(), d = mdp.rank();
  AdaptivePipeline pl;
  pl.cover_class = reaching_policies(mdp);
  pl.cover = policy_cover_exact(mdp, pl.cover_class, p.alpha, p.epsilon);
  const Policy unif = uniform_policy(mdp);
  const double rep_radius = 3.0 * std::pow(static_cast<double>(d), 1.5);

  std::vector<Eigen::MatrixXd> rep_tables(H);
  for (int h = 0; h + 1 < H; ++h) {
    std::vector<Eigen::MatrixXd> next;
    for (const auto& phi : Phi) {
      Eigen::MatrixXd s(phi_loss[h + 1].rows(), phi_loss[h + 1].cols() + phi[h + 1].cols());
      s << phi_loss[h + 1], phi[h + 1];
      next.push_back(std::move(s));
    }
    const auto fs = make_discriminators(next, A, p.discriminators, rng);
    std::vector<Policy> roll;
    for (int j : pl.cover.members[h]) roll.push_back(compose_policies(pl.cover_class[j], unif, h));
    std::vector<Eigen::MatrixXd> cands;
    for (const auto& phi : Phi) cands.push_back(phi[h]);
    pl.rep.push_back(rep_learn_exact(mdp, h, cands, fs, roll, rep_radius));
    rep_tables[h] = Phi[pl.rep.back().chosen][h];
  }
  rep_tables[H - 1] = Eigen::MatrixXd::Zero(mdp.states(H - 1) * A, Phi.front()[H - 1].cols());
  for (int h = 0; h < H; ++h) {
    Eigen::MatrixXd s(phi_loss[h].rows(), phi_loss[h].cols() + rep_tables[h].cols());
    s << phi_loss[h], rep_tables[h];
    pl.stacked.push_back(std::move(s));
  }
  pl.spanner_class = default_spanner_class(mdp);
  for (int h = 0; h < H; ++h) pl.spanners.push_back(spanner_build(mdp, pl.spanner_class, pl.stacked[h], h, 2.0));
  return pl;
}

inline RunRecord adaptive_run(const LowRankMDP& mdp, const FeatureClass& Phi, const FeatureMap& phi_loss,
                              Adversary& adversary, const AlgoParams& p, Rng& rng, AdaptivePipeline* diag = nullptr) {
  validate_params(p);
  detail::require_feature_class(Phi, mdp, "adaptive_run");
  if (static_cast<int>(phi_loss.size()) != mdp.horizon()) throw std::invalid_argument("adaptive_run: phi_loss has wrong horizon");
  const int K = epoch_count(p);
  if (K < 1) throw std::invalid_argument("adaptive_run: T too small for one epoch (T - T0 < N_reg)");
  const int H = mdp.horizon(), A = mdp.action_count(), d = mdp.rank();
  const double radius = p.l1_radius > 0.0 ? p.l1_radius : 4.0 * H * d * d;

  RunRecord rec = detail::start_record("adaptive", p);
  rec.realized_losses.emplace();
  rec.realized_losses->reserve(static_cast<std::size_t>(p.T));
  std::vector<Trajectory> history;
  history.reserve(static_cast<std::size_t>(p.T));
  auto play_round = [&](const std::shared_ptr<const PlayDistribution>& play, const Policy& pi, bool warm) {
    LossFunction loss = adversary.next_loss(history);
    Trajectory tr = sample_trajectory(mdp, pi, loss, rng);
    rec.realized_losses->push_back(std::move(loss));
    history.push_back(tr);
    const double sum = tr.loss_sum();
    rec.rounds.push_back({play, std::move(tr), sum, warm});
  };

  const auto unif = single_play(std::make_shared<const Policy>(uniform_policy(mdp)));
  for (int t = 0; t < p.T0; ++t) play_round(unif, *unif->front().policy, true);

  AdaptivePipeline pl = build_adaptive_pipeline(mdp, Phi, phi_loss, p, rng);
  if (!pl.cover.feasible) rec.log.push_back("policy cover: alpha not met, worst ratio " + std::to_string(pl.cover.worst_alpha()));

  auto cumulative = zero_tables(mdp);
  for (int k = 0; k < K; ++k) {
    auto pi_hat = std::make_shared<const Policy>(per_state_policy(cumulative, p.eta));
    std::vector<std::vector<std::shared_ptr<const Policy>>> explore(H);
    auto dist = std::make_shared<PlayDistribution>();
    dist->push_back({1.0 - p.nu, pi_hat, -1});
    for (int h = 0; h < H; ++h)
      for (int j : pl.spanners[h].members) {
        explore[h].push_back(std::make_shared<const Policy>(compose_policies(pl.spanner_class[j], *pi_hat, h + 1)));
        if (p.nu > 0.0)
          dist->push_back({p.nu / (H * static_cast<double>(pl.spanners[h].members.size())), explore[h].back(), -1});
      }
    const std::shared_ptr<const PlayDistribution> play = dist;

    // aggregated c_pi and b_pi per layer and spanner slot
    std::vector<Eigen::MatrixXd> c(H);
    std::vector<Eigen::VectorXd> b(H);
    for (int h = 0; h < H; ++h) {
      c[h] = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(explore[h].size()), pl.stacked[h].cols());
      b[h] = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(explore[h].size()));
    }
    const int first = p.T0 + k * p.N_reg;
    for (int t = first; t < first + p.N_reg; ++t) {
      const bool zeta = bernoulli(p.nu, rng);
      const int h_t = static_cast<int>(rng() % static_cast<std::uint64_t>(H));
      const int j = static_cast<int>(rng() % static_cast<std::uint64_t>(explore[h_t].size()));
      play_round(play, zeta ? *explore[h_t][j] : *pi_hat, false);
      if (zeta) {
        const Trajectory& tr = history.back();
        const Step& s = tr.steps[h_t];
        c[h_t].row(j) += pl.stacked[h_t].row(s.state * A + s.action);
        b[h_t](j) += tr.loss_to_go(h_t);
      }
    }

    EpochSnapshot snap;
    snap.epoch = k;
    snap.first_round = first;
    snap.rounds = p.N_reg;
    snap.policy = pi_hat;
    for (int h = 0; h < H; ++h) {
      std::vector<int> active;
      for (Eigen::Index r = 0; r < c[h].rows(); ++r)
        if (c[h].row(r).cwiseAbs().maxCoeff() > 0.0 || b[h](r) != 0.0) active.push_back(static_cast<int>(r));
      Eigen::MatrixXd ca(static_cast<Eigen::Index>(active.size()), c[h].cols());
      Eigen::VectorXd ba(static_cast<Eigen::Index>(active.size()));
      for (std::size_t i = 0; i < active.size(); ++i) {
        ca.row(static_cast<Eigen::Index>(i)) = c[h].row(active[i]);
        ba(static_cast<Eigen::Index>(i)) = b[h](active[i]);
      }
      const L1Fit fit = qfn_regression_l1(ca, ba, radius);
      snap.theta.push_back(fit.theta);
      snap.feature_index.push_back(-1);
      snap.samples.push_back(static_cast<int>(active.size()));
      snap.q_hat.push_back(detail::unflatten(pl.stacked[h] * fit.theta, mdp.states(h), A));
      cumulative[h] += snap.q_hat.back();
    }
    rec.epochs.push_back(std::move(snap));
  }

  const int tail = p.T0 + K * p.N_reg;
  if (tail < p.T) {
    auto last = std::make_shared<const Policy>(per_state_policy(cumulative, p.eta));
    const auto play = single_play(last);
    for (int t = tail; t < p.T; ++t) play_round(play, *last, false);
  }
  if (diag) *diag = std::move(pl);
  return rec;
}

}  // namespace lrarl
