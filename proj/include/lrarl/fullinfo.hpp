#pragma once

// Full-information learner: estimate the transitions, then run per-state
// exponential weights on Q-functions evaluated under the estimate.

#include <lrarl/learner_common.hpp>
#include <lrarl/transition.hpp>

namespace lrarl {

inline RunRecord fullinfo_exp_run(const LowRankMDP& mdp, const LossSequence& losses, const AlgoParams& p,
                                  WarmupMode mode, Rng& rng) {
  validate_params(p);
  detail::require_losses(losses, mdp, p.T, "fullinfo_exp_run");
  RunRecord rec = detail::start_record("full-info", p);
  const auto warm = detail::play_warmup(mdp, losses, p.T0, rng, rec);
  const TransitionEstimate est = estimate_from_trajectories(mdp, warm, mode);
  if (!est.unvisited.empty())
    rec.log.push_back("transition estimate: " + std::to_string(est.unvisited.size()) + " unvisited pairs smoothed");

  auto cumulative = zero_tables(mdp);
  for (int t = p.T0; t < p.T; ++t) {
    auto pi = std::make_shared<const Policy>(per_state_policy(cumulative, p.eta));
    Trajectory tr = sample_trajectory(mdp, *pi, losses[t], rng);
    const QTable q = q_values(est.model, *pi, losses[t]);
    for (int h = 0; h < mdp.horizon(); ++h) cumulative[h] += q[h];
    const double sum = tr.loss_sum();
    rec.rounds.push_back({single_play(std::move(pi)), std::move(tr), sum, false});
  }
  return rec;
}

}  // namespace lrarl
