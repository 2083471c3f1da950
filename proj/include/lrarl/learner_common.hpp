#pragma once

// Pieces shared by the learners: warm-up rounds and per-state weights.

#include <lrarl/core.hpp>
#include <lrarl/design.hpp>
#include <lrarl/mdp.hpp>
#include <lrarl/params.hpp>
#include <lrarl/run_record.hpp>

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace lrarl {

namespace detail {

inline void require_losses(const LossSequence& losses, const LowRankMDP& mdp, int T, const char* who) {
  if (static_cast<int>(losses.size()) < T)
    throw std::invalid_argument(std::string(who) + ": loss sequence shorter than T");
  if (!losses.empty()) require_loss(losses.front(), mdp, who);
}

/// Plays the uniform policy for T0 rounds and returns the trajectories.
inline std::vector<Trajectory> play_warmup(const LowRankMDP& mdp, const LossSequence& losses, int T0, Rng& rng,
                                           RunRecord& rec) {
  const auto unif = single_play(std::make_shared<const Policy>(uniform_policy(mdp)));
  std::vector<Trajectory> out;
  out.reserve(static_cast<std::size_t>(T0));
  for (int t = 0; t < T0; ++t) {
    Trajectory tr = sample_trajectory(mdp, *unif->front().policy, losses[t], rng);
    rec.rounds.push_back({unif, tr, tr.loss_sum(), true});
    out.push_back(std::move(tr));
  }
  return out;
}

inline RunRecord start_record(const std::string& name, const AlgoParams& p) {
  RunRecord rec;
  rec.learner = name;
  rec.T = p.T;
  rec.T0 = p.T0;
  rec.rounds.reserve(static_cast<std::size_t>(p.T));
  return rec;
}

}  // namespace detail

/// pi_h(a | x) proportional to exp(-eta * cumulative_h(x, a)).
inline Policy per_state_policy(const std::vector<Eigen::MatrixXd>& cumulative, double eta) {
  Policy pi;
  for (const auto& c : cumulative) pi.layers.push_back(exp_weights_rows(c, eta));
  return pi;
}

inline std::vector<Eigen::MatrixXd> zero_tables(const LowRankMDP& mdp) {
  std::vector<Eigen::MatrixXd> z;
  for (int h = 0; h < mdp.horizon(); ++h) z.push_back(Eigen::MatrixXd::Zero(mdp.states(h), mdp.action_count()));
  return z;
}

}  // namespace lrarl
