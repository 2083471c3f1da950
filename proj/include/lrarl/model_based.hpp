#pragma once

// Model-based learner for bandit feedback over a finite policy class:
// exponential weights on bonus-adjusted off-policy estimates, mixed with
// per-layer G-optimal exploration.

#include <lrarl/design.hpp>
#include <lrarl/estimator.hpp>
#include <lrarl/learner_common.hpp>
#include <lrarl/transition.hpp>

#include <sstream>

namespace lrarl {

inline RunRecord modelbased_bandit_run(const LowRankMDP& mdp, const std::vector<Policy>& policy_class,
                                       const LossSequence& losses, const AlgoParams& p, WarmupMode mode, Rng& rng) {
  validate_params(p);
  detail::require_losses(losses, mdp, p.T, "modelbased_bandit_run");
  if (policy_class.empty()) throw std::invalid_argument("modelbased_bandit_run: empty policy class");
  for (const auto& pi : policy_class)
    if (!is_valid_policy(pi, mdp)) throw std::invalid_argument("modelbased_bandit_run: invalid policy in class");
  RunRecord rec = detail::start_record("model-based-bandit", p);
  const auto warm = detail::play_warmup(mdp, losses, p.T0, rng, rec);
  const TransitionEstimate est = estimate_from_trajectories(mdp, warm, mode);
  const LowRankMDP& model = est.model;
  const int H = mdp.horizon(), n = static_cast<int>(policy_class.size());

  std::vector<std::shared_ptr<const Policy>> mixed;
  std::vector<Policy> mixed_values;
  for (const auto& pi : policy_class) {
    mixed_values.push_back(uniform_mix(pi, p.beta));
    mixed.push_back(std::make_shared<const Policy>(mixed_values.back()));
  }
  EstimatorState st = make_estimator_state(model, mixed_values);

  Eigen::VectorXd john = Eigen::VectorXd::Zero(n);
  if (H == 1) {
    john.setConstant(1.0 / n);
  } else {
    for (int h = 0; h + 1 < H; ++h) {
      std::vector<Eigen::VectorXd> v;
      for (int i = 0; i < n; ++i) v.push_back(st.phi_hat[i][h]);
      john += g_optimal_design(v).weights / static_cast<double>(H - 1);
    }
  }

  ExpWeightsState ew(n, p.eta);
  Eigen::VectorXd est_loss(n), bon(n);
  for (int t = p.T0; t < p.T; ++t) {
    const Eigen::VectorXd rho = (1.0 - p.gamma) * exp_weights(ew) + p.gamma * john;
    set_mixture(st, rho);
    const int b = sample_index(rho, rng);
    Trajectory tr = sample_trajectory(mdp, *mixed[b], losses[t], rng);
    for (int i = 0; i < n; ++i) {
      est_loss(i) = loss_estimate(mixed_values[i], st.phi_hat[i], mixed_values[b], st.phi_hat[b], tr, st.sigma_pinv);
      bon(i) = bonus(st.phi_hat[i], st.sigma_pinv, p.epsilon, model.rank(), H);
    }
    st.cumulative_loss += est_loss;
    st.cumulative_bonus += bon;
    const Eigen::VectorXd g = est_loss - bon;
    const double gmax = g.cwiseAbs().maxCoeff();
    if (ew.eta * gmax > 1.0) {
      if (rec.guardrail.first_violation_round < 0) rec.guardrail.first_violation_round = t;
      ++rec.guardrail.clamp_count;
      std::ostringstream msg;
      msg << "round " << t << ": eta " << ew.eta << " clamped to " << 1.0 / gmax;
      rec.log.push_back(msg.str());
      ew.eta = 1.0 / gmax;
    }
    ew.cumulative += g;

    auto dist = std::make_shared<PlayDistribution>();
    for (int i = 0; i < n; ++i)
      if (rho(i) > 0.0) dist->push_back({rho(i), mixed[i], i});
    const double sum = tr.loss_sum();
    rec.rounds.push_back({std::move(dist), std::move(tr), sum, false});
  }
  rec.guardrail.min_eta = ew.eta;
  return rec;
}

}  // namespace lrarl
