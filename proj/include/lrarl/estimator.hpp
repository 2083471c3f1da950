#pragma once

// Off-policy loss estimator and exploration bonus for the model-based bandit
// learner, plus an exhaustive-expectation check of its bias.

#include <lrarl/core.hpp>
#include <lrarl/linalg.hpp>
#include <lrarl/mdp.hpp>

#include <cmath>
#include <stdexcept>
#include <vector>

namespace lrarl {

/// phi_hat[h] = E^pi[phi_model(x_h, a_h)] under the model, for every layer.
inline std::vector<Eigen::VectorXd> policy_features(const LowRankMDP& model, const Policy& pi) {
  const OccupancyMeasure occ = occupancy(model, pi);
  std::vector<Eigen::VectorXd> out;
  for (int h = 0; h < model.horizon(); ++h) out.push_back(expected_feature(model, occ, h));
  return out;
}

struct EstimatorState {
  std::vector<std::vector<Eigen::VectorXd>> phi_hat;  // [policy][layer]
  std::vector<Eigen::MatrixXd> sigma;                 // layers 0..H-2
  std::vector<Eigen::MatrixXd> sigma_pinv;
  Eigen::VectorXd rho;
  Eigen::VectorXd cumulative_loss;
  Eigen::VectorXd cumulative_bonus;

  int horizon() const { return phi_hat.empty() ? 0 : static_cast<int>(phi_hat.front().size()); }
};

inline EstimatorState make_estimator_state(const LowRankMDP& model, const std::vector<Policy>& cls) {
  EstimatorState s;
  for (const auto& pi : cls) s.phi_hat.push_back(policy_features(model, pi));
  const auto n = static_cast<Eigen::Index>(cls.size());
  s.rho = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
  s.cumulative_loss = Eigen::VectorXd::Zero(n);
  s.cumulative_bonus = Eigen::VectorXd::Zero(n);
  return s;
}

/// Sigma_h = sum_pi rho(pi) phi_hat_h(pi) phi_hat_h(pi)^T and its span pseudoinverse.
inline void set_mixture(EstimatorState& s, const Eigen::VectorXd& rho) {
  const int H = s.horizon();
  s.rho = rho;
  s.sigma.assign(H > 1 ? H - 1 : 0, Eigen::MatrixXd());
  s.sigma_pinv.assign(s.sigma.size(), Eigen::MatrixXd());
  for (int h = 0; h + 1 < H; ++h) {
    const Eigen::Index d = s.phi_hat.front()[h].size();
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(d, d);
    for (std::size_t i = 0; i < s.phi_hat.size(); ++i) {
      const double w = rho(static_cast<Eigen::Index>(i));
      if (w > 0.0) g.noalias() += w * s.phi_hat[i][h] * s.phi_hat[i][h].transpose();
    }
    s.sigma[h] = g;
    s.sigma_pinv[h] = span_pseudoinverse(g).pinv;
  }
}

/// Importance-weighted estimate of V^pi from one trajectory drawn under the
/// behavior policy: layer 0 is reweighted directly, later layers through
/// phi_hat_{h-1}(pi)^T Sigma_{h-1}^+ phi_hat_{h-1}(behavior).
inline double loss_estimate(const Policy& pi, const std::vector<Eigen::VectorXd>& phi_pi, const Policy& behavior,
                            const std::vector<Eigen::VectorXd>& phi_behavior, const Trajectory& traj,
                            const std::vector<Eigen::MatrixXd>& sigma_pinv) {
  const int H = static_cast<int>(traj.steps.size());
  double est = 0.0;
  for (int h = 0; h < H; ++h) {
    const Step& s = traj.steps[h];
    const double pb = behavior.prob(h, s.state, s.action);
    if (!(pb > 0.0)) throw std::logic_error("loss_estimate: visited pair has zero behavior probability");
    const double ratio = pi.prob(h, s.state, s.action) / pb;
    if (ratio == 0.0 || s.loss == 0.0) continue;
    const double link = h == 0 ? 1.0 : phi_pi[h - 1].dot(sigma_pinv[h - 1] * phi_behavior[h - 1]);
    est += link * ratio * s.loss;
  }
  return est;
}

/// sqrt(d) * H * eps * sum_{h < H-1} ||phi_hat_h(pi)||_{Sigma_h^+}.
inline double bonus(const std::vector<Eigen::VectorXd>& phi_pi, const std::vector<Eigen::MatrixXd>& sigma_pinv,
                    double eps, int d, int H) {
  double s = 0.0;
  for (std::size_t h = 0; h < sigma_pinv.size(); ++h) s += mahalanobis(phi_pi[h], sigma_pinv[h]);
  return std::sqrt(static_cast<double>(d)) * H * eps * s;
}

struct UnbiasednessReport {
  double max_deviation = 0.0;
  std::vector<double> deviation;   // |E[ell_hat(pi)] - V_model^pi|
  std::vector<double> bias_bound;  // sqrt(d) H delta sum_h ||phi_hat_h(pi)||
  double delta = 0.0;              // max over behavior policies and layers of the occupancy L1 gap
  double terms = 0.0;
};

/// Exhaustive E over behavior ~ rho and trajectories under the true MDP of
/// ell_hat(pi), compared against the model value of pi.
inline UnbiasednessReport estimator_unbiasedness_oracle(const LowRankMDP& truth, const LowRankMDP& model,
                                                       const std::vector<Policy>& cls, const Eigen::VectorXd& rho,
                                                       const LossFunction& loss, double max_terms = 1e6) {
  if (!truth.same_spaces(model)) throw std::invalid_argument("unbiasedness oracle: mismatched spaces");
  if (cls.empty() || rho.size() != static_cast<Eigen::Index>(cls.size()))
    throw std::invalid_argument("unbiasedness oracle: rho must match the class");
  double paths = 1.0;
  for (int h = 0; h < truth.horizon(); ++h) paths *= static_cast<double>(truth.states(h)) * truth.action_count();
  int support = 0;
  for (Eigen::Index i = 0; i < rho.size(); ++i) support += rho(i) > 0.0;
  UnbiasednessReport rep;
  rep.terms = paths * support;
  if (rep.terms > max_terms) throw std::invalid_argument("unbiasedness oracle: instance too large to enumerate");

  EstimatorState s = make_estimator_state(model, cls);
  set_mixture(s, rho);
  const int H = truth.horizon(), n = static_cast<int>(cls.size());
  std::vector<double> expectation(n, 0.0);
  for (int b = 0; b < n; ++b) {
    if (!(rho(b) > 0.0)) continue;
    const OccupancyMeasure dt = occupancy(truth, cls[b]), dm = occupancy(model, cls[b]);
    for (int h = 0; h < H; ++h)
      rep.delta = std::max(rep.delta, (dt.state_marginal(h) - dm.state_marginal(h)).cwiseAbs().sum());
    enumerate_trajectories(truth, cls[b], loss, [&](double p, const Trajectory& tr) {
      for (int i = 0; i < n; ++i)
        expectation[i] += rho(b) * p * loss_estimate(cls[i], s.phi_hat[i], cls[b], s.phi_hat[b], tr, s.sigma_pinv);
    });
  }
  for (int i = 0; i < n; ++i) {
    const double target = value(model, cls[i], loss);
    rep.deviation.push_back(std::abs(expectation[i] - target));
    double norms = 0.0;
    for (int h = 0; h + 1 < H; ++h) norms += mahalanobis(s.phi_hat[i][h], s.sigma_pinv[h]);
    rep.bias_bound.push_back(std::sqrt(static_cast<double>(model.rank())) * H * rep.delta * norms);
    rep.max_deviation = std::max(rep.max_deviation, rep.deviation.back());
  }
  return rep;
}

}  // namespace lrarl
