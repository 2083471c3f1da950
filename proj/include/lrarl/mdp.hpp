#pragma once

// Exact dynamic programming over layered low-rank MDPs: validation,
// occupancies, values, sampling, policy composition, and numerical forms of
// the performance-difference and simulation inequalities.

#include <lrarl/core.hpp>

#include <algorithm>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace lrarl {

struct Violation {
  std::string kind;  // phi-norm | negative-probability | kernel-sum | mu-normalization | shape
  int layer = -1;
  int state = -1;
  int action = -1;
  int next_state = -1;
  double residual = 0.0;
};

using ValidationReport = std::vector<Violation>;

namespace detail {

// Largest ||sum_x g(x) mu(x)|| over vertices g of [0,1]^X. Exhaustive (Gray
// code) up to 20 states, otherwise singletons, all-ones and 1000 random vertices.
inline std::pair<double, std::vector<int>> max_mu_vertex_norm(const Eigen::MatrixXd& mu) {
  const int n = static_cast<int>(mu.rows());
  double best = 0.0;
  std::vector<int> best_vertex;
  auto consider = [&](const Eigen::VectorXd& s, const std::vector<int>& members) {
    const double v = s.norm();
    if (v > best) {
      best = v;
      best_vertex = members;
    }
  };
  if (n <= 20) {
    Eigen::VectorXd s = Eigen::VectorXd::Zero(mu.cols());
    std::vector<char> in(n, 0);
    const std::uint64_t total = 1ULL << n;
    for (std::uint64_t i = 1; i < total; ++i) {
      const int bit = __builtin_ctzll(i);
      in[bit] ^= 1;
      if (in[bit])
        s += mu.row(bit).transpose();
      else
        s -= mu.row(bit).transpose();
      const double v = s.norm();
      if (v > best) {
        best = v;
        best_vertex.clear();
        for (int k = 0; k < n; ++k)
          if (in[k]) best_vertex.push_back(k);
      }
    }
    return {best, best_vertex};
  }
  for (int x = 0; x < n; ++x) consider(mu.row(x).transpose(), {x});
  {
    std::vector<int> all(n);
    for (int x = 0; x < n; ++x) all[x] = x;
    consider(mu.colwise().sum().transpose(), all);
  }
  Rng rng(0x5eed);
  for (int k = 0; k < 1000; ++k) {
    Eigen::VectorXd s = Eigen::VectorXd::Zero(mu.cols());
    std::vector<int> members;
    for (int x = 0; x < n; ++x)
      if (rng() & 1ULL) {
        s += mu.row(x).transpose();
        members.push_back(x);
      }
    consider(s, members);
  }
  return {best, best_vertex};
}

}  // namespace detail

/// Lists every violated structural invariant with coordinates and residual.
inline ValidationReport validate_mdp(const LowRankMDP& mdp) {
  ValidationReport report;
  const int H = mdp.horizon(), A = mdp.action_count();
  for (int h = 0; h < H; ++h) {
    for (int x = 0; x < mdp.states(h); ++x)
      for (int a = 0; a < A; ++a) {
        const double n = mdp.phi(h).row(x * A + a).norm();
        if (n > 1.0 + 1e-12) report.push_back({"phi-norm", h, x, a, -1, n - 1.0});
      }
  }
  for (int h = 0; h + 1 < H; ++h) {
    const Eigen::MatrixXd raw = mdp.phi(h) * mdp.mu(h + 1).transpose();
    for (int x = 0; x < mdp.states(h); ++x)
      for (int a = 0; a < A; ++a) {
        const int r = x * A + a;
        for (int y = 0; y < mdp.states(h + 1); ++y)
          if (raw(r, y) < -LowRankMDP::kClipTolerance) report.push_back({"negative-probability", h, x, a, y, raw(r, y)});
        const double sum = raw.row(r).sum();
        if (std::abs(sum - 1.0) > 1e-10) report.push_back({"kernel-sum", h, x, a, -1, sum - 1.0});
      }
  }
  const double cap = std::sqrt(static_cast<double>(mdp.rank())) + 1e-10;
  for (int h = 1; h < H; ++h) {
    const auto [norm, vertex] = detail::max_mu_vertex_norm(mdp.mu(h));
    if (norm > cap) report.push_back({"mu-normalization", h, vertex.empty() ? -1 : vertex.front(), -1, -1, norm - cap + 1e-10});
  }
  return report;
}

/// P(. | x, a) at layer h as a vector over states(h + 1).
inline Eigen::VectorXd transition_row(const LowRankMDP& mdp, int h, int x, int a) {
  if (h < 0 || h + 1 >= mdp.horizon()) throw std::out_of_range("transition_row: layer out of range");
  if (x < 0 || x >= mdp.states(h) || a < 0 || a >= mdp.action_count())
    throw std::out_of_range("transition_row: state or action out of range");
  return mdp.kernel(h).row(x * mdp.action_count() + a).transpose();
}

namespace detail {
inline void require_policy(const Policy& pi, const LowRankMDP& mdp, const char* who) {
  if (!policy_matches(pi, mdp)) throw std::invalid_argument(std::string(who) + ": policy dimensions do not match MDP");
}
inline void require_loss(const LossFunction& l, const LowRankMDP& mdp, const char* who) {
  bool ok = l.horizon() == mdp.horizon();
  for (int h = 0; ok && h < mdp.horizon(); ++h)
    ok = l.ell[h].rows() == mdp.states(h) && l.ell[h].cols() == mdp.action_count();
  if (!ok) throw std::invalid_argument(std::string(who) + ": loss dimensions do not match MDP");
}
// Flatten a states x A matrix into the x * A + a layout.
inline Eigen::VectorXd flatten(const Eigen::MatrixXd& m) {
  Eigen::VectorXd v(m.size());
  const auto A = m.cols();
  for (Eigen::Index x = 0; x < m.rows(); ++x)
    for (Eigen::Index a = 0; a < A; ++a) v(x * A + a) = m(x, a);
  return v;
}
inline Eigen::MatrixXd unflatten(const Eigen::VectorXd& v, int states, int A) {
  Eigen::MatrixXd m(states, A);
  for (int x = 0; x < states; ++x)
    for (int a = 0; a < A; ++a) m(x, a) = v(x * A + a);
  return m;
}
}  // namespace detail

inline OccupancyMeasure occupancy(const LowRankMDP& mdp, const Policy& pi) {
  detail::require_policy(pi, mdp, "occupancy");
  const int H = mdp.horizon();
  OccupancyMeasure occ;
  occ.layers.resize(H);
  occ.layers[0] = pi.layers[0];
  for (int h = 0; h + 1 < H; ++h) {
    const Eigen::VectorXd next_states = mdp.kernel(h).transpose() * detail::flatten(occ.layers[h]);
    occ.layers[h + 1] = pi.layers[h + 1].array().colwise() * next_states.array();
  }
  return occ;
}

/// Occupancy-weighted average feature at layer h.
inline Eigen::VectorXd expected_feature(const LowRankMDP& mdp, const OccupancyMeasure& occ, int h) {
  if (h < 0 || h >= mdp.horizon()) throw std::out_of_range("expected_feature: layer out of range");
  return mdp.phi(h).transpose() * detail::flatten(occ.layers[h]);
}

inline Eigen::VectorXd expected_feature(const LowRankMDP& mdp, const Policy& pi, int h) {
  if (h < 0 || h >= mdp.horizon()) throw std::out_of_range("expected_feature: layer out of range");
  return expected_feature(mdp, occupancy(mdp, pi), h);
}

/// Expected features of an arbitrary feature table under an occupancy.
inline Eigen::VectorXd expected_feature(const Eigen::MatrixXd& features, const OccupancyMeasure& occ, int h) {
  return features.transpose() * detail::flatten(occ.layers[h]);
}

using QTable = std::vector<Eigen::MatrixXd>;

inline QTable q_values(const LowRankMDP& mdp, const Policy& pi, const LossFunction& loss) {
  detail::require_policy(pi, mdp, "q_values");
  detail::require_loss(loss, mdp, "q_values");
  const int H = mdp.horizon(), A = mdp.action_count();
  QTable q(H);
  q[H - 1] = loss.ell[H - 1];
  for (int h = H - 2; h >= 0; --h) {
    const Eigen::VectorXd v_next = (pi.layers[h + 1].array() * q[h + 1].array()).rowwise().sum();
    const Eigen::VectorXd cont = mdp.kernel(h) * v_next;
    q[h] = loss.ell[h] + detail::unflatten(cont, mdp.states(h), A);
  }
  return q;
}

inline double value(const LowRankMDP& mdp, const Policy& pi, const LossFunction& loss) {
  const QTable q = q_values(mdp, pi, loss);
  return (pi.layers[0].row(0).array() * q[0].row(0).array()).sum();
}

/// V via occupancies: sum over (h, x, a) of d * ell. Same value as value().
inline double value_from_occupancy(const OccupancyMeasure& occ, const LossFunction& loss) {
  double v = 0.0;
  for (std::size_t h = 0; h < occ.layers.size(); ++h) v += (occ.layers[h].array() * loss.ell[h].array()).sum();
  return v;
}

inline Trajectory sample_trajectory(const LowRankMDP& mdp, const Policy& pi, const LossFunction& loss, Rng& rng) {
  const int H = mdp.horizon(), A = mdp.action_count();
  Trajectory traj;
  traj.steps.reserve(H);
  int x = 0;
  for (int h = 0; h < H; ++h) {
    const int a = sample_index(pi.layers[h].row(x), rng);
    traj.steps.push_back({x, a, loss.ell[h](x, a)});
    if (h + 1 < H) x = sample_index(mdp.kernel(h).row(x * A + a), rng);
  }
  return traj;
}

/// Layers < switch_layer from pi, layers >= switch_layer from pi_prime.
inline Policy compose_policies(const Policy& pi, const Policy& pi_prime, int switch_layer) {
  if (pi.horizon() != pi_prime.horizon()) throw std::invalid_argument("compose_policies: horizon mismatch");
  if (switch_layer < 0 || switch_layer > pi.horizon()) throw std::out_of_range("compose_policies: invalid switch layer");
  Policy out;
  out.layers.reserve(pi.horizon());
  for (int h = 0; h < pi.horizon(); ++h) out.layers.push_back(h < switch_layer ? pi.layers[h] : pi_prime.layers[h]);
  return out;
}

/// Rows become (1 - beta) * pi + beta / A.
inline Policy uniform_mix(const Policy& pi, double beta) {
  if (beta < 0.0 || beta > 1.0) throw std::invalid_argument("uniform_mix: beta must lie in [0, 1]");
  Policy out = pi;
  for (auto& m : out.layers) m = ((1.0 - beta) * m.array() + beta / static_cast<double>(m.cols())).matrix();
  return out;
}

/// Number of deterministic Markov policies, saturating at limit + 1.
inline std::uint64_t deterministic_policy_count(const LowRankMDP& mdp, std::uint64_t limit) {
  std::uint64_t n = 1;
  for (int h = 0; h < mdp.horizon(); ++h)
    for (int x = 0; x < mdp.states(h); ++x) {
      n *= static_cast<std::uint64_t>(mdp.action_count());
      if (n > limit) return limit + 1;
    }
  return n;
}

/// All deterministic Markov policies in odometer order (first state varies fastest).
inline std::vector<Policy> enumerate_deterministic_policies(const LowRankMDP& mdp, std::uint64_t limit = 1 << 16) {
  const std::uint64_t n = deterministic_policy_count(mdp, limit);
  if (n > limit) throw std::invalid_argument("enumerate_deterministic_policies: class too large");
  std::vector<std::vector<int>> actions(mdp.horizon());
  for (int h = 0; h < mdp.horizon(); ++h) actions[h].assign(mdp.states(h), 0);
  std::vector<int*> digits;
  for (auto& layer : actions)
    for (int& a : layer) digits.push_back(&a);
  std::vector<Policy> out;
  out.reserve(n);
  for (std::uint64_t k = 0; k < n; ++k) {
    out.push_back(deterministic_policy(mdp, actions));
    for (int* digit : digits) {
      if (++*digit < mdp.action_count()) break;
      *digit = 0;
    }
  }
  return out;
}

/// Policies that play one fixed action per layer regardless of state (A^H of them).
inline std::vector<Policy> layer_constant_policies(const LowRankMDP& mdp) {
  const int H = mdp.horizon(), A = mdp.action_count();
  std::uint64_t n = 1;
  for (int h = 0; h < H; ++h) n *= static_cast<std::uint64_t>(A);
  std::vector<Policy> out;
  for (std::uint64_t k = 0; k < n; ++k) {
    std::uint64_t code = k;
    std::vector<std::vector<int>> actions(H);
    for (int h = 0; h < H; ++h) {
      actions[h].assign(mdp.states(h), static_cast<int>(code % A));
      code /= A;
    }
    out.push_back(deterministic_policy(mdp, actions));
  }
  return out;
}

/// For every layer h and state x, a deterministic policy maximizing d_h(x).
/// Result is ordered by (layer, state).
inline std::vector<Policy> reaching_policies(const LowRankMDP& mdp) {
  const int H = mdp.horizon(), A = mdp.action_count();
  std::vector<Policy> out;
  for (int target_h = 0; target_h < H; ++target_h)
    for (int target_x = 0; target_x < mdp.states(target_h); ++target_x) {
      std::vector<std::vector<int>> actions(H);
      for (int h = 0; h < H; ++h) actions[h].assign(mdp.states(h), 0);
      Eigen::VectorXd reach = Eigen::VectorXd::Zero(mdp.states(target_h));
      reach(target_x) = 1.0;
      for (int h = target_h - 1; h >= 0; --h) {
        const Eigen::VectorXd cont = mdp.kernel(h) * reach;
        Eigen::VectorXd best(mdp.states(h));
        for (int x = 0; x < mdp.states(h); ++x) {
          int arg = 0;
          for (int a = 1; a < A; ++a)
            if (cont(x * A + a) > cont(x * A + arg)) arg = a;
          actions[h][x] = arg;
          best(x) = cont(x * A + arg);
        }
        reach = best;
      }
      out.push_back(deterministic_policy(mdp, actions));
    }
  return out;
}

struct PdlGap {
  double lhs = 0.0;      // V^{pi'} - V^{pi}
  double rhs = 0.0;      // sum_h E_{d^{pi'}_h} <pi' - pi, Q^{pi}_h>
  double rhs_alt = 0.0;  // sum_h E_{d^{pi}_h} <pi' - pi, Q^{pi'}_h>
  double residual = 0.0;
  double residual_alt = 0.0;
};

inline PdlGap pdl_gap(const LowRankMDP& mdp, const Policy& pi, const Policy& pi_prime, const LossFunction& loss) {
  const QTable q_pi = q_values(mdp, pi, loss);
  const QTable q_pp = q_values(mdp, pi_prime, loss);
  const OccupancyMeasure d_pi = occupancy(mdp, pi);
  const OccupancyMeasure d_pp = occupancy(mdp, pi_prime);
  PdlGap g;
  const double v_pi = (pi.layers[0].row(0).array() * q_pi[0].row(0).array()).sum();
  const double v_pp = (pi_prime.layers[0].row(0).array() * q_pp[0].row(0).array()).sum();
  g.lhs = v_pp - v_pi;
  for (int h = 0; h < mdp.horizon(); ++h) {
    const Eigen::MatrixXd diff = pi_prime.layers[h] - pi.layers[h];
    const Eigen::VectorXd adv = (diff.array() * q_pi[h].array()).rowwise().sum();
    const Eigen::VectorXd adv_alt = (diff.array() * q_pp[h].array()).rowwise().sum();
    g.rhs += d_pp.state_marginal(h).dot(adv);
    g.rhs_alt += d_pi.state_marginal(h).dot(adv_alt);
  }
  g.residual = std::abs(g.lhs - g.rhs);
  g.residual_alt = std::abs(g.lhs - g.rhs_alt);
  return g;
}

struct SimulationGap {
  double value_gap = 0.0;    // |V_est - V_true|
  double value_bound = 0.0;  // H * sum_h E_{d_h true} ||P_est - P_true||_1
  std::vector<double> occupancy_gap;    // per layer sum_x |d_est - d_true|
  std::vector<double> occupancy_bound;  // per layer sum_{i<h} E ||P_est - P_true||_1
};

inline SimulationGap simulation_gap(const LowRankMDP& mdp_est, const LowRankMDP& mdp_true, const Policy& pi,
                                    const LossFunction& loss) {
  if (!mdp_est.same_spaces(mdp_true)) throw std::invalid_argument("simulation_gap: mismatched spaces");
  const int H = mdp_true.horizon();
  const OccupancyMeasure d_true = occupancy(mdp_true, pi);
  const OccupancyMeasure d_est = occupancy(mdp_est, pi);
  SimulationGap g;
  g.value_gap = std::abs(value(mdp_est, pi, loss) - value(mdp_true, pi, loss));
  std::vector<double> layer_err(H, 0.0);
  for (int h = 0; h + 1 < H; ++h) {
    const Eigen::VectorXd l1 = (mdp_est.kernel(h) - mdp_true.kernel(h)).cwiseAbs().rowwise().sum();
    const Eigen::VectorXd d = detail::flatten(d_true.layers[h]);
    layer_err[h] = d.dot(l1);
  }
  double total = 0.0;
  for (double e : layer_err) total += e;
  g.value_bound = H * total;
  double prefix = 0.0;
  for (int h = 0; h < H; ++h) {
    g.occupancy_gap.push_back((d_est.state_marginal(h) - d_true.state_marginal(h)).cwiseAbs().sum());
    g.occupancy_bound.push_back(prefix);
    prefix += layer_err[h];
  }
  return g;
}

/// Calls visit(probability, trajectory) for every trajectory with positive
/// probability under pi. Used by exhaustive-expectation oracles.
inline void enumerate_trajectories(const LowRankMDP& mdp, const Policy& pi, const LossFunction& loss,
                                   const std::function<void(double, const Trajectory&)>& visit) {
  const int H = mdp.horizon(), A = mdp.action_count();
  Trajectory traj;
  traj.steps.resize(H);
  std::function<void(int, int, double)> rec = [&](int h, int x, double p) {
    for (int a = 0; a < A; ++a) {
      const double pa = p * pi.layers[h](x, a);
      if (pa <= 0.0) continue;
      traj.steps[h] = {x, a, loss.ell[h](x, a)};
      if (h + 1 == H) {
        visit(pa, traj);
        continue;
      }
      const auto row = mdp.kernel(h).row(x * A + a);
      for (int y = 0; y < mdp.states(h + 1); ++y)
        if (row(y) > 0.0) rec(h + 1, y, pa * row(y));
    }
  };
  rec(0, 0, 1.0);
}

}  // namespace lrarl
