#pragma once

// Test-only helpers: random instances and an independent brute-force
// trajectory enumerator that does not use the library's DP code.

#include <lrarl/adversary.hpp>
#include <lrarl/core.hpp>
#include <lrarl/mdp.hpp>

#include <functional>
#include <vector>

namespace lrarl::testing {

inline InstanceSpec random_spec(Rng& rng, int max_h = 4, int max_states = 6, int max_a = 3, int max_d = 4) {
  InstanceSpec s;
  const int H = 1 + static_cast<int>(rng() % max_h);
  s.states_per_layer.push_back(1);
  for (int h = 1; h < H; ++h) s.states_per_layer.push_back(1 + static_cast<int>(rng() % max_states));
  s.action_count = 1 + static_cast<int>(rng() % max_a);
  int widest = 0;
  for (int x : s.states_per_layer) widest = std::max(widest, x);
  s.rank = 1 + static_cast<int>(rng() % std::min(max_d, widest * s.action_count));
  s.seed = rng();
  return s;
}

inline Policy random_policy(const LowRankMDP& mdp, Rng& rng) {
  Policy pi;
  for (int h = 0; h < mdp.horizon(); ++h) {
    Eigen::MatrixXd m(mdp.states(h), mdp.action_count());
    for (int x = 0; x < m.rows(); ++x) {
      double s = 0.0;
      for (int a = 0; a < m.cols(); ++a) s += (m(x, a) = uniform01(rng) + 1e-3);
      m.row(x) /= s;
    }
    pi.layers.push_back(m);
  }
  return pi;
}

inline LossFunction random_loss(const LowRankMDP& mdp, Rng& rng) {
  LossFunction l;
  for (int h = 0; h < mdp.horizon(); ++h) {
    Eigen::MatrixXd m(mdp.states(h), mdp.action_count());
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = uniform01(rng);
    l.ell.push_back(m);
  }
  return l;
}

/// P(x' | x, a) recomputed from raw phi and mu dot products.
inline double raw_transition(const LowRankMDP& mdp, int h, int x, int a, int y) {
  double s = 0.0;
  for (int k = 0; k < mdp.rank(); ++k) s += mdp.phi(h)(x * mdp.action_count() + a, k) * mdp.mu(h + 1)(y, k);
  return s < 0.0 ? 0.0 : s;
}

/// Visits every (state, action) path with its probability computed as a
/// product of raw phi^T mu entries and policy probabilities.
inline void brute_paths(const LowRankMDP& mdp, const Policy& pi,
                        const std::function<void(double, const std::vector<int>&, const std::vector<int>&)>& visit) {
  const int H = mdp.horizon(), A = mdp.action_count();
  std::vector<int> xs(H, 0), as(H, 0);
  std::function<void(int, double)> rec = [&](int h, double p) {
    for (int a = 0; a < A; ++a) {
      as[h] = a;
      const double pa = p * pi.layers[h](xs[h], a);
      if (h + 1 == H) {
        visit(pa, xs, as);
        continue;
      }
      for (int y = 0; y < mdp.states(h + 1); ++y) {
        xs[h + 1] = y;
        rec(h + 1, pa * raw_transition(mdp, h, xs[h], a, y));
      }
    }
  };
  rec(0, 1.0);
}

}  // namespace lrarl::testing
