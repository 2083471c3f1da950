#pragma once

// Exact policy covers: for each layer, at most d policies whose best state
// occupancy is within a factor alpha of the class maximum on every
// epsilon-reachable state.

#include <lrarl/core.hpp>
#include <lrarl/mdp.hpp>
#include <lrarl/spanner.hpp>

#include <algorithm>
#include <vector>

namespace lrarl {

struct PolicyCover {
  std::vector<std::vector<int>> members;  // per layer, indices into the class
  double alpha = 0.0;
  double epsilon = 0.0;
  std::vector<double> achieved_alpha;  // per layer worst ratio over reachable states
  bool feasible = true;

  double worst_alpha() const {
    double a = 1.0;
    for (double v : achieved_alpha) a = std::min(a, v);
    return a;
  }
};

namespace detail {
// occ[pi].col(h) holds d_h^pi over states(h); layout [pi][h] -> state vector.
inline std::vector<std::vector<Eigen::VectorXd>> state_occupancies(const LowRankMDP& mdp, const std::vector<Policy>& cls) {
  std::vector<std::vector<Eigen::VectorXd>> out;
  out.reserve(cls.size());
  for (const auto& pi : cls) {
    const OccupancyMeasure occ = occupancy(mdp, pi);
    std::vector<Eigen::VectorXd> layers;
    for (int h = 0; h < mdp.horizon(); ++h) layers.push_back(occ.state_marginal(h));
    out.push_back(std::move(layers));
  }
  return out;
}

inline std::vector<bool> reachable_states(const LowRankMDP& mdp, int h, const Eigen::VectorXd& best, double eps) {
  std::vector<bool> r(static_cast<std::size_t>(mdp.states(h)));
  for (int x = 0; x < mdp.states(h); ++x) r[x] = best(x) > 0.0 && best(x) >= eps * mdp.mu(h).row(x).norm();
  return r;
}

inline double cover_ratio(const std::vector<int>& chosen, const std::vector<std::vector<Eigen::VectorXd>>& occ, int h,
                          const Eigen::VectorXd& best, const std::vector<bool>& reach) {
  double worst = 1.0;
  for (int x = 0; x < best.size(); ++x) {
    if (!reach[x]) continue;
    double m = 0.0;
    for (int i : chosen) m = std::max(m, occ[i][h](x));
    worst = std::min(worst, m / best(x));
  }
  return worst;
}
}  // namespace detail

/// Greedy selection by fractional coverage gain, falling back to a C = 2
/// barycentric spanner of phi_{h-1}(pi) (ratio >= 1 / (2d)) when greedy misses alpha.
inline PolicyCover policy_cover_exact(const LowRankMDP& mdp, const std::vector<Policy>& cls, double alpha, double eps) {
  if (cls.empty()) throw std::invalid_argument("policy_cover_exact: empty policy class");
  const int H = mdp.horizon(), d = mdp.rank();
  const auto occ = detail::state_occupancies(mdp, cls);
  const int n = static_cast<int>(cls.size());
  PolicyCover cover;
  cover.alpha = alpha;
  cover.epsilon = eps;
  for (int h = 0; h < H; ++h) {
    Eigen::VectorXd best = Eigen::VectorXd::Zero(mdp.states(h));
    for (int i = 0; i < n; ++i) best = best.cwiseMax(occ[i][h]);
    const auto reach = detail::reachable_states(mdp, h, best, eps);

    std::vector<int> greedy;
    Eigen::VectorXd covered = Eigen::VectorXd::Zero(mdp.states(h));
    auto coverage = [&](int i, int x) { return std::min(1.0, occ[i][h](x) / (alpha * best(x))); };
    while (static_cast<int>(greedy.size()) < d) {
      int arg = -1;
      double gain_best = 0.0;
      for (int i = 0; i < n; ++i) {
        double gain = 0.0;
        for (int x = 0; x < mdp.states(h); ++x)
          if (reach[x]) gain += std::max(0.0, coverage(i, x) - covered(x));
        if (gain > gain_best + 1e-15) {
          gain_best = gain;
          arg = i;
        }
      }
      if (arg < 0) break;
      greedy.push_back(arg);
      for (int x = 0; x < mdp.states(h); ++x)
        if (reach[x]) covered(x) = std::max(covered(x), coverage(arg, x));
    }
    if (greedy.empty()) greedy.push_back(0);
    std::vector<int> chosen = greedy;
    double ratio = detail::cover_ratio(greedy, occ, h, best, reach);
    if (ratio < alpha && h > 0) {
      const auto sp = barycentric_spanner(class_expected_features(mdp, cls, mdp.phi(h - 1), h - 1), 2.0);
      const double sp_ratio = detail::cover_ratio(sp.members, occ, h, best, reach);
      if (sp_ratio > ratio) {
        chosen = sp.members;
        ratio = sp_ratio;
      }
    }
    cover.members.push_back(chosen);
    cover.achieved_alpha.push_back(ratio);
    cover.feasible = cover.feasible && ratio >= alpha;
  }
  return cover;
}

/// Worst ratio max_{psi in cover} d_h^psi(x) / max_{pi in class} d_h^pi(x)
/// over every layer and epsilon-reachable state, recomputed from scratch.
inline double cover_check(const PolicyCover& cover, const LowRankMDP& mdp, const std::vector<Policy>& cls) {
  double worst = 1.0;
  for (int h = 0; h < mdp.horizon(); ++h) {
    std::vector<OccupancyMeasure> members;
    for (int i : cover.members[h]) members.push_back(occupancy(mdp, cls[i]));
    Eigen::VectorXd best = Eigen::VectorXd::Zero(mdp.states(h));
    for (const auto& pi : cls) best = best.cwiseMax(occupancy(mdp, pi).state_marginal(h));
    for (int x = 0; x < mdp.states(h); ++x) {
      if (!(best(x) > 0.0) || best(x) < cover.epsilon * mdp.mu(h).row(x).norm()) continue;
      double m = 0.0;
      for (const auto& o : members) m = std::max(m, o.state_marginal(h)(x));
      worst = std::min(worst, m / best(x));
    }
  }
  return worst;
}

}  // namespace lrarl
