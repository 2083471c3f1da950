#pragma once

// Core value types for finite-horizon layered low-rank MDPs.
//
// Layers are indexed 0..H-1 and states are local to their layer. Layer 0 is
// the singleton initial layer {x_0}. Feature tables are stored row-major over
// (state, action): row index x * A + a.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace lrarl {

using Rng = std::mt19937_64;

/// Uniform double in [0, 1) built from the top 53 bits of one draw.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline bool bernoulli(double p, Rng& rng) { return uniform01(rng) < p; }

/// Inverse-CDF draw from a (not necessarily normalized) nonnegative weight vector.
template <typename Vec>
int sample_index(const Vec& weights, Rng& rng) {
  const auto n = static_cast<int>(weights.size());
  double total = 0.0;
  for (int i = 0; i < n; ++i) total += weights[i];
  if (!(total > 0.0)) throw std::invalid_argument("sample_index: weights have no mass");
  const double u = uniform01(rng) * total;
  double acc = 0.0;
  int last_positive = -1;
  for (int i = 0; i < n; ++i) {
    if (weights[i] <= 0.0) continue;
    acc += weights[i];
    last_positive = i;
    if (u < acc) return i;
  }
  return last_positive;
}

/// splitmix64 finalizer; used to derive independent per-run seeds.
inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b = 0) {
  std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

class LowRankMDP {
 public:
  static constexpr double kClipTolerance = 1e-12;

  /// phi[h] is (states(h) * A) x d; mu[h] is states(h) x d. mu[0] is ignored and
  /// may be empty (it is stored as zeros).
  LowRankMDP(std::vector<int> states_per_layer, int action_count, int rank,
             std::vector<Eigen::MatrixXd> phi, std::vector<Eigen::MatrixXd> mu)
      : states_(std::move(states_per_layer)),
        actions_(action_count),
        rank_(rank),
        phi_(std::move(phi)),
        mu_(std::move(mu)) {
    const int H = horizon();
    if (H < 1) throw std::invalid_argument("LowRankMDP: horizon must be positive");
    if (states_[0] != 1) throw std::invalid_argument("LowRankMDP: layer 0 must be a singleton");
    if (actions_ < 1 || rank_ < 1) throw std::invalid_argument("LowRankMDP: counts must be positive");
    for (int s : states_)
      if (s < 1) throw std::invalid_argument("LowRankMDP: every layer needs a state");
    if (static_cast<int>(phi_.size()) != H) throw std::invalid_argument("LowRankMDP: phi needs H layers");
    if (mu_.empty()) mu_.resize(H);
    if (static_cast<int>(mu_.size()) != H) throw std::invalid_argument("LowRankMDP: mu needs H layers");
    if (mu_[0].size() == 0) mu_[0] = Eigen::MatrixXd::Zero(1, rank_);
    for (int h = 0; h < H; ++h) {
      if (phi_[h].rows() != states_[h] * actions_ || phi_[h].cols() != rank_)
        throw std::invalid_argument("LowRankMDP: phi layer " + std::to_string(h) + " has wrong shape");
      if (mu_[h].rows() != states_[h] || mu_[h].cols() != rank_)
        throw std::invalid_argument("LowRankMDP: mu layer " + std::to_string(h) + " has wrong shape");
    }
    kernels_.resize(H > 1 ? H - 1 : 0);
    for (int h = 0; h + 1 < H; ++h) {
      Eigen::MatrixXd k = phi_[h] * mu_[h + 1].transpose();
      for (Eigen::Index i = 0; i < k.size(); ++i) {
        double& v = k.data()[i];
        if (v < 0.0 && v >= -kClipTolerance) v = 0.0;
      }
      kernels_[h] = std::move(k);
    }
  }

  /// Tabular embedding: one-hot (x, a) features of dimension max_h states(h) * A
  /// and mu columns holding the kernel rows.
  static LowRankMDP from_kernels(std::vector<int> states_per_layer, int action_count,
                                 const std::vector<Eigen::MatrixXd>& kernels) {
    const int H = static_cast<int>(states_per_layer.size());
    if (static_cast<int>(kernels.size()) != std::max(H - 1, 0))
      throw std::invalid_argument("from_kernels: need H-1 kernels");
    int d = 1;
    for (int s : states_per_layer) d = std::max(d, s * action_count);
    std::vector<Eigen::MatrixXd> phi(H), mu(H);
    for (int h = 0; h < H; ++h) {
      const int rows = states_per_layer[h] * action_count;
      phi[h] = Eigen::MatrixXd::Zero(rows, d);
      for (int r = 0; r < rows; ++r) phi[h](r, r) = 1.0;
      mu[h] = Eigen::MatrixXd::Zero(states_per_layer[h], d);
    }
    for (int h = 0; h + 1 < H; ++h) {
      const auto& k = kernels[h];
      if (k.rows() != states_per_layer[h] * action_count || k.cols() != states_per_layer[h + 1])
        throw std::invalid_argument("from_kernels: kernel " + std::to_string(h) + " has wrong shape");
      mu[h + 1].leftCols(k.rows()) = k.transpose();
    }
    return LowRankMDP(std::move(states_per_layer), action_count, d, std::move(phi), std::move(mu));
  }

  int horizon() const { return static_cast<int>(states_.size()); }
  int action_count() const { return actions_; }
  int rank() const { return rank_; }
  int states(int h) const { return states_.at(h); }
  const std::vector<int>& states_per_layer() const { return states_; }

  const Eigen::MatrixXd& phi(int h) const { return phi_.at(h); }
  Eigen::VectorXd phi(int h, int x, int a) const { return phi_.at(h).row(x * actions_ + a).transpose(); }
  const Eigen::MatrixXd& mu(int h) const { return mu_.at(h); }

  /// Clipped kernel for layer h -> h+1, rows indexed x * A + a.
  const Eigen::MatrixXd& kernel(int h) const {
    if (h < 0 || h + 1 >= horizon()) throw std::out_of_range("kernel: layer out of range");
    return kernels_[h];
  }

  bool same_spaces(const LowRankMDP& other) const {
    return states_ == other.states_ && actions_ == other.actions_;
  }

 private:
  std::vector<int> states_;
  int actions_;
  int rank_;
  std::vector<Eigen::MatrixXd> phi_;
  std::vector<Eigen::MatrixXd> mu_;
  std::vector<Eigen::MatrixXd> kernels_;
};

/// Markovian policy: layers[h] is states(h) x A, each row a distribution.
struct Policy {
  std::vector<Eigen::MatrixXd> layers;

  int horizon() const { return static_cast<int>(layers.size()); }
  double prob(int h, int x, int a) const { return layers[h](x, a); }
};

inline Policy uniform_policy(const LowRankMDP& mdp) {
  Policy pi;
  const double p = 1.0 / mdp.action_count();
  for (int h = 0; h < mdp.horizon(); ++h)
    pi.layers.push_back(Eigen::MatrixXd::Constant(mdp.states(h), mdp.action_count(), p));
  return pi;
}

/// actions[h][x] is the action taken in state x of layer h.
inline Policy deterministic_policy(const LowRankMDP& mdp, const std::vector<std::vector<int>>& actions) {
  if (static_cast<int>(actions.size()) != mdp.horizon())
    throw std::invalid_argument("deterministic_policy: need one action list per layer");
  Policy pi;
  for (int h = 0; h < mdp.horizon(); ++h) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(mdp.states(h), mdp.action_count());
    if (static_cast<int>(actions[h].size()) != mdp.states(h))
      throw std::invalid_argument("deterministic_policy: wrong state count");
    for (int x = 0; x < mdp.states(h); ++x) m(x, actions[h][x]) = 1.0;
    pi.layers.push_back(std::move(m));
  }
  return pi;
}

inline bool policy_matches(const Policy& pi, const LowRankMDP& mdp) {
  if (pi.horizon() != mdp.horizon()) return false;
  for (int h = 0; h < mdp.horizon(); ++h)
    if (pi.layers[h].rows() != mdp.states(h) || pi.layers[h].cols() != mdp.action_count()) return false;
  return true;
}

inline bool is_valid_policy(const Policy& pi, const LowRankMDP& mdp, double tol = 1e-12) {
  if (!policy_matches(pi, mdp)) return false;
  for (const auto& m : pi.layers) {
    if ((m.array() < 0.0).any()) return false;
    for (Eigen::Index x = 0; x < m.rows(); ++x)
      if (std::abs(m.row(x).sum() - 1.0) > tol) return false;
  }
  return true;
}

/// Per-layer loss table ell[h] (states(h) x A) with an optional linear witness
/// g[h] such that ell(h, x, a) = phi(h, x, a)^T g[h].
struct LossFunction {
  std::vector<Eigen::MatrixXd> ell;
  std::optional<std::vector<Eigen::VectorXd>> witness;

  double operator()(int h, int x, int a) const { return ell[h](x, a); }
  int horizon() const { return static_cast<int>(ell.size()); }
};

using LossSequence = std::vector<LossFunction>;

inline LossFunction zero_loss(const LowRankMDP& mdp) {
  LossFunction l;
  for (int h = 0; h < mdp.horizon(); ++h) l.ell.push_back(Eigen::MatrixXd::Zero(mdp.states(h), mdp.action_count()));
  return l;
}

/// Occupancy d(h, x, a); layers[h] is states(h) x A.
struct OccupancyMeasure {
  std::vector<Eigen::MatrixXd> layers;

  Eigen::VectorXd state_marginal(int h) const { return layers[h].rowwise().sum(); }
};

struct Step {
  int state = 0;
  int action = 0;
  double loss = 0.0;
};

struct Trajectory {
  std::vector<Step> steps;

  double loss_sum() const {
    double s = 0.0;
    for (const auto& st : steps) s += st.loss;
    return s;
  }
  /// Sum of realized losses from layer h to the end.
  double loss_to_go(int h) const {
    double s = 0.0;
    for (std::size_t i = static_cast<std::size_t>(h); i < steps.size(); ++i) s += steps[i].loss;
    return s;
  }
  bool operator==(const Trajectory& o) const {
    if (steps.size() != o.steps.size()) return false;
    for (std::size_t i = 0; i < steps.size(); ++i)
      if (steps[i].state != o.steps[i].state || steps[i].action != o.steps[i].action || steps[i].loss != o.steps[i].loss)
        return false;
    return true;
  }
};

/// Per-layer feature table with the same row layout as LowRankMDP::phi.
using FeatureMap = std::vector<Eigen::MatrixXd>;

inline FeatureMap true_features(const LowRankMDP& mdp) {
  FeatureMap f;
  for (int h = 0; h < mdp.horizon(); ++h) f.push_back(mdp.phi(h));
  return f;
}

}  // namespace lrarl
