#pragma once

// Instance and loss generators: latent-variable (simplex-feature) MDPs,
// oblivious linear or arbitrary loss streams, a history-targeting adaptive
// adversary, and the contextual-bandit lower-bound environment.

#include <lrarl/core.hpp>
#include <lrarl/mdp.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace lrarl {

enum class FeatureStyle { Simplex, OneHot };

struct InstanceSpec {
  std::vector<int> states_per_layer;  // states_per_layer[0] must be 1
  int action_count = 2;
  int rank = 2;
  FeatureStyle style = FeatureStyle::Simplex;
  std::uint64_t seed = 0;

  int horizon() const { return static_cast<int>(states_per_layer.size()); }
};

inline void validate_instance_spec(const InstanceSpec& spec) {
  if (spec.states_per_layer.empty()) throw std::invalid_argument("instance: horizon must be positive");
  if (spec.states_per_layer[0] != 1) throw std::invalid_argument("instance: layer 0 must hold exactly one state");
  if (spec.action_count < 1 || spec.rank < 1) throw std::invalid_argument("instance: counts must be positive");
  int widest = 0;
  for (int s : spec.states_per_layer) {
    if (s < 1) throw std::invalid_argument("instance: every layer needs at least one state");
    widest = std::max(widest, s);
  }
  if (spec.rank > spec.action_count * widest)
    throw std::invalid_argument("instance: rank exceeds A * max layer size");
}

namespace detail {
inline Eigen::VectorXd dirichlet_ones(int n, Rng& rng) {
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v(i) = -std::log(1.0 - uniform01(rng));
  const double s = v.sum();
  if (s > 0.0) return v / s;
  return Eigen::VectorXd::Constant(n, 1.0 / n);
}
}  // namespace detail

/// phi rows drawn from the d-simplex (or one-hot latent indices); each mu
/// column is a distribution over the next layer, so every kernel row is a
/// convex mixture of d latent kernels.
inline LowRankMDP gen_simplex_mdp(const InstanceSpec& spec) {
  validate_instance_spec(spec);
  Rng rng(mix_seed(spec.seed, 0x1157));
  const int H = spec.horizon(), A = spec.action_count, d = spec.rank;
  std::vector<Eigen::MatrixXd> phi(H), mu(H);
  for (int h = 0; h < H; ++h) {
    const int rows = spec.states_per_layer[h] * A;
    phi[h] = Eigen::MatrixXd::Zero(rows, d);
    for (int r = 0; r < rows; ++r) {
      if (spec.style == FeatureStyle::OneHot)
        phi[h](r, static_cast<int>(rng() % static_cast<std::uint64_t>(d))) = 1.0;
      else
        phi[h].row(r) = detail::dirichlet_ones(d, rng).transpose();
    }
    mu[h] = Eigen::MatrixXd::Zero(spec.states_per_layer[h], d);
    if (h > 0)
      for (int j = 0; j < d; ++j) mu[h].col(j) = detail::dirichlet_ones(spec.states_per_layer[h], rng);
  }
  return LowRankMDP(spec.states_per_layer, A, d, std::move(phi), std::move(mu));
}

enum class AdversaryKind { ObliviousLinear, ObliviousArbitrary, AdaptiveTargeting };

inline std::string to_string(AdversaryKind k) {
  switch (k) {
    case AdversaryKind::ObliviousLinear: return "oblivious-linear";
    case AdversaryKind::ObliviousArbitrary: return "oblivious-arbitrary";
    case AdversaryKind::AdaptiveTargeting: return "adaptive-targeting";
  }
  return "unknown";
}

struct AdversarySpec {
  AdversaryKind kind = AdversaryKind::ObliviousLinear;
  int T = 1;
  double norm_cap = 1.0;            // ||g|| <= norm_cap
  double targeting_strength = 0.5;  // tau
  double base_level = 0.5;          // epsilon in eps * 1 / sqrt(d)
  std::uint64_t seed = 0;
};

inline void validate_adversary_spec(const AdversarySpec& spec) {
  if (spec.T < 1) throw std::invalid_argument("adversary: T must be at least 1");
  if (!(spec.norm_cap > 0.0) || spec.norm_cap > 1.0) throw std::invalid_argument("adversary: norm cap must lie in (0, 1]");
  if (spec.targeting_strength < 0.0 || spec.base_level < 0.0)
    throw std::invalid_argument("adversary: targeting parameters must be nonnegative");
}

/// True when every feature row is nonnegative and sums to one.
inline bool has_simplex_features(const LowRankMDP& mdp, double tol = 1e-12) {
  for (int h = 0; h < mdp.horizon(); ++h) {
    const auto& f = mdp.phi(h);
    if ((f.array() < -tol).any()) return false;
    for (Eigen::Index r = 0; r < f.rows(); ++r)
      if (std::abs(f.row(r).sum() - 1.0) > tol) return false;
  }
  return true;
}

/// Loss ell(h, x, a) = phi(h, x, a)^T g[h] with the witness attached.
inline LossFunction make_linear_loss(const LowRankMDP& mdp, std::vector<Eigen::VectorXd> g) {
  if (static_cast<int>(g.size()) != mdp.horizon()) throw std::invalid_argument("make_linear_loss: need one g per layer");
  LossFunction l;
  for (int h = 0; h < mdp.horizon(); ++h) {
    const Eigen::VectorXd flat = mdp.phi(h) * g[h];
    Eigen::MatrixXd m = detail::unflatten(flat, mdp.states(h), mdp.action_count());
    l.ell.push_back(m.cwiseMax(0.0).cwiseMin(1.0));
  }
  l.witness = std::move(g);
  return l;
}

namespace detail {
inline Eigen::VectorXd cap_norm(Eigen::VectorXd v, double cap) {
  const double n = v.norm();
  if (n > cap) v *= cap / n;
  return v;
}
}  // namespace detail

inline LossSequence gen_linear_losses(const LowRankMDP& mdp, const AdversarySpec& spec) {
  validate_adversary_spec(spec);
  if (!has_simplex_features(mdp))
    throw std::invalid_argument("gen_linear_losses: features are not in the simplex; loss range cannot be certified");
  Rng rng(mix_seed(spec.seed, 0x1055));
  const int d = mdp.rank();
  LossSequence seq;
  seq.reserve(spec.T);
  for (int t = 0; t < spec.T; ++t) {
    std::vector<Eigen::VectorXd> g;
    for (int h = 0; h < mdp.horizon(); ++h) {
      Eigen::VectorXd w(d);
      for (int i = 0; i < d; ++i) w(i) = uniform01(rng);
      g.push_back(detail::cap_norm(std::move(w), spec.norm_cap));
    }
    seq.push_back(make_linear_loss(mdp, std::move(g)));
  }
  return seq;
}

/// Independent uniform [0, 1] entries; no linear witness.
inline LossSequence gen_arbitrary_losses(const LowRankMDP& mdp, const AdversarySpec& spec) {
  validate_adversary_spec(spec);
  Rng rng(mix_seed(spec.seed, 0xa4b1));
  LossSequence seq;
  seq.reserve(spec.T);
  for (int t = 0; t < spec.T; ++t) {
    LossFunction l;
    for (int h = 0; h < mdp.horizon(); ++h) {
      Eigen::MatrixXd m(mdp.states(h), mdp.action_count());
      for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = uniform01(rng);
      l.ell.push_back(std::move(m));
    }
    seq.push_back(std::move(l));
  }
  return seq;
}

/// Round-t loss of the targeting adversary, a deterministic function of the
/// history: g_h = cap(eps * 1 / sqrt(d) + tau * phi(h, x_h, a_h)) where (x_h, a_h)
/// is the previous episode's visit. Empty history gives the tau = 0 vector.
inline LossFunction gen_adaptive_losses(const LowRankMDP& mdp, std::span<const Trajectory> history,
                                        const AdversarySpec& spec) {
  if (spec.kind != AdversaryKind::AdaptiveTargeting)
    throw std::invalid_argument("gen_adaptive_losses: adversary kind must be adaptive-targeting");
  if (!has_simplex_features(mdp))
    throw std::invalid_argument("gen_adaptive_losses: features are not in the simplex");
  const int d = mdp.rank();
  const Eigen::VectorXd base = Eigen::VectorXd::Constant(d, spec.base_level / std::sqrt(static_cast<double>(d)));
  std::vector<Eigen::VectorXd> g;
  for (int h = 0; h < mdp.horizon(); ++h) {
    Eigen::VectorXd v = base;
    if (!history.empty()) {
      const Step& s = history.back().steps.at(h);
      v += spec.targeting_strength * mdp.phi(h, s.state, s.action);
    }
    g.push_back(detail::cap_norm(std::move(v), spec.norm_cap));
  }
  return make_linear_loss(mdp, std::move(g));
}

/// Source of per-round losses. Learners call next_loss with the full history
/// of earlier trajectories; oblivious sources ignore it.
class Adversary {
 public:
  virtual ~Adversary() = default;
  virtual LossFunction next_loss(std::span<const Trajectory> history) = 0;
  virtual bool adaptive() const = 0;
};

class SequenceAdversary final : public Adversary {
 public:
  explicit SequenceAdversary(const LossSequence& seq) : seq_(&seq) {}
  LossFunction next_loss(std::span<const Trajectory> history) override {
    if (history.size() >= seq_->size()) throw std::out_of_range("SequenceAdversary: loss sequence exhausted");
    return (*seq_)[history.size()];
  }
  bool adaptive() const override { return false; }

 private:
  const LossSequence* seq_;
};

class TargetingAdversary final : public Adversary {
 public:
  TargetingAdversary(const LowRankMDP& mdp, AdversarySpec spec) : mdp_(&mdp), spec_(spec) {
    validate_adversary_spec(spec_);
  }
  LossFunction next_loss(std::span<const Trajectory> history) override {
    return gen_adaptive_losses(*mdp_, history, spec_);
  }
  bool adaptive() const override { return true; }

 private:
  const LowRankMDP* mdp_;
  AdversarySpec spec_;
};

struct LowerBoundEnv {
  LowRankMDP mdp;
  LossSequence losses;
  int contexts = 0;
  int arms = 0;
  double delta = 0.0;
  double c_gap = 0.25;
  std::vector<int> optimal_arm;
  std::vector<std::vector<double>> arm_means;  // [context][arm]
};

inline double lower_bound_gap(int S, int A, int T, double c_gap) {
  return c_gap / std::sqrt(static_cast<double>(T) * A * S);
}

/// Two-layer MDP: a dummy initial state whose every action leads uniformly to S
/// contexts, each an A-armed Bernoulli bandit with one arm of mean 1/2 - Delta.
inline LowerBoundEnv gen_lower_bound_env(int S, int A, int T, double c_gap, Rng& rng) {
  if (S < 1 || A < 1 || T < 1) throw std::invalid_argument("lower bound: counts must be positive");
  if (!(4.0 * S < std::sqrt(static_cast<double>(T)))) throw std::invalid_argument("lower bound: requires 4S < sqrt(T)");
  const double delta = lower_bound_gap(S, A, T, c_gap);
  if (!(delta > 0.0 && delta < 0.5)) throw std::invalid_argument("lower bound: gap must lie in (0, 1/2)");
  std::vector<Eigen::MatrixXd> phi(2), mu(2);
  phi[0] = Eigen::MatrixXd::Ones(A, 1);
  phi[1] = Eigen::MatrixXd::Ones(S * A, 1);
  mu[0] = Eigen::MatrixXd::Zero(1, 1);
  mu[1] = Eigen::MatrixXd::Constant(S, 1, 1.0 / S);
  LowRankMDP mdp({1, S}, A, 1, std::move(phi), std::move(mu));

  std::vector<int> optimal(S);
  std::vector<std::vector<double>> means(S, std::vector<double>(A, 0.5));
  for (int s = 0; s < S; ++s) {
    optimal[s] = static_cast<int>(rng() % static_cast<std::uint64_t>(A));
    means[s][optimal[s]] = 0.5 - delta;
  }
  LossSequence losses;
  losses.reserve(T);
  for (int t = 0; t < T; ++t) {
    LossFunction l;
    l.ell.push_back(Eigen::MatrixXd::Zero(1, A));
    Eigen::MatrixXd m(S, A);
    for (int s = 0; s < S; ++s)
      for (int a = 0; a < A; ++a) m(s, a) = bernoulli(means[s][a], rng) ? 1.0 : 0.0;
    l.ell.push_back(std::move(m));
    losses.push_back(std::move(l));
  }
  return LowerBoundEnv{std::move(mdp), std::move(losses), S, A, delta, c_gap, std::move(optimal), std::move(means)};
}

}  // namespace lrarl
