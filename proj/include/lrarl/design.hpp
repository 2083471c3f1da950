#pragma once

// Exponential weights and G-optimal experimental design.

#include <lrarl/linalg.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace lrarl {

class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double best_leverage)
      : std::runtime_error(what), best_leverage_(best_leverage) {}
  double best_leverage() const { return best_leverage_; }

 private:
  double best_leverage_;
};

/// Weights over the full input list; zero-weight items stay in place.
struct Design {
  std::vector<Eigen::VectorXd> vectors;
  Eigen::VectorXd weights;
  Eigen::MatrixXd gram;
  Eigen::VectorXd leverage;
  int rank = 0;
  int iterations = 0;

  double max_leverage() const { return leverage.size() ? leverage.maxCoeff() : 0.0; }
};

struct DesignOptions {
  double tol = 0.01;
  long max_iter = -1;  // negative: 100 * m * log(m + 1)
  double rel_cutoff = 1e-10;
};

namespace detail {
inline Eigen::MatrixXd weighted_gram(const std::vector<Eigen::VectorXd>& v, const Eigen::VectorXd& w) {
  const Eigen::Index m = v.front().size();
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(m, m);
  for (std::size_t i = 0; i < v.size(); ++i)
    if (w(static_cast<Eigen::Index>(i)) > 0.0) g.noalias() += w(static_cast<Eigen::Index>(i)) * v[i] * v[i].transpose();
  return g;
}
inline Eigen::VectorXd leverages(const std::vector<Eigen::VectorXd>& v, const Eigen::MatrixXd& pinv) {
  Eigen::VectorXd l(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) l(static_cast<Eigen::Index>(i)) = std::max(0.0, v[i].dot(pinv * v[i]));
  return l;
}
}  // namespace detail

/// Frank-Wolfe for the G-optimal design. Starts uniform over the nonzero
/// vectors (a spanning subset that is permutation invariant) and stops once
/// max leverage <= r * (1 + tol) with r the rank of the span.
inline Design g_optimal_design(const std::vector<Eigen::VectorXd>& vectors, const DesignOptions& opt = {}) {
  if (vectors.empty()) throw std::invalid_argument("g_optimal_design: empty input");
  const Eigen::Index m = vectors.front().size();
  for (const auto& v : vectors)
    if (v.size() != m) throw std::invalid_argument("g_optimal_design: inconsistent vector dimensions");
  Design d;
  d.vectors = vectors;
  const auto n = static_cast<Eigen::Index>(vectors.size());
  d.weights = Eigen::VectorXd::Zero(n);
  int nonzero = 0;
  for (Eigen::Index i = 0; i < n; ++i)
    if (vectors[i].squaredNorm() > 0.0) {
      d.weights(i) = 1.0;
      ++nonzero;
    }
  if (nonzero == 0) throw std::invalid_argument("g_optimal_design: all input vectors are zero");
  d.weights /= nonzero;

  const long max_iter = opt.max_iter >= 0 ? opt.max_iter
                                          : static_cast<long>(std::ceil(100.0 * m * std::log(static_cast<double>(m) + 1.0)));
  d.gram = detail::weighted_gram(vectors, d.weights);
  SpanInverse inv = span_pseudoinverse(d.gram, opt.rel_cutoff);
  d.rank = inv.rank;
  const double r = d.rank;
  double best = std::numeric_limits<double>::infinity();
  for (long it = 0;; ++it) {
    d.leverage = detail::leverages(vectors, inv.pinv);
    Eigen::Index star = 0;
    const double top = d.leverage.maxCoeff(&star);
    best = std::min(best, top);
    d.iterations = static_cast<int>(it);
    if (top <= r * (1.0 + opt.tol)) return d;
    if (it >= max_iter)
      throw ConvergenceError("g_optimal_design: no convergence within " + std::to_string(max_iter) +
                                 " iterations (best max leverage " + std::to_string(best) + ")",
                             best);
    const double step = (top / r - 1.0) / (top - 1.0);
    d.weights *= (1.0 - step);
    d.weights(star) += step;
    d.gram = detail::weighted_gram(vectors, d.weights);
    inv = span_pseudoinverse(d.gram, opt.rel_cutoff);
  }
}

struct ExpWeightsState {
  Eigen::VectorXd cumulative;
  double eta = 1.0;

  ExpWeightsState() = default;
  ExpWeightsState(Eigen::Index n, double eta_) : cumulative(Eigen::VectorXd::Zero(n)), eta(eta_) {
    if (!(eta_ > 0.0)) throw std::invalid_argument("ExpWeightsState: eta must be positive");
  }
};

/// softmax(-eta * cumulative) with max subtraction.
inline Eigen::VectorXd exp_weights(const ExpWeightsState& s) {
  const Eigen::ArrayXd z = -s.eta * s.cumulative.array();
  const Eigen::ArrayXd e = (z - z.maxCoeff()).exp();
  return (e / e.sum()).matrix();
}

/// Row-wise softmax(-eta * cumulative) used by per-state weight tables.
inline Eigen::MatrixXd exp_weights_rows(const Eigen::MatrixXd& cumulative, double eta) {
  Eigen::MatrixXd out(cumulative.rows(), cumulative.cols());
  for (Eigen::Index r = 0; r < cumulative.rows(); ++r) {
    const Eigen::ArrayXd z = -eta * cumulative.row(r).transpose().array();
    const Eigen::ArrayXd e = (z - z.maxCoeff()).exp();
    out.row(r) = (e / e.sum()).matrix().transpose();
  }
  return out;
}

struct RegretCheck {
  double realized = 0.0;
  double bound = 0.0;
  bool holds() const { return realized <= bound + 1e-12 * (1.0 + std::abs(bound)); }
};

/// Runs exponential weights on a T x N loss matrix and returns the regret
/// against the best single item next to log N / eta + eta sum_t sum_i p g^2.
inline RegretCheck exp_weights_regret_check(const Eigen::MatrixXd& losses, double eta) {
  if (!(eta > 0.0)) throw std::invalid_argument("exp_weights_regret_check: eta must be positive");
  if ((eta * losses.array() < -1.0).any())
    throw std::domain_error("exp_weights_regret_check: eta * g >= -1 violated");
  const Eigen::Index T = losses.rows(), N = losses.cols();
  ExpWeightsState s(N, eta);
  double played = 0.0, second = 0.0;
  for (Eigen::Index t = 0; t < T; ++t) {
    const Eigen::VectorXd p = exp_weights(s);
    const Eigen::VectorXd g = losses.row(t).transpose();
    played += p.dot(g);
    second += p.dot(g.cwiseProduct(g));
    s.cumulative += g;
  }
  RegretCheck rc;
  rc.realized = T > 0 ? played - s.cumulative.minCoeff() : 0.0;
  rc.bound = std::log(static_cast<double>(N)) / eta + eta * second;
  if (!rc.holds()) throw std::logic_error("exp_weights_regret_check: realized regret exceeds bound");
  return rc;
}

}  // namespace lrarl
