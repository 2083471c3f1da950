#pragma once

// Ball-constrained Q-function regressions: least squares over a finite
// feature class, and the aggregated L1 objective sum_pi |c_pi^T theta - b_pi|.

#include <lrarl/linalg.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

namespace lrarl {

/// design[k] is the n x d feature matrix of the k-th candidate map, rows
/// aligned with target.
struct LsProblem {
  std::vector<Eigen::MatrixXd> design;
  Eigen::VectorXd target;
};

struct LsFit {
  int feature_index = 0;
  Eigen::VectorXd theta;
  double objective = 0.0;
  bool no_samples = false;
};

inline double ls_objective(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Eigen::VectorXd& theta) {
  return (X * theta - y).squaredNorm();
}

/// Ridge-1e-10 normal equations, then scale-projection onto the ball.
inline Eigen::VectorXd ls_projected(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double radius) {
  Eigen::MatrixXd g = X.transpose() * X;
  g.diagonal().array() += 1e-10;
  return project_ball(g.ldlt().solve(X.transpose() * y), radius);
}

inline LsFit qfn_regression_ls(const LsProblem& prob, double radius) {
  if (prob.design.empty()) throw std::invalid_argument("qfn_regression_ls: empty feature class");
  LsFit fit;
  const Eigen::Index d = prob.design.front().cols();
  if (prob.target.size() == 0) {
    fit.theta = Eigen::VectorXd::Zero(d);
    fit.no_samples = true;
    return fit;
  }
  fit.objective = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < prob.design.size(); ++k) {
    const auto& X = prob.design[k];
    if (X.rows() != prob.target.size()) throw std::invalid_argument("qfn_regression_ls: row count mismatch");
    Eigen::VectorXd theta = ls_projected(X, prob.target, radius);
    const double obj = ls_objective(X, prob.target, theta);
    if (obj < fit.objective) {
      fit.objective = obj;
      fit.theta = std::move(theta);
      fit.feature_index = static_cast<int>(k);
    }
  }
  return fit;
}

struct L1Fit {
  Eigen::VectorXd theta;
  double objective = 0.0;
  bool no_active = false;
};

inline double l1_objective(const Eigen::MatrixXd& C, const Eigen::VectorXd& b, const Eigen::VectorXd& theta) {
  return (C * theta - b).cwiseAbs().sum();
}

namespace detail {
// Normalized projected subgradient from theta0; returns the best iterate
// (the running average is also considered).
inline Eigen::VectorXd l1_subgradient(const Eigen::MatrixXd& C, const Eigen::VectorXd& b, double radius,
                                      Eigen::VectorXd theta, double step0, int iterations) {
  Eigen::VectorXd best = theta, avg = Eigen::VectorXd::Zero(theta.size());
  double best_obj = l1_objective(C, b, theta);
  for (int k = 1; k <= iterations; ++k) {
    const Eigen::VectorXd r = C * theta - b;
    const Eigen::VectorXd s = r.unaryExpr([](double v) { return static_cast<double>((v > 0.0) - (v < 0.0)); });
    const Eigen::VectorXd g = C.transpose() * s;
    const double gn = g.norm();
    if (gn == 0.0) break;
    theta = project_ball(theta - (step0 / std::sqrt(static_cast<double>(k))) * g / gn, radius);
    avg += (theta - avg) / static_cast<double>(k);
    const double obj = l1_objective(C, b, theta);
    if (obj < best_obj) {
      best_obj = obj;
      best = theta;
    }
  }
  if (l1_objective(C, b, avg) < best_obj) best = avg;
  return best;
}

inline void for_each_subset(int n, int k, const std::function<void(const std::vector<int>&)>& f) {
  std::vector<int> idx(k);
  for (int i = 0; i < k; ++i) idx[i] = i;
  while (true) {
    f(idx);
    int i = k - 1;
    while (i >= 0 && idx[i] == n - k + i) --i;
    if (i < 0) return;
    ++idx[i];
    for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}
}  // namespace detail

/// Rows of C are the aggregated features c_pi; b holds the aggregated losses.
/// Projected subgradient (5000 steps of size 0.5 R / sqrt(k)), then restarts
/// with shrinking steps and candidate vertices where rank-many residuals vanish.
inline L1Fit qfn_regression_l1(const Eigen::MatrixXd& C, const Eigen::VectorXd& b, double radius) {
  if (C.rows() != b.size()) throw std::invalid_argument("qfn_regression_l1: row count mismatch");
  L1Fit fit;
  const Eigen::Index m = C.cols();
  fit.theta = Eigen::VectorXd::Zero(m);
  if (C.rows() == 0 || (C.cwiseAbs().maxCoeff() == 0.0 && b.cwiseAbs().maxCoeff() == 0.0)) {
    fit.no_active = C.rows() == 0 || C.cwiseAbs().maxCoeff() == 0.0;
    fit.objective = l1_objective(C, b, fit.theta);
    return fit;
  }
  Eigen::VectorXd best = detail::l1_subgradient(C, b, radius, fit.theta, 0.5 * radius, 5000);
  double best_obj = l1_objective(C, b, best);
  auto consider = [&](const Eigen::VectorXd& th) {
    const double o = l1_objective(C, b, th);
    if (o < best_obj) {
      best_obj = o;
      best = th;
    }
  };

  const int n = static_cast<int>(C.rows());
  Eigen::FullPivLU<Eigen::MatrixXd> lu(C);
  lu.setThreshold(1e-12);
  const int rank = static_cast<int>(lu.rank());
  double subsets = 1.0;
  for (int i = 0; i < rank; ++i) subsets *= static_cast<double>(n - i) / (i + 1);
  if (rank > 0 && subsets <= 20000.0) {
    detail::for_each_subset(n, rank, [&](const std::vector<int>& rows) {
      Eigen::MatrixXd Cs(rank, m);
      Eigen::VectorXd bs(rank);
      for (int i = 0; i < rank; ++i) {
        Cs.row(i) = C.row(rows[i]);
        bs(i) = b(rows[i]);
      }
      const Eigen::VectorXd th = Cs.completeOrthogonalDecomposition().solve(bs);
      if ((Cs * th - bs).norm() <= 1e-9 * (1.0 + bs.norm()) && th.norm() <= radius) consider(th);
    });
  }
  double step = 0.05 * radius;
  for (int stage = 0; stage < 8; ++stage, step *= 0.2)
    consider(detail::l1_subgradient(C, b, radius, best, step, 1500));
  fit.theta = best;
  fit.objective = best_obj;
  return fit;
}

}  // namespace lrarl
