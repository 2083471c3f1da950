#pragma once

// Small dense linear-algebra helpers shared by the design and learner code.

#include <Eigen/Dense>

#include <cmath>

namespace lrarl {

/// Symmetric pseudoinverse restricted to eigenvalues above rel_cutoff * lambda_max.
struct SpanInverse {
  Eigen::MatrixXd pinv;
  int rank = 0;
};

inline SpanInverse span_pseudoinverse(const Eigen::MatrixXd& g, double rel_cutoff = 1e-10) {
  const Eigen::MatrixXd sym = 0.5 * (g + g.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
  const Eigen::VectorXd& ev = es.eigenvalues();
  const double top = ev.size() > 0 ? ev.cwiseAbs().maxCoeff() : 0.0;
  SpanInverse out;
  out.pinv = Eigen::MatrixXd::Zero(g.rows(), g.cols());
  if (!(top > 0.0)) return out;
  const double cut = rel_cutoff * top;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev(i) <= cut) continue;
    const Eigen::VectorXd u = es.eigenvectors().col(i);
    out.pinv.noalias() += (u / ev(i)) * u.transpose();
    ++out.rank;
  }
  return out;
}

/// Scales v onto the Euclidean ball of the given radius when it lies outside.
inline Eigen::VectorXd project_ball(const Eigen::VectorXd& v, double radius) {
  const double n = v.norm();
  if (n > radius && n > 0.0) return v * (radius / n);
  return v;
}

/// sqrt(v^T M v), clamped at zero against round-off.
inline double mahalanobis(const Eigen::VectorXd& v, const Eigen::MatrixXd& m) {
  const double q = v.dot(m * v);
  return q > 0.0 ? std::sqrt(q) : 0.0;
}

}  // namespace lrarl
