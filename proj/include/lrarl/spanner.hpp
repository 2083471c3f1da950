#pragma once

// Barycentric spanners over expected feature vectors of a finite policy class.

#include <lrarl/core.hpp>
#include <lrarl/mdp.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace lrarl {

struct SpannerResult {
  std::vector<int> members;               // indices into the input list, one per basis slot
  std::vector<Eigen::VectorXd> features;  // feature vector of each member
  int dimension = 0;                      // ambient dimension D
  int rank = 0;                           // dimension of the span, = members.size()
  bool degenerate = false;                // rank < D
  double C = 2.0;
  double eps_span = 0.0;                  // residual bound certified by spanner_check
  int swaps = 0;
};

/// Greedy max-|det| basis followed by C-approximate swaps, in the basis of
/// the span. Every input then has coefficients |beta| <= C on the members.
inline SpannerResult barycentric_spanner(const std::vector<Eigen::VectorXd>& points, double C = 2.0) {
  if (points.empty()) throw std::invalid_argument("spanner: empty policy class");
  if (!(C > 1.0)) throw std::invalid_argument("spanner: C must exceed 1");
  const Eigen::Index D = points.front().size();
  const auto n = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd V(D, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (points[i].size() != D) throw std::invalid_argument("spanner: inconsistent dimensions");
    V.col(i) = points[i];
  }
  SpannerResult res;
  res.dimension = static_cast<int>(D);
  res.C = C;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(V, Eigen::ComputeThinU);
  const Eigen::VectorXd& sv = svd.singularValues();
  const double top = sv.size() ? sv(0) : 0.0;
  int r = 0;
  for (Eigen::Index k = 0; k < sv.size(); ++k) r += top > 0.0 && sv(k) > 1e-10 * top;
  if (r == 0) throw std::invalid_argument("spanner: all feature vectors are zero");
  const Eigen::MatrixXd U = svd.matrixU().leftCols(r);
  const Eigen::MatrixXd Y = U.transpose() * V;  // r x n coordinates in the span

  Eigen::MatrixXd B = Eigen::MatrixXd::Identity(r, r);
  std::vector<int> slot(r, -1);
  for (int i = 0; i < r; ++i) {
    const Eigen::FullPivLU<Eigen::MatrixXd> lu(B);
    Eigen::Index best = 0;
    double best_abs = -1.0;
    const Eigen::MatrixXd coef = lu.solve(Y);
    for (Eigen::Index j = 0; j < n; ++j)
      if (std::abs(coef(i, j)) > best_abs) {
        best_abs = std::abs(coef(i, j));
        best = j;
      }
    B.col(i) = Y.col(best);
    slot[i] = static_cast<int>(best);
  }
  // |det(B with slot i replaced by y)| / |det B| = |(B^{-1} y)_i|
  const int max_swaps = 1000 * (r + 1);
  for (bool improved = true; improved && res.swaps < max_swaps;) {
    improved = false;
    const Eigen::MatrixXd coef = Eigen::FullPivLU<Eigen::MatrixXd>(B).solve(Y);
    Eigen::Index bi = 0, bj = 0;
    const double worst = coef.cwiseAbs().maxCoeff(&bi, &bj);
    if (worst > C) {
      B.col(bi) = Y.col(bj);
      slot[bi] = static_cast<int>(bj);
      ++res.swaps;
      improved = true;
    }
  }
  res.members = slot;
  for (int j : slot) res.features.push_back(points[j]);
  res.rank = r;
  res.degenerate = r < D;
  // out-of-span residual of the inputs bounds the reconstruction error
  double resid = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) resid = std::max(resid, (V.col(i) - U * Y.col(i)).norm());
  res.eps_span = std::max(1e-9, 10.0 * resid) * std::max(1.0, top);
  return res;
}

/// E^pi[features_h(x_h, a_h)] for every policy in the class.
inline std::vector<Eigen::VectorXd> class_expected_features(const LowRankMDP& mdp, const std::vector<Policy>& cls,
                                                            const Eigen::MatrixXd& features, int h) {
  std::vector<Eigen::VectorXd> out;
  out.reserve(cls.size());
  for (const auto& pi : cls) out.push_back(expected_feature(features, occupancy(mdp, pi), h));
  return out;
}

inline SpannerResult spanner_build(const LowRankMDP& mdp, const std::vector<Policy>& cls,
                                   const Eigen::MatrixXd& stacked_feature, int h, double C = 2.0) {
  if (stacked_feature.rows() != mdp.states(h) * mdp.action_count())
    throw std::invalid_argument("spanner_build: feature table has wrong row count");
  return barycentric_spanner(class_expected_features(mdp, cls, stacked_feature, h), C);
}

struct SpannerCheck {
  double max_residual = 0.0;
  double max_abs_beta = 0.0;
};

/// min over |beta_j| <= C of ||sum_j beta_j v_j - v||: warm start from the
/// unconstrained least-squares solution clipped to the box, then projected
/// gradient.
inline std::pair<Eigen::VectorXd, double> box_least_squares(const Eigen::MatrixXd& M, const Eigen::VectorXd& v, double C,
                                                            int iterations = 1000, double tol = 1e-9) {
  const Eigen::VectorXd ls = M.colPivHouseholderQr().solve(v);
  Eigen::VectorXd beta = ls.cwiseMax(-C).cwiseMin(C);
  const double L = std::max(1e-300, M.operatorNorm() * M.operatorNorm());
  double res = (M * beta - v).norm();
  for (int it = 0; it < iterations && res > tol; ++it) {
    const Eigen::VectorXd grad = M.transpose() * (M * beta - v);
    const Eigen::VectorXd next = (beta - grad / L).cwiseMax(-C).cwiseMin(C);
    const double nres = (M * next - v).norm();
    if ((next - beta).norm() <= 1e-15) break;
    beta = next;
    res = nres;
  }
  return {beta, res};
}

inline SpannerCheck spanner_check(const SpannerResult& sp, const std::vector<Eigen::VectorXd>& points) {
  Eigen::MatrixXd M(sp.dimension, static_cast<Eigen::Index>(sp.features.size()));
  for (std::size_t j = 0; j < sp.features.size(); ++j) M.col(static_cast<Eigen::Index>(j)) = sp.features[j];
  SpannerCheck out;
  for (const auto& v : points) {
    const auto [beta, res] = box_least_squares(M, v, sp.C);
    out.max_residual = std::max(out.max_residual, res);
    out.max_abs_beta = std::max(out.max_abs_beta, beta.size() ? beta.cwiseAbs().maxCoeff() : 0.0);
  }
  return out;
}

inline SpannerCheck spanner_check(const SpannerResult& sp, const LowRankMDP& mdp, const std::vector<Policy>& cls,
                                  const Eigen::MatrixXd& stacked_feature, int h) {
  return spanner_check(sp, class_expected_features(mdp, cls, stacked_feature, h));
}

}  // namespace lrarl
