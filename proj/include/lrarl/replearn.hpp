#pragma once

// Representation selection with exact expectations: pick the candidate
// feature map whose ball-constrained linear fit of E[f(x_{h+1}) | x_h, a_h]
// has the smallest worst-case error over discriminators f and cover policies.

#include <lrarl/core.hpp>
#include <lrarl/linalg.hpp>
#include <lrarl/mdp.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace lrarl {

/// A discriminator is a function of the next-layer state, stored as its
/// value vector over states(h + 1).
using Discriminator = Eigen::VectorXd;

inline Eigen::VectorXd random_unit_vector(int dim, Rng& rng) {
  std::normal_distribution<double> n01;
  Eigen::VectorXd v(dim);
  do {
    for (int i = 0; i < dim; ++i) v(i) = n01(rng);
  } while (v.norm() == 0.0);
  return v / v.norm();
}

/// f(x') = max_a stacked(x', a)^T theta for `count` unit vectors theta per
/// stacked map. stacked[k] has rows (x' * A + a) of the next layer.
inline std::vector<Discriminator> make_discriminators(const std::vector<Eigen::MatrixXd>& stacked, int A, int count,
                                                      Rng& rng) {
  std::vector<Discriminator> out;
  for (const auto& table : stacked) {
    const auto states = static_cast<int>(table.rows() / A);
    for (int c = 0; c < count; ++c) {
      const Eigen::VectorXd theta = random_unit_vector(static_cast<int>(table.cols()), rng);
      const Eigen::VectorXd scores = table * theta;
      Discriminator f(states);
      for (int x = 0; x < states; ++x) f(x) = scores.segment(x * A, A).maxCoeff();
      out.push_back(f);
    }
  }
  return out;
}

struct RepLearnResult {
  int chosen = 0;
  double error = 0.0;
  std::vector<double> errors;  // worst-case error of every candidate
};

inline constexpr double kTieTolerance = 1e-12;

/// candidates[k] is the layer-h feature table (rows x * A + a) of the k-th
/// map. Each f is fit under the average occupancy of the cover policies and
/// scored by the worst policy in the cover; errors within kTieTolerance are
/// ties and go to the earlier candidate.
inline RepLearnResult rep_learn_exact(const LowRankMDP& mdp, int h, const std::vector<Eigen::MatrixXd>& candidates,
                                      const std::vector<Discriminator>& discriminators,
                                      const std::vector<Policy>& cover_policies, double radius) {
  if (candidates.empty()) throw std::invalid_argument("rep_learn_exact: empty candidate list");
  if (cover_policies.empty()) throw std::invalid_argument("rep_learn_exact: empty cover");
  if (h < 0 || h + 1 >= mdp.horizon()) throw std::out_of_range("rep_learn_exact: layer has no successor");
  std::vector<Eigen::VectorXd> occ;
  Eigen::VectorXd avg = Eigen::VectorXd::Zero(mdp.states(h) * mdp.action_count());
  for (const auto& pi : cover_policies) {
    occ.push_back(detail::flatten(occupancy(mdp, pi).layers[h]));
    avg += occ.back() / static_cast<double>(cover_policies.size());
  }
  const Eigen::VectorXd sw = avg.cwiseSqrt();
  std::vector<Eigen::VectorXd> targets;
  for (const auto& f : discriminators) targets.push_back(mdp.kernel(h) * f);

  RepLearnResult res;
  res.error = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    const auto& phi = candidates[k];
    if (phi.rows() != avg.size()) throw std::invalid_argument("rep_learn_exact: candidate has wrong row count");
    const Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(sw.asDiagonal() * phi);
    double worst = 0.0;
    for (const auto& y : targets) {
      const Eigen::VectorXd w = project_ball(cod.solve(sw.cwiseProduct(y)), radius);
      const Eigen::VectorXd sq = (phi * w - y).array().square().matrix();
      for (const auto& o : occ) worst = std::max(worst, o.dot(sq));
    }
    res.errors.push_back(worst);
    if (worst < res.error - kTieTolerance) {
      res.error = worst;
      res.chosen = static_cast<int>(k);
    }
  }
  return res;
}

}  // namespace lrarl
