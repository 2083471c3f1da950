#pragma once

// Per-round record of a learner execution. Play distributions are shared
// between consecutive rounds that use the same mixture.

#include <lrarl/core.hpp>
#include <lrarl/mdp.hpp>

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace lrarl {

struct PlayComponent {
  double weight = 0.0;
  std::shared_ptr<const Policy> policy;
  int class_index = -1;  // index into the learner's finite class, -1 for per-state policies
};

using PlayDistribution = std::vector<PlayComponent>;

inline std::shared_ptr<const PlayDistribution> single_play(std::shared_ptr<const Policy> pi, int class_index = -1) {
  return std::make_shared<const PlayDistribution>(PlayDistribution{{1.0, std::move(pi), class_index}});
}

inline bool is_valid_distribution(const PlayDistribution& dist, const LowRankMDP& mdp, double tol = 1e-10) {
  double total = 0.0;
  for (const auto& c : dist) {
    if (c.weight < 0.0 || !c.policy || !is_valid_policy(*c.policy, mdp, 1e-10)) return false;
    total += c.weight;
  }
  return std::abs(total - 1.0) <= tol;
}

struct Round {
  std::shared_ptr<const PlayDistribution> play;
  Trajectory trajectory;
  double realized_loss_sum = 0.0;
  bool warmup = false;
};

/// End-of-epoch state for the regression-based learners.
struct EpochSnapshot {
  int epoch = 0;
  int first_round = 0;  // 0-based round index of the first round in the epoch
  int rounds = 0;
  std::shared_ptr<const Policy> policy;  // pi-hat used throughout the epoch
  QTable q_hat;                          // regressed Q for every (h, x, a)
  std::vector<Eigen::VectorXd> theta;    // per-layer coefficients
  std::vector<int> feature_index;        // per-layer chosen element of Phi (-1 when fixed)
  std::vector<int> samples;              // per-layer retained samples or active groups
};

struct GuardrailInfo {
  int first_violation_round = -1;  // -1: never tripped
  int clamp_count = 0;
  double min_eta = 0.0;
};

struct RunRecord {
  std::string learner;
  int T = 0;
  int T0 = 0;
  std::vector<Round> rounds;
  std::vector<EpochSnapshot> epochs;
  std::optional<LossSequence> realized_losses;  // adaptive runs: the losses actually generated
  GuardrailInfo guardrail;
  std::vector<std::string> log;
};

}  // namespace lrarl
