#pragma once

// Learner parameters and their default schedules as functions of T and the
// instance dimensions.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace lrarl {

enum class WarmupMode { Oracle, Empirical };

inline std::string to_string(WarmupMode m) { return m == WarmupMode::Oracle ? "oracle" : "empirical"; }

struct AlgoParams {
  int T = 1;
  int T0 = 0;          // warm-up episodes, played uniformly and charged to regret
  double eta = 1.0;
  double gamma = 0.0;  // model-based learner only
  double beta = 0.0;
  double nu = 0.0;
  double epsilon = 1.0;
  double alpha = 1.0;
  int N_reg = 1;
  int discriminators = 64;  // sphere samples for representation learning
  double l1_radius = 0.0;   // 0 means 4 H d^2
  double ls_radius = 0.0;   // 0 means H sqrt(d)
};

struct Dims {
  int H = 1;
  int d = 1;
  int A = 1;
};

/// ceil(scale * T^{2/3}), the warm-up budget shared by every learner.
inline int default_warmup(int T, double scale = 1.0) {
  if (scale <= 0.0) return 0;
  return std::min(T, static_cast<int>(std::ceil(scale * std::pow(static_cast<double>(T), 2.0 / 3.0) - 1e-9)));
}

inline AlgoParams fullinfo_defaults(int T, Dims dm, double warmup_scale = 1.0) {
  AlgoParams p;
  p.T = T;
  p.T0 = default_warmup(T, warmup_scale);
  p.eta = 1.0 / (dm.H * std::sqrt(static_cast<double>(T)));
  const double d2 = static_cast<double>(dm.d) * dm.d;
  p.epsilon = std::cbrt(dm.H * d2 * dm.A * (d2 + dm.A)) * std::pow(static_cast<double>(T), -1.0 / 3.0);
  return p;
}

inline AlgoParams model_based_defaults(int T, Dims dm, double warmup_scale = 1.0) {
  AlgoParams p;
  p.T = T;
  p.T0 = default_warmup(T, warmup_scale);
  const double r = std::pow(static_cast<double>(T), -1.0 / 3.0);
  p.epsilon = p.gamma = p.beta = r;
  p.eta = 1.0 / (4.0 * dm.H * dm.d * dm.A) * r * r;
  return p;
}

inline AlgoParams oracle_efficient_defaults(int T, Dims dm, double warmup_scale = 1.0) {
  AlgoParams p;
  p.T = T;
  p.T0 = default_warmup(T, warmup_scale);
  p.epsilon = std::pow(static_cast<double>(T), -1.0 / 3.0);
  p.N_reg = std::max(1, static_cast<int>(std::lround(std::pow(static_cast<double>(T), 2.0 / 3.0))));
  p.nu = 1.0 / std::sqrt(static_cast<double>(p.N_reg));
  p.eta = std::sqrt(static_cast<double>(p.N_reg) / T);
  p.alpha = 1.0 / (8.0 * dm.A * dm.d);
  return p;
}

inline AlgoParams adaptive_defaults(int T, Dims dm, double warmup_scale = 1.0) {
  AlgoParams p = oracle_efficient_defaults(T, dm, warmup_scale);
  p.nu = std::pow(static_cast<double>(p.N_reg), -0.25);
  p.alpha = 1.0 / (8.0 * dm.A * dm.d);
  return p;
}

inline void validate_params(const AlgoParams& p) {
  auto rate = [](double v, const char* name, bool allow_zero) {
    if (!(v <= 1.0) || (allow_zero ? v < 0.0 : v <= 0.0))
      throw std::invalid_argument(std::string("params: ") + name + " must lie in " + (allow_zero ? "[0, 1]" : "(0, 1]"));
  };
  if (p.T < 1) throw std::invalid_argument("params: T must be at least 1");
  if (p.T0 < 0 || p.T0 > p.T) throw std::invalid_argument("params: T0 must lie in [0, T]");
  if (!(p.eta > 0.0) || !std::isfinite(p.eta)) throw std::invalid_argument("params: eta must be positive");
  rate(p.gamma, "gamma", true);
  rate(p.beta, "beta", true);
  rate(p.nu, "nu", true);
  if (!(p.epsilon > 0.0)) throw std::invalid_argument("params: epsilon must be positive");
  rate(p.alpha, "alpha", false);
  if (p.N_reg < 1) throw std::invalid_argument("params: N_reg must be at least 1");
  if (p.discriminators < 1) throw std::invalid_argument("params: discriminators must be positive");
}

}  // namespace lrarl
