#pragma once

// Regret accounting: comparators, exact per-round expected values from the
// recorded play distributions, and the log-log exponent fit.

#include <lrarl/core.hpp>
#include <lrarl/mdp.hpp>
#include <lrarl/run_record.hpp>

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace lrarl {

struct FixedPolicyResult {
  Policy policy;
  double total = 0.0;  // sum over the rounds of V_1^pi
};

/// Sum of losses over rounds [first, last).
inline LossFunction summed_loss(const LowRankMDP& mdp, const LossSequence& losses, int first, int last) {
  LossFunction sum = zero_loss(mdp);
  for (int t = first; t < last; ++t)
    for (int h = 0; h < mdp.horizon(); ++h) sum.ell[h] += losses[t].ell[h];
  return sum;
}

/// Optimal deterministic Markov policy for the summed loss by backward DP;
/// ties go to the lowest action index.
inline FixedPolicyResult best_fixed_policy(const LowRankMDP& mdp, const LossSequence& losses, int first = 0,
                                           int last = -1) {
  if (last < 0) last = static_cast<int>(losses.size());
  if (first < 0 || first > last || last > static_cast<int>(losses.size()))
    throw std::invalid_argument("best_fixed_policy: bad round range");
  if (!losses.empty()) detail::require_loss(losses.front(), mdp, "best_fixed_policy");
  const LossFunction sum = summed_loss(mdp, losses, first, last);
  const int H = mdp.horizon(), A = mdp.action_count();
  std::vector<std::vector<int>> act(H);
  Eigen::VectorXd v_next;
  for (int h = H - 1; h >= 0; --h) {
    Eigen::MatrixXd q = sum.ell[h];
    if (h + 1 < H) q += detail::unflatten(mdp.kernel(h) * v_next, mdp.states(h), A);
    Eigen::VectorXd v(mdp.states(h));
    act[h].resize(mdp.states(h));
    for (int x = 0; x < mdp.states(h); ++x) {
      int best = 0;
      for (int a = 1; a < A; ++a)
        if (q(x, a) < q(x, best)) best = a;
      act[h][x] = best;
      v(x) = q(x, best);
    }
    v_next = std::move(v);
  }
  FixedPolicyResult r{deterministic_policy(mdp, act), 0.0};
  r.total = value(mdp, r.policy, sum);
  return r;
}

struct ClassBest {
  int index = -1;
  double total = 0.0;
};

/// Best member of a finite class on rounds [first, last); ties by list order.
inline ClassBest best_in_class(const LowRankMDP& mdp, const std::vector<Policy>& cls, const LossSequence& losses,
                               int first = 0, int last = -1) {
  if (cls.empty()) throw std::invalid_argument("best_in_class: empty class");
  if (last < 0) last = static_cast<int>(losses.size());
  const LossFunction sum = summed_loss(mdp, losses, first, last);
  ClassBest b;
  for (int i = 0; i < static_cast<int>(cls.size()); ++i) {
    const double v = value(mdp, cls[i], sum);
    if (b.index < 0 || v < b.total) b = {i, v};
  }
  return b;
}

struct RegretOptions {
  bool include_warmup = true;
  const std::vector<Policy>* comparator_class = nullptr;  // null: best fixed Markov policy
};

struct RegretReport {
  std::vector<double> expected_value;    // per counted round
  std::vector<double> comparator_value;  // per counted round
  std::vector<double> cum_regret;        // prefix sums of the gaps
  int first_round = 0;                   // round index of expected_value[0]
  std::string comparator_id;
  double total = 0.0;
  bool negative = false;
  bool standard = false;  // comparator evaluated on realized adaptive losses
};

/// Exact pseudo-regret of a run. Adaptive runs use the losses they realized,
/// which gives standard regret against the best fixed policy in hindsight.
inline RegretReport pseudo_regret(const RunRecord& run, const LowRankMDP& mdp, const LossSequence* losses,
                                  const RegretOptions& opt = {}) {
  const LossSequence* seq = run.realized_losses ? &*run.realized_losses : losses;
  if (!seq) throw std::invalid_argument("pseudo_regret: no loss sequence for an oblivious run");
  const int T = static_cast<int>(run.rounds.size());
  if (static_cast<int>(seq->size()) < T) throw std::invalid_argument("pseudo_regret: record longer than loss sequence");
  const int first = opt.include_warmup ? 0 : std::min(run.T0, T);

  RegretReport rep;
  rep.first_round = first;
  rep.standard = run.realized_losses.has_value();
  Policy comparator;
  if (opt.comparator_class) {
    const ClassBest b = best_in_class(mdp, *opt.comparator_class, *seq, first, T);
    comparator = (*opt.comparator_class)[b.index];
    rep.comparator_id = "class:" + std::to_string(b.index);
  } else {
    comparator = best_fixed_policy(mdp, *seq, first, T).policy;
    rep.comparator_id = "best-fixed";
  }
  const OccupancyMeasure comp_occ = occupancy(mdp, comparator);

  // occupancies are reused while consecutive rounds share policy objects
  const PlayDistribution* last_dist = nullptr;
  std::vector<std::pair<const Policy*, OccupancyMeasure>> cache, next;
  double cum = 0.0;
  for (int t = first; t < T; ++t) {
    const Round& r = run.rounds[t];
    if (!r.play) throw std::invalid_argument("pseudo_regret: round without play distribution");
    if (r.play.get() != last_dist) {
      next.clear();
      for (const auto& c : *r.play) {
        auto it = std::find_if(cache.begin(), cache.end(), [&](const auto& e) { return e.first == c.policy.get(); });
        next.emplace_back(c.policy.get(), it != cache.end() ? std::move(it->second) : occupancy(mdp, *c.policy));
      }
      cache.swap(next);
      last_dist = r.play.get();
    }
    double ev = 0.0;
    for (std::size_t i = 0; i < r.play->size(); ++i)
      ev += (*r.play)[i].weight * value_from_occupancy(cache[i].second, (*seq)[t]);
    const double cv = value_from_occupancy(comp_occ, (*seq)[t]);
    cum += ev - cv;
    rep.expected_value.push_back(ev);
    rep.comparator_value.push_back(cv);
    rep.cum_regret.push_back(cum);
  }
  rep.total = cum;
  rep.negative = cum < 0.0;
  return rep;
}

struct ExponentFit {
  double slope = 0.0;
  double intercept = 0.0;
  double half_width = 0.0;  // 95% two-sided t interval
  int points = 0;
  std::vector<std::string> warnings;
};

/// OLS of log(regret) on log(T). Non-positive regrets are dropped with a
/// warning; fewer than three remaining points is an error.
inline ExponentFit regret_exponent(const std::vector<std::pair<double, double>>& points) {
  ExponentFit fit;
  std::vector<double> xs, ys;
  for (const auto& [T, reg] : points) {
    if (!(reg > 0.0) || !(T > 0.0)) {
      fit.warnings.push_back("excluded non-positive point at T=" + std::to_string(T));
      continue;
    }
    xs.push_back(std::log(T));
    ys.push_back(std::log(reg));
  }
  const int n = static_cast<int>(xs.size());
  fit.points = n;
  if (n < 3) throw std::invalid_argument("regret_exponent: need at least 3 positive points");
  double mx = 0.0, my = 0.0;
  for (int i = 0; i < n; ++i) mx += xs[i], my += ys[i];
  mx /= n, my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (int i = 0; i < n; ++i) sxx += (xs[i] - mx) * (xs[i] - mx), sxy += (xs[i] - mx) * (ys[i] - my);
  if (!(sxx > 0.0)) throw std::invalid_argument("regret_exponent: horizons must not all coincide");
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double sse = 0.0;
  for (int i = 0; i < n; ++i) {
    const double e = ys[i] - fit.intercept - fit.slope * xs[i];
    sse += e * e;
  }
  const boost::math::students_t dist(n - 2);
  fit.half_width = boost::math::quantile(boost::math::complement(dist, 0.025)) * std::sqrt(sse / (n - 2) / sxx);
  return fit;
}

}  // namespace lrarl
