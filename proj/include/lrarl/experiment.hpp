#pragma once

// Sweeps over (learner, horizon, seed) with a bounded worker pool. Every run
// derives its randomness from the config and its own seed, so results do not
// depend on scheduling; rows are sorted before they are written.

#include <lrarl/adaptive.hpp>
#include <lrarl/config.hpp>
#include <lrarl/fullinfo.hpp>
#include <lrarl/harness.hpp>
#include <lrarl/model_based.hpp>
#include <lrarl/oracle_efficient.hpp>
#include <lrarl/serialize.hpp>

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <thread>
#include <tuple>

namespace lrarl {

struct RunKey {
  std::string learner;
  int T = 0;
  std::uint64_t seed = 0;
  auto tie() const { return std::tie(learner, T, seed); }
  bool operator<(const RunKey& o) const { return tie() < o.tie(); }
};

struct RunOutcome {
  RunKey key;
  bool ok = false;
  std::string error;
  RegretReport report;
  std::optional<RunRecord> record;
  std::vector<std::string> log;
};

/// Materialized environment for one seed.
struct Environment {
  LowRankMDP mdp;
  LossSequence losses;  // empty for adaptive adversaries
};

inline LowRankMDP config_mdp(const ExperimentConfig& c) {
  if (!c.instance) throw std::invalid_argument("config has no instance");
  return gen_simplex_mdp(*c.instance);
}

inline Environment make_environment(const ExperimentConfig& c, int T, std::uint64_t seed) {
  AdversarySpec a = c.adversary;
  a.T = T;
  a.seed = mix_seed(c.adversary.seed, seed);
  if (c.lower_bound) {
    Rng rng(a.seed);
    LowerBoundEnv env = gen_lower_bound_env(c.lower_bound->contexts, c.lower_bound->arms, T, c.lower_bound->c_gap, rng);
    return {std::move(env.mdp), std::move(env.losses)};
  }
  LowRankMDP mdp = config_mdp(c);
  LossSequence losses;
  if (a.kind == AdversaryKind::ObliviousLinear)
    losses = gen_linear_losses(mdp, a);
  else if (a.kind == AdversaryKind::ObliviousArbitrary)
    losses = gen_arbitrary_losses(mdp, a);
  return {std::move(mdp), std::move(losses)};
}

inline std::vector<Policy> config_policy_class(const ExperimentConfig& c, const LowRankMDP& mdp) {
  switch (c.policy_class) {
    case PolicyClassKind::LayerConstant: return layer_constant_policies(mdp);
    case PolicyClassKind::Deterministic: return enumerate_deterministic_policies(mdp);
    case PolicyClassKind::Reaching: return reaching_policies(mdp);
  }
  return {};
}

/// The true feature map followed by `extra_features` random simplex maps.
inline FeatureClass config_feature_class(const ExperimentConfig& c, const LowRankMDP& mdp) {
  FeatureClass Phi{true_features(mdp)};
  for (int k = 0; k < c.extra_features; ++k) {
    InstanceSpec s = *c.instance;
    s.seed = mix_seed(c.instance->seed, 0xfea7u + static_cast<std::uint64_t>(k));
    Phi.push_back(true_features(gen_simplex_mdp(s)));
  }
  return Phi;
}

inline std::uint64_t learner_seed(const std::string& name, std::uint64_t seed) {
  const auto& names = learner_names();
  const auto idx = static_cast<std::uint64_t>(std::find(names.begin(), names.end(), name) - names.begin());
  return mix_seed(seed, 0x1ea2 + idx);
}

inline RunOutcome run_one(const ExperimentConfig& c, const LearnerSpec& spec, int T, std::uint64_t seed) {
  RunOutcome out;
  out.key = {spec.name, T, seed};
  try {
    Environment env = make_environment(c, T, seed);
    const AlgoParams p = effective_params(spec.name, spec.params, T, config_dims(c));
    Rng rng(learner_seed(spec.name, seed));
    RegretOptions opt;
    opt.include_warmup = c.include_warmup;
    RunRecord rec;
    std::vector<Policy> cls;
    if (spec.name == "full-info") {
      rec = fullinfo_exp_run(env.mdp, env.losses, p, c.transition_mode, rng);
    } else if (spec.name == "model-based-bandit") {
      cls = config_policy_class(c, env.mdp);
      rec = modelbased_bandit_run(env.mdp, cls, env.losses, p, c.transition_mode, rng);
      opt.comparator_class = &cls;
    } else if (spec.name == "oracle-efficient") {
      rec = oracle_efficient_run(env.mdp, config_feature_class(c, env.mdp), env.losses, p, rng);
    } else {
      const FeatureClass Phi = config_feature_class(c, env.mdp);
      const FeatureMap phi_loss = true_features(env.mdp);
      AdversarySpec a = c.adversary;
      a.T = T;
      a.seed = mix_seed(c.adversary.seed, seed);
      if (a.kind == AdversaryKind::AdaptiveTargeting) {
        TargetingAdversary adv(env.mdp, a);
        rec = adaptive_run(env.mdp, Phi, phi_loss, adv, p, rng);
      } else {
        SequenceAdversary adv(env.losses);
        rec = adaptive_run(env.mdp, Phi, phi_loss, adv, p, rng);
      }
    }
    out.report = pseudo_regret(rec, env.mdp, &env.losses, opt);
    out.log = rec.log;
    if (c.write_records) out.record = std::move(rec);
    out.ok = true;
  } catch (const std::exception& e) {
    out.error = e.what();
  }
  return out;
}

struct ExperimentResult {
  std::vector<SummaryRow> rows;      // successful runs, sorted by key
  std::vector<RunOutcome> failures;  // sorted by key
};

/// Attaches a per-learner exponent fitted on the seed-mean regret per horizon.
inline void attach_exponents(std::vector<SummaryRow>& rows) {
  std::map<std::string, std::map<int, std::pair<double, int>>> sums;
  for (const auto& r : rows) {
    auto& s = sums[r.learner][r.T];
    s.first += r.regret_total;
    ++s.second;
  }
  std::map<std::string, ExponentFit> fits;
  for (const auto& [name, perT] : sums) {
    if (perT.size() < 3) continue;
    std::vector<std::pair<double, double>> pts;
    for (const auto& [T, s] : perT) pts.push_back({static_cast<double>(T), s.first / s.second});
    try {
      fits[name] = regret_exponent(pts);
    } catch (const std::invalid_argument&) {
    }
  }
  for (auto& r : rows)
    if (auto it = fits.find(r.learner); it != fits.end()) {
      r.exponent = it->second.slope;
      r.exponent_hw = it->second.half_width;
    }
}

inline std::string run_stem(const RunKey& k) {
  return k.learner + "_T" + std::to_string(k.T) + "_s" + std::to_string(k.seed);
}

/// Runs the sweep and writes summary.csv, effective_config.json, one curve
/// per run under curves/, optional records under records/, and failures.txt
/// when any run failed.
inline ExperimentResult run_experiment(const ExperimentConfig& c, int jobs, std::ostream* progress = nullptr) {
  std::vector<std::tuple<const LearnerSpec*, int, std::uint64_t>> tasks;
  for (const auto& l : c.learners)
    for (int T : c.horizons)
      for (auto s : c.seeds) tasks.emplace_back(&l, T, s);

  namespace fs = std::filesystem;
  fs::create_directories(c.output_dir / "curves");
  if (c.write_records) fs::create_directories(c.output_dir / "records");
  {
    std::ofstream cfg(c.output_dir / "effective_config.json", std::ios::binary);
    cfg << effective_config_json(c).dump(2) << '\n';
  }

  std::vector<RunOutcome> outcomes(tasks.size());
  std::atomic<std::size_t> next{0};
  std::mutex io;
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < tasks.size();) {
      const auto& [spec, T, seed] = tasks[i];
      RunOutcome o = run_one(c, *spec, T, seed);
      if (o.ok) {
        std::ofstream curve(c.output_dir / "curves" / (run_stem(o.key) + ".csv"), std::ios::binary);
        write_curve_csv(curve, o.report);
        if (o.record) {
          const fs::path base = c.output_dir / "records" / run_stem(o.key);
          std::ofstream r(base.string() + ".rounds.jsonl", std::ios::binary);
          std::ofstream e(base.string() + ".epochs.jsonl", std::ios::binary);
          std::ofstream p(base.string() + ".policies.jsonl", std::ios::binary);
          write_run_record(*o.record, r, e, p);
          o.record.reset();
        }
      }
      o.report.expected_value.clear();
      o.report.comparator_value.clear();
      o.report.cum_regret.clear();
      if (progress) {
        std::lock_guard<std::mutex> lock(io);
        *progress << run_stem(o.key) << (o.ok ? " ok regret=" + format_double(o.report.total) : " FAILED: " + o.error)
                  << '\n';
      }
      outcomes[i] = std::move(o);
    }
  };
  const int n = std::max(1, std::min<int>(jobs, static_cast<int>(tasks.size())));
  std::vector<std::thread> pool;
  for (int k = 1; k < n; ++k) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  std::sort(outcomes.begin(), outcomes.end(), [](const RunOutcome& a, const RunOutcome& b) { return a.key < b.key; });
  ExperimentResult res;
  for (auto& o : outcomes) {
    if (o.ok) {
      SummaryRow r;
      r.learner = o.key.learner;
      r.T = o.key.T;
      r.seed = o.key.seed;
      r.regret_total = o.report.total;
      r.regret_final_rate = o.report.total / o.key.T;
      res.rows.push_back(r);
    } else {
      res.failures.push_back(std::move(o));
    }
  }
  attach_exponents(res.rows);
  {
    std::ofstream s(c.output_dir / "summary.csv", std::ios::binary);
    write_summary_csv(s, res.rows);
  }
  const fs::path fail = c.output_dir / "failures.txt";
  if (!res.failures.empty()) {
    std::ofstream f(fail, std::ios::binary);
    for (const auto& o : res.failures) f << run_stem(o.key) << ": " << o.error << '\n';
  } else if (fs::exists(fail)) {
    fs::remove(fail);
  }
  return res;
}

/// Rebuilds summary rows from the curve files of an earlier sweep.
inline std::vector<SummaryRow> summarize_curves(const std::filesystem::path& dir) {
  std::vector<SummaryRow> rows;
  for (const auto& entry : std::filesystem::directory_iterator(dir / "curves")) {
    const std::string stem = entry.path().stem().string();
    const auto ps = stem.rfind("_s"), pt = stem.rfind("_T", ps);
    if (entry.path().extension() != ".csv" || ps == std::string::npos || pt == std::string::npos) continue;
    SummaryRow r;
    r.learner = stem.substr(0, pt);
    r.T = std::stoi(stem.substr(pt + 2, ps - pt - 2));
    r.seed = std::stoull(stem.substr(ps + 2));
    std::ifstream in(entry.path());
    std::string line, last;
    while (std::getline(in, line))
      if (!line.empty()) last = line;
    const auto comma = last.rfind(',');
    r.regret_total = comma == std::string::npos || last.rfind("t,", 0) == 0 ? 0.0 : std::stod(last.substr(comma + 1));
    r.regret_final_rate = r.regret_total / r.T;
    rows.push_back(r);
  }
  std::sort(rows.begin(), rows.end(), [](const SummaryRow& a, const SummaryRow& b) {
    return std::tie(a.learner, a.T, a.seed) < std::tie(b.learner, b.T, b.seed);
  });
  attach_exponents(rows);
  return rows;
}

}  // namespace lrarl
