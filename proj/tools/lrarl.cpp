// lrarl: instance generation, single runs, property suites, sweeps, reports.
// Exit status: 0 success, 1 verify or run failure, 2 usage or config error.

#include <lrarl/lrarl.hpp>

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

namespace {

namespace fs = std::filesystem;
using namespace lrarl;

constexpr int kOk = 0;
constexpr int kFailed = 1;
constexpr int kUsage = 2;

struct Options {
  std::string config;
  std::string preset;
  std::string out;
  std::string suite = "all";
  std::optional<std::uint64_t> seed;
  int jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
};

/// Exactly one of --config and --preset; --out replaces the output directory
/// and --seed replaces the seed list.
ExperimentConfig load_config(const Options& o) {
  if (o.config.empty() == o.preset.empty()) throw ConfigError("", "give exactly one of --config and --preset");
  ExperimentConfig c = o.config.empty() ? parse_config_json(preset_config(o.preset)) : parse_config(o.config);
  if (!o.out.empty()) c.output_dir = o.out;
  if (o.seed) c.seeds = {*o.seed};
  check_schedules(c);
  return c;
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + p.string());
  return f;
}

/// mdp.json and, for oblivious adversaries, losses.jsonl at the first horizon.
int cmd_gen(const Options& o) {
  const ExperimentConfig c = load_config(o);
  const fs::path dir = o.out.empty() ? fs::path(".") : fs::path(o.out);
  fs::create_directories(dir);
  const Environment env = make_environment(c, c.horizons.front(), c.seeds.front());
  open_out(dir / "mdp.json") << mdp_to_json(env.mdp).dump(2) << '\n';
  if (!env.losses.empty()) {
    auto f = open_out(dir / "losses.jsonl");
    write_loss_stream(f, env.losses);
  }
  std::cout << "wrote " << (dir / "mdp.json").string() << (env.losses.empty() ? "" : " and losses.jsonl") << '\n';
  return kOk;
}

int report_sweep(const ExperimentResult& r) {
  for (const auto& f : r.failures) std::cerr << run_stem(f.key) << ": " << f.error << '\n';
  return r.failures.empty() ? kOk : kFailed;
}

/// The first learner at the first horizon and seed, with full records.
int cmd_run(const Options& o) {
  ExperimentConfig c = load_config(o);
  c.learners.resize(1);
  c.horizons.resize(1);
  c.seeds.resize(1);
  c.write_records = true;
  return report_sweep(run_experiment(c, 1, &std::cout));
}

int cmd_sweep(const Options& o) {
  const ExperimentConfig c = load_config(o);
  return report_sweep(run_experiment(c, o.jobs, &std::cout));
}

int cmd_verify(const Options& o) {
  const auto checks = run_verify_suite(o.suite, o.seed.value_or(2024));
  int failed = 0;
  for (const auto& k : checks) {
    failed += !k.passed;
    std::cout << (k.passed ? "PASS " : "FAIL ") << k.suite << ": " << k.name << " measured=" << format_double(k.measured)
              << " threshold=" << format_double(k.threshold) << (k.detail.empty() ? "" : " (" + k.detail + ")") << '\n';
  }
  std::cout << checks.size() - failed << "/" << checks.size() << " checks passed\n";
  return failed ? kFailed : kOk;
}

/// Rebuilds summary.csv from the curves under --out and prints it.
int cmd_report(const Options& o) {
  if (o.out.empty()) throw ConfigError("", "report needs --out DIR");
  const fs::path dir = o.out;
  if (!fs::is_directory(dir / "curves")) throw ConfigError("", "no curves under " + dir.string());
  const auto rows = summarize_curves(dir);
  {
    auto f = open_out(dir / "summary.csv");
    write_summary_csv(f, rows);
  }
  write_summary_csv(std::cout, rows);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Regret minimization in adversarial low-rank MDPs"};
  app.require_subcommand(1);
  Options o;
  auto config_flags = [&](CLI::App* s) {
    s->add_option("--config", o.config, "experiment config JSON");
    s->add_option("--preset", o.preset, "built-in config: simplex-small, benchmark, adaptive, lower-bound");
    s->add_option("--seed", o.seed, "replace the config seed list");
  };
  CLI::App* gen = app.add_subcommand("gen", "write the MDP and its loss stream");
  config_flags(gen);
  gen->add_option("--out", o.out, "output directory");
  CLI::App* run = app.add_subcommand("run", "one learner, horizon and seed with full records");
  config_flags(run);
  run->add_option("--out", o.out, "output directory");
  CLI::App* sweep = app.add_subcommand("sweep", "every learner, horizon and seed of a config");
  config_flags(sweep);
  sweep->add_option("--out", o.out, "output directory");
  sweep->add_option("--jobs", o.jobs, "concurrent runs")->check(CLI::PositiveNumber);
  CLI::App* verify = app.add_subcommand("verify", "property suites");
  verify->add_option("--suite", o.suite, "suite name or all");
  verify->add_option("--seed", o.seed, "suite seed");
  CLI::App* report = app.add_subcommand("report", "rebuild summary.csv from existing curves");
  report->add_option("--out", o.out, "results directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }
  try {
    if (*gen) return cmd_gen(o);
    if (*run) return cmd_run(o);
    if (*sweep) return cmd_sweep(o);
    if (*verify) return cmd_verify(o);
    return cmd_report(o);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailed;
  }
}
