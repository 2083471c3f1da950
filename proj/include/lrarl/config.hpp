#pragma once

// Experiment configuration: JSON schema validation with JSON-pointer error
// paths, defaults from the learners' schedules, and named presets.

#include <lrarl/adversary.hpp>
#include <lrarl/params.hpp>
#include <lrarl/serialize.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace lrarl {

/// A configuration problem; `pointer` locates the offending value.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(const std::string& pointer, const std::string& what)
      : std::invalid_argument((pointer.empty() ? std::string("/") : pointer) + ": " + what), pointer_(pointer) {}
  const std::string& pointer() const { return pointer_; }

 private:
  std::string pointer_;
};

inline const std::vector<std::string>& learner_names() {
  static const std::vector<std::string> names{"full-info", "model-based-bandit", "oracle-efficient", "adaptive"};
  return names;
}

/// Per-learner overrides; unset fields take the schedule default for each T.
struct ParamOverrides {
  std::optional<int> T0, N_reg, discriminators;
  std::optional<double> eta, gamma, beta, nu, epsilon, alpha, l1_radius, ls_radius, warmup_scale;
};

struct LearnerSpec {
  std::string name;
  ParamOverrides params;
};

struct LowerBoundSpec {
  int contexts = 4;
  int arms = 4;
  double c_gap = 0.25;
};

enum class PolicyClassKind { LayerConstant, Deterministic, Reaching };

inline std::string to_string(PolicyClassKind k) {
  switch (k) {
    case PolicyClassKind::LayerConstant: return "layer-constant";
    case PolicyClassKind::Deterministic: return "deterministic";
    case PolicyClassKind::Reaching: return "reaching";
  }
  return "?";
}

struct ExperimentConfig {
  std::optional<InstanceSpec> instance;
  std::optional<LowerBoundSpec> lower_bound;
  AdversarySpec adversary;  // T is set per horizon
  std::vector<LearnerSpec> learners;
  std::vector<int> horizons;
  std::vector<std::uint64_t> seeds;
  std::filesystem::path output_dir = "results";
  bool include_warmup = true;
  WarmupMode transition_mode = WarmupMode::Oracle;
  PolicyClassKind policy_class = PolicyClassKind::LayerConstant;
  int extra_features = 0;  // random simplex candidates added to the true feature map
  bool write_records = false;
};

namespace detail {

inline void reject_unknown(const json& obj, const std::string& ptr, std::initializer_list<const char*> keys) {
  if (!obj.is_object()) throw ConfigError(ptr, "expected an object");
  const std::set<std::string> allowed(keys.begin(), keys.end());
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!allowed.count(it.key())) throw ConfigError(ptr + "/" + it.key(), "unknown key \"" + it.key() + "\"");
}

template <class T>
T get_as(const json& obj, const std::string& key, const std::string& ptr) {
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(ptr + "/" + key, "wrong type");
  }
}

inline int positive_int(const json& obj, const std::string& key, const std::string& ptr) {
  if (!obj.at(key).is_number_integer()) throw ConfigError(ptr + "/" + key, "expected an integer");
  const auto v = obj.at(key).get<long long>();
  if (v < 1 || v > 1000000000) throw ConfigError(ptr + "/" + key, "must be a positive integer");
  return static_cast<int>(v);
}

inline double number(const json& obj, const std::string& key, const std::string& ptr) {
  if (!obj.at(key).is_number()) throw ConfigError(ptr + "/" + key, "expected a number");
  return obj.at(key).get<double>();
}

inline std::uint64_t seed_value(const json& v, const std::string& ptr) {
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
    throw ConfigError(ptr, "expected a non-negative integer seed");
  return v.get<std::uint64_t>();
}

inline InstanceSpec parse_instance(const json& j, const std::string& ptr) {
  reject_unknown(j, ptr, {"states_per_layer", "action_count", "rank", "style", "seed"});
  InstanceSpec s;
  for (auto key : {"states_per_layer", "action_count", "rank"})
    if (!j.contains(key)) throw ConfigError(ptr + "/" + key, "required");
  s.states_per_layer = get_as<std::vector<int>>(j, "states_per_layer", ptr);
  s.action_count = positive_int(j, "action_count", ptr);
  s.rank = positive_int(j, "rank", ptr);
  if (j.contains("style")) {
    const auto style = get_as<std::string>(j, "style", ptr);
    if (style == "simplex")
      s.style = FeatureStyle::Simplex;
    else if (style == "one-hot")
      s.style = FeatureStyle::OneHot;
    else
      throw ConfigError(ptr + "/style", "expected \"simplex\" or \"one-hot\"");
  }
  if (j.contains("seed")) s.seed = seed_value(j["seed"], ptr + "/seed");
  try {
    validate_instance_spec(s);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(ptr, e.what());
  }
  return s;
}

inline void parse_adversary(const json& j, const std::string& ptr, AdversarySpec& a) {
  reject_unknown(j, ptr, {"kind", "norm_cap", "targeting_strength", "base_level", "seed"});
  if (j.contains("kind")) {
    const auto kind = get_as<std::string>(j, "kind", ptr);
    if (kind == "oblivious-linear")
      a.kind = AdversaryKind::ObliviousLinear;
    else if (kind == "oblivious-arbitrary")
      a.kind = AdversaryKind::ObliviousArbitrary;
    else if (kind == "adaptive-targeting")
      a.kind = AdversaryKind::AdaptiveTargeting;
    else
      throw ConfigError(ptr + "/kind", "unknown adversary kind \"" + kind + "\"");
  }
  if (j.contains("norm_cap")) a.norm_cap = number(j, "norm_cap", ptr);
  if (j.contains("targeting_strength")) a.targeting_strength = number(j, "targeting_strength", ptr);
  if (j.contains("base_level")) a.base_level = number(j, "base_level", ptr);
  if (j.contains("seed")) a.seed = seed_value(j["seed"], ptr + "/seed");
  if (!(a.norm_cap > 0.0 && a.norm_cap <= 1.0)) throw ConfigError(ptr + "/norm_cap", "must lie in (0, 1]");
  if (a.targeting_strength < 0.0) throw ConfigError(ptr + "/targeting_strength", "must be non-negative");
}

inline ParamOverrides parse_overrides(const json& j, const std::string& ptr) {
  reject_unknown(j, ptr,
                 {"T0", "N_reg", "discriminators", "eta", "gamma", "beta", "nu", "epsilon", "alpha", "l1_radius",
                  "ls_radius", "warmup_scale"});
  ParamOverrides o;
  if (j.contains("T0")) {
    if (!j["T0"].is_number_integer() || j["T0"].get<long long>() < 0) throw ConfigError(ptr + "/T0", "expected a non-negative integer");
    o.T0 = j["T0"].get<int>();
  }
  if (j.contains("N_reg")) o.N_reg = positive_int(j, "N_reg", ptr);
  if (j.contains("discriminators")) o.discriminators = positive_int(j, "discriminators", ptr);
  auto opt = [&](const char* key, std::optional<double>& dst) {
    if (j.contains(key)) dst = number(j, key, ptr);
  };
  opt("eta", o.eta);
  opt("gamma", o.gamma);
  opt("beta", o.beta);
  opt("nu", o.nu);
  opt("epsilon", o.epsilon);
  opt("alpha", o.alpha);
  opt("l1_radius", o.l1_radius);
  opt("ls_radius", o.ls_radius);
  opt("warmup_scale", o.warmup_scale);
  return o;
}

}  // namespace detail

/// Parses and validates a config document. `base` resolves relative paths.
inline ExperimentConfig parse_config_json(const json& j, const std::filesystem::path& base = ".") {
  detail::reject_unknown(j, "",
                         {"instance", "lower_bound", "adversary", "learners", "horizons", "seeds", "output_dir",
                          "include_warmup", "transition_mode", "policy_class", "extra_features", "write_records"});
  ExperimentConfig c;
  if (j.contains("instance")) c.instance = detail::parse_instance(j["instance"], "/instance");
  if (j.contains("lower_bound")) {
    const json& lb = j["lower_bound"];
    detail::reject_unknown(lb, "/lower_bound", {"contexts", "arms", "c_gap"});
    LowerBoundSpec s;
    if (lb.contains("contexts")) s.contexts = detail::positive_int(lb, "contexts", "/lower_bound");
    if (lb.contains("arms")) s.arms = detail::positive_int(lb, "arms", "/lower_bound");
    if (lb.contains("c_gap")) s.c_gap = detail::number(lb, "c_gap", "/lower_bound");
    if (!(s.c_gap > 0.0)) throw ConfigError("/lower_bound/c_gap", "must be positive");
    c.lower_bound = s;
  }
  if (c.instance.has_value() == c.lower_bound.has_value())
    throw ConfigError("", "exactly one of \"instance\" and \"lower_bound\" is required");
  if (j.contains("adversary")) detail::parse_adversary(j["adversary"], "/adversary", c.adversary);

  if (!j.contains("learners")) throw ConfigError("/learners", "required");
  if (!j["learners"].is_array()) throw ConfigError("/learners", "expected an array");
  for (std::size_t i = 0; i < j["learners"].size(); ++i) {
    const std::string ptr = "/learners/" + std::to_string(i);
    const json& l = j["learners"][i];
    detail::reject_unknown(l, ptr, {"name", "params"});
    if (!l.contains("name")) throw ConfigError(ptr + "/name", "required");
    LearnerSpec spec;
    spec.name = detail::get_as<std::string>(l, "name", ptr);
    const auto& names = learner_names();
    if (std::find(names.begin(), names.end(), spec.name) == names.end())
      throw ConfigError(ptr + "/name", "unknown learner \"" + spec.name + "\"");
    if (l.contains("params")) spec.params = detail::parse_overrides(l["params"], ptr + "/params");
    if (c.lower_bound && spec.name != "full-info")
      throw ConfigError(ptr + "/name", "the lower-bound environment has non-linear losses; only full-info applies");
    if (c.adversary.kind == AdversaryKind::AdaptiveTargeting && spec.name != "adaptive")
      throw ConfigError(ptr + "/name", "adaptive-targeting losses need the adaptive learner");
    if (c.adversary.kind == AdversaryKind::ObliviousArbitrary && spec.name != "full-info")
      throw ConfigError(ptr + "/name", "oblivious-arbitrary losses are not linear; only full-info applies");
    c.learners.push_back(std::move(spec));
  }

  if (!j.contains("horizons")) throw ConfigError("/horizons", "required");
  if (!j["horizons"].is_array() || j["horizons"].empty()) throw ConfigError("/horizons", "expected a non-empty array");
  for (std::size_t i = 0; i < j["horizons"].size(); ++i) {
    const json& v = j["horizons"][i];
    if (!v.is_number_integer() || v.get<long long>() < 1 || v.get<long long>() > 100000000)
      throw ConfigError("/horizons/" + std::to_string(i), "expected a positive integer");
    c.horizons.push_back(v.get<int>());
  }
  if (j.contains("seeds")) {
    if (!j["seeds"].is_array() || j["seeds"].empty()) throw ConfigError("/seeds", "expected a non-empty array");
    for (std::size_t i = 0; i < j["seeds"].size(); ++i)
      c.seeds.push_back(detail::seed_value(j["seeds"][i], "/seeds/" + std::to_string(i)));
  } else {
    c.seeds = {0};
  }
  if (j.contains("output_dir")) c.output_dir = detail::get_as<std::string>(j, "output_dir", "");
  if (c.output_dir.is_relative()) c.output_dir = base / c.output_dir;
  if (j.contains("include_warmup")) c.include_warmup = detail::get_as<bool>(j, "include_warmup", "");
  if (j.contains("transition_mode")) {
    const auto m = detail::get_as<std::string>(j, "transition_mode", "");
    if (m == "oracle")
      c.transition_mode = WarmupMode::Oracle;
    else if (m == "empirical")
      c.transition_mode = WarmupMode::Empirical;
    else
      throw ConfigError("/transition_mode", "expected \"oracle\" or \"empirical\"");
  }
  if (j.contains("policy_class")) {
    const auto m = detail::get_as<std::string>(j, "policy_class", "");
    if (m == "layer-constant")
      c.policy_class = PolicyClassKind::LayerConstant;
    else if (m == "deterministic")
      c.policy_class = PolicyClassKind::Deterministic;
    else if (m == "reaching")
      c.policy_class = PolicyClassKind::Reaching;
    else
      throw ConfigError("/policy_class", "expected \"layer-constant\", \"deterministic\" or \"reaching\"");
  }
  if (j.contains("extra_features")) {
    if (!j["extra_features"].is_number_integer() || j["extra_features"].get<long long>() < 0 ||
        j["extra_features"].get<long long>() > 64)
      throw ConfigError("/extra_features", "expected an integer in [0, 64]");
    c.extra_features = j["extra_features"].get<int>();
  }
  if (j.contains("write_records")) c.write_records = detail::get_as<bool>(j, "write_records", "");

  if (const char* env = std::getenv("LRARL_SEED"); env && *env) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (*end != '\0') throw ConfigError("", "LRARL_SEED must be an unsigned integer");
    c.seeds = {v};
  }
  return c;
}

inline ExperimentConfig parse_config(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(read_file(path.string()));
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("malformed JSON: ") + e.what());
  } catch (const std::runtime_error& e) {
    throw ConfigError("", e.what());
  }
  try {
    return parse_config_json(j, path.parent_path().empty() ? std::filesystem::path(".") : path.parent_path());
  } catch (const json::exception& e) {
    throw ConfigError("", e.what());
  }
}

inline Dims config_dims(const ExperimentConfig& c) {
  if (c.instance) {
    const auto& s = *c.instance;
    return {static_cast<int>(s.states_per_layer.size()), s.rank, s.action_count};
  }
  return {2, 1, c.lower_bound->arms};
}

/// Schedule defaults for `name` at horizon T, then the overrides.
inline AlgoParams effective_params(const std::string& name, const ParamOverrides& o, int T, Dims dm) {
  const double ws = o.warmup_scale.value_or(1.0);
  AlgoParams p;
  if (name == "full-info")
    p = fullinfo_defaults(T, dm, ws);
  else if (name == "model-based-bandit")
    p = model_based_defaults(T, dm, ws);
  else if (name == "oracle-efficient")
    p = oracle_efficient_defaults(T, dm, ws);
  else if (name == "adaptive")
    p = adaptive_defaults(T, dm, ws);
  else
    throw std::invalid_argument("unknown learner " + name);
  if (o.T0) p.T0 = *o.T0;
  if (o.N_reg) p.N_reg = *o.N_reg;
  if (o.discriminators) p.discriminators = *o.discriminators;
  if (o.eta) p.eta = *o.eta;
  if (o.gamma) p.gamma = *o.gamma;
  if (o.beta) p.beta = *o.beta;
  if (o.nu) p.nu = *o.nu;
  if (o.epsilon) p.epsilon = *o.epsilon;
  if (o.alpha) p.alpha = *o.alpha;
  if (o.l1_radius) p.l1_radius = *o.l1_radius;
  if (o.ls_radius) p.ls_radius = *o.ls_radius;
  return p;
}

/// Rejects learner and horizon pairs whose resolved schedule is invalid or
/// leaves no full regression epoch after warm-up.
inline void check_schedules(const ExperimentConfig& c) {
  const Dims dm = config_dims(c);
  for (std::size_t i = 0; i < c.learners.size(); ++i) {
    const auto& l = c.learners[i];
    const std::string ptr = "/learners/" + std::to_string(i);
    for (int T : c.horizons) {
      const AlgoParams p = effective_params(l.name, l.params, T, dm);
      try {
        validate_params(p);
      } catch (const std::invalid_argument& e) {
        throw ConfigError(ptr, e.what() + std::string(" at T=") + std::to_string(T));
      }
      const bool epochs = l.name == "oracle-efficient" || l.name == "adaptive";
      if (epochs && T - p.T0 < p.N_reg)
        throw ConfigError(ptr, "T=" + std::to_string(T) + " leaves " + std::to_string(T - p.T0) +
                                   " rounds after warm-up, fewer than N_reg=" + std::to_string(p.N_reg));
    }
  }
}

inline json params_json(const AlgoParams& p) {
  return {{"T", p.T},           {"T0", p.T0},       {"eta", p.eta},   {"gamma", p.gamma},
          {"beta", p.beta},     {"nu", p.nu},       {"epsilon", p.epsilon}, {"alpha", p.alpha},
          {"N_reg", p.N_reg},   {"discriminators", p.discriminators}, {"l1_radius", p.l1_radius},
          {"ls_radius", p.ls_radius}};
}

/// The effective configuration with the resolved parameters per learner and
/// horizon.
inline json effective_config_json(const ExperimentConfig& c) {
  json j;
  if (c.instance) {
    const auto& s = *c.instance;
    j["instance"] = {{"states_per_layer", s.states_per_layer},
                     {"action_count", s.action_count},
                     {"rank", s.rank},
                     {"style", s.style == FeatureStyle::Simplex ? "simplex" : "one-hot"},
                     {"seed", s.seed}};
  } else {
    j["lower_bound"] = {{"contexts", c.lower_bound->contexts}, {"arms", c.lower_bound->arms}, {"c_gap", c.lower_bound->c_gap}};
  }
  j["adversary"] = {{"kind", to_string(c.adversary.kind)},
                    {"norm_cap", c.adversary.norm_cap},
                    {"targeting_strength", c.adversary.targeting_strength},
                    {"base_level", c.adversary.base_level},
                    {"seed", c.adversary.seed}};
  json learners = json::array();
  const Dims dm = config_dims(c);
  for (const auto& l : c.learners) {
    json per = json::object();
    for (int T : c.horizons) per[std::to_string(T)] = params_json(effective_params(l.name, l.params, T, dm));
    learners.push_back({{"name", l.name}, {"params", per}});
  }
  j["learners"] = std::move(learners);
  j["horizons"] = c.horizons;
  j["seeds"] = c.seeds;
  j["output_dir"] = c.output_dir.string();
  j["include_warmup"] = c.include_warmup;
  j["transition_mode"] = to_string(c.transition_mode);
  j["policy_class"] = to_string(c.policy_class);
  j["extra_features"] = c.extra_features;
  j["write_records"] = c.write_records;
  return j;
}

/// Built-in configurations: "simplex-small", "benchmark", "adaptive",
/// "lower-bound".
inline json preset_config(const std::string& name) {
  json instance = {{"states_per_layer", {1, 3, 3}}, {"action_count", 2}, {"rank", 2}, {"style", "simplex"}, {"seed", 2024}};
  if (name == "simplex-small")
    return {{"instance", {{"states_per_layer", {1, 2, 2}}, {"action_count", 2}, {"rank", 2}, {"style", "simplex"}, {"seed", 7}}},
            {"adversary", {{"kind", "oblivious-linear"}, {"seed", 77}}},
            {"learners", {{{"name", "full-info"}}}},
            {"horizons", {500}},
            {"seeds", {0}}};
  if (name == "benchmark")
    return {{"instance", instance},
            {"adversary", {{"kind", "oblivious-linear"}, {"seed", 77}}},
            {"learners", {{{"name", "full-info"}}, {{"name", "model-based-bandit"}}, {{"name", "oracle-efficient"}}}},
            {"horizons", {2000, 8000, 32000}},
            {"seeds", {0, 1, 2, 3, 4, 5, 6, 7, 8, 9}}};
  if (name == "adaptive")
    return {{"instance", instance},
            {"adversary", {{"kind", "adaptive-targeting"}, {"targeting_strength", 0.5}, {"seed", 77}}},
            {"learners", {{{"name", "adaptive"}}}},
            {"horizons", {4000, 16000}},
            {"seeds", {0, 1, 2, 3, 4, 5, 6, 7, 8, 9}}};
  if (name == "lower-bound") {
    json seeds = json::array();
    for (int s = 0; s < 20; ++s) seeds.push_back(s);
    return {{"lower_bound", {{"contexts", 4}, {"arms", 4}, {"c_gap", 0.25}}},
            {"adversary", {{"seed", 77}}},
            {"learners", {{{"name", "full-info"}}}},
            {"horizons", {160000}},
            {"seeds", seeds}};
  }
  throw std::invalid_argument("unknown preset \"" + name + "\"");
}

}  // namespace lrarl
