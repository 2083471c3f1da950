#pragma once

// JSON and CSV persistence. Doubles round-trip exactly through JSON; CSV
// floats use 17 significant digits and LF line endings.

#include <lrarl/core.hpp>
#include <lrarl/harness.hpp>
#include <lrarl/run_record.hpp>

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace lrarl {

using json = nlohmann::json;

namespace detail {

inline json rows_json(const Eigen::MatrixXd& m) {
  json out = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    out.push_back(std::move(row));
  }
  return out;
}

inline Eigen::MatrixXd rows_from_json(const json& j, Eigen::Index rows, Eigen::Index cols, const std::string& where) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != rows)
    throw std::invalid_argument(where + ": expected " + std::to_string(rows) + " rows");
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const json& row = j[r];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
      throw std::invalid_argument(where + ": expected " + std::to_string(cols) + " columns");
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = row[c].get<double>();
  }
  return m;
}

inline json vector_json(const Eigen::VectorXd& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

}  // namespace detail

/// {horizon, rank, action_count, states_per_layer, phi[h][x][a][d], mu[h][x][d]}
inline json mdp_to_json(const LowRankMDP& mdp) {
  json j;
  j["horizon"] = mdp.horizon();
  j["rank"] = mdp.rank();
  j["action_count"] = mdp.action_count();
  j["states_per_layer"] = mdp.states_per_layer();
  const int A = mdp.action_count();
  json phi = json::array(), mu = json::array();
  for (int h = 0; h < mdp.horizon(); ++h) {
    json layer = json::array();
    for (int x = 0; x < mdp.states(h); ++x) layer.push_back(detail::rows_json(mdp.phi(h).middleRows(x * A, A)));
    phi.push_back(std::move(layer));
    mu.push_back(detail::rows_json(mdp.mu(h)));
  }
  j["phi"] = std::move(phi);
  j["mu"] = std::move(mu);
  return j;
}

inline LowRankMDP mdp_from_json(const json& j) {
  const int H = j.at("horizon").get<int>(), d = j.at("rank").get<int>(), A = j.at("action_count").get<int>();
  const auto states = j.at("states_per_layer").get<std::vector<int>>();
  if (static_cast<int>(states.size()) != H) throw std::invalid_argument("mdp json: states_per_layer length differs from horizon");
  const json& phi = j.at("phi");
  const json& mu = j.at("mu");
  if (!phi.is_array() || !mu.is_array() || static_cast<int>(phi.size()) != H || static_cast<int>(mu.size()) != H)
    throw std::invalid_argument("mdp json: phi and mu need one entry per layer");
  std::vector<Eigen::MatrixXd> P(H), M(H);
  for (int h = 0; h < H; ++h) {
    if (!phi[h].is_array() || static_cast<int>(phi[h].size()) != states[h])
      throw std::invalid_argument("mdp json: /phi/" + std::to_string(h) + " has wrong state count");
    P[h].resize(states[h] * A, d);
    for (int x = 0; x < states[h]; ++x)
      P[h].middleRows(x * A, A) =
          detail::rows_from_json(phi[h][x], A, d, "mdp json: /phi/" + std::to_string(h) + "/" + std::to_string(x));
    M[h] = detail::rows_from_json(mu[h], states[h], d, "mdp json: /mu/" + std::to_string(h));
  }
  return LowRankMDP(states, A, d, std::move(P), std::move(M));
}

/// One loss per line: {t, ell[h][x][a], g[h][d] when linear}.
inline void write_loss_stream(std::ostream& os, const LossSequence& losses) {
  for (std::size_t t = 0; t < losses.size(); ++t) {
    json j;
    j["t"] = t;
    json ell = json::array();
    for (const auto& m : losses[t].ell) ell.push_back(detail::rows_json(m));
    j["ell"] = std::move(ell);
    if (losses[t].witness) {
      json g = json::array();
      for (const auto& v : *losses[t].witness) g.push_back(detail::vector_json(v));
      j["g"] = std::move(g);
    }
    os << j.dump() << '\n';
  }
}

inline LossSequence read_loss_stream(std::istream& is, const LowRankMDP& mdp) {
  LossSequence out;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const json j = json::parse(line);
    const std::string where = "loss stream line " + std::to_string(out.size() + 1);
    LossFunction l;
    const json& ell = j.at("ell");
    if (!ell.is_array() || static_cast<int>(ell.size()) != mdp.horizon()) throw std::invalid_argument(where + ": wrong layer count");
    for (int h = 0; h < mdp.horizon(); ++h)
      l.ell.push_back(detail::rows_from_json(ell[h], mdp.states(h), mdp.action_count(), where));
    if (j.contains("g")) {
      std::vector<Eigen::VectorXd> g;
      for (const auto& v : j["g"]) {
        const auto vals = v.get<std::vector<double>>();
        g.push_back(Eigen::Map<const Eigen::VectorXd>(vals.data(), static_cast<Eigen::Index>(vals.size())));
      }
      l.witness = std::move(g);
    }
    out.push_back(std::move(l));
  }
  return out;
}

/// Assigns stable ids to the distinct policy objects of a record, in order of
/// first appearance.
class PolicyIndex {
 public:
  int id(const std::shared_ptr<const Policy>& p) {
    auto [it, inserted] = ids_.try_emplace(p.get(), static_cast<int>(order_.size()));
    if (inserted) order_.push_back(p);
    return it->second;
  }
  const std::vector<std::shared_ptr<const Policy>>& policies() const { return order_; }

 private:
  std::map<const Policy*, int> ids_;
  std::vector<std::shared_ptr<const Policy>> order_;
};

inline json policy_json(const Policy& pi) {
  json layers = json::array();
  for (const auto& m : pi.layers) layers.push_back(detail::rows_json(m));
  return layers;
}

/// Writes the round stream, the epoch sidecar and the policy table.
inline void write_run_record(const RunRecord& rec, std::ostream& rounds, std::ostream& epochs, std::ostream& policies) {
  PolicyIndex index;
  for (std::size_t t = 0; t < rec.rounds.size(); ++t) {
    const Round& r = rec.rounds[t];
    json j;
    j["t"] = t;
    json dist = json::array();
    for (const auto& c : *r.play) {
      json e{{"weight", c.weight}, {"policy", index.id(c.policy)}};
      if (c.class_index >= 0) e["class_index"] = c.class_index;
      dist.push_back(std::move(e));
    }
    j["play_distribution"] = std::move(dist);
    json traj = json::array();
    for (const auto& s : r.trajectory.steps) traj.push_back({s.state, s.action, s.loss});
    j["trajectory"] = std::move(traj);
    j["realized_loss_sum"] = r.realized_loss_sum;
    j["warmup"] = r.warmup;
    rounds << j.dump() << '\n';
  }
  for (const auto& e : rec.epochs) {
    json j{{"epoch", e.epoch}, {"first_round", e.first_round}, {"rounds", e.rounds}, {"policy", index.id(e.policy)},
           {"feature_index", e.feature_index}, {"samples", e.samples}};
    json theta = json::array(), q = json::array();
    for (const auto& v : e.theta) theta.push_back(detail::vector_json(v));
    for (const auto& m : e.q_hat) q.push_back(detail::rows_json(m));
    j["theta"] = std::move(theta);
    j["q_hat"] = std::move(q);
    epochs << j.dump() << '\n';
  }
  for (std::size_t i = 0; i < index.policies().size(); ++i)
    policies << json{{"id", i}, {"layers", policy_json(*index.policies()[i])}}.dump() << '\n';
}

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// t, expected_value, comparator_value, cum_regret; t is the 1-based round.
inline void write_curve_csv(std::ostream& os, const RegretReport& rep) {
  os << "t,expected_value,comparator_value,cum_regret\n";
  for (std::size_t i = 0; i < rep.cum_regret.size(); ++i)
    os << rep.first_round + static_cast<int>(i) + 1 << ',' << format_double(rep.expected_value[i]) << ','
       << format_double(rep.comparator_value[i]) << ',' << format_double(rep.cum_regret[i]) << '\n';
}

struct SummaryRow {
  std::string learner;
  int T = 0;
  std::uint64_t seed = 0;
  double regret_total = 0.0;
  double regret_final_rate = 0.0;  // regret_total / T
  double exponent = std::numeric_limits<double>::quiet_NaN();
  double exponent_hw = std::numeric_limits<double>::quiet_NaN();
};

inline void write_summary_csv(std::ostream& os, const std::vector<SummaryRow>& rows) {
  os << "learner,T,seed,regret_total,regret_final_rate,exponent,exponent_hw\n";
  for (const auto& r : rows)
    os << r.learner << ',' << r.T << ',' << r.seed << ',' << format_double(r.regret_total) << ','
       << format_double(r.regret_final_rate) << ',' << format_double(r.exponent) << ',' << format_double(r.exponent_hw)
       << '\n';
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace lrarl
