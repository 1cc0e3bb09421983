#include "meanopt/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

namespace meanopt {

using nlohmann::json;

namespace {

constexpr double kBitsPerMbit = 1e6;

// Reads fields from one JSON object and rejects keys nobody asked for.
class Section {
 public:
  Section(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) throw ConfigError(path_ + ": expected an object");
  }

  bool has(const std::string& key) const { return node_.contains(key); }

  template <typename T>
  void read(const std::string& key, T& out) {
    seen_.insert(key);
    if (!node_.contains(key)) return;
    try {
      out = node_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(path_ + "." + key + ": " + e.what());
    }
  }

  const json* child(const std::string& key) {
    seen_.insert(key);
    return node_.contains(key) ? &node_.at(key) : nullptr;
  }

  void finish() const {
    for (const auto& [key, value] : node_.items()) {
      if (!seen_.count(key)) throw ConfigError(path_ + ": unknown key '" + key + "'");
    }
  }

  const std::string& path() const { return path_; }

 private:
  const json& node_;
  std::string path_;
  std::set<std::string> seen_;
};

void read_data_size(Section& s, double& bits) {
  if (s.has("data_mbits") && s.has("data_bits")) {
    throw ConfigError(s.path() + ": give either data_mbits or data_bits, not both");
  }
  double mbits = std::nan("");
  s.read("data_mbits", mbits);
  if (!std::isnan(mbits)) bits = mbits * kBitsPerMbit;
  s.read("data_bits", bits);
}

void read_system(const json& node, SystemParams& sys) {
  Section s(node, "system");
  s.read("bandwidth_hz", sys.bandwidth_hz);
  s.read("noise_w", sys.noise_w);
  s.read("p_max_w", sys.p_max_w);
  s.read("snr_threshold", sys.snr_threshold);
  s.read("deadline_s", sys.deadline_s);
  s.read("rho_min", sys.rho_min);
  s.read("base_task_energy_j", sys.base_task_energy_j);
  s.read("usl_beta", sys.usl_beta);
  s.read("usl_xi", sys.usl_xi);
  s.read("switched_cap", sys.switched_cap);
  s.read("local_cycles_per_bit", sys.local_cycles_per_bit);
  s.finish();
}

void read_channel(const json& node, ChannelModel& ch) {
  Section s(node, "scenario.channel");
  s.read("pathloss_ref_gain", ch.pathloss_ref_gain);
  s.read("pathloss_exponent", ch.pathloss_exponent);
  std::string fading = ch.fading == Fading::Rayleigh ? "rayleigh" : "none";
  s.read("fading", fading);
  if (fading == "rayleigh") {
    ch.fading = Fading::Rayleigh;
  } else if (fading == "none") {
    ch.fading = Fading::None;
  } else {
    throw ConfigError("scenario.channel.fading: expected 'none' or 'rayleigh', got '" + fading + "'");
  }
  s.finish();
}

void read_scenario(const json& node, SimConfig& cfg) {
  Section s(node, "scenario");
  s.read("n_agents", cfg.n_agents);
  read_data_size(s, cfg.data_bits);
  s.read("complexity", cfg.complexity);
  s.read("cpu_hz", cfg.cpu_hz);
  s.read("d_min_m", cfg.d_min_m);
  s.read("d_max_m", cfg.d_max_m);
  s.read("fixed_tx_power_w", cfg.fixed_tx_power_w);
  if (const json* ch = s.child("channel")) read_channel(*ch, cfg.channel);
  s.finish();
}

void read_monte_carlo(const json& node, SimConfig& cfg) {
  Section s(node, "monte_carlo");
  s.read("n_trials", cfg.n_trials);
  s.read("seed", cfg.seed);
  s.read("max_infeasible_rate", cfg.max_infeasible_rate);
  s.finish();
}

void read_sweep(const json& node, SimConfig& cfg) {
  Section s(node, "sweep");
  std::string axis;
  std::vector<double> values;
  s.read("axis", axis);
  s.read("values", values);
  s.finish();
  SweepSpec spec;
  try {
    spec.axis = parse_axis(axis);
  } catch (const DomainError& e) {
    throw ConfigError(std::string("sweep.axis: ") + e.what());
  }
  for (double v : values) spec.values.push_back(spec.axis == SweepAxis::D ? v * kBitsPerMbit : v);
  cfg.sweep = std::move(spec);
}

void read_policies(const json& node, SelectionPolicy& policy) {
  Section s(node, "policies");
  std::string latency = to_string(policy.local_latency);
  s.read("local_latency", latency);
  s.read("min_k", policy.min_k);
  s.read("force_collaboration", policy.force_collaboration);
  s.finish();
  try {
    policy.local_latency = parse_local_latency_policy(latency);
  } catch (const DomainError& e) {
    throw ConfigError(std::string("policies.local_latency: ") + e.what());
  }
}

AgentProfile read_agent(const json& node, std::size_t index) {
  Section s(node, "agents[" + std::to_string(index) + "]");
  AgentProfile a;
  read_data_size(s, a.data_bits);
  s.read("complexity", a.complexity);
  s.read("cpu_hz", a.cpu_hz);
  s.read("channel_gain", a.channel_gain);
  s.read("distance_m", a.distance_m);
  s.finish();
  return a;
}

void read_oracle(const json& node, SimConfig& cfg) {
  Section s(node, "oracle");
  s.read("enabled", cfg.oracle_enabled);
  s.read("rho_grid_points", cfg.oracle.rho_grid_points);
  s.read("power_grid_points", cfg.oracle.power_grid_points);
  s.read("region_scan_points", cfg.oracle.region_scan_points);
  s.read("subset_max_n", cfg.oracle.subset_max_n);
  s.read("tolerance_continuous", cfg.oracle.tolerance_continuous);
  s.read("tolerance_discrete", cfg.oracle.tolerance_discrete);
  s.finish();
}

json system_to_json(const SystemParams& sys) {
  return {{"bandwidth_hz", sys.bandwidth_hz},
          {"noise_w", sys.noise_w},
          {"p_max_w", sys.p_max_w},
          {"snr_threshold", sys.snr_threshold},
          {"deadline_s", sys.deadline_s},
          {"rho_min", sys.rho_min},
          {"base_task_energy_j", sys.base_task_energy_j},
          {"usl_beta", sys.usl_beta},
          {"usl_xi", sys.usl_xi},
          {"switched_cap", sys.switched_cap},
          {"local_cycles_per_bit", sys.local_cycles_per_bit}};
}

json policies_to_json(const SelectionPolicy& p) {
  return {{"local_latency", to_string(p.local_latency)},
          {"min_k", p.min_k},
          {"force_collaboration", p.force_collaboration}};
}

json agents_to_json(const std::vector<AgentProfile>& agents) {
  json arr = json::array();
  for (const auto& a : agents) {
    arr.push_back({{"data_bits", a.data_bits},
                   {"complexity", a.complexity},
                   {"cpu_hz", a.cpu_hz},
                   {"channel_gain", a.channel_gain},
                   {"distance_m", a.distance_m}});
  }
  return arr;
}

}  // namespace

std::string strategy_label(Strategy s) {
  switch (s) {
    case Strategy::Proposed:
      return "Proposed";
    case Strategy::SnrBased:
      return "SNR-Based";
    case Strategy::LocalOnly:
      return "Local Only";
    case Strategy::NoSemCom:
      return "No SemCom";
    case Strategy::FixedTxPower:
      return "Fixed Tx Power";
  }
  return "?";
}

std::string strategy_key(Strategy s) {
  switch (s) {
    case Strategy::Proposed:
      return "proposed";
    case Strategy::SnrBased:
      return "snr-based";
    case Strategy::LocalOnly:
      return "local-only";
    case Strategy::NoSemCom:
      return "no-semcom";
    case Strategy::FixedTxPower:
      return "fixed-tx-power";
  }
  return "?";
}

Strategy parse_strategy(const std::string& text) {
  for (Strategy s : kAllStrategies) {
    if (text == strategy_key(s) || text == strategy_label(s)) return s;
  }
  throw DomainError("unknown strategy '" + text + "'");
}

std::string axis_name(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::N:
      return "N";
    case SweepAxis::D:
      return "D";
    case SweepAxis::T0:
      return "T0";
  }
  return "?";
}

SweepAxis parse_axis(const std::string& text) {
  if (text == "N") return SweepAxis::N;
  if (text == "D") return SweepAxis::D;
  if (text == "T0") return SweepAxis::T0;
  throw DomainError("unknown sweep axis '" + text + "' (expected N, D or T0)");
}

void SimConfig::validate() const {
  try {
    system.validate();
    for (const auto& a : agents) a.validate();
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  if (n_agents < 0) throw ConfigError("scenario.n_agents must be >= 0");
  if (!(data_bits > 0.0)) throw ConfigError("scenario data size must be > 0");
  if (!(complexity > 0.0)) throw ConfigError("scenario.complexity must be > 0");
  if (!(cpu_hz > 0.0)) throw ConfigError("scenario.cpu_hz must be > 0");
  if (!(d_min_m > 0.0) || !(d_min_m < d_max_m)) {
    throw ConfigError("scenario distances must satisfy 0 < d_min_m < d_max_m");
  }
  if (!(channel.pathloss_ref_gain > 0.0) || !(channel.pathloss_exponent >= 0.0)) {
    throw ConfigError("scenario.channel: gain must be > 0 and exponent >= 0");
  }
  if (n_trials < 1) throw ConfigError("monte_carlo.n_trials must be >= 1");
  if (!(max_infeasible_rate >= 0.0 && max_infeasible_rate <= 1.0)) {
    throw ConfigError("monte_carlo.max_infeasible_rate must lie in [0, 1]");
  }
  if (!(fixed_tx_power_w > 0.0 && fixed_tx_power_w <= system.p_max_w)) {
    throw ConfigError("scenario.fixed_tx_power_w must lie in (0, p_max_w]");
  }
  if (policy.min_k < 1) throw ConfigError("policies.min_k must be >= 1");
  if (strategies.empty()) throw ConfigError("strategies must not be empty");
  if (sweep) {
    if (sweep->values.empty()) throw ConfigError("sweep.values must not be empty");
    for (double v : sweep->values) {
      const bool ok = sweep->axis == SweepAxis::N ? (v >= 0.0 && v == std::floor(v)) : v > 0.0;
      if (!ok) throw ConfigError("sweep.values: invalid value for axis " + axis_name(sweep->axis));
    }
  }
  try {
    oracle.validate();
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
}

SimConfig parse_config(const json& doc) {
  SimConfig cfg;
  Section root(doc, "config");
  if (const json* n = root.child("system")) read_system(*n, cfg.system);
  if (const json* n = root.child("scenario")) read_scenario(*n, cfg);
  if (const json* n = root.child("monte_carlo")) read_monte_carlo(*n, cfg);
  if (const json* n = root.child("sweep")) read_sweep(*n, cfg);
  if (const json* n = root.child("strategies")) {
    if (!n->is_array()) throw ConfigError("strategies: expected an array of names");
    cfg.strategies.clear();
    for (const auto& item : *n) {
      if (!item.is_string()) throw ConfigError("strategies: expected strings");
      try {
        cfg.strategies.push_back(parse_strategy(item.get<std::string>()));
      } catch (const DomainError& e) {
        throw ConfigError(std::string("strategies: ") + e.what());
      }
    }
  }
  if (const json* n = root.child("policies")) read_policies(*n, cfg.policy);
  if (const json* n = root.child("agents")) {
    if (!n->is_array()) throw ConfigError("agents: expected an array");
    for (std::size_t i = 0; i < n->size(); ++i) cfg.agents.push_back(read_agent((*n)[i], i));
  }
  if (const json* n = root.child("oracle")) read_oracle(*n, cfg);
  root.finish();
  cfg.validate();
  return cfg;
}

SimConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  json doc;
  try {
    doc = json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError("config '" + path.string() + "': " + e.what());
  }
  return parse_config(doc);
}

json config_to_json(const SimConfig& cfg) {
  json doc;
  doc["system"] = system_to_json(cfg.system);
  doc["scenario"] = {
      {"n_agents", cfg.n_agents},
      {"data_bits", cfg.data_bits},
      {"complexity", cfg.complexity},
      {"cpu_hz", cfg.cpu_hz},
      {"d_min_m", cfg.d_min_m},
      {"d_max_m", cfg.d_max_m},
      {"fixed_tx_power_w", cfg.fixed_tx_power_w},
      {"channel",
       {{"pathloss_ref_gain", cfg.channel.pathloss_ref_gain},
        {"pathloss_exponent", cfg.channel.pathloss_exponent},
        {"fading", cfg.channel.fading == Fading::Rayleigh ? "rayleigh" : "none"}}}};
  doc["monte_carlo"] = {{"n_trials", cfg.n_trials},
                        {"seed", cfg.seed},
                        {"max_infeasible_rate", cfg.max_infeasible_rate}};
  if (cfg.sweep) {
    json values = json::array();
    for (double v : cfg.sweep->values) {
      values.push_back(cfg.sweep->axis == SweepAxis::D ? v / kBitsPerMbit : v);
    }
    doc["sweep"] = {{"axis", axis_name(cfg.sweep->axis)}, {"values", values}};
  }
  json strategies = json::array();
  for (Strategy s : cfg.strategies) strategies.push_back(strategy_key(s));
  doc["strategies"] = strategies;
  doc["policies"] = policies_to_json(cfg.policy);
  if (!cfg.agents.empty()) doc["agents"] = agents_to_json(cfg.agents);
  doc["oracle"] = {{"enabled", cfg.oracle_enabled},
                   {"rho_grid_points", cfg.oracle.rho_grid_points},
                   {"power_grid_points", cfg.oracle.power_grid_points},
                   {"region_scan_points", cfg.oracle.region_scan_points},
                   {"subset_max_n", cfg.oracle.subset_max_n},
                   {"tolerance_continuous", cfg.oracle.tolerance_continuous},
                   {"tolerance_discrete", cfg.oracle.tolerance_discrete}};
  return doc;
}

json trial_to_json(const SimConfig& base, const std::vector<AgentProfile>& agents) {
  json doc;
  doc["system"] = system_to_json(base.system);
  doc["policies"] = policies_to_json(base.policy);
  doc["agents"] = agents_to_json(agents);
  return doc;
}

}  // namespace meanopt
