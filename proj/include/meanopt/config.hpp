#pragma once

// Experiment configuration and its JSON representation.
//
// Every section is optional; omitted keys keep the reference defaults
// (B = 1 MHz, sigma^2 = 4e-11 W, P_max = 1 W, T0 = 0.7 s, N = 15,
// D = 10 Mbit, ...). Unknown keys are rejected. Data sizes are written in
// Mbit in config files and converted to bits here and nowhere else.

#include "meanopt/mode_selector.hpp"
#include "meanopt/model.hpp"
#include "meanopt/oracle.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace meanopt {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Fading { None, Rayleigh };

struct ChannelModel {
  double pathloss_ref_gain = 1e-3;  // linear gain at 1 m
  double pathloss_exponent = 3.0;
  Fading fading = Fading::Rayleigh;
};

enum class Strategy { Proposed, SnrBased, LocalOnly, NoSemCom, FixedTxPower };

inline constexpr Strategy kAllStrategies[] = {Strategy::Proposed, Strategy::SnrBased,
                                              Strategy::LocalOnly, Strategy::NoSemCom,
                                              Strategy::FixedTxPower};

// Display label, e.g. "SNR-Based".
std::string strategy_label(Strategy s);
// Config/CLI key, e.g. "snr-based".
std::string strategy_key(Strategy s);
// Accepts either form.
Strategy parse_strategy(const std::string& text);

enum class SweepAxis { N, D, T0 };

std::string axis_name(SweepAxis axis);
SweepAxis parse_axis(const std::string& text);

struct SweepSpec {
  SweepAxis axis = SweepAxis::N;
  std::vector<double> values;  // SI: agents, bits, seconds
};

struct SimConfig {
  SystemParams system;
  int n_agents = 15;
  double data_bits = 1e7;
  double complexity = 10.0;
  double cpu_hz = 1e9;
  double d_min_m = 50.0;
  double d_max_m = 1000.0;
  ChannelModel channel;
  int n_trials = 1000;
  std::uint64_t seed = 1;
  double max_infeasible_rate = 0.0;
  double fixed_tx_power_w = 0.5;
  std::optional<SweepSpec> sweep;
  std::vector<Strategy> strategies{std::begin(kAllStrategies), std::end(kAllStrategies)};
  SelectionPolicy policy;
  std::vector<AgentProfile> agents;  // explicit instance for `solve`
  bool oracle_enabled = false;
  OracleConfig oracle;

  void validate() const;
};

SimConfig parse_config(const nlohmann::json& doc);
SimConfig load_config(const std::filesystem::path& path);
nlohmann::json config_to_json(const SimConfig& cfg);

// A replayable single-instance config: the system, policy and explicit agents.
nlohmann::json trial_to_json(const SimConfig& base, const std::vector<AgentProfile>& agents);

}  // namespace meanopt
