#pragma once

// Monte Carlo harness: random agent placement and channels, the proposed
// scheme and four baselines, parameter sweeps, and result files.
//
// Every trial derives its own generator from (seed, trial index) and all
// strategies in a trial see the same agents. Trials run in fixed-size blocks
// on a worker pool and are reduced in trial order, so output does not depend
// on the number of workers.

#include "meanopt/config.hpp"
#include "meanopt/mode_selector.hpp"
#include "meanopt/model.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace meanopt {

// g0 d^-eta F.
double channel_gain_at(const ChannelModel& channel, double distance_m, double fading = 1.0);

std::uint64_t trial_seed(std::uint64_t seed, std::uint64_t trial_index);

// Agents at distances uniform on [d_min, d_max] with |h|^2 = g0 d^-eta F,
// F ~ Exp(1) under Rayleigh fading.
std::vector<AgentProfile> draw_agents(const SimConfig& cfg, std::uint64_t trial_index);

struct StrategyOutcome {
  double energy = 0.0;
  int k = 0;
  bool feasible = true;  // false only when an enforced local deadline is missed
  int fallbacks = 0;     // SNR-feasible agents pushed back to local mode
};

StrategyOutcome run_strategy(Strategy strategy, const SystemParams& sys,
                             std::span<const AgentProfile> agents, const SelectionPolicy& policy,
                             double fixed_tx_power_w = 0.5);

// Optimal rho for a fixed transmit power: the interior stationary point
// kappa a f^2 R(p) / p clipped to the region reachable in time at that power.
// Returns nullopt if no rho meets the deadline.
struct FixedPowerPoint {
  double rho;
  double power_w;
};
std::optional<FixedPowerPoint> fixed_power_rho(const SystemParams& sys, const AgentProfile& agent,
                                               double power_w);

struct TrialResult {
  std::uint64_t trial_index = 0;
  std::uint64_t seed = 0;
  std::vector<StrategyOutcome> outcomes;  // parallel to SimConfig::strategies
};

TrialResult run_trial(const SimConfig& cfg, std::uint64_t trial_index);

struct StrategySummary {
  Strategy strategy = Strategy::Proposed;
  double mean_energy_j = 0.0;
  double stderr_j = 0.0;
  int n_trials = 0;
  int infeasible_trials = 0;
  int non_finite_trials = 0;
  std::map<int, int> k_histogram;
};

struct SweepPoint {
  double value = 0.0;
  std::vector<StrategySummary> strategies;
};

struct SweepResult {
  SweepAxis axis = SweepAxis::N;
  std::vector<SweepPoint> points;
};

struct RunOptions {
  unsigned jobs = 1;
  // Called once per finished trial block with (trials done, total).
  std::function<void(int, int)> progress;
  // Called for every trial in trial order.
  std::function<void(const SimConfig&, const TrialResult&)> on_trial;
};

// Applies one sweep value to a copy of the config.
SimConfig with_axis_value(const SimConfig& cfg, SweepAxis axis, double value);

SweepPoint run_point(const SimConfig& cfg, double axis_value, const RunOptions& opt = {});
SweepResult run_sweep(const SimConfig& cfg, const RunOptions& opt = {});

// Shortest round-trip decimal form.
std::string format_double(double v);

// CSV with header axis,value,strategy,mean_energy_j,stderr_j,n_trials.
std::string sweep_csv(const SweepResult& result);
nlohmann::json sweep_to_json(const SweepResult& result, const SimConfig& cfg);
SweepResult sweep_from_json(const nlohmann::json& doc);

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace meanopt
