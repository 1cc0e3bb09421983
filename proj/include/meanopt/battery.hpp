#pragma once

// Invariant battery run by `meanopt verify`: per-agent checks of the convex
// subproblem and per-trial checks of the network solution.

#include "meanopt/agent_solver.hpp"
#include "meanopt/config.hpp"
#include "meanopt/oracle.hpp"

#include <json.hpp>

#include <span>
#include <string>
#include <vector>

namespace meanopt {

struct CheckResult {
  explicit CheckResult(std::string check_name = {}) : name(std::move(check_name)) {}

  std::string name;
  bool passed = true;
  int cases = 0;
  int failures = 0;
  double worst = 0.0;  // worst observed value of the check's metric
  std::string first_failure;

  void record(bool ok, double metric, const std::string& detail);
};

// Minimum discrete second difference of E_bs over `samples` uniform points of
// the feasible region, divided by max |E_bs|. Convexity means >= -1e-9.
double convexity_margin(const SystemParams& sys, const AgentProfile& agent,
                        const FeasibleRegion& region, int samples = 1000);

// |analytic - numeric| derivative mismatch at rho, divided by the magnitude of
// the two competing terms of the derivative. The numeric side is a central
// difference of the latency-tight energy with step 1e-7 rho.
double derivative_mismatch(const SystemParams& sys, const AgentProfile& agent, double rho);

struct BatteryReport {
  std::vector<CheckResult> checks;
  std::vector<nlohmann::json> counterexamples;
  bool passed() const;
  nlohmann::json to_json() const;
};

struct BatterySettings {
  int continuous_agents = 100;
  int discrete_trials = 50;
  int discrete_n_agents = 8;
};

BatteryReport run_battery(const SimConfig& cfg, const BatterySettings& settings = {});

}  // namespace meanopt
