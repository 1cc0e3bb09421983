#pragma once

// Brute-force reference solutions. Nothing here calls into the agent solver's
// region or stationarity code: the continuous oracle rebuilds the feasible
// interval from a direct feasibility predicate and grid-searches energies
// computed with the core-model formulas, and the discrete oracle enumerates
// every admissible mode vector.

#include "meanopt/agent_solver.hpp"
#include "meanopt/mode_selector.hpp"
#include "meanopt/model.hpp"

#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace meanopt {

struct OracleSizeError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct OracleConfig {
  int rho_grid_points = 2000;
  int power_grid_points = 200;
  int region_scan_points = 20000;
  int subset_max_n = 12;
  double tolerance_continuous = 1e-3;
  double tolerance_discrete = 1e-6;

  void validate() const;
};

struct GridSolution {
  double rho = 1.0;
  double power_w = 0.0;
  double energy = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

// Feasible interval found by scanning the predicate "deadline met at some
// power <= P_max" over a log grid on [rho_min, 1] and refining both ends.
std::optional<std::pair<double, double>> oracle_region(const SystemParams& sys,
                                                       const AgentProfile& agent,
                                                       const OracleConfig& cfg);

// Grid argmin over a log-spaced rho grid with latency-tight power. Throws
// DomainError when the region is empty.
GridSolution grid_solve_agent(const SystemParams& sys, const AgentProfile& agent,
                              const OracleConfig& cfg);

// Sweeps p over [p_tight(rho), P_max] at fixed rho and reports whether the BS
// energy is non-decreasing in p, i.e. whether latency-tight power is optimal.
bool power_sweep_nondecreasing(const SystemParams& sys, const AgentProfile& agent, double rho,
                               const OracleConfig& cfg);

// Exhaustive search over every x with x_i <= a_i and an admissible scale.
NetworkSolution enumerate_modes(const SystemParams& sys, const SelectionInput& input,
                                const SelectionPolicy& policy, const OracleConfig& cfg);

struct OracleVerdict {
  bool agreed = false;
  double oracle_energy = 0.0;    // enumeration over grid-solved agents
  double discrete_energy = 0.0;  // enumeration over solver-solved agents
  double solver_energy = 0.0;
  double worst_case_gap_rel = 0.0;  // max of the two relative gaps
  double discrete_gap_rel = 0.0;
  double continuous_gap_rel = 0.0;
  std::optional<std::vector<AgentProfile>> counterexample;
};

OracleVerdict verify(const SystemParams& sys, std::span<const AgentProfile> trial,
                     const SelectionPolicy& policy, const OracleConfig& cfg);

}  // namespace meanopt
