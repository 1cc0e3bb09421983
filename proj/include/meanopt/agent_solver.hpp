#pragma once

// Per-agent optimum of compression ratio and transmit power for BS mode.
//
// For a fixed ratio rho the cheapest power is the one that makes the uplink
// exactly consume the time left after compression (latency-tight power), so
// the problem reduces to a scalar, strictly convex minimisation of E_bs(rho)
// over the feasible interval. That interval is bounded below by rho_min and
// by the requirement that compression leave some time for the uplink, and on
// both sides by the power cap: g(rho) = T0 + (aD/f) ln rho - rho D / R(Pmax)
// must be non-negative, and g is strictly concave with its peak at
// rho = a R(Pmax) / f.
//
// Both the region bounds and the stationary point are found by bisection.
// Newton iterations would need fewer steps, but bisection on a bracketing
// interval converges unconditionally; the cost per agent is a few hundred
// evaluations of closed-form expressions either way.

#include "meanopt/model.hpp"

#include <stdexcept>

namespace meanopt {

struct ConvergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct FeasibleRegion {
  double lo = 0.0;
  double hi = 0.0;
  bool empty = true;
  double rho_inf = 0.0;      // max(rho_min, exp(-T0 f / (a D)))
  double rho_pmax_lo = 0.0;  // left root of g
  double rho_pmax_hi = 0.0;  // right root of g; may exceed 1 or be +inf
};

struct StationarityPoint {
  double rho_zero = 0.0;
  double z = 0.0;
  double residual = 0.0;
};

struct AgentSolution {
  double rho_star = 1.0;
  double p_star = 0.0;
  AgentEvaluation evaluation;
  FeasibleRegion region;
  bool bs_feasible = false;
};

struct BisectionOptions {
  double rel_tol = 1e-10;
  int max_iter = 200;
};

// T0 - t_comp(rho). Non-positive values mean compression alone misses the
// deadline.
double residual_comm_time(const SystemParams& sys, const AgentProfile& agent, double rho);

// Region of rho in [rho_min, 1] reachable within T0 at a rate of rate_bps.
// The BS-mode region uses the rate at P_max; passing another rate gives the
// region for a fixed transmit power.
FeasibleRegion feasible_region_at_rate(const SystemParams& sys, const AgentProfile& agent,
                                       double rate_bps, const BisectionOptions& opt = {});
FeasibleRegion feasible_region(const SystemParams& sys, const AgentProfile& agent,
                               const BisectionOptions& opt = {});

// Latency-tight transmit power at rho: the power whose rate sends rho D bits in
// exactly T0 - t_comp(rho).
double latency_tight_power(const SystemParams& sys, const AgentProfile& agent, double rho);

// Energy along the latency-tight curve.
double tight_bs_energy(const SystemParams& sys, const AgentProfile& agent, double rho);

// Signed stationarity residual. Equals rho * dE_bs/drho along the
// latency-tight curve, so its sign is the sign of the derivative.
double stationarity_residual(const SystemParams& sys, const AgentProfile& agent, double rho);
StationarityPoint stationarity_point(const SystemParams& sys, const AgentProfile& agent,
                                     double rho);

AgentSolution solve_agent(const SystemParams& sys, const AgentProfile& agent,
                          const BisectionOptions& opt = {});

// E_local - E_bs at the optimum. Requires sol.bs_feasible.
double delta_save(const SystemParams& sys, const AgentProfile& agent, const AgentSolution& sol);

}  // namespace meanopt
