#include "meanopt/oracle.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>

namespace meanopt {

void OracleConfig::validate() const {
  if (rho_grid_points < 100) throw DomainError("oracle rho_grid_points must be >= 100");
  if (power_grid_points < 2) throw DomainError("oracle power_grid_points must be >= 2");
  if (region_scan_points < 100) throw DomainError("oracle region_scan_points must be >= 100");
  if (subset_max_n < 0 || subset_max_n > 20) {
    throw DomainError("oracle subset_max_n must lie in [0, 20]");
  }
  if (!(tolerance_continuous > 0.0) || !(tolerance_discrete > 0.0)) {
    throw DomainError("oracle tolerances must be > 0");
  }
}

namespace {

// Power needed to push rho D bits through the time left after compression;
// NaN when compression alone exhausts the deadline.
double required_power(const SystemParams& sys, const AgentProfile& agent, double rho) {
  const double t_left = sys.deadline_s - compression_time(agent, rho);
  if (!(t_left > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  const double bits_per_hz_s = rho * agent.data_bits / (sys.bandwidth_hz * t_left);
  return sys.noise_w / agent.channel_gain * (std::pow(2.0, bits_per_hz_s) - 1.0);
}

bool admissible(const SystemParams& sys, const AgentProfile& agent, double rho) {
  const double p = required_power(sys, agent, rho);
  return std::isfinite(p) && p > 0.0 && p <= sys.p_max_w;
}

double gap(double value, double reference) {
  const double diff = value - reference;
  if (diff == 0.0) return 0.0;
  return diff / std::max(std::abs(reference), std::numeric_limits<double>::min());
}

double log_point(double lo, double hi, int i, int n) {
  if (n <= 1 || hi <= lo) return lo;
  if (i == 0) return lo;
  if (i == n - 1) return hi;
  const double t = static_cast<double>(i) / static_cast<double>(n - 1);
  return std::exp(std::log(lo) + t * (std::log(hi) - std::log(lo)));
}

// Refines the boundary between an inadmissible and an admissible point,
// returning a point on the admissible side.
double refine(const SystemParams& sys, const AgentProfile& agent, double bad, double good) {
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (bad + good);
    if (mid == bad || mid == good) break;
    (admissible(sys, agent, mid) ? good : bad) = mid;
  }
  return good;
}

}  // namespace

std::optional<std::pair<double, double>> oracle_region(const SystemParams& sys,
                                                       const AgentProfile& agent,
                                                       const OracleConfig& cfg) {
  const int n = cfg.region_scan_points;
  int first = -1;
  int last = -1;
  for (int i = 0; i < n; ++i) {
    if (admissible(sys, agent, log_point(sys.rho_min, 1.0, i, n))) {
      if (first < 0) first = i;
      last = i;
    }
  }
  if (first < 0) return std::nullopt;
  double lo = log_point(sys.rho_min, 1.0, first, n);
  double hi = log_point(sys.rho_min, 1.0, last, n);
  if (first > 0) lo = refine(sys, agent, log_point(sys.rho_min, 1.0, first - 1, n), lo);
  if (last < n - 1) hi = refine(sys, agent, log_point(sys.rho_min, 1.0, last + 1, n), hi);
  return std::make_pair(lo, hi);
}

GridSolution grid_solve_agent(const SystemParams& sys, const AgentProfile& agent,
                              const OracleConfig& cfg) {
  const auto region = oracle_region(sys, agent, cfg);
  if (!region) throw DomainError("grid oracle: feasible region is empty");
  GridSolution best;
  best.lo = region->first;
  best.hi = region->second;
  best.energy = std::numeric_limits<double>::infinity();
  const int n = best.hi > best.lo ? cfg.rho_grid_points : 1;
  for (int i = 0; i < n; ++i) {
    const double rho = log_point(best.lo, best.hi, i, n);
    const double p = required_power(sys, agent, rho);
    if (!(p > 0.0)) continue;
    const double e = bs_energy(sys, agent, rho, p).e_bs;
    if (e < best.energy) {
      best.energy = e;
      best.rho = rho;
      best.power_w = p;
    }
  }
  return best;
}

bool power_sweep_nondecreasing(const SystemParams& sys, const AgentProfile& agent, double rho,
                               const OracleConfig& cfg) {
  const double p_tight = required_power(sys, agent, rho);
  if (!(p_tight > 0.0) || p_tight > sys.p_max_w) {
    throw DomainError("power sweep: rho is not admissible");
  }
  const int n = cfg.power_grid_points;
  double prev = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    const double p = p_tight + (sys.p_max_w - p_tight) * static_cast<double>(i) /
                                   static_cast<double>(n - 1);
    const double e = bs_energy(sys, agent, rho, p).e_bs;
    if (e < prev * (1.0 - 1e-12)) return false;
    prev = e;
  }
  return true;
}

NetworkSolution enumerate_modes(const SystemParams& sys, const SelectionInput& input,
                                const SelectionPolicy& policy, const OracleConfig& cfg) {
  const std::size_t n = input.evaluations.size();
  if (static_cast<int>(n) > cfg.subset_max_n) {
    throw OracleSizeError("mode enumeration refused: " + std::to_string(n) +
                          " agents exceeds subset_max_n = " + std::to_string(cfg.subset_max_n));
  }
  std::vector<int> candidates;
  for (std::size_t i = 0; i < n; ++i) {
    if (input.bs_feasible[i]) candidates.push_back(static_cast<int>(i));
  }
  const int m = static_cast<int>(candidates.size());
  const bool enforce = policy.local_latency == LocalLatencyPolicy::Enforce;

  NetworkSolution best;
  best.m = m;
  best.bs_feasible = input.bs_feasible;
  best.total_energy = std::numeric_limits<double>::infinity();
  best.feasible = false;

  std::vector<AgentEvaluation> evals = input.evaluations;
  const std::uint64_t masks = std::uint64_t{1} << m;
  for (std::uint64_t mask = 0; mask < masks; ++mask) {
    const int k = std::popcount(mask);
    const bool collaborative_ok = k >= policy.min_k && k <= m;
    const bool local_ok = k == 0 && !(policy.force_collaboration && m >= policy.min_k);
    if (!collaborative_ok && !local_ok) continue;

    for (auto& ev : evals) ev.mode = Mode::Local;
    for (int b = 0; b < m; ++b) {
      if (mask & (std::uint64_t{1} << b)) {
        evals[static_cast<std::size_t>(candidates[static_cast<std::size_t>(b)])].mode =
            Mode::Collaborative;
      }
    }
    if (enforce) {
      bool ok = true;
      for (std::size_t i = 0; i < n; ++i) {
        if (!evals[i].collaborative() && input.must_collaborate[i]) ok = false;
      }
      if (!ok) continue;
    }
    const double energy = network_energy(sys, evals, k);
    if (energy < best.total_energy || (energy == best.total_energy && k < best.k_star)) {
      best.total_energy = energy;
      best.k_star = k;
      best.per_agent = evals;
      best.feasible = true;
    }
  }
  best.modes.assign(n, 0);
  for (std::size_t i = 0; i < best.per_agent.size(); ++i) {
    best.modes[i] = best.per_agent[i].collaborative() ? 1 : 0;
  }
  return best;
}

OracleVerdict verify(const SystemParams& sys, std::span<const AgentProfile> trial,
                     const SelectionPolicy& policy, const OracleConfig& cfg) {
  cfg.validate();
  OracleVerdict verdict;
  const NetworkSolution solved = solve_network(sys, trial, policy);
  verdict.solver_energy = solved.total_energy;

  // Discrete step alone: same per-agent optima, exhaustive modes.
  std::vector<AgentSolution> solutions;
  for (const auto& agent : trial) solutions.push_back(solve_agent(sys, agent));
  const SelectionInput exact_input = make_selection_input(sys, trial, solutions);
  const NetworkSolution discrete = enumerate_modes(sys, exact_input, policy, cfg);
  verdict.discrete_energy = discrete.total_energy;
  verdict.discrete_gap_rel = std::abs(gap(verdict.solver_energy, discrete.total_energy));

  // End to end: grid-solved agents, exhaustive modes.
  SelectionInput grid_input;
  for (const auto& agent : trial) {
    const double local_t = local_time(sys, agent);
    grid_input.must_collaborate.push_back(local_t > sys.deadline_s);
    std::optional<GridSolution> grid;
    if (snr(sys, agent).feasible) {
      try {
        grid = grid_solve_agent(sys, agent, cfg);
      } catch (const DomainError&) {
        grid.reset();
      }
    }
    if (grid) {
      grid_input.evaluations.push_back(evaluate_collaborative(sys, agent, grid->rho, grid->power_w));
      grid_input.bs_feasible.push_back(true);
    } else {
      grid_input.evaluations.push_back(evaluate_local(sys, agent));
      grid_input.bs_feasible.push_back(false);
    }
  }
  const NetworkSolution oracle = enumerate_modes(sys, grid_input, policy, cfg);
  verdict.oracle_energy = oracle.total_energy;
  verdict.continuous_gap_rel = gap(verdict.solver_energy, oracle.total_energy);
  verdict.worst_case_gap_rel = std::max(verdict.discrete_gap_rel, verdict.continuous_gap_rel);

  const bool discrete_ok = verdict.discrete_gap_rel <= cfg.tolerance_discrete;
  const bool continuous_ok =
      verdict.solver_energy <= oracle.total_energy * (1.0 + cfg.tolerance_continuous);
  verdict.agreed = discrete_ok && continuous_ok;
  if (!verdict.agreed) verdict.counterexample = std::vector<AgentProfile>(trial.begin(), trial.end());
  return verdict;
}

}  // namespace meanopt
