#include "meanopt/battery.hpp"

#include "meanopt/mode_selector.hpp"
#include "meanopt/netsim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace meanopt {

using nlohmann::json;

void CheckResult::record(bool ok, double metric, const std::string& detail) {
  ++cases;
  if (std::isnan(metric) || metric > worst) worst = metric;
  if (!ok) {
    ++failures;
    passed = false;
    if (first_failure.empty()) first_failure = detail;
  }
}

double convexity_margin(const SystemParams& sys, const AgentProfile& agent,
                        const FeasibleRegion& region, int samples) {
  if (region.empty || !(region.hi > region.lo) || samples < 3) return 0.0;
  std::vector<double> e(static_cast<std::size_t>(samples));
  double scale = 0.0;
  for (int i = 0; i < samples; ++i) {
    const double rho = region.lo + (region.hi - region.lo) * i / (samples - 1);
    e[static_cast<std::size_t>(i)] = tight_bs_energy(sys, agent, rho);
    scale = std::max(scale, std::abs(e[static_cast<std::size_t>(i)]));
  }
  double margin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i + 1 < e.size(); ++i) {
    margin = std::min(margin, e[i - 1] - 2.0 * e[i] + e[i + 1]);
  }
  return margin / scale;
}

double derivative_mismatch(const SystemParams& sys, const AgentProfile& agent, double rho) {
  const double h = 1e-7 * rho;
  const double numeric =
      (tight_bs_energy(sys, agent, rho + h) - tight_bs_energy(sys, agent, rho - h)) / (2.0 * h);
  const StationarityPoint sp = stationarity_point(sys, agent, rho);
  const double compression_term =
      sys.switched_cap * agent.complexity * agent.data_bits * agent.cpu_hz * agent.cpu_hz;
  const double uplink_term = sp.residual + compression_term;
  const double analytic = sp.residual / rho;
  const double scale = (std::abs(uplink_term) + compression_term) / rho;
  return std::abs(analytic - numeric) / scale;
}

bool BatteryReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

json BatteryReport::to_json() const {
  json arr = json::array();
  for (const auto& c : checks) {
    arr.push_back({{"name", c.name},
                   {"passed", c.passed},
                   {"cases", c.cases},
                   {"failures", c.failures},
                   {"worst", c.worst},
                   {"first_failure", c.first_failure}});
  }
  return {{"passed", passed()}, {"checks", arr}, {"counterexamples", counterexamples}};
}

namespace {

std::string agent_tag(std::uint64_t trial, std::size_t i) {
  return "trial " + std::to_string(trial) + " agent " + std::to_string(i);
}

double rel(double a, double b) {
  const double d = std::abs(a - b);
  return d == 0.0 ? 0.0 : d / std::max(std::abs(b), std::numeric_limits<double>::min());
}

}  // namespace

BatteryReport run_battery(const SimConfig& cfg, const BatterySettings& settings) {
  const SystemParams& sys = cfg.system;
  BatteryReport report;

  CheckResult cont{"continuous_oracle"};
  CheckResult tight{"latency_tightness"};
  CheckResult cap{"power_cap"};
  CheckResult sweep{"latency_tight_power_optimal"};
  CheckResult convex{"convexity"};
  CheckResult deriv{"derivative_crosscheck"};

  SimConfig draw_cfg = cfg;
  if (draw_cfg.n_agents < 1) draw_cfg.n_agents = 15;
  int collected = 0;
  for (std::uint64_t t = 0; collected < settings.continuous_agents && t < 100000; ++t) {
    const auto agents = draw_agents(draw_cfg, t);
    for (std::size_t i = 0; i < agents.size() && collected < settings.continuous_agents; ++i) {
      const AgentProfile& a = agents[i];
      if (!snr(sys, a).feasible) continue;
      const AgentSolution sol = solve_agent(sys, a);
      if (!sol.bs_feasible) continue;
      ++collected;
      const std::string tag = agent_tag(t, i);

      if (oracle_region(sys, a, cfg.oracle)) {
        const GridSolution grid = grid_solve_agent(sys, a, cfg.oracle);
        const double gap = (sol.evaluation.e_bs - grid.energy) / std::abs(grid.energy);
        cont.record(gap <= 1e-6, gap, tag);
        sweep.record(power_sweep_nondecreasing(sys, a, grid.rho, cfg.oracle), 0.0, tag);
      }
      const double lat = std::abs(sol.evaluation.t_bs - sys.deadline_s) / sys.deadline_s;
      tight.record(lat <= 1e-9, lat, tag);
      const double over = sol.p_star / sys.p_max_w - 1.0;
      cap.record(over <= 1e-9, over, tag);
      const double margin = convexity_margin(sys, a, sol.region);
      convex.record(margin >= -1e-9, -margin, tag);
      if (sol.region.hi > sol.region.lo) {
        for (int j = 1; j <= 20; ++j) {
          const double rho = sol.region.lo + (sol.region.hi - sol.region.lo) * j / 21.0;
          const double mismatch = derivative_mismatch(sys, a, rho);
          deriv.record(mismatch <= 1e-4, mismatch, tag);
        }
      }
    }
  }

  CheckResult discrete{"discrete_oracle"};
  CheckResult e2e{"end_to_end_oracle"};
  CheckResult dominance{"dominance"};
  CheckResult forms{"objective_forms"};
  CheckResult gate{"mode_gate_consistency"};

  SimConfig small = cfg;
  small.n_agents = std::min(settings.discrete_n_agents, cfg.oracle.subset_max_n);
  for (int t = 0; t < settings.discrete_trials; ++t) {
    const auto trial = static_cast<std::uint64_t>(t);
    const auto agents = draw_agents(small, trial);
    const std::string tag = "trial " + std::to_string(t);
    const OracleVerdict v = verify(sys, agents, cfg.policy, cfg.oracle);
    discrete.record(v.discrete_gap_rel <= cfg.oracle.tolerance_discrete, v.discrete_gap_rel, tag);
    const double e2e_gap = std::abs(v.continuous_gap_rel);
    e2e.record(e2e_gap <= cfg.oracle.tolerance_continuous, e2e_gap, tag);
    if (!v.agreed) report.counterexamples.push_back(trial_to_json(small, agents));

    const NetworkSolution sol = solve_network(sys, agents, cfg.policy);
    const double local = run_strategy(Strategy::LocalOnly, sys, agents, cfg.policy).energy;
    const double snr_based = run_strategy(Strategy::SnrBased, sys, agents, cfg.policy).energy;
    const double excess = std::max(sol.total_energy - local, sol.total_energy - snr_based);
    dominance.record(excess <= 1e-9, excess, tag);

    const double direct = recompute_total(sys, sol);
    const double regrouped = network_energy_regrouped(sys, sol.per_agent, sol.k_star);
    const double form_gap = std::max(rel(direct, sol.total_energy), rel(regrouped, direct));
    forms.record(form_gap <= 1e-12, form_gap, tag);

    bool consistent = true;
    for (std::size_t i = 0; i < agents.size(); ++i) {
      if (sol.modes[i] && (!sol.links[i].feasible || !sol.bs_feasible[i])) consistent = false;
    }
    gate.record(consistent, consistent ? 0.0 : 1.0, tag);
  }

  report.checks = {cont,     tight,     cap,       sweep, convex, deriv,
                   discrete, e2e,       dominance, forms, gate};
  return report;
}

}  // namespace meanopt
