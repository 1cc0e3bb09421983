// meanopt: solve, sweep, compare and verify energy-minimal collaboration
// plans for BS-assisted agent fleets.
//
// Exit codes: 0 success, 1 verification failure (or NaN / too many
// infeasible trials in a sweep), 2 configuration or usage error, 3 I/O or
// internal error.

#include "meanopt/battery.hpp"
#include "meanopt/config.hpp"
#include "meanopt/mode_selector.hpp"
#include "meanopt/netsim.hpp"
#include "meanopt/oracle.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace meanopt;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitVerification = 1;
constexpr int kExitConfig = 2;
constexpr int kExitInternal = 3;

struct Invocation {
  std::string config_path;
  std::string out_dir = "meanopt-out";
  std::optional<std::uint64_t> seed;
  unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
  std::vector<std::string> strategies;
  int verbosity = 1;
  bool dump_trials = false;
};

SimConfig load(const Invocation& inv) {
  SimConfig cfg = inv.config_path.empty() ? parse_config(json::object())
                                          : load_config(inv.config_path);
  if (inv.seed) cfg.seed = *inv.seed;
  if (!inv.strategies.empty()) {
    cfg.strategies.clear();
    for (const auto& s : inv.strategies) {
      try {
        cfg.strategies.push_back(parse_strategy(s));
      } catch (const DomainError& e) {
        throw ConfigError(std::string("--strategy: ") + e.what());
      }
    }
  }
  cfg.validate();
  return cfg;
}

fs::path prepare_out(const Invocation& inv) {
  fs::path out(inv.out_dir);
  fs::create_directories(out);
  return out;
}

void write_json(const fs::path& path, const json& doc) { write_text(path, doc.dump(2) + "\n"); }

json solution_to_json(const NetworkSolution& sol, std::span<const AgentProfile> agents) {
  json per_agent = json::array();
  for (std::size_t i = 0; i < sol.per_agent.size(); ++i) {
    const auto& ev = sol.per_agent[i];
    per_agent.push_back({{"index", i},
                         {"distance_m", agents[i].distance_m},
                         {"channel_gain", agents[i].channel_gain},
                         {"snr", sol.links[i].snr},
                         {"snr_feasible", sol.links[i].feasible},
                         {"bs_feasible", static_cast<bool>(sol.bs_feasible[i])},
                         {"mode", sol.modes[i]},
                         {"rho", ev.rho},
                         {"power_w", ev.power_w},
                         {"compressed_bits", ev.compressed_bits},
                         {"t_comp_s", ev.t_comp},
                         {"t_comm_s", ev.t_comm},
                         {"t_bs_s", ev.t_bs},
                         {"t_local_s", ev.t_local},
                         {"e_comp_j", ev.e_comp},
                         {"e_comm_j", ev.e_comm},
                         {"e_bs_j", ev.e_bs},
                         {"e_local_j", ev.e_local},
                         {"delta_save_j", ev.delta_save}});
  }
  json trace = json::array();
  for (const auto& c : sol.objective_trace) trace.push_back({{"k", c.k}, {"energy_j", c.energy}});
  return {{"k_star", sol.k_star},
          {"total_energy_j", sol.total_energy},
          {"m", sol.m},
          {"feasible", sol.feasible},
          {"latency_violations", sol.latency_violations},
          {"modes", sol.modes},
          {"permutation", sol.permutation},
          {"objective_trace", trace},
          {"agents", per_agent}};
}

void print_solution(std::ostream& os, const NetworkSolution& sol,
                    std::span<const AgentProfile> agents) {
  os << "K* = " << sol.k_star << "  (M = " << sol.m << " BS-feasible of " << agents.size()
     << " agents)\n";
  os << "E_min = " << format_double(sol.total_energy) << " J\n";
  if (!sol.feasible) os << "warning: no mode vector meets the enforced local deadline\n";
  os << std::left << std::setw(4) << "i" << std::setw(10) << "dist_m" << std::setw(12) << "snr"
     << std::setw(3) << "a" << std::setw(3) << "x" << std::setw(12) << "rho*" << std::setw(12)
     << "p*_w" << std::setw(12) << "t_bs_s" << std::setw(12) << "e_bs_j" << std::setw(12)
     << "e_local_j" << "dE_save_j\n";
  os << std::setprecision(5);
  for (std::size_t i = 0; i < agents.size(); ++i) {
    const auto& ev = sol.per_agent[i];
    const bool bs = sol.bs_feasible[i];
    auto cell = [&](double v) {
      std::ostringstream s;
      s << std::setprecision(5);
      if (bs) {
        s << v;
      } else {
        s << "-";
      }
      return s.str();
    };
    os << std::setw(4) << i << std::setw(10) << agents[i].distance_m << std::setw(12)
       << sol.links[i].snr << std::setw(3) << (sol.links[i].feasible ? 1 : 0) << std::setw(3)
       << sol.modes[i] << std::setw(12) << cell(ev.rho) << std::setw(12) << cell(ev.power_w)
       << std::setw(12) << cell(ev.t_bs) << std::setw(12) << cell(ev.e_bs) << std::setw(12)
       << ev.e_local << cell(ev.delta_save) << "\n";
  }
}

json verdict_to_json(const OracleVerdict& v) {
  return {{"agreed", v.agreed},
          {"solver_energy_j", v.solver_energy},
          {"oracle_energy_j", v.oracle_energy},
          {"discrete_energy_j", v.discrete_energy},
          {"discrete_gap_rel", v.discrete_gap_rel},
          {"continuous_gap_rel", v.continuous_gap_rel},
          {"worst_case_gap_rel", v.worst_case_gap_rel}};
}

int cmd_solve(const Invocation& inv) {
  const SimConfig cfg = load(inv);
  const fs::path out = prepare_out(inv);
  const std::vector<AgentProfile> agents = cfg.agents.empty() ? draw_agents(cfg, 0) : cfg.agents;

  const NetworkSolution sol = solve_network(cfg.system, agents, cfg.policy);
  print_solution(std::cout, sol, agents);
  if (cfg.policy.local_latency == LocalLatencyPolicy::Warn && sol.latency_violations > 0) {
    std::cerr << "warning: " << sol.latency_violations
              << " local-mode agent(s) exceed the deadline\n";
  }

  json doc = {{"config", trial_to_json(cfg, agents)}, {"solution", solution_to_json(sol, agents)}};
  int code = kExitOk;
  if (cfg.oracle_enabled) {
    const OracleVerdict v = verify(cfg.system, agents, cfg.policy, cfg.oracle);
    doc["oracle"] = verdict_to_json(v);
    std::cout << "oracle: " << (v.agreed ? "agreed" : "DISAGREED")
              << "  solver=" << format_double(v.solver_energy)
              << " J  oracle=" << format_double(v.oracle_energy) << " J\n";
    if (!v.agreed) {
      write_json(out / "counterexample.json", trial_to_json(cfg, agents));
      code = kExitVerification;
    }
  }
  write_json(out / "solution.json", doc);
  return code;
}

RunOptions run_options(const Invocation& inv, std::ofstream* dump) {
  RunOptions opt;
  opt.jobs = inv.jobs;
  if (inv.verbosity > 0) {
    opt.progress = [](int done, int total) {
      std::cerr << "\r  trials " << done << "/" << total << std::flush;
      if (done == total) std::cerr << "\n";
    };
  }
  if (dump) {
    opt.on_trial = [dump](const SimConfig& c, const TrialResult& r) {
      json line = trial_to_json(c, draw_agents(c, r.trial_index));
      line["trial_index"] = r.trial_index;
      *dump << line.dump() << "\n";
    };
  }
  return opt;
}

int sweep_health(const SimConfig& cfg, const SweepResult& result) {
  for (const auto& point : result.points) {
    for (const auto& s : point.strategies) {
      const int total = s.n_trials + s.non_finite_trials;
      const double infeasible_rate = total > 0 ? double(s.infeasible_trials) / total : 0.0;
      if (s.non_finite_trials > 0) {
        std::cerr << "error: " << strategy_label(s.strategy) << " produced "
                  << s.non_finite_trials << " non-finite energies at value "
                  << format_double(point.value) << "\n";
        return kExitVerification;
      }
      if (infeasible_rate > cfg.max_infeasible_rate) {
        std::cerr << "error: " << strategy_label(s.strategy) << " infeasible in "
                  << s.infeasible_trials << "/" << total << " trials at value "
                  << format_double(point.value) << " (limit "
                  << format_double(cfg.max_infeasible_rate) << ")\n";
        return kExitVerification;
      }
    }
  }
  return kExitOk;
}

int cmd_sweep(const Invocation& inv) {
  const SimConfig cfg = load(inv);
  if (!cfg.sweep) throw ConfigError("sweep: config has no 'sweep' section");
  const fs::path out = prepare_out(inv);
  const std::string axis = axis_name(cfg.sweep->axis);

  std::optional<std::ofstream> dump;
  if (inv.dump_trials) dump.emplace(out / ("trials_" + axis + ".jsonl"), std::ios::trunc);
  if (inv.verbosity > 0) std::cerr << "sweep over " << axis << "\n";
  const SweepResult result = run_sweep(cfg, run_options(inv, dump ? &*dump : nullptr));

  write_text(out / ("sweep_" + axis + ".csv"), sweep_csv(result));
  write_json(out / ("sweep_" + axis + ".json"), sweep_to_json(result, cfg));
  return sweep_health(cfg, result);
}

int cmd_compare(const Invocation& inv) {
  const SimConfig cfg = load(inv);
  const fs::path out = prepare_out(inv);
  SweepResult result;
  result.points.push_back(run_point(cfg, cfg.n_agents, run_options(inv, nullptr)));

  std::cout << "N = " << cfg.n_agents << ", D = " << format_double(cfg.data_bits / 1e6)
            << " Mbit, T0 = " << format_double(cfg.system.deadline_s) << " s, "
            << cfg.n_trials << " trials\n";
  std::cout << std::left << std::setw(16) << "strategy" << std::setw(16) << "mean_energy_j"
            << std::setw(14) << "stderr_j" << "mean_K\n";
  for (const auto& s : result.points.front().strategies) {
    double k_sum = 0.0;
    int k_n = 0;
    for (const auto& [k, c] : s.k_histogram) {
      k_sum += double(k) * c;
      k_n += c;
    }
    std::cout << std::setw(16) << strategy_label(s.strategy) << std::setw(16)
              << format_double(s.mean_energy_j) << std::setw(14) << format_double(s.stderr_j)
              << format_double(k_n ? k_sum / k_n : 0.0) << "\n";
  }
  write_json(out / "compare.json", sweep_to_json(result, cfg));
  return sweep_health(cfg, result);
}

int cmd_verify(const Invocation& inv) {
  const SimConfig cfg = load(inv);
  const fs::path out = prepare_out(inv);
  const BatteryReport report = run_battery(cfg);
  for (const auto& c : report.checks) {
    std::cout << (c.passed ? "PASS " : "FAIL ") << std::left << std::setw(30) << c.name
              << " cases=" << c.cases << " worst=" << format_double(c.worst);
    if (!c.passed) std::cout << "  first failure: " << c.first_failure;
    std::cout << "\n";
  }
  write_json(out / "verify.json", report.to_json());
  for (std::size_t i = 0; i < report.counterexamples.size(); ++i) {
    write_json(out / ("counterexample_" + std::to_string(i) + ".json"), report.counterexamples[i]);
  }
  return report.passed() ? kExitOk : kExitVerification;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Energy-minimal collaboration planning for BS-assisted agent fleets"};
  app.require_subcommand(1);
  app.fallthrough();

  Invocation inv;
  int verbose = 0;
  bool quiet = false;
  app.add_option("--config", inv.config_path, "Config file (JSON)")->envname("MEANOPT_CONFIG");
  app.add_option("--out", inv.out_dir, "Output directory")->envname("MEANOPT_OUT");
  app.add_option("--seed", inv.seed, "Override the config seed")->envname("MEANOPT_SEED");
  app.add_option("--jobs", inv.jobs, "Worker threads")
      ->envname("MEANOPT_JOBS")
      ->check(CLI::PositiveNumber);
  app.add_option("--strategy", inv.strategies, "Comma-separated strategy list")
      ->delimiter(',')
      ->envname("MEANOPT_STRATEGY");
  app.add_flag("-v,--verbose", verbose, "More progress output on stderr");
  app.add_flag("-q,--quiet", quiet, "No progress output");

  auto* solve = app.add_subcommand("solve", "Solve one instance and print the plan");
  auto* sweep = app.add_subcommand("sweep", "Monte Carlo sweep over N, D or T0");
  sweep->add_flag("--dump-trials", inv.dump_trials, "Write every trial as a replayable config");
  auto* compare = app.add_subcommand("compare", "All strategies at one operating point");
  auto* verify_cmd = app.add_subcommand("verify", "Oracle and invariant checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }
  inv.verbosity = quiet ? 0 : 1 + verbose;

  try {
    if (solve->parsed()) return cmd_solve(inv);
    if (sweep->parsed()) return cmd_sweep(inv);
    if (compare->parsed()) return cmd_compare(inv);
    if (verify_cmd->parsed()) return cmd_verify(inv);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitConfig;
}
