#include "meanopt/netsim.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <random>
#include <thread>

namespace meanopt {

using nlohmann::json;

namespace {

constexpr std::uint64_t kTrialBlock = 256;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Uniform on the open interval (0, 1) from the top 53 bits.
double open_unit(std::mt19937_64& gen) {
  return (static_cast<double>(gen() >> 11) + 0.5) * 0x1.0p-53;
}

// Collaborative evaluation for every agent that has one; K is the survivor
// count when it reaches min_k, otherwise everyone stays local.
StrategyOutcome collaborate_all(const SystemParams& sys, std::span<const AgentProfile> agents,
                                const std::vector<std::optional<AgentEvaluation>>& bs,
                                const SelectionPolicy& policy, int fallbacks) {
  int survivors = 0;
  for (const auto& ev : bs) survivors += ev ? 1 : 0;
  const bool collaborate = survivors >= policy.min_k;

  std::vector<AgentEvaluation> evals;
  evals.reserve(agents.size());
  for (std::size_t i = 0; i < agents.size(); ++i) {
    if (collaborate && bs[i]) {
      evals.push_back(*bs[i]);
    } else {
      evals.push_back(evaluate_local(sys, agents[i]));
    }
  }

  StrategyOutcome out;
  out.k = collaborate ? survivors : 0;
  out.energy = network_energy(sys, evals, out.k);
  out.fallbacks = fallbacks;
  if (policy.local_latency == LocalLatencyPolicy::Enforce) {
    for (const auto& ev : evals) {
      if (!ev.collaborative() && ev.t_local > sys.deadline_s) out.feasible = false;
    }
  }
  return out;
}

struct Accumulator {
  int n = 0;
  double mean = 0.0;
  double m2 = 0.0;
  int infeasible = 0;
  int non_finite = 0;
  std::map<int, int> k_histogram;

  void add(const StrategyOutcome& o) {
    if (!o.feasible) ++infeasible;
    if (!std::isfinite(o.energy)) {
      ++non_finite;
      return;
    }
    ++k_histogram[o.k];
    ++n;
    const double delta = o.energy - mean;
    mean += delta / n;
    m2 += delta * (o.energy - mean);
  }

  double standard_error() const {
    if (n < 2) return 0.0;
    return std::sqrt(m2 / (n - 1)) / std::sqrt(static_cast<double>(n));
  }
};

}  // namespace

double channel_gain_at(const ChannelModel& channel, double distance_m, double fading) {
  return channel.pathloss_ref_gain * std::pow(distance_m, -channel.pathloss_exponent) * fading;
}

std::uint64_t trial_seed(std::uint64_t seed, std::uint64_t trial_index) {
  return splitmix64(seed ^ splitmix64(trial_index));
}

std::vector<AgentProfile> draw_agents(const SimConfig& cfg, std::uint64_t trial_index) {
  std::mt19937_64 gen(trial_seed(cfg.seed, trial_index));
  std::vector<AgentProfile> agents;
  agents.reserve(static_cast<std::size_t>(cfg.n_agents));
  for (int i = 0; i < cfg.n_agents; ++i) {
    AgentProfile a;
    a.data_bits = cfg.data_bits;
    a.complexity = cfg.complexity;
    a.cpu_hz = cfg.cpu_hz;
    a.distance_m = cfg.d_min_m + (cfg.d_max_m - cfg.d_min_m) * open_unit(gen);
    double fading = 1.0;
    if (cfg.channel.fading == Fading::Rayleigh) fading = -std::log(open_unit(gen));
    a.channel_gain = channel_gain_at(cfg.channel, a.distance_m, fading);
    agents.push_back(a);
  }
  return agents;
}

std::optional<FixedPowerPoint> fixed_power_rho(const SystemParams& sys, const AgentProfile& agent,
                                               double power_w) {
  const double rate = achievable_rate(sys, agent, power_w);
  const FeasibleRegion region = feasible_region_at_rate(sys, agent, rate);
  if (region.empty) return std::nullopt;
  const double interior =
      sys.switched_cap * agent.complexity * agent.cpu_hz * agent.cpu_hz * rate / power_w;
  return FixedPowerPoint{std::clamp(interior, region.lo, region.hi), power_w};
}

StrategyOutcome run_strategy(Strategy strategy, const SystemParams& sys,
                             std::span<const AgentProfile> agents, const SelectionPolicy& policy,
                             double fixed_tx_power_w) {
  if (strategy == Strategy::Proposed) {
    const NetworkSolution sol = solve_network(sys, agents, policy);
    StrategyOutcome out;
    out.energy = sol.total_energy;
    out.k = sol.k_star;
    out.feasible = sol.feasible;
    for (std::size_t i = 0; i < agents.size(); ++i) {
      if (sol.links[i].feasible && !sol.bs_feasible[i]) ++out.fallbacks;
    }
    return out;
  }

  std::vector<std::optional<AgentEvaluation>> bs(agents.size());
  int fallbacks = 0;
  if (strategy != Strategy::LocalOnly) {
    for (std::size_t i = 0; i < agents.size(); ++i) {
      const AgentProfile& a = agents[i];
      a.validate();
      if (!snr(sys, a).feasible) continue;
      switch (strategy) {
        case Strategy::SnrBased: {
          const AgentSolution s = solve_agent(sys, a);
          if (s.bs_feasible) bs[i] = s.evaluation;
          break;
        }
        case Strategy::NoSemCom: {
          const double p = latency_tight_power(sys, a, 1.0);
          if (p <= sys.p_max_w) bs[i] = evaluate_collaborative(sys, a, 1.0, p);
          break;
        }
        case Strategy::FixedTxPower: {
          if (const auto pt = fixed_power_rho(sys, a, fixed_tx_power_w)) {
            bs[i] = evaluate_collaborative(sys, a, pt->rho, pt->power_w);
          }
          break;
        }
        default:
          break;
      }
      if (!bs[i]) ++fallbacks;
    }
  }
  return collaborate_all(sys, agents, bs, policy, fallbacks);
}

TrialResult run_trial(const SimConfig& cfg, std::uint64_t trial_index) {
  TrialResult r;
  r.trial_index = trial_index;
  r.seed = trial_seed(cfg.seed, trial_index);
  const std::vector<AgentProfile> agents = draw_agents(cfg, trial_index);
  for (Strategy s : cfg.strategies) {
    r.outcomes.push_back(run_strategy(s, cfg.system, agents, cfg.policy, cfg.fixed_tx_power_w));
  }
  return r;
}

SimConfig with_axis_value(const SimConfig& cfg, SweepAxis axis, double value) {
  SimConfig out = cfg;
  switch (axis) {
    case SweepAxis::N:
      out.n_agents = static_cast<int>(value);
      break;
    case SweepAxis::D:
      out.data_bits = value;
      break;
    case SweepAxis::T0:
      out.system.deadline_s = value;
      break;
  }
  out.validate();
  return out;
}

SweepPoint run_point(const SimConfig& cfg, double axis_value, const RunOptions& opt) {
  const std::uint64_t total = static_cast<std::uint64_t>(cfg.n_trials);
  std::vector<Accumulator> acc(cfg.strategies.size());
  std::vector<TrialResult> block;
  const unsigned jobs = std::max(1u, opt.jobs);

  for (std::uint64_t start = 0; start < total; start += kTrialBlock) {
    const std::uint64_t count = std::min(kTrialBlock, total - start);
    block.assign(count, TrialResult{});
    std::atomic<std::uint64_t> next{0};
    std::exception_ptr failure;
    std::atomic<bool> failed{false};
    auto work = [&] {
      for (std::uint64_t j = next++; j < count; j = next++) {
        try {
          block[j] = run_trial(cfg, start + j);
        } catch (...) {
          if (!failed.exchange(true)) failure = std::current_exception();
          return;
        }
      }
    };
    const unsigned workers = static_cast<unsigned>(std::min<std::uint64_t>(jobs, count));
    if (workers <= 1) {
      work();
    } else {
      std::vector<std::jthread> pool;
      for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    }
    if (failure) std::rethrow_exception(failure);

    for (const TrialResult& r : block) {
      for (std::size_t s = 0; s < acc.size(); ++s) acc[s].add(r.outcomes[s]);
      if (opt.on_trial) opt.on_trial(cfg, r);
    }
    if (opt.progress) opt.progress(static_cast<int>(start + count), static_cast<int>(total));
  }

  SweepPoint point;
  point.value = axis_value;
  for (std::size_t s = 0; s < acc.size(); ++s) {
    StrategySummary sum;
    sum.strategy = cfg.strategies[s];
    sum.mean_energy_j = acc[s].mean;
    sum.stderr_j = acc[s].standard_error();
    sum.n_trials = acc[s].n;
    sum.infeasible_trials = acc[s].infeasible;
    sum.non_finite_trials = acc[s].non_finite;
    sum.k_histogram = acc[s].k_histogram;
    point.strategies.push_back(std::move(sum));
  }
  return point;
}

SweepResult run_sweep(const SimConfig& cfg, const RunOptions& opt) {
  SweepResult result;
  if (!cfg.sweep) {
    result.axis = SweepAxis::N;
    result.points.push_back(run_point(cfg, cfg.n_agents, opt));
    return result;
  }
  result.axis = cfg.sweep->axis;
  for (double v : cfg.sweep->values) {
    result.points.push_back(run_point(with_axis_value(cfg, result.axis, v), v, opt));
  }
  return result;
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string sweep_csv(const SweepResult& result) {
  std::string out = "axis,value,strategy,mean_energy_j,stderr_j,n_trials\n";
  for (const auto& point : result.points) {
    for (const auto& s : point.strategies) {
      out += axis_name(result.axis) + ',' + format_double(point.value) + ',' +
             strategy_label(s.strategy) + ',' + format_double(s.mean_energy_j) + ',' +
             format_double(s.stderr_j) + ',' + std::to_string(s.n_trials) + '\n';
    }
  }
  return out;
}

json sweep_to_json(const SweepResult& result, const SimConfig& cfg) {
  json points = json::array();
  for (const auto& point : result.points) {
    json strategies = json::array();
    for (const auto& s : point.strategies) {
      json hist = json::object();
      for (const auto& [k, c] : s.k_histogram) hist[std::to_string(k)] = c;
      strategies.push_back({{"strategy", strategy_key(s.strategy)},
                            {"label", strategy_label(s.strategy)},
                            {"mean_energy_j", s.mean_energy_j},
                            {"stderr_j", s.stderr_j},
                            {"n_trials", s.n_trials},
                            {"infeasible_trials", s.infeasible_trials},
                            {"non_finite_trials", s.non_finite_trials},
                            {"k_histogram", hist}});
    }
    points.push_back({{"value", point.value}, {"strategies", strategies}});
  }
  return {{"axis", axis_name(result.axis)}, {"config", config_to_json(cfg)}, {"points", points}};
}

SweepResult sweep_from_json(const json& doc) {
  SweepResult result;
  result.axis = parse_axis(doc.at("axis").get<std::string>());
  for (const auto& p : doc.at("points")) {
    SweepPoint point;
    point.value = p.at("value").get<double>();
    for (const auto& s : p.at("strategies")) {
      StrategySummary sum;
      sum.strategy = parse_strategy(s.at("strategy").get<std::string>());
      sum.mean_energy_j = s.at("mean_energy_j").get<double>();
      sum.stderr_j = s.at("stderr_j").get<double>();
      sum.n_trials = s.at("n_trials").get<int>();
      sum.infeasible_trials = s.at("infeasible_trials").get<int>();
      sum.non_finite_trials = s.at("non_finite_trials").get<int>();
      for (const auto& [k, c] : s.at("k_histogram").items()) {
        sum.k_histogram[std::stoi(k)] = c.get<int>();
      }
      point.strategies.push_back(std::move(sum));
    }
    result.points.push_back(std::move(point));
  }
  return result;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

}  // namespace meanopt
