#include "meanopt/mode_selector.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace meanopt {

std::string to_string(LocalLatencyPolicy policy) {
  switch (policy) {
    case LocalLatencyPolicy::Ignore:
      return "ignore";
    case LocalLatencyPolicy::Warn:
      return "warn";
    case LocalLatencyPolicy::Enforce:
      return "enforce";
  }
  return "ignore";
}

LocalLatencyPolicy parse_local_latency_policy(const std::string& text) {
  if (text == "ignore") return LocalLatencyPolicy::Ignore;
  if (text == "warn") return LocalLatencyPolicy::Warn;
  if (text == "enforce") return LocalLatencyPolicy::Enforce;
  throw DomainError("unknown local-latency policy '" + text + "'");
}

std::vector<RankedAgent> rank_agents(std::span<const int> agent_indices,
                                     std::span<const double> delta_saves) {
  if (agent_indices.size() != delta_saves.size()) {
    throw InconsistencyError("rank_agents: index and potential lists differ in length");
  }
  std::vector<RankedAgent> ranked;
  ranked.reserve(agent_indices.size());
  for (std::size_t j = 0; j < agent_indices.size(); ++j) {
    ranked.push_back({agent_indices[j], delta_saves[j], 0});
  }
  std::sort(ranked.begin(), ranked.end(), [](const RankedAgent& a, const RankedAgent& b) {
    if (a.delta_save != b.delta_save) return a.delta_save > b.delta_save;
    return a.agent_index < b.agent_index;
  });
  for (std::size_t j = 0; j < ranked.size(); ++j) ranked[j].rank = static_cast<int>(j) + 1;
  return ranked;
}

namespace {

std::vector<RankedAgent> rank_subset(const SelectionInput& input, const std::vector<int>& idx) {
  std::vector<double> deltas;
  deltas.reserve(idx.size());
  for (int i : idx) deltas.push_back(input.evaluations[static_cast<std::size_t>(i)].delta_save);
  return rank_agents(idx, deltas);
}

NetworkSolution select_unchecked(const SystemParams& sys, const SelectionInput& input,
                                 const SelectionPolicy& policy, bool with_mandatory) {
  const std::size_t n = input.evaluations.size();
  NetworkSolution sol;
  sol.bs_feasible = input.bs_feasible;

  std::vector<int> mandatory;
  std::vector<int> optional;
  for (std::size_t i = 0; i < n; ++i) {
    if (!input.bs_feasible[i]) continue;
    const bool must = with_mandatory && !input.must_collaborate.empty() && input.must_collaborate[i];
    (must ? mandatory : optional).push_back(static_cast<int>(i));
  }
  sol.m = static_cast<int>(mandatory.size() + optional.size());

  // Order: mandatory agents first, then the rest; each block descending by
  // potential. For any K >= |mandatory| the best admissible K-subset is a
  // prefix of this order.
  std::vector<RankedAgent> order = rank_subset(input, mandatory);
  for (const auto& r : rank_subset(input, optional)) order.push_back(r);
  for (std::size_t j = 0; j < order.size(); ++j) {
    order[j].rank = static_cast<int>(j) + 1;
    sol.permutation.push_back(order[j].agent_index);
  }

  double baseline = 0.0;
  for (const auto& ev : input.evaluations) baseline += ev.e_local + sys.base_task_energy_j;

  const int n_mandatory = static_cast<int>(mandatory.size());
  const int k_first = std::max({policy.min_k, n_mandatory, 1});
  const bool collaboration_possible = sol.m >= k_first;
  const bool allow_all_local =
      n_mandatory == 0 && !(policy.force_collaboration && collaboration_possible);

  int best_k = -1;
  double best_energy = std::numeric_limits<double>::infinity();
  if (allow_all_local) {
    best_k = 0;
    best_energy = baseline;
    sol.objective_trace.push_back({0, baseline});
  }
  double prefix = 0.0;
  for (int k = 1; k <= sol.m; ++k) {
    prefix += order[static_cast<std::size_t>(k - 1)].delta_save;
    if (k < k_first) continue;
    const double energy = baseline - psi(sys, k) - prefix;
    sol.objective_trace.push_back({k, energy});
    if (energy < best_energy) {
      best_energy = energy;
      best_k = k;
    }
  }

  if (best_k < 0) {
    // Enforced deadline cannot be met by any admissible mode vector.
    sol.feasible = false;
    best_k = 0;
  }

  sol.k_star = best_k;
  sol.modes.assign(n, 0);
  sol.per_agent = input.evaluations;
  for (auto& ev : sol.per_agent) ev.mode = Mode::Local;
  for (int j = 0; j < best_k; ++j) {
    const auto i = static_cast<std::size_t>(order[static_cast<std::size_t>(j)].agent_index);
    sol.modes[i] = 1;
    sol.per_agent[i].mode = Mode::Collaborative;
  }
  for (std::size_t i = 0; i < n; ++i) {
    const auto& ev = sol.per_agent[i];
    if (!ev.collaborative() && ev.t_local > sys.deadline_s) ++sol.latency_violations;
  }
  sol.total_energy = network_energy(sys, sol.per_agent, sol.k_star);
  return sol;
}

}  // namespace

NetworkSolution select_scale(const SystemParams& sys, const SelectionInput& input,
                             const SelectionPolicy& policy) {
  const std::size_t n = input.evaluations.size();
  if (input.bs_feasible.size() != n) {
    throw InconsistencyError("select_scale: feasibility flags do not match evaluations");
  }
  if (policy.min_k < 1) throw DomainError("min_k must be >= 1");

  if (policy.local_latency != LocalLatencyPolicy::Enforce) {
    return select_unchecked(sys, input, policy, false);
  }
  if (input.must_collaborate.size() != n) {
    throw InconsistencyError("select_scale: deadline flags do not match evaluations");
  }
  bool satisfiable = true;
  for (std::size_t i = 0; i < n; ++i) {
    if (input.must_collaborate[i] && !input.bs_feasible[i]) satisfiable = false;
  }
  if (!satisfiable) {
    NetworkSolution sol = select_unchecked(sys, input, policy, false);
    sol.feasible = false;
    return sol;
  }
  return select_unchecked(sys, input, policy, true);
}

SelectionInput make_selection_input(const SystemParams& sys, std::span<const AgentProfile> agents,
                                    std::span<const AgentSolution> solutions) {
  if (agents.size() != solutions.size()) {
    throw InconsistencyError("make_selection_input: agent and solution lists differ in length");
  }
  SelectionInput input;
  for (std::size_t i = 0; i < agents.size(); ++i) {
    const bool gate = snr(sys, agents[i]).feasible;
    const bool ok = gate && solutions[i].bs_feasible;
    input.evaluations.push_back(ok ? solutions[i].evaluation : evaluate_local(sys, agents[i]));
    input.bs_feasible.push_back(ok);
    input.must_collaborate.push_back(local_time(sys, agents[i]) > sys.deadline_s);
  }
  return input;
}

NetworkSolution solve_network(const SystemParams& sys, std::span<const AgentProfile> agents,
                              const SelectionPolicy& policy) {
  sys.validate();
  std::vector<AgentSolution> solutions;
  std::vector<LinkState> links;
  solutions.reserve(agents.size());
  for (const auto& agent : agents) {
    agent.validate();
    links.push_back(snr(sys, agent));
    if (links.back().feasible) {
      solutions.push_back(solve_agent(sys, agent));
    } else {
      AgentSolution local;
      local.evaluation = evaluate_local(sys, agent);
      solutions.push_back(local);
    }
  }
  NetworkSolution sol = select_scale(sys, make_selection_input(sys, agents, solutions), policy);
  sol.links = std::move(links);
  return sol;
}

double recompute_total(const SystemParams& sys, const NetworkSolution& sol) {
  std::vector<AgentEvaluation> evals = sol.per_agent;
  for (std::size_t i = 0; i < evals.size(); ++i) {
    evals[i].mode = sol.modes[i] ? Mode::Collaborative : Mode::Local;
  }
  return network_energy(sys, evals, sol.k_star);
}

}  // namespace meanopt
