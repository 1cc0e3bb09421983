#pragma once

// Collaboration-scale search and mode assignment.
//
// For a fixed scale K the task-energy gain Psi(K) is a constant, so the best
// K-subset is simply the K agents with the largest energy-saving potential.
// Sorting once and sweeping K over prefix sums gives the exact optimum of the
// discrete problem in O(M log M); exhaustive enumeration would cost O(2^M).

#include "meanopt/agent_solver.hpp"
#include "meanopt/model.hpp"

#include <span>
#include <string>
#include <vector>

namespace meanopt {

enum class LocalLatencyPolicy { Ignore, Warn, Enforce };

std::string to_string(LocalLatencyPolicy policy);
LocalLatencyPolicy parse_local_latency_policy(const std::string& text);

struct SelectionPolicy {
  int min_k = 2;
  bool force_collaboration = false;
  LocalLatencyPolicy local_latency = LocalLatencyPolicy::Ignore;
};

struct RankedAgent {
  int agent_index = 0;
  double delta_save = 0.0;
  int rank = 0;  // 1-based position under the descending permutation
};

struct ScaleCandidate {
  int k = 0;
  double energy = 0.0;
};

struct NetworkSolution {
  std::vector<int> modes;  // x_i
  int k_star = 0;
  double total_energy = 0.0;
  std::vector<AgentEvaluation> per_agent;
  std::vector<LinkState> links;
  std::vector<bool> bs_feasible;  // SNR gate passed and feasible region nonempty
  int m = 0;                      // number of BS-feasible agents
  std::vector<int> permutation;   // agent indices in ranked order
  std::vector<ScaleCandidate> objective_trace;
  // Local-mode agents whose t_local exceeds the deadline.
  int latency_violations = 0;
  // False only under LocalLatencyPolicy::Enforce when no admissible mode
  // vector exists.
  bool feasible = true;
};

// Stable descending sort by delta_save, ties by ascending agent index.
std::vector<RankedAgent> rank_agents(std::span<const int> agent_indices,
                                     std::span<const double> delta_saves);

// Everything select_scale needs about the per-agent stage.
struct SelectionInput {
  std::vector<AgentEvaluation> evaluations;  // BS fields filled where bs_feasible
  std::vector<bool> bs_feasible;
  std::vector<bool> must_collaborate;  // only consulted under Enforce
};

NetworkSolution select_scale(const SystemParams& sys, const SelectionInput& input,
                             const SelectionPolicy& policy = {});

// Full pipeline: SNR gate, per-agent solve, ranking and scale search.
NetworkSolution solve_network(const SystemParams& sys, std::span<const AgentProfile> agents,
                              const SelectionPolicy& policy = {});

// Selection input built from already-solved agents (used by the oracle to
// isolate the discrete step).
SelectionInput make_selection_input(const SystemParams& sys, std::span<const AgentProfile> agents,
                                    std::span<const AgentSolution> solutions);

// Re-evaluates the objective of a finished solution from its mode vector.
double recompute_total(const SystemParams& sys, const NetworkSolution& sol);

}  // namespace meanopt
