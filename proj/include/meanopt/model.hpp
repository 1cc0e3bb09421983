#pragma once

// Closed-form time and energy model for a fleet of agents that either process
// sensory data locally or semantically compress it and uplink it to a base
// station (BS) to join a collaborative task. All quantities are strict SI:
// bits, Hz, W, J, s.

#include <span>
#include <stdexcept>
#include <string>

namespace meanopt {

struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

struct InconsistencyError : std::logic_error {
  using std::logic_error::logic_error;
};

// Global constants shared by every agent in one collaboration round.
struct SystemParams {
  double bandwidth_hz = 1e6;
  double noise_w = 4e-11;
  double p_max_w = 1.0;
  double snr_threshold = 1.0;
  double deadline_s = 0.7;
  double rho_min = 0.1;
  double base_task_energy_j = 0.1;
  double usl_beta = 0.4;
  double usl_xi = 0.008;
  double switched_cap = 1e-28;
  double local_cycles_per_bit = 100.0;

  // Throws DomainError naming the first offending field.
  void validate() const;
};

struct AgentProfile {
  double data_bits = 1e7;
  double complexity = 10.0;  // cycles per bit spent on semantic extraction
  double cpu_hz = 1e9;
  double channel_gain = 0.0;  // |h|^2
  double distance_m = 0.0;    // provenance only

  void validate() const;
};

struct LinkState {
  double snr = 0.0;
  bool feasible = false;
};

enum class Mode { Local = 0, Collaborative = 1 };

// Every derived quantity for one agent under one candidate (mode, rho, p).
// BS-side fields are zero for an agent that has no admissible BS operating
// point.
struct AgentEvaluation {
  Mode mode = Mode::Local;
  double rho = 1.0;
  double power_w = 0.0;
  double compressed_bits = 0.0;
  double t_comp = 0.0;
  double t_comm = 0.0;
  double t_bs = 0.0;
  double t_local = 0.0;
  double e_comp = 0.0;
  double e_comm = 0.0;
  double e_bs = 0.0;
  double e_local = 0.0;
  double delta_save = 0.0;

  bool collaborative() const { return mode == Mode::Collaborative; }
};

struct BsEnergy {
  double t_comp;
  double t_comm;
  double e_comp;
  double e_comm;
  double e_bs;
};

LinkState snr(const SystemParams& sys, const AgentProfile& agent);

double compression_time(const AgentProfile& agent, double rho);
double achievable_rate(const SystemParams& sys, const AgentProfile& agent, double power_w);
double comm_time(const AgentProfile& agent, double rho, double rate_bps);
double local_time(const SystemParams& sys, const AgentProfile& agent);

// Compression plus uplink energy at (rho, power_w); t_comm uses the Shannon
// rate at power_w.
BsEnergy bs_energy(const SystemParams& sys, const AgentProfile& agent, double rho,
                   double power_w);
double local_energy(const SystemParams& sys, const AgentProfile& agent);

// Universal-scalability-law gain G(K) = (1-beta) + beta/K + xi(K-1).
double usl_gain(const SystemParams& sys, int k);
// Task energy saved by a size-K collaboration: K Q (1 - G(K)).
double psi(const SystemParams& sys, int k);
double task_energy(const SystemParams& sys, Mode mode, int k);

// Builds a full evaluation for an agent operated in BS mode at (rho, power_w).
AgentEvaluation evaluate_collaborative(const SystemParams& sys, const AgentProfile& agent,
                                       double rho, double power_w);
// Local-only evaluation (no admissible BS point).
AgentEvaluation evaluate_local(const SystemParams& sys, const AgentProfile& agent);

// Direct objective: sum_i x_i (E_bs + Q G(K)) + (1 - x_i)(E_local + Q).
// Throws InconsistencyError if k differs from the number of collaborative
// evaluations.
double network_energy(const SystemParams& sys, std::span<const AgentEvaluation> evals, int k);

// Same objective regrouped around the all-local baseline:
// sum_i (E_local + Q) - Psi(K) - sum_i x_i (E_local - E_bs).
double network_energy_regrouped(const SystemParams& sys, std::span<const AgentEvaluation> evals,
                                int k);

}  // namespace meanopt
