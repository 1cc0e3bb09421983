#pragma once

// Seeded generators shared by the unit and acceptance suites.

#include "meanopt/agent_solver.hpp"
#include "meanopt/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace meanopt::testing {

inline SystemParams reference_system() { return SystemParams{}; }

// Agent with the reference data size, complexity and CPU clock and a channel
// giving the requested max-power SNR.
inline AgentProfile agent_with_snr(const SystemParams& sys, double snr) {
  AgentProfile a;
  a.channel_gain = snr * sys.noise_w / sys.p_max_w;
  return a;
}

struct Instance {
  SystemParams sys;
  AgentProfile agent;
};

class Generator {
 public:
  explicit Generator(std::uint64_t seed) : gen_(seed) {}

  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(gen_);
  }
  double log_uniform(double lo, double hi) {
    return std::exp(uniform(std::log(lo), std::log(hi)));
  }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(gen_); }
  std::mt19937_64& engine() { return gen_; }

  // Varied system and agent; the optimum may be interior or on either edge.
  Instance instance() {
    Instance in;
    in.sys.deadline_s = uniform(0.2, 1.5);
    in.sys.rho_min = log_uniform(1e-3, 0.3);
    in.sys.bandwidth_hz = log_uniform(2e5, 5e6);
    in.sys.switched_cap = log_uniform(2e-29, 5e-28);
    in.agent.data_bits = log_uniform(1e6, 3e7);
    in.agent.complexity = uniform(2.0, 40.0);
    in.agent.cpu_hz = uniform(0.5e9, 3e9);
    const double snr = log_uniform(1.0, 1e5);
    in.agent.channel_gain = snr * in.sys.noise_w / in.sys.p_max_w;
    return in;
  }

  Instance feasible_instance() {
    for (;;) {
      Instance in = instance();
      if (!feasible_region(in.sys, in.agent).empty) return in;
    }
  }

  // Reference system, agents drawn at a distance in [d_lo, d_hi] with
  // Rayleigh fading under the default channel model.
  std::vector<AgentProfile> reference_agents(int n, double d_lo = 50.0, double d_hi = 1000.0) {
    std::vector<AgentProfile> agents;
    for (int i = 0; i < n; ++i) {
      AgentProfile a;
      a.distance_m = uniform(d_lo, d_hi);
      const double fading = std::exponential_distribution<double>(1.0)(gen_);
      a.channel_gain = 1e-3 * std::pow(a.distance_m, -3.0) * std::max(fading, 1e-12);
      agents.push_back(a);
    }
    return agents;
  }

 private:
  std::mt19937_64 gen_;
};

// Relative difference with an absolute floor for values near zero.
inline double rel_diff(double a, double b) {
  const double d = std::abs(a - b);
  return d == 0.0 ? 0.0 : d / std::max({std::abs(a), std::abs(b), 1e-300});
}

}  // namespace meanopt::testing
