#include "meanopt/agent_solver.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

using namespace meanopt;
using meanopt::testing::agent_with_snr;
using meanopt::testing::Generator;
using meanopt::testing::Instance;

namespace {

// E_bs along the latency-tight curve, straight from the model formulas.
// Returns +inf where the point is not admissible.
double reference_energy(const SystemParams& sys, const AgentProfile& a, double rho) {
  const double t = sys.deadline_s - a.complexity * a.data_bits * std::log(1.0 / rho) / a.cpu_hz;
  if (!(t > 0.0)) return std::numeric_limits<double>::infinity();
  const double p =
      sys.noise_w / a.channel_gain * (std::pow(2.0, rho * a.data_bits / (sys.bandwidth_hz * t)) - 1.0);
  if (p > sys.p_max_w) return std::numeric_limits<double>::infinity();
  return sys.switched_cap * a.complexity * a.data_bits * a.cpu_hz * a.cpu_hz * std::log(1.0 / rho) +
         p * t;
}

struct GridMin {
  double rho;
  double energy;
  double log_step;
};

GridMin log_grid_min(const SystemParams& sys, const AgentProfile& a, double lo, double hi, int n) {
  GridMin best{lo, std::numeric_limits<double>::infinity(), 0.0};
  best.log_step = n > 1 ? (std::log(hi) - std::log(lo)) / (n - 1) : 0.0;
  for (int i = 0; i < n; ++i) {
    const double rho = i == n - 1 ? hi : std::exp(std::log(lo) + i * best.log_step);
    const double e = reference_energy(sys, a, rho);
    if (e < best.energy) best = {rho, e, best.log_step};
  }
  return best;
}

double g_at(const SystemParams& sys, const AgentProfile& a, double rho) {
  const double rate = achievable_rate(sys, a, sys.p_max_w);
  return sys.deadline_s + a.complexity * a.data_bits / a.cpu_hz * std::log(rho) -
         rho * a.data_bits / rate;
}

}  // namespace

TEST_CASE("residual comm time") {
  const SystemParams sys;
  const AgentProfile a = agent_with_snr(sys, 1.0);
  CHECK(residual_comm_time(sys, a, 1.0) == sys.deadline_s);
  // T0 f / (a D) = 7
  CHECK(std::abs(residual_comm_time(sys, a, std::exp(-7.0))) < 1e-14);
  CHECK(residual_comm_time(sys, a, std::exp(-7.5)) < 0.0);
}

TEST_CASE("feasible region") {
  const SystemParams sys;

  SUBCASE("reference agent at unit SNR: roots exist but lie below rho_min") {
    const AgentProfile a = agent_with_snr(sys, 1.0);
    CHECK(g_at(sys, a, 0.1) < 0.0);
    CHECK(g_at(sys, a, 0.01) == doctest::Approx(0.7 - 0.1 * std::log(100.0) - 0.1).epsilon(1e-12));
    CHECK(g_at(sys, a, 0.01) > 0.0);
    const FeasibleRegion r = feasible_region(sys, a);
    CHECK(r.empty);
    CHECK(r.rho_pmax_lo < 0.01);
    CHECK(r.rho_pmax_hi > 0.01);
    CHECK(r.rho_pmax_hi < 0.1);
    CHECK(std::abs(g_at(sys, a, r.rho_pmax_lo)) < 1e-9);
    CHECK(std::abs(g_at(sys, a, r.rho_pmax_hi)) < 1e-9);
    CHECK(r.rho_inf == sys.rho_min);
  }

  SUBCASE("very high SNR: only rho_min and the compression budget bind") {
    const AgentProfile a = agent_with_snr(sys, 1e12);
    const FeasibleRegion r = feasible_region(sys, a);
    CHECK_FALSE(r.empty);
    CHECK(r.lo == doctest::Approx(std::max(sys.rho_min, std::exp(-7.0))));
    CHECK(r.hi == 1.0);
    CHECK(r.rho_pmax_hi > 1.0);

    SystemParams loose = sys;
    loose.rho_min = 1e-6;
    const FeasibleRegion r2 = feasible_region(loose, a);
    // Some uplink time is still needed, so the left root sits just above e^-7.
    CHECK(r2.lo > std::exp(-7.0));
    CHECK(r2.lo == doctest::Approx(std::exp(-7.0)).epsilon(1e-2));
    CHECK(std::abs(g_at(loose, a, r2.lo)) < 1e-9);
  }

  SUBCASE("vanishing deadline") {
    SystemParams s = sys;
    s.deadline_s = 1e-9;
    CHECK(feasible_region(s, agent_with_snr(s, 1e6)).empty);
  }

  SUBCASE("region endpoints are admissible and tight on the power cap") {
    Generator g(21);
    for (int i = 0; i < 200; ++i) {
      const Instance in = g.feasible_instance();
      const FeasibleRegion r = feasible_region(in.sys, in.agent);
      CHECK(r.lo >= in.sys.rho_min);
      CHECK(r.lo <= r.hi);
      CHECK(r.hi <= 1.0);
      CHECK(latency_tight_power(in.sys, in.agent, r.lo) <= in.sys.p_max_w * (1.0 + 1e-9));
      CHECK(latency_tight_power(in.sys, in.agent, r.hi) <= in.sys.p_max_w * (1.0 + 1e-9));
      if (r.lo == r.rho_pmax_lo) {
        CHECK(latency_tight_power(in.sys, in.agent, r.lo) ==
              doctest::Approx(in.sys.p_max_w).epsilon(1e-6));
      }
    }
  }
}

TEST_CASE("stationarity residual") {
  Generator g(33);
  int interior = 0;
  for (int i = 0; i < 400 && interior < 50; ++i) {
    const Instance in = g.feasible_instance();
    const FeasibleRegion r = feasible_region(in.sys, in.agent);
    if (!(r.hi > r.lo * 1.01)) continue;
    const GridMin best = log_grid_min(in.sys, in.agent, r.lo, r.hi, 4000);
    const double lo_eps = r.lo * (1.0 + 1e-6);
    const double hi_eps = r.hi * (1.0 - 1e-6);
    if (!(best.rho > lo_eps * 1.01 && best.rho < hi_eps * 0.99)) continue;
    ++interior;
    CHECK(stationarity_residual(in.sys, in.agent, lo_eps) < 0.0);
    CHECK(stationarity_residual(in.sys, in.agent, hi_eps) > 0.0);

    // Near the grid argmin the residual is small compared with its terms.
    const double scale = in.sys.switched_cap * in.agent.complexity * in.agent.data_bits *
                         in.agent.cpu_hz * in.agent.cpu_hz;
    const double rho_star = solve_agent(in.sys, in.agent).rho_star;
    CHECK(std::abs(stationarity_residual(in.sys, in.agent, rho_star)) < 1e-6 * scale);
    CHECK(std::abs(std::log(rho_star / best.rho)) <= 2.0 * best.log_step);
  }
  CHECK(interior >= 20);

  const SystemParams sys;
  CHECK_THROWS_AS(stationarity_residual(sys, agent_with_snr(sys, 10.0), std::exp(-8.0)),
                  DomainError);
}

TEST_CASE("analytic derivative matches finite differences") {
  Generator g(44);
  for (int i = 0; i < 100; ++i) {
    const Instance in = g.feasible_instance();
    const FeasibleRegion r = feasible_region(in.sys, in.agent);
    if (!(r.hi > r.lo)) continue;
    for (int j = 1; j <= 20; ++j) {
      const double rho = r.lo + (r.hi - r.lo) * j / 21.0;
      const double h = 1e-7 * rho;
      const double numeric = (reference_energy(in.sys, in.agent, rho + h) -
                              reference_energy(in.sys, in.agent, rho - h)) /
                             (2.0 * h);
      const StationarityPoint sp = stationarity_point(in.sys, in.agent, rho);
      const double compression = in.sys.switched_cap * in.agent.complexity *
                                 in.agent.data_bits * in.agent.cpu_hz * in.agent.cpu_hz;
      const double scale = (std::abs(sp.residual + compression) + compression) / rho;
      CHECK(std::abs(sp.residual / rho - numeric) <= 1e-4 * scale);
    }
  }
}

TEST_CASE("solve agent") {
  const SystemParams sys;

  SUBCASE("empty region forces local mode") {
    const AgentSolution s = solve_agent(sys, agent_with_snr(sys, 1.0));
    CHECK_FALSE(s.bs_feasible);
    CHECK_FALSE(s.evaluation.collaborative());
    CHECK(s.evaluation.e_local == doctest::Approx(0.1));
    CHECK_THROWS_AS(delta_save(sys, agent_with_snr(sys, 1.0), s), DomainError);
  }

  SUBCASE("only the ratio of noise to channel gain matters") {
    Generator g(55);
    for (int i = 0; i < 50; ++i) {
      Instance in = g.feasible_instance();
      const AgentSolution a = solve_agent(in.sys, in.agent);
      in.sys.noise_w *= 2.0;
      in.agent.channel_gain *= 2.0;
      const AgentSolution b = solve_agent(in.sys, in.agent);
      CHECK(a.rho_star == b.rho_star);
      CHECK(a.p_star == b.p_star);
    }
  }

  SUBCASE("optimum beats a fine log grid and meets the deadline exactly") {
    Generator g(66);
    for (int i = 0; i < 100; ++i) {
      const Instance in = g.feasible_instance();
      const AgentSolution s = solve_agent(in.sys, in.agent);
      REQUIRE(s.bs_feasible);
      CHECK(s.rho_star >= s.region.lo);
      CHECK(s.rho_star <= s.region.hi);
      CHECK(s.p_star > 0.0);
      CHECK(s.p_star <= in.sys.p_max_w * (1.0 + 1e-9));
      CHECK(std::abs(s.evaluation.t_bs - in.sys.deadline_s) <= 1e-9 * in.sys.deadline_s);
      const GridMin best = log_grid_min(in.sys, in.agent, s.region.lo, s.region.hi, 2000);
      CHECK(s.evaluation.e_bs <= best.energy + 1e-6 * std::abs(best.energy));
    }
  }

  SUBCASE("rho_min = 1 pins the ratio") {
    SystemParams s = sys;
    s.rho_min = 1.0;
    const AgentProfile fast = agent_with_snr(s, 1e8);
    const AgentSolution sol = solve_agent(s, fast);
    REQUIRE(sol.bs_feasible);
    CHECK(sol.rho_star == 1.0);
    CHECK(sol.evaluation.e_comp == 0.0);
    CHECK(sol.p_star == doctest::Approx(latency_tight_power(s, fast, 1.0)));
    CHECK_FALSE(solve_agent(s, agent_with_snr(s, 10.0)).bs_feasible);
  }

  SUBCASE("a binding power cap puts p* at P_max") {
    // Find agents whose optimum sits at the left power-cap root.
    Generator g(77);
    int hits = 0;
    for (int i = 0; i < 2000 && hits < 10; ++i) {
      const Instance in = g.feasible_instance();
      const AgentSolution s = solve_agent(in.sys, in.agent);
      if (s.rho_star != s.region.rho_pmax_lo && s.rho_star != s.region.rho_pmax_hi) continue;
      ++hits;
      CHECK(s.p_star == doctest::Approx(in.sys.p_max_w).epsilon(1e-6));
      CHECK(s.p_star <= in.sys.p_max_w * (1.0 + 1e-9));
    }
    CHECK(hits > 0);
  }
}

TEST_CASE("delta save") {
  const SystemParams sys;
  const AgentProfile a = agent_with_snr(sys, 200.0);
  const AgentSolution s = solve_agent(sys, a);
  REQUIRE(s.bs_feasible);
  CHECK(delta_save(sys, a, s) == doctest::Approx(0.1 - s.evaluation.e_bs).epsilon(1e-14));
  CHECK(delta_save(sys, a, s) == s.evaluation.delta_save);
  const AgentSolution again = solve_agent(sys, a);
  CHECK(delta_save(sys, a, again) == delta_save(sys, a, s));
}

TEST_CASE("convexity of the reduced energy") {
  Generator g(88);
  for (int i = 0; i < 100; ++i) {
    const Instance in = g.feasible_instance();
    const FeasibleRegion r = feasible_region(in.sys, in.agent);
    if (!(r.hi > r.lo)) continue;
    std::vector<double> e;
    double scale = 0.0;
    for (int j = 0; j < 1000; ++j) {
      e.push_back(reference_energy(in.sys, in.agent, r.lo + (r.hi - r.lo) * j / 999.0));
      scale = std::max(scale, std::abs(e.back()));
    }
    for (std::size_t j = 1; j + 1 < e.size(); ++j) {
      CHECK(e[j - 1] - 2.0 * e[j] + e[j + 1] >= -1e-9 * scale);
    }
  }
}
