#include "meanopt/agent_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace meanopt {

namespace {

// a D / f: seconds of compression per unit of ln(1/rho).
double compression_scale(const AgentProfile& agent) {
  return agent.complexity * agent.data_bits / agent.cpu_hz;
}

// Bisection on a bracket [a, b] where pred(a) != pred(b). Returns the final
// bracket so the caller can pick the side it needs.
template <typename Pred>
std::pair<double, double> bisect(double a, double b, Pred inside_at_b, const BisectionOptions& opt,
                                 const char* what) {
  for (int i = 0; i < opt.max_iter; ++i) {
    if (b - a <= opt.rel_tol) return {a, b};
    const double mid = 0.5 * (a + b);
    if (mid <= a || mid >= b) return {a, b};
    if (inside_at_b(mid)) {
      b = mid;
    } else {
      a = mid;
    }
  }
  throw ConvergenceError(std::string(what) + ": bisection did not converge");
}

}  // namespace

double residual_comm_time(const SystemParams& sys, const AgentProfile& agent, double rho) {
  return sys.deadline_s - compression_time(agent, rho);
}

FeasibleRegion feasible_region_at_rate(const SystemParams& sys, const AgentProfile& agent,
                                       double rate_bps, const BisectionOptions& opt) {
  if (!(rate_bps > 0.0)) throw DomainError("rate must be > 0");
  const double scale = compression_scale(agent);
  const double bits_per_rate = agent.data_bits / rate_bps;

  FeasibleRegion region;
  region.rho_inf = std::max(sys.rho_min, std::exp(-sys.deadline_s / scale));

  // Work in x = ln(rho): g(x) = T0 + scale x - e^x D / R, concave with its
  // maximum at e^x = scale R / D.
  auto g = [&](double x) { return sys.deadline_s + scale * x - std::exp(x) * bits_per_rate; };
  const double x_peak = std::log(scale / bits_per_rate);
  const double x_top = std::min(x_peak, 0.0);

  if (g(x_top) < 0.0) {
    region.rho_pmax_lo = std::numeric_limits<double>::quiet_NaN();
    region.rho_pmax_hi = std::numeric_limits<double>::quiet_NaN();
    region.empty = true;
    return region;
  }

  // Left root: g(-T0/scale) = -rho D / R < 0 and g(x_top) >= 0. Keep the
  // feasible end of the bracket.
  {
    const double x_left = -sys.deadline_s / scale;
    const auto [a, b] =
        bisect(x_left, x_top, [&](double x) { return g(x) >= 0.0; }, opt, "left power-cap root");
    region.rho_pmax_lo = std::exp(b);
    (void)a;
  }

  // Right root, searched beyond the peak even when it lies above rho = 1.
  {
    const double x_from = std::max(x_peak, x_top);
    double step = 1.0;
    double x_to = x_from + step;
    int expansions = 0;
    while (g(x_to) >= 0.0) {
      step *= 2.0;
      x_to = x_from + step;
      if (++expansions > opt.max_iter || !std::isfinite(x_to)) {
        throw ConvergenceError("right power-cap root: bracket expansion failed");
      }
    }
    if (!std::isfinite(g(x_to))) {
      region.rho_pmax_hi = std::numeric_limits<double>::infinity();
    } else {
      const auto [a, b] = bisect(
          x_from, x_to, [&](double x) { return g(x) < 0.0; }, opt, "right power-cap root");
      region.rho_pmax_hi = std::exp(a);
      (void)b;
    }
  }

  region.lo = std::max(region.rho_inf, region.rho_pmax_lo);
  region.hi = std::min(region.rho_pmax_hi, 1.0);
  region.empty = region.lo > region.hi;
  return region;
}

FeasibleRegion feasible_region(const SystemParams& sys, const AgentProfile& agent,
                               const BisectionOptions& opt) {
  const double rate_max = achievable_rate(sys, agent, sys.p_max_w);
  return feasible_region_at_rate(sys, agent, rate_max, opt);
}

double latency_tight_power(const SystemParams& sys, const AgentProfile& agent, double rho) {
  const double t_comm = residual_comm_time(sys, agent, rho);
  if (!(t_comm > 0.0)) throw DomainError("no time left for the uplink at this compression ratio");
  const double z = rho * agent.data_bits / (sys.bandwidth_hz * t_comm);
  return sys.noise_w / agent.channel_gain * std::expm1(z * std::numbers::ln2);
}

double tight_bs_energy(const SystemParams& sys, const AgentProfile& agent, double rho) {
  const double t_comm = residual_comm_time(sys, agent, rho);
  if (!(t_comm > 0.0)) throw DomainError("no time left for the uplink at this compression ratio");
  const double z = rho * agent.data_bits / (sys.bandwidth_hz * t_comm);
  const double e_comp = -sys.switched_cap * agent.complexity * agent.data_bits * agent.cpu_hz *
                        agent.cpu_hz * std::log(rho);
  return e_comp + sys.noise_w / agent.channel_gain * t_comm * std::expm1(z * std::numbers::ln2);
}

StationarityPoint stationarity_point(const SystemParams& sys, const AgentProfile& agent,
                                     double rho) {
  const double t_comm = residual_comm_time(sys, agent, rho);
  if (!(t_comm > 0.0)) throw DomainError("no time left for the uplink at this compression ratio");
  const double scale = compression_scale(agent);
  const double z = rho * agent.data_bits / (sys.bandwidth_hz * t_comm);
  const double pow2z = std::exp2(z);
  const double lhs = sys.noise_w / agent.channel_gain *
                     (scale * std::expm1(z * std::numbers::ln2) +
                      z * pow2z * std::numbers::ln2 * (t_comm - scale));
  const double rhs =
      sys.switched_cap * agent.complexity * agent.data_bits * agent.cpu_hz * agent.cpu_hz;
  return {rho, z, lhs - rhs};
}

double stationarity_residual(const SystemParams& sys, const AgentProfile& agent, double rho) {
  return stationarity_point(sys, agent, rho).residual;
}

AgentSolution solve_agent(const SystemParams& sys, const AgentProfile& agent,
                          const BisectionOptions& opt) {
  AgentSolution sol;
  sol.region = feasible_region(sys, agent, opt);
  if (sol.region.empty) {
    sol.evaluation = evaluate_local(sys, agent);
    return sol;
  }

  const double lo = sol.region.lo;
  const double hi = sol.region.hi;
  double rho = lo;
  if (hi > lo) {
    const double r_lo = stationarity_residual(sys, agent, lo);
    const double r_hi = stationarity_residual(sys, agent, hi);
    if (std::isnan(r_lo) || std::isnan(r_hi)) {
      throw ConvergenceError("stationarity residual is not finite on the feasible region");
    }
    if (r_lo < 0.0 && r_hi > 0.0) {
      // Bisect in ln(rho); the bracket keeps residual < 0 at a, > 0 at b.
      const auto [a, b] = bisect(
          std::log(lo), std::log(hi),
          [&](double x) {
            const double r = stationarity_residual(sys, agent, std::exp(x));
            if (std::isnan(r)) throw ConvergenceError("stationarity residual is NaN");
            return r >= 0.0;
          },
          opt, "stationary point");
      rho = std::clamp(std::exp(0.5 * (a + b)), lo, hi);
    } else {
      // Same sign at both ends: the minimum sits on the boundary.
      rho = tight_bs_energy(sys, agent, hi) < tight_bs_energy(sys, agent, lo) ? hi : lo;
    }
  }

  sol.rho_star = rho;
  sol.p_star = latency_tight_power(sys, agent, rho);
  sol.evaluation = evaluate_collaborative(sys, agent, sol.rho_star, sol.p_star);
  sol.bs_feasible = true;
  return sol;
}

double delta_save(const SystemParams& sys, const AgentProfile& agent, const AgentSolution& sol) {
  if (!sol.bs_feasible) throw DomainError("energy-saving potential is undefined without a BS operating point");
  return local_energy(sys, agent) - sol.evaluation.e_bs;
}

}  // namespace meanopt
