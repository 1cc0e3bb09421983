#include "meanopt/model.hpp"

#include <cmath>
#include <numbers>

namespace meanopt {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw DomainError(what);
}

bool positive(double v) { return std::isfinite(v) && v > 0.0; }

void check_rho(double rho) {
  require(std::isfinite(rho) && rho > 0.0 && rho <= 1.0,
          "compression ratio must lie in (0, 1], got " + std::to_string(rho));
}

}  // namespace

void SystemParams::validate() const {
  require(positive(bandwidth_hz), "bandwidth_hz must be > 0");
  require(positive(noise_w), "noise_w must be > 0");
  require(positive(p_max_w), "p_max_w must be > 0");
  require(positive(snr_threshold), "snr_threshold must be > 0");
  require(positive(deadline_s), "deadline_s must be > 0");
  require(positive(rho_min) && rho_min <= 1.0, "rho_min must lie in (0, 1]");
  require(positive(base_task_energy_j), "base_task_energy_j must be > 0");
  require(std::isfinite(usl_beta) && usl_beta > 0.0 && usl_beta < 1.0,
          "usl_beta must lie in (0, 1)");
  require(std::isfinite(usl_xi) && usl_xi >= 0.0, "usl_xi must be >= 0");
  require(positive(switched_cap), "switched_cap must be > 0");
  require(positive(local_cycles_per_bit), "local_cycles_per_bit must be > 0");
}

void AgentProfile::validate() const {
  require(positive(data_bits), "data_bits must be > 0");
  require(positive(complexity), "complexity must be > 0");
  require(positive(cpu_hz), "cpu_hz must be > 0");
  require(positive(channel_gain), "channel_gain must be > 0");
  require(std::isfinite(distance_m) && distance_m >= 0.0, "distance_m must be >= 0");
}

LinkState snr(const SystemParams& sys, const AgentProfile& agent) {
  const double gamma = sys.p_max_w * agent.channel_gain / sys.noise_w;
  return {gamma, gamma >= sys.snr_threshold};
}

double compression_time(const AgentProfile& agent, double rho) {
  check_rho(rho);
  return agent.complexity * agent.data_bits * -std::log(rho) / agent.cpu_hz;
}

double achievable_rate(const SystemParams& sys, const AgentProfile& agent, double power_w) {
  require(std::isfinite(power_w) && power_w > 0.0, "transmit power must be > 0");
  return sys.bandwidth_hz * std::log2(1.0 + power_w * agent.channel_gain / sys.noise_w);
}

double comm_time(const AgentProfile& agent, double rho, double rate_bps) {
  check_rho(rho);
  require(std::isfinite(rate_bps) && rate_bps > 0.0, "rate must be > 0");
  return rho * agent.data_bits / rate_bps;
}

double local_time(const SystemParams& sys, const AgentProfile& agent) {
  return sys.local_cycles_per_bit * agent.data_bits / agent.cpu_hz;
}

BsEnergy bs_energy(const SystemParams& sys, const AgentProfile& agent, double rho,
                   double power_w) {
  BsEnergy out{};
  out.t_comp = compression_time(agent, rho);
  out.t_comm = comm_time(agent, rho, achievable_rate(sys, agent, power_w));
  out.e_comp = sys.switched_cap * agent.complexity * agent.data_bits * agent.cpu_hz *
               agent.cpu_hz * -std::log(rho);
  out.e_comm = power_w * out.t_comm;
  out.e_bs = out.e_comp + out.e_comm;
  return out;
}

double local_energy(const SystemParams& sys, const AgentProfile& agent) {
  return sys.switched_cap * sys.local_cycles_per_bit * agent.data_bits * agent.cpu_hz *
         agent.cpu_hz;
}

double usl_gain(const SystemParams& sys, int k) {
  require(k >= 1, "collaboration scale must be >= 1");
  const double kd = static_cast<double>(k);
  return (1.0 - sys.usl_beta) + sys.usl_beta / kd + sys.usl_xi * (kd - 1.0);
}

double psi(const SystemParams& sys, int k) {
  return static_cast<double>(k) * sys.base_task_energy_j * (1.0 - usl_gain(sys, k));
}

double task_energy(const SystemParams& sys, Mode mode, int k) {
  if (mode == Mode::Local) return sys.base_task_energy_j;
  return sys.base_task_energy_j * usl_gain(sys, k);
}

AgentEvaluation evaluate_collaborative(const SystemParams& sys, const AgentProfile& agent,
                                       double rho, double power_w) {
  const BsEnergy bs = bs_energy(sys, agent, rho, power_w);
  AgentEvaluation ev;
  ev.mode = Mode::Collaborative;
  ev.rho = rho;
  ev.power_w = power_w;
  ev.compressed_bits = rho * agent.data_bits;
  ev.t_comp = bs.t_comp;
  ev.t_comm = bs.t_comm;
  ev.t_bs = bs.t_comp + bs.t_comm;
  ev.t_local = local_time(sys, agent);
  ev.e_comp = bs.e_comp;
  ev.e_comm = bs.e_comm;
  ev.e_bs = bs.e_bs;
  ev.e_local = local_energy(sys, agent);
  ev.delta_save = ev.e_local - ev.e_bs;
  return ev;
}

AgentEvaluation evaluate_local(const SystemParams& sys, const AgentProfile& agent) {
  AgentEvaluation ev;
  ev.t_local = local_time(sys, agent);
  ev.e_local = local_energy(sys, agent);
  return ev;
}

namespace {

int count_collaborative(std::span<const AgentEvaluation> evals) {
  int k = 0;
  for (const auto& ev : evals) k += ev.collaborative() ? 1 : 0;
  return k;
}

void check_scale(std::span<const AgentEvaluation> evals, int k) {
  const int actual = count_collaborative(evals);
  if (actual != k) {
    throw InconsistencyError("collaboration scale " + std::to_string(k) +
                             " does not match mode vector with " + std::to_string(actual) +
                             " collaborative agents");
  }
}

}  // namespace

double network_energy(const SystemParams& sys, std::span<const AgentEvaluation> evals, int k) {
  check_scale(evals, k);
  double total = 0.0;
  for (const auto& ev : evals) {
    if (ev.collaborative()) {
      total += ev.e_bs + task_energy(sys, Mode::Collaborative, k);
    } else {
      total += ev.e_local + task_energy(sys, Mode::Local, k);
    }
  }
  return total;
}

double network_energy_regrouped(const SystemParams& sys, std::span<const AgentEvaluation> evals,
                                int k) {
  check_scale(evals, k);
  double baseline = 0.0;
  double savings = 0.0;
  for (const auto& ev : evals) {
    baseline += ev.e_local + sys.base_task_energy_j;
    if (ev.collaborative()) savings += ev.e_local - ev.e_bs;
  }
  return baseline - (k > 0 ? psi(sys, k) : 0.0) - savings;
}

}  // namespace meanopt
