#pragma once
// Synthetic measurement records and conditioned-state propagation.
//
// Bin convention: rho(t_m) is the state BEFORE bin m is incorporated, so
// V[m] is sampled from rho(t_m) and rho(t_m) depends only on V[0..m-1]. Each
// bin applies the measurement backaction first and the Rabi rotation second.

#include <cmath>
#include <cstdint>
#include <exception>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "monq/channels.hpp"
#include "monq/errors.hpp"
#include "monq/hermitian2.hpp"
#include "monq/master_equation.hpp"
#include "monq/params.hpp"
#include "monq/rng.hpp"

namespace monq {

enum class HeraldPolicy { plus, minus, mixed };
enum class HeraldOutcome { plus, minus, none };
enum class Integrator { bayesian, euler_sme };

struct SimulationConfig {
  PhysicalParams params = PhysicalParams::reference_defaults();
  double total_time = 2.0e-6;   // seconds
  int n_trajectories = 20000;
  std::uint64_t seed = 1;
  double prep_fidelity = 0.95;
  HeraldPolicy herald = HeraldPolicy::plus;
  Integrator integrator = Integrator::bayesian;
  bool oracle_mode = false;     // forces eta = 1, gamma = 0, fidelity = 1

  int n_bins() const {
    const double ratio = total_time / params.dt();
    const auto m = static_cast<long long>(std::llround(ratio));
    if (m < 1 || std::abs(ratio - static_cast<double>(m)) > 1e-9 * ratio)
      throw ParameterDomainError(
          "SimulationConfig: total_time must be an integer number (>= 1) of "
          "bins of duration dt");
    return static_cast<int>(m);
  }

  void validate() const {
    (void)n_bins();
    if (n_trajectories < 1)
      throw ParameterDomainError("SimulationConfig: n_trajectories must be >= 1");
    if (!(prep_fidelity > 0.5) || prep_fidelity > 1.0)
      throw ParameterDomainError(
          "SimulationConfig: prep_fidelity must lie in (0.5, 1]");
  }

  // Configuration actually simulated once oracle_mode is applied.
  SimulationConfig resolved() const {
    SimulationConfig c = *this;
    if (oracle_mode) {
      c.params = params.with_oracle_regime();
      c.prep_fidelity = 1.0;
      c.oracle_mode = false;
    }
    return c;
  }
};

struct MeasurementRecord {
  std::uint64_t traj_id = 0;
  HeraldOutcome herald = HeraldOutcome::none;
  std::vector<double> voltages;        // length M, calibrated to means +-1
  std::optional<int> final_outcome;    // 1 = +z, 0 = -z
};

struct Trajectory {
  std::vector<Hermitian2> states;      // length M+1; states[m] = rho(t_m)
};

struct Ensemble {
  SimulationConfig config;
  std::vector<MeasurementRecord> records;
  std::vector<Trajectory> trajectories;

  std::size_t size() const { return records.size(); }
};

// Heralded preparation: the projective herald leaves a diagonal state with
// population prep_fidelity in the heralded level; ignoring the herald leaves
// the maximally mixed state.
inline std::pair<HeraldOutcome, Hermitian2> herald_prepare(
    HeraldPolicy policy, double prep_fidelity) {
  switch (policy) {
    case HeraldPolicy::plus:
      return {HeraldOutcome::plus, Hermitian2::diagonal(prep_fidelity)};
    case HeraldPolicy::minus:
      return {HeraldOutcome::minus, Hermitian2::diagonal(1.0 - prep_fidelity)};
    default:
      return {HeraldOutcome::none, Hermitian2::maximally_mixed()};
  }
}

// Exact draw from the two-Gaussian mixture: pick the +-1 branch from the
// populations, then add noise of variance a^2.
inline double sample_voltage(const Hermitian2& rho, const BinContext& c,
                             Rng& rng) {
  const double branch = rng.uniform() < rho.m00 ? 1.0 : -1.0;
  return branch + c.a * rng.normal();
}

inline double sample_voltage(const Hermitian2& rho, const PhysicalParams& p,
                             Rng& rng) {
  return sample_voltage(rho, BinContext::make(p), rng);
}

// Reference per-bin propagator: exact POVM backaction, then the bin's
// rotation.
inline Hermitian2 step_bayesian(const Hermitian2& rho, double v,
                                const BinContext& c) {
  return unitary_step_cs(bayesian_update(rho, v, c), c.cos_theta, c.sin_theta);
}

inline Hermitian2 step_bayesian(const Hermitian2& rho, double v,
                                const PhysicalParams& p) {
  return step_bayesian(rho, v, BinContext::make(p));
}

// Diagnostic stepper: one literal Euler increment of the raw-signal
// stochastic master equation
//   drho = -i[H_R, rho]/hbar dt + k_eff (sigma_z rho sigma_z - rho) dt
//          + 2 eta k (sigma_z rho + rho sigma_z - 2 Tr(sigma_z rho) rho) V dt,
// followed by trace renormalization and eigenvalue clipping at zero.
inline Hermitian2 step_sme_euler(const Hermitian2& rho, double v,
                                 const PhysicalParams& p) {
  const double dt = p.dt();
  const double omega = p.omega_rabi();
  const double keff = p.k_eff();
  const double inno = 2.0 * p.eta() * p.k() * v * dt;
  const double z = rho.m00 - rho.m11;

  double m00 = rho.m00 + dt * (-omega * rho.re01) +
               inno * (2.0 * rho.m00 - 2.0 * z * rho.m00);
  double m11 = rho.m11 + dt * (omega * rho.re01) +
               inno * (-2.0 * rho.m11 - 2.0 * z * rho.m11);
  double re01 = rho.re01 +
                dt * (0.5 * omega * z - 2.0 * keff * rho.re01) +
                inno * (-2.0 * z * rho.re01);
  double im01 = rho.im01 + dt * (-2.0 * keff * rho.im01) +
                inno * (-2.0 * z * rho.im01);

  // The increment is trace-preserving in exact arithmetic; a real trace
  // drift marks instability. Renormalize away rounding.
  const double tr = m00 + m11;
  if (std::abs(tr - 1.0) > 1e-6)
    throw IntegratorInstabilityError(
        "step_sme_euler: trace deviation " + std::to_string(tr - 1.0) +
        " exceeds 1e-6; reduce dt");
  m00 /= tr;
  m11 /= tr;
  re01 /= tr;
  im01 /= tr;

  Hermitian2 out{m00, m11, re01, im01};
  double lo, hi;
  out.eigenvalues(lo, hi);
  if (lo < 0.0) {
    // First-order schemes leak positivity at O((2 eta k V dt)^2) per step;
    // at 20 ns bins roughly a quarter of all steps clip, with sizes up to
    // ~0.1 for near-pure states under outlier readouts. Only clips far
    // beyond that scale indicate instability.
    if (-lo > 0.25)
      throw IntegratorInstabilityError(
          "step_sme_euler: eigenvalue clip of " + std::to_string(-lo) +
          " exceeds 0.25; reduce dt");
    // Drop the negative eigenvalue, keep its eigenvector decomposition, and
    // renormalize the remaining weight.
    const double denom = lo - hi;
    // P_minus = (rho - hi*I)/(lo - hi)
    const double p00 = (out.m00 - hi) / denom;
    const double p11 = (out.m11 - hi) / denom;
    const double pre = out.re01 / denom;
    const double pim = out.im01 / denom;
    out.m00 = (out.m00 - lo * p00) / hi;
    out.m11 = (out.m11 - lo * p11) / hi;
    out.re01 = (out.re01 - lo * pre) / hi;
    out.im01 = (out.im01 - lo * pim) / hi;
  }
  return out;
}

// One full run: herald, M measurement bins, final projective measurement
// sampled with probability rho00(T). Deterministic function of (seed, index).
inline std::pair<MeasurementRecord, Trajectory> simulate_trajectory(
    const SimulationConfig& raw_config, std::uint64_t index) {
  const SimulationConfig cfg = raw_config.resolved();
  const PhysicalParams& p = cfg.params;
  const int m_bins = cfg.n_bins();
  const BinContext ctx = BinContext::make(p);

  Rng rng(derive_seed(cfg.seed, index));
  auto [herald, rho] = herald_prepare(cfg.herald, cfg.prep_fidelity);

  MeasurementRecord rec;
  rec.traj_id = index;
  rec.herald = herald;
  rec.voltages.resize(m_bins);

  Trajectory traj;
  traj.states.reserve(m_bins + 1);

  for (int m = 0; m < m_bins; ++m) {
    traj.states.push_back(rho);
    const double v = sample_voltage(rho, ctx, rng);
    rec.voltages[m] = v;
    try {
      rho = cfg.integrator == Integrator::bayesian
                ? step_bayesian(rho, v, ctx)
                : step_sme_euler(rho, v, p);
    } catch (const NumericalUnderflowError& e) {
      throw NumericalUnderflowError(std::string(e.what()) + " (bin " +
                                    std::to_string(m) + ")");
    }
  }
  traj.states.push_back(rho);

  rec.final_outcome = rng.uniform() < rho.m00 ? 1 : 0;
  return {std::move(rec), std::move(traj)};
}

// Independent runs with per-trajectory generators; results depend only on
// (seed, index), never on the partition across workers.
inline Ensemble simulate_ensemble(const SimulationConfig& config,
                                  unsigned n_threads = 1) {
  config.validate();
  Ensemble ens;
  ens.config = config;
  const std::size_t n = static_cast<std::size_t>(config.n_trajectories);
  ens.records.resize(n);
  ens.trajectories.resize(n);

  if (n_threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) {
      auto [rec, traj] = simulate_trajectory(config, i);
      ens.records[i] = std::move(rec);
      ens.trajectories[i] = std::move(traj);
    }
    return ens;
  }

  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(n_threads);
  const std::size_t chunk = (n + n_threads - 1) / n_threads;
  for (unsigned t = 0; t < n_threads; ++t) {
    const std::size_t lo = t * chunk;
    const std::size_t hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&, lo, hi, t] {
      try {
        for (std::size_t i = lo; i < hi; ++i) {
          auto [rec, traj] = simulate_trajectory(config, i);
          ens.records[i] = std::move(rec);
          ens.trajectories[i] = std::move(traj);
        }
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return ens;
}

// Mean-state sequence of the discrete measurement model (exact comparator for
// martingale tests): states at t_0..t_M from the heralded preparation.
inline std::vector<Hermitian2> deterministic_bin_sequence(
    const SimulationConfig& raw_config) {
  const SimulationConfig cfg = raw_config.resolved();
  const int m_bins = cfg.n_bins();
  std::vector<Hermitian2> out;
  out.reserve(m_bins + 1);
  Hermitian2 rho = herald_prepare(cfg.herald, cfg.prep_fidelity).second;
  out.push_back(rho);
  for (int m = 0; m < m_bins; ++m) {
    rho = deterministic_bin_step(rho, cfg.params);
    out.push_back(rho);
  }
  return out;
}

}  // namespace monq
