#pragma once
// Elementary single-bin quantum channels: Gaussian POVM backaction, exact
// dephasing, Rabi rotation about y, and projective measurement.

#include <cmath>
#include <string>
#include <utility>

#include "monq/errors.hpp"
#include "monq/gaussian.hpp"
#include "monq/hermitian2.hpp"
#include "monq/params.hpp"

namespace monq {

enum class ZOutcome { plus_z, minus_z };

// Per-bin constants cached once per configuration. The free functions below
// route through this so the hot loop and one-off calls share arithmetic.
struct BinContext {
  double a2;
  double a;
  double inv_2a2;
  double gauss_norm;   // (2 pi a^2)^{-1/2}
  double residual;     // exp(-(2k(1-eta) + gamma) dt): coherence decay not
                       // captured by the observed record
  double cos_theta;    // theta = Omega_R dt
  double sin_theta;

  static BinContext make(const PhysicalParams& p) {
    BinContext c;
    c.a2 = p.a2();
    c.a = std::sqrt(c.a2);
    c.inv_2a2 = 1.0 / (2.0 * c.a2);
    c.gauss_norm = 1.0 / std::sqrt(kTwoPi * c.a2);
    c.residual =
        std::exp(-(2.0 * p.k() * (1.0 - p.eta()) + p.gamma()) * p.dt());
    const double theta = p.omega_rabi() * p.dt();
    c.cos_theta = std::cos(theta);
    c.sin_theta = std::sin(theta);
    return c;
  }
};

// Normalized post-measurement state for readout V. Diagonals follow the
// Gaussian likelihood ratio; the coherence picks up the geometric mean of the
// two likelihoods sqrt(G(V-1) G(V+1)) = (2 pi a^2)^{-1/2} e^{-(V^2+1)/2a^2}
// plus the deterministic residual-dephasing factor, so that the ensemble
// average over V reproduces the full master equation's coherence decay
// exp(-(2k + gamma) dt).
inline Hermitian2 bayesian_update(const Hermitian2& rho, double v,
                                  const BinContext& c) {
  const double gm = c.gauss_norm * std::exp(-(v - 1.0) * (v - 1.0) * c.inv_2a2);
  const double gp = c.gauss_norm * std::exp(-(v + 1.0) * (v + 1.0) * c.inv_2a2);
  const double pv = rho.m00 * gm + rho.m11 * gp;
  if (!(pv > 0.0) || !std::isfinite(pv))
    throw NumericalUnderflowError(
        "bayesian_update: P(V) underflowed at V = " + std::to_string(v));
  const double cross = c.gauss_norm * std::exp(-(v * v + 1.0) * c.inv_2a2);
  const double f = cross / pv * c.residual;
  return {rho.m00 * gm / pv, rho.m11 * gp / pv, rho.re01 * f, rho.im01 * f};
}

inline Hermitian2 bayesian_update(const Hermitian2& rho, double v,
                                  const PhysicalParams& p) {
  return bayesian_update(rho, v, BinContext::make(p));
}

// Rotation about the y axis: z' = z cos(theta) - x sin(theta),
// x' = x cos(theta) + z sin(theta), y' = y. Valid for density and effect
// roles; the trace is carried through unchanged.
inline Hermitian2 unitary_step_cs(const Hermitian2& s, double cos_theta,
                                  double sin_theta) {
  const double tr = s.m00 + s.m11;
  const double z = s.m00 - s.m11;
  const double x = 2.0 * s.re01;
  const double zp = z * cos_theta - x * sin_theta;
  const double xp = x * cos_theta + z * sin_theta;
  return {0.5 * (tr + zp), 0.5 * (tr - zp), 0.5 * xp, s.im01};
}

inline Hermitian2 unitary_step(const Hermitian2& s, double theta) {
  return unitary_step_cs(s, std::cos(theta), std::sin(theta));
}

// Exact action of the dissipator rate*(sigma_z . sigma_z - .) over dt:
// diagonals fixed, coherence multiplied by exp(-2 rate dt).
inline Hermitian2 dephasing_step(const Hermitian2& s, double rate, double dt) {
  if (rate < 0.0)
    throw ParameterDomainError("dephasing_step: rate must be >= 0");
  const double f = std::exp(-2.0 * rate * dt);
  return {s.m00, s.m11, s.re01 * f, s.im01 * f};
}

// Projective sigma_z measurement: returns the outcome probability and the
// post-measurement projector.
inline std::pair<double, Hermitian2> project(const Hermitian2& rho,
                                             ZOutcome outcome) {
  const double p = outcome == ZOutcome::plus_z ? rho.m00 : rho.m11;
  if (p < 1e-15)
    throw DegenerateConditioningError(
        "project: requested outcome has probability < 1e-15");
  return {p, outcome == ZOutcome::plus_z ? Hermitian2::plus_z()
                                         : Hermitian2::minus_z()};
}

}  // namespace monq
