#pragma once
// Deterministic (unconditioned) master-equation propagation
//
//   drho/dt = -i (Omega_R/2) [sigma_y, rho] + k_eff (sigma_z rho sigma_z - rho)
//
// in Bloch components: dx = Omega z - 2 k_eff x, dy = -2 k_eff y,
// dz = -Omega x; the trace is conserved identically. The backward (adjoint)
// equation for effect matrices is the same flow with the rotation sense
// reversed (Omega -> -Omega). RK4 integration provides the smooth-ODE
// reference; the exact per-bin channel composition provides the mean of the
// discrete measurement model.

#include "monq/channels.hpp"
#include "monq/hermitian2.hpp"
#include "monq/params.hpp"

namespace monq {

namespace detail {

// One classical RK4 step on the Bloch components; valid for any Hermitian
// operator since the flow is linear and trace-free.
inline Hermitian2 rk4_bloch_step(const Hermitian2& s, double omega,
                                 double keff, double dt) {
  const double tr = s.m00 + s.m11;
  double x = 2.0 * s.re01;
  double y = -2.0 * s.im01;
  double z = s.m00 - s.m11;

  const auto fx = [omega, keff](double xx, double zz) {
    return omega * zz - 2.0 * keff * xx;
  };
  const auto fz = [omega](double xx) { return -omega * xx; };
  const auto fy = [keff](double yy) { return -2.0 * keff * yy; };

  const double k1x = fx(x, z), k1y = fy(y), k1z = fz(x);
  const double k2x = fx(x + 0.5 * dt * k1x, z + 0.5 * dt * k1z);
  const double k2y = fy(y + 0.5 * dt * k1y);
  const double k2z = fz(x + 0.5 * dt * k1x);
  const double k3x = fx(x + 0.5 * dt * k2x, z + 0.5 * dt * k2z);
  const double k3y = fy(y + 0.5 * dt * k2y);
  const double k3z = fz(x + 0.5 * dt * k2x);
  const double k4x = fx(x + dt * k3x, z + dt * k3z);
  const double k4y = fy(y + dt * k3y);
  const double k4z = fz(x + dt * k3x);

  x += dt / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
  y += dt / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
  z += dt / 6.0 * (k1z + 2.0 * k2z + 2.0 * k3z + k4z);

  return Hermitian2::from_bloch({x, y, z}, tr);
}

}  // namespace detail

// Advance the unconditioned master equation by dt (one RK4 step; subdivide by
// calling repeatedly or via propagate_deterministic).
inline Hermitian2 step_deterministic(const Hermitian2& state,
                                     const PhysicalParams& p, double dt) {
  return detail::rk4_bloch_step(state, p.omega_rabi(), p.k_eff(), dt);
}

// Advance dE/d(-t) = +i/hbar [H_R, E] + k_eff (sigma_z E sigma_z - E) by dt
// backward from the anchor; identical flow with the rotation mirrored, so a
// backward effect trajectory is the exact x-flip of the forward state
// trajectory.
inline Hermitian2 adjoint_step_backward(const Hermitian2& effect,
                                        const PhysicalParams& p, double dt) {
  return detail::rk4_bloch_step(effect, -p.omega_rabi(), p.k_eff(), dt);
}

inline Hermitian2 propagate_deterministic(Hermitian2 s,
                                          const PhysicalParams& p,
                                          double total, int substeps) {
  const double h = total / substeps;
  for (int i = 0; i < substeps; ++i) s = step_deterministic(s, p, h);
  return s;
}

inline Hermitian2 propagate_adjoint_backward(Hermitian2 e,
                                             const PhysicalParams& p,
                                             double total, int substeps) {
  const double h = total / substeps;
  for (int i = 0; i < substeps; ++i) e = adjoint_step_backward(e, p, h);
  return e;
}

// Exact mean of one bin of the discrete measurement model: averaging the
// Bayesian update over the POVM outcome is a dephasing at k_eff, followed by
// the bin's Rabi rotation. This is the comparator for martingale checks.
inline Hermitian2 deterministic_bin_step(const Hermitian2& s,
                                         const PhysicalParams& p) {
  return unitary_step(dephasing_step(s, p.k_eff(), p.dt()),
                      p.omega_rabi() * p.dt());
}

}  // namespace monq
