#pragma once
// Closed-form solutions of the forward and backward master equations in the
// underdamped regime (Omega_R > k_eff), with the extra dephasing folded in
// through k -> k_eff:
//
//   rho00(t) = e^{-k_eff t} [ (k_eff/2G) sin(Gt) + (1/2) cos(Gt) ] + 1/2
//   rho01(t) = e^{-k_eff t} (Omega_R/2G) sin(Gt),      G^2 = Omega_R^2 - k_eff^2
//
// from rho(0) = |+z><+z|. The backward solution anchored at E(T) = |+z><+z|
// is the time reverse with the rotation sense flipped:
// E00(t) = rho00(T-t), E01(t) = -rho01(T-t).

#include <cmath>

#include "monq/errors.hpp"
#include "monq/hermitian2.hpp"
#include "monq/params.hpp"

namespace monq {

inline Hermitian2 analytic_rho(double t, const PhysicalParams& p) {
  const double keff = p.k_eff();
  const double g = p.oscillation_rate();  // throws when overdamped
  const double e = std::exp(-keff * t);
  const double s = std::sin(g * t);
  const double c = std::cos(g * t);
  const double rho00 = e * (keff / (2.0 * g) * s + 0.5 * c) + 0.5;
  const double rho01 = e * (p.omega_rabi() / (2.0 * g)) * s;
  return {rho00, 1.0 - rho00, rho01, 0.0};
}

inline Hermitian2 analytic_effect(double t, double big_t,
                                  const PhysicalParams& p) {
  const Hermitian2 r = analytic_rho(big_t - t, p);
  return {r.m00, r.m11, -r.re01, 0.0};
}

// Exact time derivatives of the closed forms, for residual checks against the
// master-equation right-hand side.
inline void analytic_rho_derivative(double t, const PhysicalParams& p,
                                    double& d00, double& d01) {
  const double keff = p.k_eff();
  const double g = p.oscillation_rate();
  const double e = std::exp(-keff * t);
  const double s = std::sin(g * t);
  const double c = std::cos(g * t);
  const double amp = keff / (2.0 * g);
  d00 = e * (-keff * (amp * s + 0.5 * c) + g * (amp * c - 0.5 * s));
  const double camp = p.omega_rabi() / (2.0 * g);
  d01 = e * camp * (-keff * s + g * c);
}

}  // namespace monq
