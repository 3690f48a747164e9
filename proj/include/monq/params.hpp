#pragma once
// Physics constants of the monitored qubit and derived quantities.
//
// Conventions: all rates are angular (rad/s). k is the measurement rate
// (k = 4 chi^2 nbar / kappa in the dispersive readout), eta the quantum
// efficiency, gamma = 1/T2* the extra environmental dephasing, dt the
// integration bin. The calibrated readout per bin has variance
// a^2 = 1/(4 k eta dt) around +-1. The dissipator rate of the unconditioned
// master equation is k_eff = k + gamma/2, and in the underdamped regime the
// damped Rabi precession runs at Gamma = sqrt(Omega_R^2 - k_eff^2).

#include <cmath>
#include <string>

#include "monq/errors.hpp"

namespace monq {

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

class PhysicalParams {
 public:
  PhysicalParams(double omega_rabi, double k, double eta, double gamma,
                 double dt)
      : omega_rabi_(omega_rabi),
        k_(k),
        eta_(eta),
        gamma_(gamma),
        dt_(dt),
        a2_(1.0 / (4.0 * k * eta * dt)) {
    validate();
  }

  double omega_rabi() const { return omega_rabi_; }
  double k() const { return k_; }
  double eta() const { return eta_; }
  double gamma() const { return gamma_; }
  double dt() const { return dt_; }
  double a2() const { return a2_; }
  double a() const { return std::sqrt(a2_); }

  double k_eff() const { return k_ + 0.5 * gamma_; }

  double a2_recomputed() const { return 1.0 / (4.0 * k_ * eta_ * dt_); }

  bool underdamped() const { return omega_rabi_ > k_eff(); }

  // Gamma = sqrt(Omega_R^2 - k_eff^2); defined only when underdamped.
  double oscillation_rate() const {
    if (!underdamped())
      throw ParameterDomainError(
          "oscillation_rate: overdamped parameters (Omega_R <= k_eff); "
          "use numeric master-equation integration instead");
    return std::sqrt(omega_rabi_ * omega_rabi_ - k_eff() * k_eff());
  }

  // Omega_R/2pi = 1.16 MHz, k/2pi = 95 kHz, eta = 0.35, T2* = 16 us,
  // dt = 20 ns.
  static PhysicalParams reference_defaults() {
    return PhysicalParams(kTwoPi * 1.16e6, kTwoPi * 95.0e3, 0.35,
                          1.0 / 16.0e-6, 20.0e-9);
  }

  // Same drive and measurement rate with eta = 1 and gamma = 0, the regime of
  // the closed-form solutions.
  static PhysicalParams oracle_regime() {
    return PhysicalParams(kTwoPi * 1.16e6, kTwoPi * 95.0e3, 1.0, 0.0, 20.0e-9);
  }

  PhysicalParams with_oracle_regime() const {
    return PhysicalParams(omega_rabi_, k_, 1.0, 0.0, dt_);
  }

 private:
  void validate() const {
    if (!(k_ > 0.0))
      throw ParameterDomainError("PhysicalParams: measurement rate k must be > 0");
    if (!(dt_ > 0.0))
      throw ParameterDomainError("PhysicalParams: bin duration dt must be > 0");
    if (!(eta_ > 0.0) || eta_ > 1.0)
      throw ParameterDomainError(
          "PhysicalParams: efficiency eta must lie in (0, 1]; eta = 0 would "
          "make a^2 = 1/(4 k eta dt) diverge");
    // Omega_R = 0 (undriven, QND probing) and gamma = 0 (no extra dephasing)
    // are both meaningful limits.
    if (omega_rabi_ < 0.0)
      throw ParameterDomainError("PhysicalParams: Omega_R must be >= 0");
    if (gamma_ < 0.0)
      throw ParameterDomainError("PhysicalParams: gamma must be >= 0");
    if (!std::isfinite(a2_) || !(a2_ > 0.0))
      throw ParameterDomainError("PhysicalParams: a^2 = 1/(4 k eta dt) not finite");
  }

  double omega_rabi_;
  double k_;
  double eta_;
  double gamma_;
  double dt_;
  double a2_;
};

}  // namespace monq
