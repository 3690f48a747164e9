#pragma once
// Backward propagation of effect matrices and retrodicted voltage statistics.
// Combining the filtered state rho(t) with an effect matrix E(t) propagated
// backward from a later condition yields the "past" probability density of
// the readout and its conditioned mean.

#include <cmath>
#include <vector>

#include "monq/analytic.hpp"
#include "monq/errors.hpp"
#include "monq/gaussian.hpp"
#include "monq/hermitian2.hpp"
#include "monq/master_equation.hpp"
#include "monq/params.hpp"
#include "monq/trajectory.hpp"

namespace monq {

struct EffectTrajectory {
  std::vector<Hermitian2> effects;  // E(t_m) for m = 0..anchor_bin
  int anchor_bin = 0;
  double anchor_time = 0.0;
};

// Backward propagation of the anchor over the bin grid; each bin is advanced
// by RK4 substeps of the smooth adjoint equation.
inline EffectTrajectory propagate_effect_backward(const Hermitian2& anchor,
                                                  int anchor_bin,
                                                  const PhysicalParams& p,
                                                  int substeps_per_bin = 20) {
  if (anchor_bin < 0)
    throw ParameterDomainError("propagate_effect_backward: anchor_bin < 0");
  if (!anchor.is_positive(1e-12))
    throw ParameterDomainError(
        "propagate_effect_backward: anchor must be positive semidefinite");
  EffectTrajectory out;
  out.anchor_bin = anchor_bin;
  out.anchor_time = anchor_bin * p.dt();
  out.effects.resize(anchor_bin + 1);
  out.effects[anchor_bin] = anchor;
  const double h = p.dt() / substeps_per_bin;
  Hermitian2 e = anchor;
  for (int m = anchor_bin - 1; m >= 0; --m) {
    for (int s = 0; s < substeps_per_bin; ++s)
      e = adjoint_step_backward(e, p, h);
    out.effects[m] = e;
  }
  return out;
}

// Past readout density
//   P_p(V) ~ rho00 E00 G(V-1) + rho11 E11 G(V+1)
//            + (rho10 E01 + rho01 E10) (2 pi a^2)^{-1/2} e^{-(V^2+1)/2a^2},
// normalized analytically. Reduces to povm_density when E ~ I.
class PastVoltageDensity {
 public:
  PastVoltageDensity(const Hermitian2& rho, const Hermitian2& effect,
                     double a2)
      : a2_(a2) {
    if (!(a2 > 0.0))
      throw ParameterDomainError("past_voltage_density: a2 must be > 0");
    const double etr = effect.trace();
    if (!(etr > 0.0))
      throw ParameterDomainError(
          "past_voltage_density: effect matrix must have positive trace");
    w_plus_ = rho.m00 * effect.m00 / etr;
    w_minus_ = rho.m11 * effect.m11 / etr;
    w_cross_ =
        2.0 * (rho.re01 * effect.re01 + rho.im01 * effect.im01) / etr;
    cross_mass_ = std::exp(-1.0 / (2.0 * a2));
    norm_ = w_plus_ + w_minus_ + w_cross_ * cross_mass_;
    const double scale = w_plus_ + w_minus_ + std::abs(w_cross_);
    if (!(norm_ > 1e-12 * scale) || !(norm_ > 0.0))
      throw DegenerateConditioningError(
          "past_voltage_density: vanishing normalization (orthogonal rho and "
          "E supports)");
  }

  double operator()(double v) const {
    const double cross_kernel =
        std::exp(-(v * v + 1.0) / (2.0 * a2_)) / std::sqrt(kTwoPi * a2_);
    return (w_plus_ * gaussian_pdf(v - 1.0, a2_) +
            w_minus_ * gaussian_pdf(v + 1.0, a2_) + w_cross_ * cross_kernel) /
           norm_;
  }

  // First moment by the analytic Gaussian integrals: the cross term is odd.
  double mean() const { return (w_plus_ - w_minus_) / norm_; }

 private:
  double a2_;
  double w_plus_, w_minus_, w_cross_;
  double cross_mass_;
  double norm_;
};

inline PastVoltageDensity past_voltage_density(const Hermitian2& rho,
                                               const Hermitian2& effect,
                                               double a2) {
  return PastVoltageDensity(rho, effect, a2);
}

// Weak-measurement limit of the conditioned mean,
//   (rho00 E00 - rho11 E11) / (rho00 E00 + rho11 E11 + rho01 E10 + rho10 E01).
// The ratio is invariant under positive scaling of E; E is normalized by its
// trace before evaluation.
inline double past_mean_voltage(const Hermitian2& rho,
                                const Hermitian2& effect) {
  const double etr = effect.trace();
  if (!(etr > 0.0))
    throw ParameterDomainError(
        "past_mean_voltage: effect matrix must have positive trace");
  const double e00 = effect.m00 / etr;
  const double e11 = effect.m11 / etr;
  const double ere = effect.re01 / etr;
  const double eim = effect.im01 / etr;
  const double num = rho.m00 * e00 - rho.m11 * e11;
  const double den = rho.m00 * e00 + rho.m11 * e11 +
                     2.0 * (rho.re01 * ere + rho.im01 * eim);
  if (!(den > 1e-12))
    throw DegenerateConditioningError(
        "past_mean_voltage: denominator below 1e-12 (orthogonal rho and E)");
  return num / den;
}

// Deterministic prediction of the weighted two-time estimator for t < t':
// rho(t) evolves forward from the heralded preparation, E(t) backward from a
// +z anchor at t'. Closed forms in the underdamped regime, RK4 otherwise.
inline double predict_weighted_correlation(double t, double t_prime,
                                           const PhysicalParams& p,
                                           HeraldPolicy herald,
                                           double prep_fidelity = 0.95) {
  if (!(t < t_prime))
    throw ParameterDomainError(
        "predict_weighted_correlation: defined only for t < t' (no "
        "deterministic one-time prediction exists at or beyond the weighting "
        "time)");
  const double scale = herald == HeraldPolicy::mixed
                           ? 0.0
                           : (herald == HeraldPolicy::plus
                                  ? 2.0 * prep_fidelity - 1.0
                                  : -(2.0 * prep_fidelity - 1.0));
  Hermitian2 rho_t, effect_t;
  if (p.underdamped()) {
    const Hermitian2 unit = analytic_rho(t, p);
    rho_t = Hermitian2::from_bloch(
        {scale * 2.0 * unit.re01, 0.0, scale * (2.0 * unit.m00 - 1.0)});
    effect_t = analytic_effect(t, t_prime, p);
  } else {
    const int sub_f = std::max(1, static_cast<int>(std::ceil(t / 1e-9)));
    rho_t = t > 0.0 ? propagate_deterministic(
                          Hermitian2::from_bloch({0.0, 0.0, scale}), p, t,
                          sub_f)
                    : Hermitian2::from_bloch({0.0, 0.0, scale});
    const double tau = t_prime - t;
    const int sub_b = std::max(1, static_cast<int>(std::ceil(tau / 1e-9)));
    effect_t =
        propagate_adjoint_backward(Hermitian2::plus_z(), p, tau, sub_b);
  }
  return past_mean_voltage(rho_t, effect_t);
}

}  // namespace monq
