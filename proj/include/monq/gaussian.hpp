#pragma once
// Gaussian readout kernel and the two-outcome POVM voltage density.

#include <cmath>

#include "monq/errors.hpp"
#include "monq/hermitian2.hpp"
#include "monq/params.hpp"

namespace monq {

// G(x; a^2) = (2 pi a^2)^{-1/2} exp(-x^2 / (2 a^2)).
inline double gaussian_pdf(double x, double a2) {
  return std::exp(-x * x / (2.0 * a2)) / std::sqrt(kTwoPi * a2);
}

// P(V) = rho00 G(V-1) + rho11 G(V+1): the readout distribution is the sum of
// two Gaussians centered at +-1 and weighted by the populations.
inline double povm_density(const Hermitian2& rho, double v, double a2) {
  if (!(a2 > 0.0))
    throw ParameterDomainError("povm_density: a2 must be > 0");
  return rho.m00 * gaussian_pdf(v - 1.0, a2) +
         rho.m11 * gaussian_pdf(v + 1.0, a2);
}

}  // namespace monq
