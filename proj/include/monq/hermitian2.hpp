#pragma once
// Complex 2x2 Hermitian matrices stored as four independent real components:
// the diagonal m00, m11 and the off-diagonal m01 = re01 + i*im01 (m10 is the
// conjugate). Hermiticity holds by construction. The same representation
// serves density matrices rho and effect matrices E.

#include <cmath>

namespace monq {

struct BlochVector {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  double norm() const { return std::sqrt(x * x + y * y + z * z); }
};

struct Hermitian2 {
  double m00 = 0.0;
  double m11 = 0.0;
  double re01 = 0.0;
  double im01 = 0.0;

  static Hermitian2 identity() { return {1.0, 1.0, 0.0, 0.0}; }
  static Hermitian2 maximally_mixed() { return {0.5, 0.5, 0.0, 0.0}; }
  static Hermitian2 plus_z() { return {1.0, 0.0, 0.0, 0.0}; }
  static Hermitian2 minus_z() { return {0.0, 1.0, 0.0, 0.0}; }

  // Diagonal density matrix diag(p, 1-p).
  static Hermitian2 diagonal(double p) { return {p, 1.0 - p, 0.0, 0.0}; }

  // Operator (trace*I + x sigma_x + y sigma_y + z sigma_z)/2.
  static Hermitian2 from_bloch(const BlochVector& r, double trace = 1.0) {
    return {0.5 * (trace + r.z), 0.5 * (trace - r.z), 0.5 * r.x, -0.5 * r.y};
  }

  double trace() const { return m00 + m11; }

  // Tr(sigma_z A); equals <sigma_z> for a unit-trace density matrix.
  double sigma_z() const { return m00 - m11; }

  // Tr(rho^2) = sum of squared magnitudes of all four entries.
  double purity() const {
    return m00 * m00 + m11 * m11 + 2.0 * (re01 * re01 + im01 * im01);
  }

  double off_diag_mag2() const { return re01 * re01 + im01 * im01; }

  BlochVector bloch() const { return {2.0 * re01, -2.0 * im01, m00 - m11}; }

  void eigenvalues(double& lo, double& hi) const {
    const double mid = 0.5 * (m00 + m11);
    const double half = 0.5 * (m00 - m11);
    const double d = std::sqrt(half * half + off_diag_mag2());
    lo = mid - d;
    hi = mid + d;
  }

  double min_eigenvalue() const {
    double lo, hi;
    eigenvalues(lo, hi);
    return lo;
  }

  bool is_positive(double tol = 1e-12) const { return min_eigenvalue() >= -tol; }

  bool is_valid_density(double tol = 1e-12) const {
    return std::abs(trace() - 1.0) <= tol && m00 >= -tol && m11 >= -tol &&
           m00 * m11 - off_diag_mag2() >= -tol;
  }
};

// Trace distance (|eigenvalue_1| + |eigenvalue_2|)/2 of the difference; for
// equal-trace operators this is half the Euclidean Bloch distance.
inline double trace_distance(const Hermitian2& a, const Hermitian2& b) {
  const Hermitian2 d{a.m00 - b.m00, a.m11 - b.m11, a.re01 - b.re01,
                     a.im01 - b.im01};
  double lo, hi;
  d.eigenvalues(lo, hi);
  return 0.5 * (std::abs(lo) + std::abs(hi));
}

inline double max_element_difference(const Hermitian2& a, const Hermitian2& b) {
  const double d0 = std::abs(a.m00 - b.m00);
  const double d1 = std::abs(a.m11 - b.m11);
  const double dr = std::abs(a.re01 - b.re01);
  const double di = std::abs(a.im01 - b.im01);
  return std::max(std::max(d0, d1), std::max(dr, di));
}

}  // namespace monq
