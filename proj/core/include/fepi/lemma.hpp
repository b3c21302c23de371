#pragma once

#include <cstddef>

#include "fepi/checks.hpp"

namespace fepi {

/// Standard normal CDF.
double normal_cdf(double x) noexcept;

struct CapFraction {
  /// lambda({|y| <= rho, |x0 + y| <= sqrt(1 + rho^2)}) / lambda(rho B^n), |x0| = r0.
  double value = 0.0;
  /// The split point s = (1 - r0^2) / (2 r0) fell outside [-rho, t] and the
  /// limits were clamped (the small ball then lies inside the big one).
  bool clamped = false;
  double s = 0.0;
  double t = 0.0;
  /// Quadrature error estimate and the deviation of the normalization
  /// integral from 1.
  double quadrature_error = 0.0;
  double normalization_error = 0.0;
};

/// Cross-section integral over the direction of x0, split at s where the two
/// constraints meet. Requires n >= 2, rho in (0, 1], r0 in (0, 1].
CapFraction cap_fraction(std::size_t n, double rho, double r0);

/// The part of the cap fraction coming from the rho-ball cross sections
/// below height s, i.e. int_{-rho}^{s} (rho^2 - u^2)^{(n-1)/2} du normalized
/// by the full integral. Tends to Phi(sqrt(n) s / rho) as n grows.
double first_integral_fraction(std::size_t n, double rho, double s);

/// lambda(Theta) / (lambda(B^n) lambda(rho B^n)) for
/// Theta = {(x, y) : |x + y| <= sqrt(1 + rho^2)}, by integrating the cap
/// fraction over |x|.
double sum_norm_theta_fraction(std::size_t n, double rho);

struct Lemma13Result {
  double c1_estimate = 0.0;
  /// 1 - (1 - tau/n)^n c1: upper bound on the Theta fraction.
  double theta_bound = 1.0;
  /// (1 - tau/n)^n c1 / min(rho sqrt(n), 1).
  double implied_c = 0.0;
  double tau = 0.0;
  /// r0 achieving the minimum of 1 - cap.
  double argmin_r0 = 1.0;
  CheckReport report;
};

/// Scans r0 over [1 - tau/n, 1] on `grid_r0` points.
Lemma13Result check_lemma13(std::size_t n, double rho, std::size_t grid_r0 = 64);

}  // namespace fepi
