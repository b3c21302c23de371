#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <vector>

#include "fepi/measure.hpp"

namespace fepi {

using Complex = std::complex<double>;

struct CauchyEvaluation {
  Complex point;
  Complex value;
};

/// Exact Cauchy transform machinery for the piecewise-constant + atoms model
/// of a Measure. Cell integrals are summed by parts so that one complex log
/// per density jump suffices:
///   G(z)  = sum_j  d_j log(z - x_j) + sum_a w_a / (z - a)
///   G'(z) = sum_j d_j / (z - x_j) - sum_a w_a / (z - a)^2
/// with d_j the density jump at node x_j.
class CauchyKernel {
 public:
  explicit CauchyKernel(const Measure& mu);

  struct Value {
    Complex g;
    Complex dg;
  };

  /// G and G' at any z off the support; the lower half-plane is handled by
  /// reflection.
  Value evaluate(Complex z) const;

  /// Imaginary part of the logarithmic potential L(z) = int log(z - t) dmu(t)
  /// for Im z > 0 (principal branch, so the result lies in [0, pi]).
  double log_potential_imag(Complex z) const;

 private:
  Value evaluate_upper(Complex z) const;

  std::vector<double> nodes_;
  std::vector<double> jumps_;
  std::vector<double> atom_loc_;
  std::vector<double> atom_w_;
};

/// G_mu(z) = int dmu(t) / (z - t). Requires Im z > 0.
Complex cauchy_transform(const Measure& mu, Complex z);
CauchyEvaluation evaluate_cauchy(const Measure& mu, Complex z);

struct InversionResult {
  Measure measure;
  /// Mass of the clipped density before renormalization.
  double raw_mass = 0.0;
  /// Factor applied to reach mass 1.
  double renormalization = 1.0;
};

/// Density -Im g(x + i eta) / pi at cell midpoints of [lo, hi], clipped at 0
/// and renormalized. Throws an inversion-quality error when the raw mass is
/// outside [0.9, 1.1].
InversionResult stieltjes_invert(const std::function<Complex(Complex)>& g, double lo, double hi,
                                 std::size_t cells, double eta);

/// Default inversion offset for a grid: four cell widths.
double default_inversion_eta(double lo, double hi, std::size_t cells);

struct NewtonConfig {
  int max_iterations = 200;
  double tolerance = 1e-12;
};

/// R(w) = K(w) - 1/w with K the functional inverse of G near 0, obtained by
/// Newton iteration on G(z) = w seeded at z = 1/w + mean.
Complex r_transform(const Measure& mu, Complex w, const NewtonConfig& cfg = {});

}  // namespace fepi
