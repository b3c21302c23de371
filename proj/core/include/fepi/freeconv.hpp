#pragma once

#include <cstddef>

#include "fepi/measure.hpp"
#include "fepi/transform.hpp"

namespace fepi {

/// Subordination functions at one query point z: G_{a+b}(z) = G_a(omega1) =
/// G_b(omega2) with omega1 + omega2 = z + F_{a+b}(z).
struct SubordinationState {
  Complex omega1;
  Complex omega2;
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
};

struct FreeConvolutionConfig {
  /// Output cell count; the output window is [lo_a + lo_b, hi_a + hi_b].
  GridConfig grid{};
  double tol = 1e-10;
  double damping = 0.5;
  int max_iterations = 500;
  /// Height of the evaluation line above the real axis; <= 0 selects
  /// 1e-9 times the output window width.
  double eta = 0.0;
  /// Number of contiguous node blocks swept independently. Results depend on
  /// this value but never on `threads`.
  std::size_t blocks = 16;
  unsigned threads = 1;
};

struct FreeConvolutionResult {
  Measure measure;
  double worst_residual = 0.0;
  std::size_t unconverged_points = 0;
  std::size_t evaluated_points = 0;
  std::size_t total_iterations = 0;
  /// Mass recovered before clipping and renormalization.
  double raw_mass = 1.0;
  double renormalization = 1.0;
  double eta = 0.0;
  /// One input was a point mass and the output is an exact translation.
  bool translation_shortcut = false;
};

/// Solves the subordination fixed point at z, starting from omega1_start.
/// Each step tries a Newton update of omega1 -> z + h_b(z + h_a(omega1)),
/// h(w) = F(w) - w, and falls back to a damped fixed-point step when Newton
/// leaves the upper half-plane or does not reduce the residual.
SubordinationState solve_subordination(const CauchyKernel& alpha, const CauchyKernel& beta, Complex z,
                                       Complex omega1_start, const FreeConvolutionConfig& cfg);

/// alpha boxplus beta on a uniform grid. Cell masses are differences of the
/// distribution function, recovered from the subordination functions through
/// the logarithmic potential identity
///   L_{a+b}(z) = L_a(omega1) + L_b(omega2) - log(omega1 + omega2 - z),
/// F(x) = 1 - Im L_{a+b}(x + i eta) / pi.
FreeConvolutionResult free_convolve(const Measure& alpha, const Measure& beta,
                                    const FreeConvolutionConfig& cfg = {});

/// Free cumulant of order 1..4 from the moments of mu.
double free_cumulant(const Measure& mu, int order);

}  // namespace fepi
