#pragma once

#include "fepi/freeconv.hpp"
#include "fepi/measure.hpp"

namespace fepi {

/// A log-energy or entropy value that may be -infinity (any atom makes the
/// self-interaction term diverge). `value` holds -inf when divergent.
struct EntropyValue {
  double value = 0.0;
  bool divergent = false;
  /// Upper estimate of the discretization error, from comparing the grid
  /// with its 2x coarsening.
  double error_estimate = 0.0;

  /// exp(2 value); exactly 0 when divergent.
  double power() const noexcept;
};

/// Double integral of log|s - t| against mu x mu, exact for the
/// piecewise-constant model of the density. A measure with atoms returns the
/// divergent sentinel.
EntropyValue log_energy(const Measure& mu);

/// chi(mu) = log_energy(mu) + 3/4 + log(2 pi) / 2.
EntropyValue chi(const Measure& mu);

/// The constant 3/4 + log(2 pi) / 2 added to the log-energy.
double chi_constant() noexcept;

struct EntropyReport {
  double chi_alpha = 0.0;
  double chi_beta = 0.0;
  double chi_sum = 0.0;
  double power_alpha = 0.0;
  double power_beta = 0.0;
  double power_sum = 0.0;
  /// power_sum - power_alpha - power_beta; nonnegative by the free EPI.
  double deficit = 0.0;
  double quadrature_error_estimate = 0.0;
  bool alpha_divergent = false;
  bool beta_divergent = false;
  bool sum_divergent = false;
  FreeConvolutionResult convolution;
};

/// Free entropy power deficit exp(2chi(a+b)) - exp(2chi(a)) - exp(2chi(b))
/// with a+b the free convolution.
EntropyReport epi_deficit(const Measure& alpha, const Measure& beta, const FreeConvolutionConfig& cfg = {});

/// Free Fisher information (4 pi^2 / 3) int p^3. Experimental.
double free_fisher(const Measure& mu);

/// 1/Phi(a+b) - 1/Phi(a) - 1/Phi(b). Experimental; the conjectured
/// inequality predicts a value <= 0.
double stam_deficit(const Measure& alpha, const Measure& beta, const FreeConvolutionConfig& cfg = {});

}  // namespace fepi
