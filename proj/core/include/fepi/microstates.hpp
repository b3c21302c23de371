#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fepi/measure.hpp"

namespace fepi {

using ComplexMatrix = Eigen::MatrixXcd;

/// Strictly increasing continuous function on [0, 1], stored as a
/// piecewise-linear table (t_0 = 0 < ... < t_m = 1).
struct StepFunctionSpec {
  std::vector<double> t;
  std::vector<double> values;
  std::string id;

  static StepFunctionSpec from_table(std::vector<double> t, std::vector<double> values, std::string id = "table");
  /// h(u) = a u + b.
  static StepFunctionSpec affine(double a, double b, std::string id = "affine");
  /// Quantile function of an atom-free measure sampled at `nodes` points.
  static StepFunctionSpec from_quantile(const Measure& mu, std::size_t nodes = 1025, std::string id = "quantile");

  /// Throws a spec error unless the table is strictly increasing.
  void validate() const;
  double operator()(double u) const;
  double sup_abs() const;
  /// Exact moments E h(Z)^p, p = 0..order, Z uniform on [0, 1].
  std::vector<double> moments(std::size_t order) const;
  /// Law of h(Z) as a cell-averaged density.
  Measure law(std::size_t cells = 2048) const;
};

enum class Provenance { omega_sample, haar_conjugate, sum };
std::string to_string(Provenance p);

struct MatrixMicrostate {
  std::size_t k = 0;
  ComplexMatrix entries;
  Provenance provenance = Provenance::omega_sample;
  /// Source function id for omega samples.
  std::string source;
  /// Sorted eigenvalues when known from construction; empty otherwise.
  std::vector<double> spectrum;

  /// max |M - M*| over entries.
  double hermitian_defect() const;
};

/// Haar unitary from the QR factorization of a complex Gaussian matrix with
/// the phases of R's diagonal moved into Q.
ComplexMatrix haar_unitary(std::size_t k, std::mt19937_64& engine);
ComplexMatrix haar_unitary(std::size_t k, std::uint64_t seed);

/// Slot s (0 <= s < k) is [h(2s/2k), h((2s+1)/2k)].
std::vector<std::pair<double, double>> eigenvalue_slots(const StepFunctionSpec& h, std::size_t k);

/// U diag(lambda) U* with lambda_{s+1} uniform in slot s and U Haar.
/// With `verify`, the spectrum is recomputed and checked against the slots.
MatrixMicrostate sample_omega(const StepFunctionSpec& h, std::size_t k, std::uint64_t seed, bool verify = true);

/// Moment targets for a tuple of variables. With one variable the words are
/// powers; with several, mixed targets follow from freeness of the
/// variables with the given marginals.
struct GammaTarget {
  /// Per variable, moments m_0 = 1, m_1, ..., m_N.
  std::vector<std::vector<double>> marginal_moments;
  std::size_t N = 1;
  double eps = 0.1;
  double R = 1.0;

  static GammaTarget single(std::vector<double> moments, std::size_t N, double eps, double R);
  static GammaTarget free_tuple(std::vector<std::vector<double>> moments, std::size_t N, double eps, double R);
  void validate() const;
};

struct WordTarget {
  std::vector<int> word;
  double value = 0.0;
};

/// Every word of length 1..N over the variables, in depth-first order.
std::vector<WordTarget> enumerate_word_targets(const GammaTarget& target);

struct MembershipResult {
  bool member = false;
  /// Some operator norm exceeded R + 1e-9.
  bool norm_violation = false;
  double max_error = 0.0;
  std::size_t words = 0;
};

MembershipResult microstate_membership(std::span<const MatrixMicrostate> tuple, const GammaTarget& target);
/// Same check against a precomputed word list. With `early_exit` the scan
/// stops at the first word outside tolerance (max_error is then partial).
MembershipResult microstate_membership(std::span<const MatrixMicrostate> tuple, const GammaTarget& target,
                                       std::span<const WordTarget> words, bool early_exit = false);

/// Proportion with its 99% Wilson interval.
struct Proportion {
  double value = 0.0;
  double lo = 0.0;
  double hi = 1.0;
  std::size_t successes = 0;
  std::size_t trials = 0;
};
Proportion wilson_interval(std::size_t successes, std::size_t trials);

struct ThetaFractionConfig {
  std::size_t k = 64;
  std::size_t N = 2;
  double eps = 0.2;
  std::size_t trials = 200;
  std::uint64_t seed = 1;
  unsigned threads = 1;
};

struct ThetaFractionResult {
  /// Fraction of slot-uniform samples that are members.
  Proportion unweighted;
  /// Vandermonde-squared importance-weighted fraction (targets the
  /// Lebesgue-uniform law on the product of Omega sets).
  double weighted = 0.0;
  /// Effective sample size of the importance weights.
  double ess = 0.0;
  bool any_norm_violation = false;
};

ThetaFractionResult theta_fraction(const StepFunctionSpec& h1, const StepFunctionSpec& h2,
                                   const ThetaFractionConfig& cfg);

/// Empirical spectral measure of U diag(q_alpha) U* + V diag(q_beta) V*,
/// q the quantiles at (i + 1/2)/k.
Measure sum_spectrum_experiment(const Measure& alpha, const Measure& beta, std::size_t k, std::uint64_t seed);
/// Sorted eigenvalues behind sum_spectrum_experiment.
std::vector<double> sum_spectrum_eigenvalues(const Measure& alpha, const Measure& beta, std::size_t k,
                                             std::uint64_t seed);

/// (2/k^2) sum_{i<j} log|l_i - l_j| + 3/4 + log(2 pi)/2; -infinity when two
/// values agree within 1e-14.
double empirical_chi(std::span<const double> eigenvalues);

/// log C_k in lambda(Omega) = C_k int_Box prod_{i<j} (l_j - l_i)^2 dl, for
/// Hermitian matrices under the Hilbert-Schmidt metric and ordered
/// eigenvalues.
struct FlagConstant {
  std::size_t k = 0;
  /// From the Gaussian integral (2 pi)^{k^2/2} divided by the ordered
  /// eigenvalue integral, evaluated as a Hankel determinant of Gaussian
  /// moments (k <= 8).
  double log_calibrated = 0.0;
  /// (k(k-1)/2) log(2 pi) - sum_{j<k} log j!.
  double log_closed_form = 0.0;
  /// |C_calibrated / C_closed - 1|; 0 when k > 8.
  double relative_error = 0.0;
};
FlagConstant flag_constant(std::size_t k);
/// Largest relative error of flag_constant over k = 1..8.
double flag_constant_self_test();

struct OmegaVolumeConfig {
  std::size_t k = 16;
  std::size_t mc_samples = 100'000;
  std::uint64_t seed = 1;
  /// Piecewise-constant proposal resolution per slot.
  std::size_t subcells = 32;
  std::size_t streams = 16;
  unsigned threads = 1;
};

struct OmegaVolumeResult {
  /// k^{-2} log lambda(Omega) + log(k)/2.
  double value = 0.0;
  double log_volume = 0.0;
  double log_ck = 0.0;
  double log_box_integral = 0.0;
  double ess = 0.0;
  std::size_t samples = 0;
};

/// Importance sampling over the slot box with a per-slot proposal tilted by
/// the Vandermonde factor against the other slot centres.
OmegaVolumeResult estimate_log_volume_omega(const StepFunctionSpec& h, const OmegaVolumeConfig& cfg);

struct SumContainmentConfig {
  std::size_t k = 64;
  std::size_t N1 = 3;
  double eps1 = 0.1;
  /// Theta(k) filter; 0 selects N = 2 N1 and eps = eps1 / (4 (2R)^N1).
  std::size_t N = 0;
  double eps = 0.0;
  std::size_t trials = 200;
  std::uint64_t seed = 1;
  unsigned threads = 1;
};

struct SumContainmentResult {
  /// Among Theta(k) members, the share whose sum lies in the Gamma set of
  /// X + Y. Empty when no sample passed the filter.
  Proportion pass;
  std::size_t filtered = 0;
  std::size_t trials = 0;
  bool empty_filter = false;
  std::size_t N = 0;
  double eps = 0.0;
  double R = 0.0;
  /// Moments m_1..m_N1 of X + Y from the free convolution.
  std::vector<double> sum_moments;
};

SumContainmentResult check_sum_containment(const StepFunctionSpec& h1, const StepFunctionSpec& h2,
                                           const SumContainmentConfig& cfg);

}  // namespace fepi
