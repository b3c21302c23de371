#pragma once

#include <map>
#include <optional>
#include <string>

#include "fepi/geometry.hpp"

namespace fepi {

enum class Verdict { holds, violated, inconclusive };
std::string to_string(Verdict verdict);

/// Classification of a measured deficit: holds when deficit >= -ci, violated
/// when deficit < -3 ci, inconclusive in between.
Verdict classify(double deficit, double ci_halfwidth);

/// Empirical precondition on lambda(Theta) / (lambda(A) lambda(B)).
struct GateReport {
  bool applied = false;
  double measured = 1.0;
  double threshold = 0.0;
  double ci_halfwidth = 0.0;
  bool passed = true;
  /// The measured fraction is within its own interval of the threshold.
  bool tie = false;
  std::string rule;
};

/// Gate decision: an exact fraction (zero interval) passes iff it reaches
/// the threshold; otherwise it passes iff the lower end of its 99% interval
/// clears the threshold, and is a tie when the interval covers it.
GateReport evaluate_gate(double measured, double stderr_, double threshold, std::string rule);

struct CheckContext {
  std::size_t n = 0;
  std::optional<double> rho;
  std::optional<double> delta;
  std::optional<double> gamma;
  double c = 0.01;
  double C = 3.0;
  std::optional<double> c_lemma;
  std::optional<double> c1;
};

struct CheckReport {
  std::string check;
  double lhs = 0.0;
  double rhs = 0.0;
  double deficit = 0.0;
  double ci_halfwidth = 0.0;
  Verdict verdict = Verdict::inconclusive;
  /// The measured inequality itself (deficit >= -ci), whatever the gate says.
  bool conclusion_holds = false;
  GateReport gate;
  CheckContext context;
  /// Supporting numbers (volumes, fractions, grid resolution, ...).
  std::map<std::string, double> details;
};

struct CheckConfig {
  RestrictedSumConfig sampling{};
  /// Theorem constant in the lambda(Theta) gate.
  double c = 0.01;
  /// Multiplier in the corollary and remark factors.
  double C = 3.0;
  /// Upper limit accepted for delta in the corollary check.
  double c_corollary = 0.5;
};

/// lambda(A +_Theta B)^(2/n) >= lambda(A)^(2/n) + lambda(B)^(2/n), gated on
/// lambda(Theta) >= (1 - c min(rho sqrt(n), 1)) lambda(A) lambda(B).
CheckReport check_theorem12(const SetSpec& a, const SetSpec& b, const ThetaSpec& theta,
                            const CheckConfig& cfg = {});

/// Same inequality with the right side scaled by (1 - C delta / n), gated on
/// lambda(Theta) >= (1 - delta) lambda(A) lambda(B).
CheckReport check_corollary15(const SetSpec& a, const SetSpec& b, const ThetaSpec& theta, double delta,
                              const CheckConfig& cfg = {});

/// lambda(A +_Theta B) >= (1 - delta) lambda(A) with delta measured as
/// 1 - lambda(Theta) / (lambda(A) lambda(B)). Requires lambda(A) >= lambda(B).
CheckReport fubini_lower_bound(const SetSpec& a, const SetSpec& b, const ThetaSpec& theta,
                               const CheckConfig& cfg = {});

/// lambda({(x, y) in A x B : x + y in C}) against the same quantity for the
/// centred balls of equal volumes. Holds when lhs <= rhs + ci.
CheckReport bll_symmetrization_check(const SetSpec& a, const SetSpec& b, const SetSpec& c,
                                     const CheckConfig& cfg = {});

/// Experimental: right side scaled by (1 - C rho sqrt(log(1 + 1/gamma) / n)),
/// gated on lambda(Theta) >= gamma lambda(A) lambda(B).
CheckReport check_remark16(const SetSpec& a, const SetSpec& b, const ThetaSpec& theta, double gamma,
                           const CheckConfig& cfg = {});

/// The factor 1 - C rho sqrt(log(1 + 1/gamma) / n).
double remark16_factor(double C, double rho, double gamma, std::size_t n);

struct BallExample {
  double theta_fraction = 0.5;
  double sum_radius = 0.0;
  double equality_gap = 0.0;
};

/// A = B^n, B = rho B^n, Theta = {<x, y> <= 0}: closed forms.
BallExample ball_example_exact(double rho, std::size_t n);

}  // namespace fepi
