#include "fepi/lemma.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "fepi/error.hpp"

namespace fepi {

namespace {

using Kronrod = boost::math::quadrature::gauss_kronrod<double, 61>;

struct Integral {
  double value = 0.0;
  double error = 0.0;
};

// Tanh-sinh over [a, b], split at the breakpoints that fall inside. The
// integrands vanish like a power (n-1)/2 at their zeros and peak sharply at
// v = 0 for large n.
template <class F>
Integral integrate(F f, double a, double b, const std::vector<double>& breaks) {
  Integral out;
  if (!(b > a)) return out;
  std::vector<double> nodes{a};
  for (double x : breaks)
    if (x > a && x < b) nodes.push_back(x);
  nodes.push_back(b);
  std::sort(nodes.begin(), nodes.end());
  boost::math::quadrature::tanh_sinh<double> rule;
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
    double err = 0.0;
    out.value += rule.integrate(f, nodes[i], nodes[i + 1], 1e-12, &err);
    out.error += err;
  }
  return out;
}

std::vector<double> breakpoints(std::size_t n) {
  const double w = std::min(1.0, 8.0 / std::sqrt(static_cast<double>(n)));
  return {-w, -w / 8.0, 0.0, w / 8.0, w};
}

// int_{-1}^{1} (1 - v^2)^{(n-1)/2} dv = |B^n| / |B^{n-1}|.
double log_ball_ratio(std::size_t n) {
  const double m = static_cast<double>(n);
  return 0.5 * std::log(std::numbers::pi) + std::lgamma(0.5 * (m + 1.0)) - std::lgamma(0.5 * m + 1.0);
}

void validate(std::size_t n, double rho) {
  require(n >= 2, ErrorKind::parameter, "cap fraction needs n >= 2");
  require(rho > 0.0 && rho <= 1.0, ErrorKind::parameter, "rho must lie in (0, 1]");
}

}  // namespace

double normal_cdf(double x) noexcept { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

CapFraction cap_fraction(std::size_t n, double rho, double r0) {
  validate(n, rho);
  require(r0 > 0.0 && r0 <= 1.0, ErrorKind::parameter, "r0 must lie in (0, 1]");
  const double half = 0.5 * (static_cast<double>(n) - 1.0);
  const double big = std::sqrt(1.0 + rho * rho);
  const double norm = std::exp(log_ball_ratio(n));
  const auto breaks = breakpoints(n);

  CapFraction out;
  out.s = (1.0 - r0 * r0) / (2.0 * r0);
  out.t = big - r0;

  // Work in v = u / rho so that both integrands are bounded by 1.
  auto inner = [half](double v) {
    const double q = 1.0 - v * v;
    return q <= 0.0 ? 0.0 : std::exp(half * std::log(q));
  };
  auto outer = [&](double v) {
    const double y = r0 + rho * v;
    const double q = (1.0 + rho * rho - y * y) / (rho * rho);
    return q <= 0.0 ? 0.0 : std::exp(half * std::log(q));
  };

  const Integral full = integrate(inner, -1.0, 1.0, breaks);
  out.normalization_error = std::abs(full.value / norm - 1.0);

  double s = out.s;
  double t = out.t;
  if (s >= rho) {
    out.clamped = true;
    out.value = 1.0;
    out.quadrature_error = full.error / norm;
    return out;
  }
  if (s < -rho) {
    out.clamped = true;
    s = -rho;
  }
  t = std::clamp(t, s, rho);
  const Integral first = integrate(inner, -1.0, s / rho, breaks);
  // The outer integrand can fall from its peak to zero within a thin layer
  // above s / rho; geometric breakpoints resolve it.
  std::vector<double> layer;
  for (int j = 1; j <= 24; ++j) layer.push_back(s / rho + (t - s) / rho * std::ldexp(1.0, -j));
  const Integral second = integrate(outer, s / rho, t / rho, layer);
  out.value = std::clamp((first.value + second.value) / norm, 0.0, 1.0);
  out.quadrature_error = (first.error + second.error) / norm;
  return out;
}

double first_integral_fraction(std::size_t n, double rho, double s) {
  validate(n, rho);
  const double half = 0.5 * (static_cast<double>(n) - 1.0);
  const double upper = std::clamp(s / rho, -1.0, 1.0);
  auto inner = [half](double v) {
    const double q = 1.0 - v * v;
    return q <= 0.0 ? 0.0 : std::exp(half * std::log(q));
  };
  const Integral part = integrate(inner, -1.0, upper, breakpoints(n));
  return part.value / std::exp(log_ball_ratio(n));
}

double sum_norm_theta_fraction(std::size_t n, double rho) {
  validate(n, rho);
  const double m = static_cast<double>(n);
  // Below r_star the small ball sits inside the big one.
  const double r_star = std::sqrt(rho * rho + 1.0) - rho;
  auto integrand = [&](double r) {
    return m * std::exp((m - 1.0) * std::log(r)) * cap_fraction(n, rho, r).value;
  };
  double err = 0.0;
  const double tail = Kronrod::integrate(integrand, r_star, 1.0, 12, 1e-10, &err);
  return std::exp(m * std::log(r_star)) + tail;
}

Lemma13Result check_lemma13(std::size_t n, double rho, std::size_t grid_r0) {
  validate(n, rho);
  require(grid_r0 >= 2, ErrorKind::parameter, "grid_r0 must be >= 2");
  const double m = static_cast<double>(n);
  Lemma13Result out;
  out.tau = 0.5 * std::min(rho * std::sqrt(m), 1.0);
  const double r_lo = 1.0 - out.tau / m;
  double c1 = 1.0;
  double quad_err = 0.0;
  for (std::size_t i = 0; i < grid_r0; ++i) {
    const double r0 = r_lo + (1.0 - r_lo) * static_cast<double>(i) / static_cast<double>(grid_r0 - 1);
    const CapFraction cap = cap_fraction(n, rho, r0);
    if (1.0 - cap.value < c1) {
      c1 = 1.0 - cap.value;
      out.argmin_r0 = r0;
    }
    quad_err = std::max(quad_err, cap.quadrature_error);
  }
  out.c1_estimate = c1;
  const double shell = std::exp(m * std::log1p(-out.tau / m));
  out.theta_bound = 1.0 - shell * c1;
  out.implied_c = shell * c1 / std::min(rho * std::sqrt(m), 1.0);

  CheckReport& r = out.report;
  r.check = "lemma13";
  r.lhs = 1.0;
  r.rhs = out.theta_bound;
  r.deficit = r.lhs - r.rhs;
  r.ci_halfwidth = shell * quad_err;
  // The claim is strict: some c > 0 exists.
  r.verdict = r.deficit > r.ci_halfwidth ? Verdict::holds : Verdict::inconclusive;
  r.conclusion_holds = r.verdict == Verdict::holds;
  r.context.n = n;
  r.context.rho = rho;
  r.context.c_lemma = out.implied_c;
  r.context.c1 = c1;
  r.details["tau"] = out.tau;
  r.details["argmin_r0"] = out.argmin_r0;
  r.details["grid_r0"] = static_cast<double>(grid_r0);
  r.details["theta_bound"] = out.theta_bound;
  return out;
}

}  // namespace fepi
