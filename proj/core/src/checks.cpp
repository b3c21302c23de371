#include "fepi/checks.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "fepi/error.hpp"
#include "fepi/parallel.hpp"

namespace fepi {

namespace {

struct Powered {
  double value = 0.0;
  double ci = 0.0;
};

// v^p with the image of the interval [v - ci, v + ci].
Powered power_with_ci(double v, double ci, double p) {
  const double center = std::pow(v, p);
  const double up = std::pow(v + ci, p) - center;
  const double down = center - std::pow(std::max(v - ci, 0.0), p);
  return {center, std::max(up, down)};
}

double rho_of(const VolumeEstimate& va, const VolumeEstimate& vb, std::size_t n) {
  const double r = std::pow(vb.value / va.value, 1.0 / static_cast<double>(n));
  return std::min(r, 1.0 / r);
}

void fill_sum_details(CheckReport& report, const RestrictedSumResult& m) {
  report.details["theta_fraction"] = m.theta_fraction;
  report.details["theta_fraction_stderr"] = m.fraction_stderr;
  report.details["theta_volume"] = m.theta_volume.value;
  report.details["sum_volume"] = m.sum_volume.value;
  report.details["sum_volume_interior"] = m.sum_interior;
  report.details["sum_volume_marked"] = m.sum_marked;
  report.details["grid_cells_per_axis"] = static_cast<double>(m.grid_cells_per_axis);
  report.details["volume_a"] = m.volume_a.value;
  report.details["volume_b"] = m.volume_b.value;
  report.details["pair_samples"] = static_cast<double>(m.theta_volume.samples);
}

void finish(CheckReport& report) {
  report.deficit = report.lhs - report.rhs;
  report.conclusion_holds = report.deficit >= -report.ci_halfwidth;
  const bool gate_ok = !report.gate.applied || (report.gate.passed && !report.gate.tie);
  report.verdict = gate_ok ? classify(report.deficit, report.ci_halfwidth) : Verdict::inconclusive;
}

// lambda(A+_Theta B)^(2/n) against factor * (lambda(A)^(2/n) + lambda(B)^(2/n)).
CheckReport sum_power_check(std::string name, const SetSpec& a, const SetSpec& b, const ThetaSpec& theta,
                            const CheckConfig& cfg, const RestrictedSumResult& m, double factor) {
  const std::size_t n = a.n;
  const double p = 2.0 / static_cast<double>(n);
  CheckReport report;
  report.check = std::move(name);
  const auto lhs = power_with_ci(m.sum_volume.value, kZ99 * m.sum_volume.std_error, p);
  const auto pa = power_with_ci(m.volume_a.value, kZ99 * m.volume_a.std_error, p);
  const auto pb = power_with_ci(m.volume_b.value, kZ99 * m.volume_b.std_error, p);
  report.lhs = lhs.value;
  report.rhs = factor * (pa.value + pb.value);
  report.ci_halfwidth = lhs.ci + std::abs(factor) * (pa.ci + pb.ci);
  report.context.n = n;
  report.context.rho = rho_of(m.volume_a, m.volume_b, n);
  report.context.c = cfg.c;
  report.context.C = cfg.C;
  fill_sum_details(report, m);
  report.details["rhs_factor"] = factor;
  (void)theta;
  (void)b;
  return report;
}

void require_same_dimension(const SetSpec& a, const SetSpec& b) {
  a.validate();
  b.validate();
  require(a.n == b.n, ErrorKind::parameter, "sets must share a dimension");
}

}  // namespace

std::string to_string(Verdict verdict) {
  switch (verdict) {
    case Verdict::holds: return "holds";
    case Verdict::violated: return "violated";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "unknown";
}

Verdict classify(double deficit, double ci_halfwidth) {
  if (deficit >= -ci_halfwidth) return Verdict::holds;
  if (deficit < -3.0 * ci_halfwidth) return Verdict::violated;
  return Verdict::inconclusive;
}

GateReport evaluate_gate(double measured, double stderr_, double threshold, std::string rule) {
  GateReport g;
  g.applied = true;
  g.measured = measured;
  g.threshold = threshold;
  g.ci_halfwidth = kZ99 * stderr_;
  g.rule = std::move(rule);
  if (g.ci_halfwidth == 0.0) {
    g.passed = measured >= threshold;
    g.tie = false;
    return g;
  }
  g.tie = std::abs(measured - threshold) <= g.ci_halfwidth;
  g.passed = !g.tie && measured > threshold;
  return g;
}

CheckReport check_theorem12(const SetSpec& a, const SetSpec& b, const ThetaSpec& theta,
                            const CheckConfig& cfg) {
  require_same_dimension(a, b);
  require(cfg.c >= 0.0 && cfg.c <= 1.0, ErrorKind::parameter, "constant c must lie in [0, 1]");
  const auto m = restricted_sum_volume(a, b, theta, cfg.sampling);
  CheckReport report = sum_power_check("theorem12", a, b, theta, cfg, m, 1.0);
  const double n = static_cast<double>(a.n);
  const double threshold = 1.0 - cfg.c * std::min(*report.context.rho * std::sqrt(n), 1.0);
  report.gate = evaluate_gate(m.theta_fraction, m.fraction_stderr, threshold,
                              "lambda(Theta) >= (1 - c min(rho sqrt(n), 1)) lambda(A) lambda(B)");
  finish(report);
  return report;
}

CheckReport check_corollary15(const SetSpec& a, const SetSpec& b, const ThetaSpec& theta, double delta,
                              const CheckConfig& cfg) {
  require_same_dimension(a, b);
  require(std::isfinite(delta) && delta >= 0.0 && delta <= cfg.c_corollary, ErrorKind::parameter,
          "delta must lie in [0, c_corollary]");
  const auto m = restricted_sum_volume(a, b, theta, cfg.sampling);
  const double factor = 1.0 - cfg.C * delta / static_cast<double>(a.n);
  CheckReport report = sum_power_check("corollary15", a, b, theta, cfg, m, factor);
  report.context.delta = delta;
  report.gate = evaluate_gate(m.theta_fraction, m.fraction_stderr, 1.0 - delta,
                              "lambda(Theta) >= (1 - delta) lambda(A) lambda(B)");
  finish(report);
  return report;
}

CheckReport fubini_lower_bound(const SetSpec& a, const SetSpec& b, const ThetaSpec& theta,
                               const CheckConfig& cfg) {
  require_same_dimension(a, b);
  const auto m = restricted_sum_volume(a, b, theta, cfg.sampling);
  require(m.volume_a.value >= m.volume_b.value, ErrorKind::parameter,
          "the Fubini bound needs lambda(A) >= lambda(B)");
  CheckReport report;
  report.check = "fubini";
  report.lhs = m.sum_volume.value;
  report.rhs = m.theta_fraction * m.volume_a.value;
  report.ci_halfwidth = kZ99 * m.sum_volume.std_error +
                        kZ99 * std::hypot(m.fraction_stderr * m.volume_a.value,
                                          m.theta_fraction * m.volume_a.std_error);
  report.context.n = a.n;
  report.context.rho = rho_of(m.volume_a, m.volume_b, a.n);
  report.context.delta = 1.0 - m.theta_fraction;
  report.context.c = cfg.c;
  report.context.C = cfg.C;
  fill_sum_details(report, m);
  finish(report);
  return report;
}

CheckReport bll_symmetrization_check(const SetSpec& a, const SetSpec& b, const SetSpec& c,
                                     const CheckConfig& cfg) {
  require_same_dimension(a, b);
  require_same_dimension(a, c);
  const std::size_t n = a.n;
  require(n <= 4, ErrorKind::parameter, "the symmetrization check is limited to n <= 4");
  const auto& sampling = cfg.sampling;
  require(sampling.pair_samples >= 1 && sampling.streams >= 1, ErrorKind::parameter,
          "the symmetrization check needs samples and streams");

  const VolumeConfig vcfg{std::max<std::size_t>(sampling.pair_samples, 100'000), stream_seed(sampling.seed, ~2ULL)};
  const VolumeEstimate va = volume(a, vcfg);
  const VolumeEstimate vb = volume(b, vcfg);
  const VolumeEstimate vc = volume(c, vcfg);
  const double omega = unit_ball_volume(n);
  const double inv_n = 1.0 / static_cast<double>(n);
  const SetSpec sa = SetSpec::ball(n, std::pow(va.value / omega, inv_n));
  const SetSpec sb = SetSpec::ball(n, std::pow(vb.value / omega, inv_n));
  const SetSpec sc = SetSpec::ball(n, std::pow(vc.value / omega, inv_n));

  // Fraction of pairs with x + y in the third set, over streams.
  auto fraction = [&](const SetSpec& x_set, const SetSpec& y_set, const SetSpec& z_set, std::uint64_t salt) {
    std::vector<std::size_t> hits(sampling.streams, 0);
    const std::size_t per_stream = sampling.pair_samples / sampling.streams;
    const std::size_t extra = sampling.pair_samples % sampling.streams;
    parallel_for(sampling.streams, sampling.threads, [&](std::size_t s) {
      std::mt19937_64 engine(stream_seed(sampling.seed ^ salt, s));
      SetSampler px(x_set);
      SetSampler py(y_set);
      std::vector<double> x(n), y(n);
      const std::size_t count = per_stream + (s < extra ? 1 : 0);
      for (std::size_t i = 0; i < count; ++i) {
        px.draw(engine, x.data());
        py.draw(engine, y.data());
        for (std::size_t k = 0; k < n; ++k) x[k] += y[k];
        if (z_set.contains(x.data())) ++hits[s];
      }
    });
    std::size_t total = 0;
    for (std::size_t h : hits) total += h;
    return static_cast<double>(total) / static_cast<double>(sampling.pair_samples);
  };

  const double m = static_cast<double>(sampling.pair_samples);
  const double fl = fraction(a, b, c, 0x6c6873ULL);
  const double fr = fraction(sa, sb, sc, 0x726873ULL);
  // The symmetrized balls carry the same volumes.
  const double scale_l = va.value * vb.value;
  const double scale_r = scale_l;
  CheckReport report;
  report.check = "bll";
  report.lhs = scale_l * fl;
  report.rhs = scale_r * fr;
  const double se_l = scale_l * std::sqrt(fl * (1.0 - fl) / m);
  const double se_r = scale_r * std::sqrt(fr * (1.0 - fr) / m);
  // The inequality reads lhs <= rhs; the deficit is oriented so that a
  // nonnegative value supports it.
  report.ci_halfwidth = kZ99 * std::hypot(se_l, se_r);
  report.context.n = n;
  report.context.c = cfg.c;
  report.context.C = cfg.C;
  report.details["fraction_lhs"] = fl;
  report.details["fraction_rhs"] = fr;
  report.details["volume_a"] = va.value;
  report.details["volume_b"] = vb.value;
  report.details["volume_c"] = vc.value;
  report.details["pair_samples"] = m;
  report.deficit = report.rhs - report.lhs;
  report.conclusion_holds = report.deficit >= -report.ci_halfwidth;
  report.verdict = classify(report.deficit, report.ci_halfwidth);
  return report;
}

double remark16_factor(double C, double rho, double gamma, std::size_t n) {
  require(gamma > 0.0 && gamma < 1.0, ErrorKind::parameter, "gamma must lie in (0, 1)");
  return 1.0 - C * rho * std::sqrt(std::log1p(1.0 / gamma) / static_cast<double>(n));
}

CheckReport check_remark16(const SetSpec& a, const SetSpec& b, const ThetaSpec& theta, double gamma,
                           const CheckConfig& cfg) {
  require_same_dimension(a, b);
  require(gamma > 0.0 && gamma < 1.0, ErrorKind::parameter, "gamma must lie in (0, 1)");
  const auto m = restricted_sum_volume(a, b, theta, cfg.sampling);
  const double rho = rho_of(m.volume_a, m.volume_b, a.n);
  const double factor = remark16_factor(cfg.C, rho, gamma, a.n);
  CheckReport report = sum_power_check("remark16", a, b, theta, cfg, m, factor);
  report.context.gamma = gamma;
  report.gate = evaluate_gate(m.theta_fraction, m.fraction_stderr, gamma,
                              "lambda(Theta) >= gamma lambda(A) lambda(B)");
  finish(report);
  return report;
}

BallExample ball_example_exact(double rho, std::size_t n) {
  require(rho > 0.0 && rho < 1.0, ErrorKind::parameter, "rho must lie in (0, 1)");
  require(n >= 1, ErrorKind::parameter, "dimension must be >= 1");
  const double p = 2.0 / static_cast<double>(n);
  const double log_omega = log_unit_ball_volume(n);
  const double nn = static_cast<double>(n);
  const double radius = std::sqrt(1.0 + rho * rho);
  const double sum_power = std::exp(p * (log_omega + nn * std::log(radius)));
  const double a_power = std::exp(p * log_omega);
  const double b_power = std::exp(p * (log_omega + nn * std::log(rho)));
  return {0.5, radius, sum_power - a_power - b_power};
}

}  // namespace fepi
