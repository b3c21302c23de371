#include "fepi/freeentropy.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "fepi/error.hpp"

namespace fepi {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Q'' = log|y|, Q(0) = 0.
double q_antiderivative(double y) {
  if (y == 0.0) return 0.0;
  return 0.5 * y * y * std::log(std::abs(y)) - 0.75 * y * y;
}

// int_0^1 int_0^1 log|m + u - v| du dv for integer m >= 0.
double unit_cell_kernel(std::size_t m) {
  if (m < 16) {
    const double y = static_cast<double>(m);
    return q_antiderivative(y + 1.0) - 2.0 * q_antiderivative(y) + q_antiderivative(y - 1.0);
  }
  const double y = static_cast<double>(m);
  const double y2 = 1.0 / (y * y);
  return std::log(y) - y2 * (1.0 / 12.0 + y2 * (1.0 / 60.0 + y2 * (1.0 / 168.0 + y2 / 360.0)));
}

// Exact log-energy of a piecewise-constant density with cell width h.
double piecewise_energy(std::span<const double> rho, double h) {
  std::size_t first = 0;
  std::size_t last = rho.size();
  while (first < last && rho[first] == 0.0) ++first;
  while (last > first && rho[last - 1] == 0.0) --last;
  const std::size_t n = last - first;
  const double* p = rho.data() + first;
  const double log_h = std::log(h);
  double total = 0.0;
  for (std::size_t m = 0; m < n; ++m) {
    double corr = 0.0;
    for (std::size_t i = 0; i + m < n; ++i) corr += p[i] * p[i + m];
    const double weight = m == 0 ? 1.0 : 2.0;
    total += weight * corr * (log_h + unit_cell_kernel(m));
  }
  return total * h * h;
}

}  // namespace

double EntropyValue::power() const noexcept { return divergent ? 0.0 : std::exp(2.0 * value); }

double chi_constant() noexcept { return 0.75 + 0.5 * std::log(2.0 * std::numbers::pi); }

EntropyValue log_energy(const Measure& mu) {
  if (mu.has_atoms()) return {-kInf, true, 0.0};
  const auto rho = mu.density();
  const double h = mu.cell_width();
  const double fine = piecewise_energy(rho, h);
  double coarse_error = 0.0;
  if (rho.size() >= 4 && rho.size() % 2 == 0) {
    std::vector<double> coarse(rho.size() / 2);
    for (std::size_t i = 0; i < coarse.size(); ++i) coarse[i] = 0.5 * (rho[2 * i] + rho[2 * i + 1]);
    coarse_error = std::abs(fine - piecewise_energy(coarse, 2.0 * h));
  }
  return {fine, false, coarse_error};
}

EntropyValue chi(const Measure& mu) {
  EntropyValue e = log_energy(mu);
  if (!e.divergent) e.value += chi_constant();
  return e;
}

EntropyReport epi_deficit(const Measure& alpha, const Measure& beta, const FreeConvolutionConfig& cfg) {
  EntropyReport r{.convolution = free_convolve(alpha, beta, cfg)};
  const EntropyValue a = chi(alpha);
  const EntropyValue b = chi(beta);
  const EntropyValue s = chi(r.convolution.measure);
  r.chi_alpha = a.value;
  r.chi_beta = b.value;
  r.chi_sum = s.value;
  r.alpha_divergent = a.divergent;
  r.beta_divergent = b.divergent;
  r.sum_divergent = s.divergent;
  r.power_alpha = a.power();
  r.power_beta = b.power();
  r.power_sum = s.power();
  r.deficit = r.power_sum - r.power_alpha - r.power_beta;
  // Propagate each chi error through exp(2 chi).
  r.quadrature_error_estimate =
      2.0 * (r.power_alpha * a.error_estimate + r.power_beta * b.error_estimate +
             r.power_sum * s.error_estimate);
  return r;
}

double free_fisher(const Measure& mu) {
  require(!mu.has_atoms(), ErrorKind::domain, "free Fisher information needs an atom-free measure");
  double cube = 0.0;
  for (double p : mu.density()) cube += p * p * p;
  return 4.0 * std::numbers::pi * std::numbers::pi / 3.0 * cube * mu.cell_width();
}

double stam_deficit(const Measure& alpha, const Measure& beta, const FreeConvolutionConfig& cfg) {
  const double fa = free_fisher(alpha);
  const double fb = free_fisher(beta);
  const double fs = free_fisher(free_convolve(alpha, beta, cfg).measure);
  return 1.0 / fs - 1.0 / fa - 1.0 / fb;
}

}  // namespace fepi
