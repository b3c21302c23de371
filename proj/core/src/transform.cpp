#include "fepi/transform.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "fepi/error.hpp"

namespace fepi {

namespace {

inline Complex fast_log(Complex w) {
  return {0.5 * std::log(std::norm(w)), std::atan2(w.imag(), w.real())};
}

}  // namespace

CauchyKernel::CauchyKernel(const Measure& mu) {
  const auto rho = mu.density();
  const std::size_t n = rho.size();
  for (std::size_t j = 0; j <= n; ++j) {
    const double right = j < n ? rho[j] : 0.0;
    const double left = j > 0 ? rho[j - 1] : 0.0;
    const double d = right - left;
    if (d != 0.0) {
      nodes_.push_back(mu.node(j));
      jumps_.push_back(d);
    }
  }
  for (const Atom& a : mu.atoms()) {
    atom_loc_.push_back(a.location);
    atom_w_.push_back(a.weight);
  }
}

CauchyKernel::Value CauchyKernel::evaluate_upper(Complex z) const {
  Complex g{0.0, 0.0};
  Complex dg{0.0, 0.0};
  for (std::size_t j = 0; j < nodes_.size(); ++j) {
    const Complex w = z - nodes_[j];
    g += jumps_[j] * fast_log(w);
    dg += jumps_[j] * (std::conj(w) / std::norm(w));
  }
  for (std::size_t a = 0; a < atom_loc_.size(); ++a) {
    const Complex inv = 1.0 / (z - atom_loc_[a]);
    g += atom_w_[a] * inv;
    dg -= atom_w_[a] * inv * inv;
  }
  return {g, dg};
}

CauchyKernel::Value CauchyKernel::evaluate(Complex z) const {
  if (z.imag() >= 0.0) return evaluate_upper(z);
  const auto v = evaluate_upper(std::conj(z));
  return {std::conj(v.g), std::conj(v.dg)};
}

double CauchyKernel::log_potential_imag(Complex z) const {
  double im = 0.0;
  for (std::size_t j = 0; j < nodes_.size(); ++j) {
    const Complex w = z - nodes_[j];
    const Complex l = fast_log(w);
    // Im[(w) log(w)] = Re w * arg w + Im w * log|w|
    im += jumps_[j] * (w.real() * l.imag() + w.imag() * l.real());
  }
  for (std::size_t a = 0; a < atom_loc_.size(); ++a) {
    const Complex w = z - atom_loc_[a];
    im += atom_w_[a] * std::atan2(w.imag(), w.real());
  }
  return im;
}

Complex cauchy_transform(const Measure& mu, Complex z) {
  require(z.imag() > 0.0, ErrorKind::domain, "Cauchy transform needs Im z > 0");
  return CauchyKernel(mu).evaluate(z).g;
}

CauchyEvaluation evaluate_cauchy(const Measure& mu, Complex z) {
  return {z, cauchy_transform(mu, z)};
}

double default_inversion_eta(double lo, double hi, std::size_t cells) {
  return 4.0 * (hi - lo) / static_cast<double>(cells);
}

InversionResult stieltjes_invert(const std::function<Complex(Complex)>& g, double lo, double hi,
                                 std::size_t cells, double eta) {
  require(eta > 0.0, ErrorKind::parameter, "inversion offset eta must be positive");
  require(std::isfinite(lo) && std::isfinite(hi) && hi > lo && cells >= 2, ErrorKind::parameter,
          "inversion needs a valid window");
  const double h = (hi - lo) / static_cast<double>(cells);
  std::vector<double> density(cells);
  double mass = 0.0;
  for (std::size_t i = 0; i < cells; ++i) {
    const double x = lo + (static_cast<double>(i) + 0.5) * h;
    const double value = -g(Complex{x, eta}).imag() / std::numbers::pi;
    density[i] = std::isfinite(value) ? std::max(0.0, value) : 0.0;
    mass += density[i] * h;
  }
  if (!(mass >= 0.9 && mass <= 1.1)) {
    std::ostringstream msg;
    msg << "recovered mass " << mass << " before renormalization is outside [0.9, 1.1]";
    throw Error(ErrorKind::inversion_quality, msg.str());
  }
  return {Measure(lo, hi, std::move(density)), mass, 1.0 / mass};
}

Complex r_transform(const Measure& mu, Complex w, const NewtonConfig& cfg) {
  require(std::abs(w) > 0.0, ErrorKind::parameter, "R-transform needs w != 0");
  const CauchyKernel kernel(mu);
  Complex z = 1.0 / w + mu.mean();
  for (int it = 0; it < cfg.max_iterations; ++it) {
    const auto v = kernel.evaluate(z);
    const Complex residual = v.g - w;
    if (std::abs(residual) <= cfg.tolerance * std::abs(w)) return z - 1.0 / w;
    z -= residual / v.dg;
    require(std::isfinite(z.real()) && std::isfinite(z.imag()), ErrorKind::convergence,
            "R-transform Newton iteration diverged");
  }
  throw Error(ErrorKind::convergence, "R-transform Newton iteration did not converge in " +
                                          std::to_string(cfg.max_iterations) + " steps");
}

}  // namespace fepi
