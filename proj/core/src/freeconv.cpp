#include "fepi/freeconv.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "fepi/error.hpp"
#include "fepi/parallel.hpp"

namespace fepi {

namespace {

struct MapValue {
  Complex phi;   // T(omega1) - omega1
  Complex dphi;  // T'(omega1) - 1
  Complex omega2;
};

bool finite(Complex c) { return std::isfinite(c.real()) && std::isfinite(c.imag()); }

// T(omega1) = z + h_b(z + h_a(omega1)) with h(w) = 1/G(w) - w.
MapValue evaluate_map(const CauchyKernel& alpha, const CauchyKernel& beta, Complex z, Complex omega1) {
  const auto va = alpha.evaluate(omega1);
  const Complex fa = 1.0 / va.g;
  Complex omega2 = z + fa - omega1;
  if (omega2.imag() < z.imag()) omega2.imag(z.imag());
  const auto vb = beta.evaluate(omega2);
  const Complex fb = 1.0 / vb.g;
  const Complex next = z + fb - omega2;
  const Complex dha = -va.dg * fa * fa - 1.0;
  const Complex dhb = -vb.dg * fb * fb - 1.0;
  return {next - omega1, dhb * dha - 1.0, omega2};
}

double residual_of(const MapValue& v, Complex omega1) { return std::abs(v.phi) / (1.0 + std::abs(omega1)); }

}  // namespace

SubordinationState solve_subordination(const CauchyKernel& alpha, const CauchyKernel& beta, Complex z,
                                       Complex omega1_start, const FreeConvolutionConfig& cfg) {
  Complex omega1 = omega1_start;
  if (!finite(omega1)) omega1 = z;
  if (omega1.imag() < z.imag()) omega1.imag(z.imag());
  MapValue current = evaluate_map(alpha, beta, z, omega1);
  SubordinationState state;
  for (int it = 0; it < cfg.max_iterations; ++it) {
    state.iterations = it;
    const double res = residual_of(current, omega1);
    if (res <= cfg.tol) {
      state.converged = true;
      break;
    }
    bool accepted = false;
    Complex candidate = omega1 - current.phi / current.dphi;
    if (finite(candidate)) {
      if (candidate.imag() < z.imag()) candidate.imag(z.imag());
      const MapValue trial = evaluate_map(alpha, beta, z, candidate);
      if (finite(trial.phi) && std::abs(trial.phi) < std::abs(current.phi)) {
        omega1 = candidate;
        current = trial;
        accepted = true;
      }
    }
    if (!accepted) {
      omega1 += cfg.damping * current.phi;
      current = evaluate_map(alpha, beta, z, omega1);
    }
    state.iterations = it + 1;
  }
  state.omega1 = omega1;
  state.omega2 = current.omega2;
  state.residual = residual_of(current, omega1);
  if (state.residual <= cfg.tol) state.converged = true;
  return state;
}

FreeConvolutionResult free_convolve(const Measure& alpha, const Measure& beta,
                                    const FreeConvolutionConfig& cfg) {
  require(cfg.tol >= 1e-12 && cfg.tol <= 1e-4, ErrorKind::parameter,
          "free convolution tolerance must lie in [1e-12, 1e-4]");
  require(cfg.damping > 0.0 && cfg.damping <= 1.0, ErrorKind::parameter, "damping must lie in (0, 1]");
  require(cfg.max_iterations >= 1, ErrorKind::parameter, "max_iterations must be >= 1");
  cfg.grid.validate(true);

  if (const auto c = alpha.point_mass_location()) {
    FreeConvolutionResult r{affine_pushforward(beta, 1.0, *c)};
    r.translation_shortcut = true;
    return r;
  }
  if (const auto c = beta.point_mass_location()) {
    FreeConvolutionResult r{affine_pushforward(alpha, 1.0, *c)};
    r.translation_shortcut = true;
    return r;
  }

  const double lo = alpha.lo() + beta.lo();
  const double hi = alpha.hi() + beta.hi();
  const std::size_t cells = cfg.grid.cells;
  const std::size_t nodes = cells + 1;
  const double h = (hi - lo) / static_cast<double>(cells);
  const double eta = cfg.eta > 0.0 ? cfg.eta : 1e-9 * (hi - lo);
  const CauchyKernel ka(alpha);
  const CauchyKernel kb(beta);

  std::vector<double> cdf(nodes, 0.0);
  std::vector<double> residual(nodes, 0.0);
  std::vector<char> converged(nodes, 0);
  std::vector<int> iterations(nodes, 0);

  const std::size_t blocks = std::clamp<std::size_t>(cfg.blocks, 1, nodes);
  const double start_height = std::max(1.0, hi - lo);

  auto record = [&](std::size_t j, Complex z, const SubordinationState& s) {
    const double im_sum = ka.log_potential_imag(s.omega1) + kb.log_potential_imag(s.omega2);
    const Complex f = s.omega1 + s.omega2 - z;
    const double arg_f = std::atan2(f.imag(), f.real());
    cdf[j] = 1.0 - (im_sum - arg_f) / std::numbers::pi;
    residual[j] = s.residual;
    converged[j] = s.converged ? 1 : 0;
    iterations[j] += s.iterations;
  };

  // Follows the solution at x down from a high evaluation line to eta.
  auto descend = [&](double x, double factor, int& spent) {
    Complex omega{x, start_height};
    SubordinationState s;
    for (double height = start_height;; height *= factor) {
      const double level = std::max(height, eta);
      s = solve_subordination(ka, kb, Complex{x, level}, omega, cfg);
      spent += s.iterations;
      omega = s.omega1;
      if (level == eta) break;
    }
    return s;
  };

  parallel_for(blocks, cfg.threads, [&](std::size_t b) {
    const std::size_t j0 = b * nodes / blocks;
    const std::size_t j1 = (b + 1) * nodes / blocks;
    if (j0 >= j1) return;
    const double x0 = lo + static_cast<double>(j0) * h;
    SubordinationState s = descend(x0, 0.1, iterations[j0]);
    iterations[j0] -= s.iterations;
    record(j0, Complex{x0, eta}, s);
    Complex previous = s.omega1;
    Complex before_previous = s.omega1;
    for (std::size_t j = j0 + 1; j < j1; ++j) {
      const Complex z{lo + static_cast<double>(j) * h, eta};
      Complex guess = j >= j0 + 2 ? 2.0 * previous - before_previous : previous;
      if (!(guess.imag() >= eta)) guess = previous;
      s = solve_subordination(ka, kb, z, guess, cfg);
      if (!s.converged) {
        // Continuation fails next to atoms and gaps of the output; retry
        // from above with a slower descent.
        int spent = 0;
        const SubordinationState t = descend(z.real(), 0.5, spent);
        iterations[j] += spent;
        if (t.residual < s.residual) s = t;
      }
      record(j, z, s);
      before_previous = previous;
      previous = s.omega1;
    }
  });

  FreeConvolutionResult result{Measure(lo, hi, std::vector<double>(cells, 0.0), {{0.5 * (lo + hi), 1.0}})};
  result.eta = eta;
  result.evaluated_points = nodes;
  for (std::size_t j = 0; j < nodes; ++j) {
    result.worst_residual = std::max(result.worst_residual, residual[j]);
    if (!converged[j]) ++result.unconverged_points;
    result.total_iterations += static_cast<std::size_t>(iterations[j]);
  }
  if (static_cast<double>(result.unconverged_points) > 0.01 * static_cast<double>(nodes)) {
    std::ostringstream msg;
    msg << "subordination fixed point did not converge at " << result.unconverged_points << " of "
        << nodes << " points (worst residual " << result.worst_residual << ")";
    throw Error(ErrorKind::convergence, msg.str());
  }

  std::vector<double> density(cells);
  double raw = 0.0;
  for (std::size_t i = 0; i < cells; ++i) {
    const double mass = std::max(0.0, cdf[i + 1] - cdf[i]);
    density[i] = mass / h;
    raw += mass;
  }
  if (!(raw >= 0.9 && raw <= 1.1)) {
    std::ostringstream msg;
    msg << "free convolution recovered mass " << raw << " outside [0.9, 1.1]";
    throw Error(ErrorKind::inversion_quality, msg.str());
  }
  result.raw_mass = raw;
  result.renormalization = 1.0 / raw;
  result.measure = Measure(lo, hi, std::move(density));
  return result;
}

double free_cumulant(const Measure& mu, int order) {
  require(order >= 1 && order <= 4, ErrorKind::parameter, "free cumulant order must lie in 1..4");
  const double m1 = moment(mu, 1);
  if (order == 1) return m1;
  const double m2 = moment(mu, 2);
  if (order == 2) return m2 - m1 * m1;
  const double m3 = moment(mu, 3);
  if (order == 3) return m3 - 3.0 * m1 * m2 + 2.0 * m1 * m1 * m1;
  const double m4 = moment(mu, 4);
  return m4 - 4.0 * m1 * m3 - 2.0 * m2 * m2 + 10.0 * m1 * m1 * m2 - 5.0 * m1 * m1 * m1 * m1;
}

}  // namespace fepi
