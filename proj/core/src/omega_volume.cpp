#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include <Eigen/LU>

#include "fepi/error.hpp"
#include "fepi/microstates.hpp"
#include "fepi/parallel.hpp"

namespace fepi {

namespace {

constexpr std::size_t kCalibratedMax = 8;

// Ordered-eigenvalue Gaussian integral
//   int_{l_1 < ... < l_k} prod_{i<j} (l_j - l_i)^2 exp(-sum l^2 / 2) dl
// as det[m_{i+j}] with m the moments of exp(-x^2/2) (Heine's identity).
long double log_gaussian_eigen_integral(std::size_t k) {
  using Mat = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
  const auto n = static_cast<Eigen::Index>(k);
  std::vector<long double> m(2 * k, 0.0L);
  const long double root = std::sqrt(2.0L * std::numbers::pi_v<long double>);
  m[0] = root;
  for (std::size_t p = 2; p < m.size(); p += 2) m[p] = m[p - 2] * static_cast<long double>(p - 1);
  Mat h(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) h(i, j) = m[static_cast<std::size_t>(i + j)];
  return std::log(Eigen::PartialPivLU<Mat>(h).determinant());
}

}  // namespace

FlagConstant flag_constant(std::size_t k) {
  require(k >= 1, ErrorKind::parameter, "flag constant needs k >= 1");
  const double kk = static_cast<double>(k);
  const double log_2pi = std::log(2.0 * std::numbers::pi);
  FlagConstant c;
  c.k = k;
  c.log_closed_form = 0.5 * kk * (kk - 1.0) * log_2pi;
  for (std::size_t j = 2; j < k; ++j) c.log_closed_form -= std::lgamma(static_cast<double>(j) + 1.0);
  if (k <= kCalibratedMax) {
    // (2 pi)^{k^2/2} is the Gaussian integral over Hermitian matrices in the
    // Hilbert-Schmidt metric.
    const long double log_cal = 0.5L * static_cast<long double>(kk * kk) * static_cast<long double>(log_2pi) -
                                log_gaussian_eigen_integral(k);
    c.log_calibrated = static_cast<double>(log_cal);
    c.relative_error = static_cast<double>(std::abs(std::expm1(log_cal - static_cast<long double>(c.log_closed_form))));
  } else {
    c.log_calibrated = c.log_closed_form;
  }
  return c;
}

double flag_constant_self_test() {
  double worst = 0.0;
  for (std::size_t k = 1; k <= kCalibratedMax; ++k) worst = std::max(worst, flag_constant(k).relative_error);
  return worst;
}

OmegaVolumeResult estimate_log_volume_omega(const StepFunctionSpec& h, const OmegaVolumeConfig& cfg) {
  require(cfg.k >= 2 && cfg.k <= 64, ErrorKind::parameter, "Omega volume needs 2 <= k <= 64");
  require(cfg.mc_samples >= 10'000, ErrorKind::parameter, "Omega volume needs at least 1e4 samples");
  require(cfg.subcells >= 1 && cfg.streams >= 1, ErrorKind::parameter, "subcells and streams must be positive");
  h.validate();
  const std::size_t k = cfg.k;
  const std::size_t m = cfg.subcells;
  const auto slots = eigenvalue_slots(h, k);

  // Per-slot piecewise-constant proposal, weighted by the Vandermonde factor
  // against the other slot centres.
  std::vector<double> centre(k);
  for (std::size_t s = 0; s < k; ++s) centre[s] = 0.5 * (slots[s].first + slots[s].second);
  std::vector<std::vector<double>> cum(k, std::vector<double>(m));
  std::vector<std::vector<double>> log_density(k, std::vector<double>(m));
  for (std::size_t s = 0; s < k; ++s) {
    const double width = (slots[s].second - slots[s].first) / static_cast<double>(m);
    std::vector<double> logq(m);
    for (std::size_t c = 0; c < m; ++c) {
      const double x = slots[s].first + (static_cast<double>(c) + 0.5) * width;
      double acc = 0.0;
      for (std::size_t j = 0; j < k; ++j)
        if (j != s) acc += 2.0 * std::log(std::abs(x - centre[j]));
      logq[c] = acc;
    }
    const double mx = *std::max_element(logq.begin(), logq.end());
    double total = 0.0;
    for (std::size_t c = 0; c < m; ++c) total += std::exp(logq[c] - mx);
    double run = 0.0;
    for (std::size_t c = 0; c < m; ++c) {
      const double mass = std::exp(logq[c] - mx) / total;
      run += mass;
      cum[s][c] = run;
      log_density[s][c] = std::log(mass) - std::log(width);
    }
    cum[s][m - 1] = 1.0;
  }

  std::vector<double> log_w(cfg.mc_samples);
  const std::size_t per = cfg.mc_samples / cfg.streams;
  const std::size_t extra = cfg.mc_samples % cfg.streams;
  parallel_for(cfg.streams, cfg.threads, [&](std::size_t st) {
    std::mt19937_64 engine(stream_seed(cfg.seed, st));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const std::size_t begin = st * per + std::min(st, extra);
    const std::size_t count = per + (st < extra ? 1 : 0);
    std::vector<double> l(k);
    for (std::size_t i = 0; i < count; ++i) {
      double log_p = 0.0;
      for (std::size_t s = 0; s < k; ++s) {
        const double u = unit(engine);
        const std::size_t c = std::min<std::size_t>(
            static_cast<std::size_t>(std::upper_bound(cum[s].begin(), cum[s].end(), u) - cum[s].begin()), m - 1);
        const double width = (slots[s].second - slots[s].first) / static_cast<double>(m);
        l[s] = slots[s].first + (static_cast<double>(c) + unit(engine)) * width;
        log_p += log_density[s][c];
      }
      double lv = 0.0;
      for (std::size_t a = 0; a < k; ++a)
        for (std::size_t b = a + 1; b < k; ++b) lv += std::log(l[b] - l[a]);
      log_w[begin + i] = 2.0 * lv - log_p;
    }
  });

  const double mx = *std::max_element(log_w.begin(), log_w.end());
  double sw = 0.0, sw2 = 0.0;
  for (double x : log_w) {
    const double w = std::exp(x - mx);
    sw += w;
    sw2 += w * w;
  }
  OmegaVolumeResult out;
  out.samples = cfg.mc_samples;
  out.ess = sw * sw / sw2;
  if (out.ess < 100.0) {
    std::ostringstream msg;
    msg << "importance weights degenerate (effective sample size " << out.ess << " < 100 at k = " << k << ")";
    throw Error(ErrorKind::precision, msg.str());
  }
  out.log_box_integral = mx + std::log(sw) - std::log(static_cast<double>(cfg.mc_samples));
  out.log_ck = flag_constant(k).log_calibrated;
  out.log_volume = out.log_ck + out.log_box_integral;
  const double kk = static_cast<double>(k);
  out.value = out.log_volume / (kk * kk) + 0.5 * std::log(kk);
  return out;
}

}  // namespace fepi
