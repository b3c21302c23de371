#include "fepi/microstates.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <numbers>

#include "fepi/error.hpp"
#include "fepi/freeconv.hpp"
#include "fepi/freeentropy.hpp"
#include "fepi/geometry.hpp"
#include "fepi/noncrossing.hpp"
#include "fepi/parallel.hpp"

namespace fepi {

namespace {

// sum_{i<j} 2 log|l_j - l_i|.
double log_vandermonde_sq(std::span<const double> l) {
  double s = 0.0;
  for (std::size_t i = 0; i < l.size(); ++i)
    for (std::size_t j = i + 1; j < l.size(); ++j) s += std::log(std::abs(l[j] - l[i]));
  return 2.0 * s;
}

std::vector<double> sorted_eigenvalues(const ComplexMatrix& m) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(m, Eigen::EigenvaluesOnly);
  require(es.info() == Eigen::Success, ErrorKind::numeric, "Hermitian eigensolver failed");
  const auto& ev = es.eigenvalues();
  return {ev.data(), ev.data() + ev.size()};
}

ComplexMatrix conjugate_diagonal(const ComplexMatrix& u, std::span<const double> lambda) {
  const Eigen::Map<const Eigen::VectorXd> d(lambda.data(), static_cast<Eigen::Index>(lambda.size()));
  ComplexMatrix m = u * (d.cast<std::complex<double>>().asDiagonal() * u.adjoint());
  return (0.5 * (m + m.adjoint())).eval();
}

std::vector<double> cumulants_from(const std::vector<double>& moments) {
  return free_cumulants_from_moments(moments);
}

}  // namespace

// ---- step functions -------------------------------------------------------

StepFunctionSpec StepFunctionSpec::from_table(std::vector<double> t, std::vector<double> values, std::string id) {
  StepFunctionSpec h{std::move(t), std::move(values), std::move(id)};
  h.validate();
  return h;
}

StepFunctionSpec StepFunctionSpec::affine(double a, double b, std::string id) {
  return from_table({0.0, 1.0}, {b, a + b}, std::move(id));
}

StepFunctionSpec StepFunctionSpec::from_quantile(const Measure& mu, std::size_t nodes, std::string id) {
  require(!mu.has_atoms(), ErrorKind::spec, "quantile functions need an atom-free measure");
  require(nodes >= 2, ErrorKind::parameter, "quantile table needs at least 2 nodes");
  std::vector<double> t(nodes), v(nodes);
  for (std::size_t i = 0; i < nodes; ++i) {
    t[i] = static_cast<double>(i) / static_cast<double>(nodes - 1);
    v[i] = i == 0 ? mu.support_lo() : (i + 1 == nodes ? mu.support_hi() : mu.quantile(t[i]));
  }
  return from_table(std::move(t), std::move(v), std::move(id));
}

void StepFunctionSpec::validate() const {
  require(t.size() >= 2 && t.size() == values.size(), ErrorKind::spec,
          "step function table needs matching t and value columns of length >= 2");
  require(t.front() == 0.0 && t.back() == 1.0, ErrorKind::spec, "step function table must span [0, 1]");
  for (std::size_t i = 0; i < t.size(); ++i) {
    require(std::isfinite(t[i]) && std::isfinite(values[i]), ErrorKind::spec, "step function table must be finite");
    if (i > 0) {
      require(t[i] > t[i - 1], ErrorKind::spec, "step function nodes must be strictly increasing");
      require(values[i] > values[i - 1], ErrorKind::spec, "step function must be strictly increasing");
    }
  }
}

double StepFunctionSpec::operator()(double u) const {
  u = std::clamp(u, 0.0, 1.0);
  auto it = std::upper_bound(t.begin(), t.end(), u);
  if (it == t.end()) return values.back();
  const std::size_t j = static_cast<std::size_t>(it - t.begin());
  const double w = (u - t[j - 1]) / (t[j] - t[j - 1]);
  return values[j - 1] + w * (values[j] - values[j - 1]);
}

double StepFunctionSpec::sup_abs() const { return std::max(std::abs(values.front()), std::abs(values.back())); }

std::vector<double> StepFunctionSpec::moments(std::size_t order) const {
  std::vector<double> m(order + 1, 0.0);
  m[0] = 1.0;
  for (std::size_t i = 1; i < t.size(); ++i) {
    const double a = values[i - 1];
    const double b = values[i];
    const double dt = t[i] - t[i - 1];
    // int (a + (b - a) s)^p ds over [0, 1] = sum_j a^j b^(p-j) / (p + 1).
    for (std::size_t p = 1; p <= order; ++p) {
      double s = 0.0;
      for (std::size_t j = 0; j <= p; ++j)
        s += std::pow(a, static_cast<double>(j)) * std::pow(b, static_cast<double>(p - j));
      m[p] += dt * s / static_cast<double>(p + 1);
    }
  }
  return m;
}

Measure StepFunctionSpec::law(std::size_t cells) const {
  require(cells >= 1, ErrorKind::parameter, "law needs at least one cell");
  const double lo = values.front();
  const double hi = values.back();
  // CDF of h(Z) is the inverse table.
  auto cdf = [&](double x) {
    if (x <= lo) return 0.0;
    if (x >= hi) return 1.0;
    auto it = std::upper_bound(values.begin(), values.end(), x);
    const std::size_t j = static_cast<std::size_t>(it - values.begin());
    const double w = (x - values[j - 1]) / (values[j] - values[j - 1]);
    return t[j - 1] + w * (t[j] - t[j - 1]);
  };
  const double width = (hi - lo) / static_cast<double>(cells);
  std::vector<double> density(cells);
  for (std::size_t i = 0; i < cells; ++i) {
    const double x0 = lo + static_cast<double>(i) * width;
    const double x1 = i + 1 == cells ? hi : x0 + width;
    density[i] = (cdf(x1) - cdf(x0)) / width;
  }
  return Measure(lo, hi, std::move(density));
}

// ---- matrices -------------------------------------------------------------

std::string to_string(Provenance p) {
  switch (p) {
    case Provenance::omega_sample: return "omega_sample";
    case Provenance::haar_conjugate: return "haar_conjugate";
    case Provenance::sum: return "sum";
  }
  return "unknown";
}

double MatrixMicrostate::hermitian_defect() const { return (entries - entries.adjoint()).cwiseAbs().maxCoeff(); }

ComplexMatrix haar_unitary(std::size_t k, std::mt19937_64& engine) {
  require(k >= 1, ErrorKind::parameter, "unitary size must be >= 1");
  std::normal_distribution<double> normal(0.0, std::numbers::sqrt2 / 2.0);
  const auto n = static_cast<Eigen::Index>(k);
  ComplexMatrix g(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i) g(i, j) = {normal(engine), normal(engine)};
  Eigen::HouseholderQR<ComplexMatrix> qr(g);
  ComplexMatrix q = qr.householderQ();
  const auto& r = qr.matrixQR();
  for (Eigen::Index j = 0; j < n; ++j) {
    const std::complex<double> d = r(j, j);
    const double mag = std::abs(d);
    q.col(j) *= mag > 0.0 ? d / mag : std::complex<double>(1.0);
  }
  return q;
}

ComplexMatrix haar_unitary(std::size_t k, std::uint64_t seed) {
  std::mt19937_64 engine(seed);
  return haar_unitary(k, engine);
}

std::vector<std::pair<double, double>> eigenvalue_slots(const StepFunctionSpec& h, std::size_t k) {
  std::vector<std::pair<double, double>> slots(k);
  const double step = 1.0 / (2.0 * static_cast<double>(k));
  for (std::size_t s = 0; s < k; ++s) {
    const double a = h(static_cast<double>(2 * s) * step);
    const double b = h(static_cast<double>(2 * s + 1) * step);
    require(b > a, ErrorKind::spec, "empty eigenvalue slot: step function is not increasing at resolution 1/2k");
    slots[s] = {a, b};
  }
  return slots;
}

MatrixMicrostate sample_omega(const StepFunctionSpec& h, std::size_t k, std::uint64_t seed, bool verify) {
  require(k >= 2, ErrorKind::parameter, "Omega samples need k >= 2");
  h.validate();
  const auto slots = eigenvalue_slots(h, k);
  std::mt19937_64 engine(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> lambda(k);
  for (std::size_t s = 0; s < k; ++s) lambda[s] = slots[s].first + unit(engine) * (slots[s].second - slots[s].first);
  const ComplexMatrix u = haar_unitary(k, engine);
  MatrixMicrostate m{k, conjugate_diagonal(u, lambda), Provenance::omega_sample, h.id, lambda};
  if (verify) {
    const auto ev = sorted_eigenvalues(m.entries);
    for (std::size_t s = 0; s < k; ++s) {
      require(ev[s] >= slots[s].first - 1e-9 && ev[s] <= slots[s].second + 1e-9, ErrorKind::numeric,
              "reconstructed eigenvalue left its slot");
    }
  }
  return m;
}

// ---- membership -----------------------------------------------------------

GammaTarget GammaTarget::single(std::vector<double> moments, std::size_t N, double eps, double R) {
  GammaTarget g{{std::move(moments)}, N, eps, R};
  g.validate();
  return g;
}

GammaTarget GammaTarget::free_tuple(std::vector<std::vector<double>> moments, std::size_t N, double eps, double R) {
  GammaTarget g{std::move(moments), N, eps, R};
  g.validate();
  return g;
}

void GammaTarget::validate() const {
  require(N >= 1 && N <= 10, ErrorKind::parameter, "word length N must lie in [1, 10]");
  require(eps > 0.0, ErrorKind::parameter, "eps must be positive");
  require(R > 0.0, ErrorKind::parameter, "R must be positive");
  require(!marginal_moments.empty(), ErrorKind::parameter, "Gamma target needs at least one variable");
  for (const auto& m : marginal_moments) {
    require(m.size() >= N + 1, ErrorKind::parameter, "Gamma target needs moments m_0..m_N");
    for (std::size_t p = 1; p <= N; ++p)
      require(std::abs(m[p]) <= std::pow(R, static_cast<double>(p)) * (1.0 + 1e-9) + 1e-12, ErrorKind::parameter,
              "target moment exceeds R^order");
  }
}

std::vector<WordTarget> enumerate_word_targets(const GammaTarget& target) {
  target.validate();
  const int vars = static_cast<int>(target.marginal_moments.size());
  std::vector<std::vector<double>> cumulants;
  for (const auto& m : target.marginal_moments) cumulants.push_back(cumulants_from(m));
  std::vector<WordTarget> out;
  std::vector<int> word;
  std::function<void()> visit = [&] {
    for (int v = 0; v < vars; ++v) {
      word.push_back(v);
      const double value = vars == 1 ? target.marginal_moments[0][word.size()] : free_word_moment(word, cumulants);
      out.push_back({word, value});
      if (word.size() < target.N) visit();
      word.pop_back();
    }
  };
  visit();
  return out;
}

MembershipResult microstate_membership(std::span<const MatrixMicrostate> tuple, const GammaTarget& target) {
  const auto words = enumerate_word_targets(target);
  return microstate_membership(tuple, target, words);
}

MembershipResult microstate_membership(std::span<const MatrixMicrostate> tuple, const GammaTarget& target,
                                       std::span<const WordTarget> words, bool early_exit) {
  require(tuple.size() == target.marginal_moments.size(), ErrorKind::parameter,
          "tuple length must match the number of target variables");
  const std::size_t k = tuple.front().k;
  for (const auto& m : tuple)
    require(m.k == k && static_cast<std::size_t>(m.entries.rows()) == k, ErrorKind::parameter,
            "tuple matrices must share the size k");
  MembershipResult out;
  for (const auto& m : tuple) {
    const auto ev = m.spectrum.empty() ? sorted_eigenvalues(m.entries) : m.spectrum;
    const double norm = std::max(std::abs(ev.front()), std::abs(ev.back()));
    if (norm > target.R + 1e-9) out.norm_violation = true;
  }
  if (out.norm_violation) return out;

  const int vars = static_cast<int>(tuple.size());
  const double inv_k = 1.0 / static_cast<double>(k);
  std::size_t index = 0;
  // Depth-first over words; traces of length-(d+1) words come from the
  // length-d prefix product in O(k^2).
  bool stop = false;
  std::function<void(const ComplexMatrix*, std::size_t)> visit = [&](const ComplexMatrix* prefix, std::size_t depth) {
    for (int v = 0; v < vars && !stop; ++v) {
      const ComplexMatrix& x = tuple[static_cast<std::size_t>(v)].entries;
      const std::complex<double> tr = prefix ? prefix->cwiseProduct(x.transpose()).sum() : x.trace();
      const double err = std::abs(tr * inv_k - words[index].value);
      out.max_error = std::max(out.max_error, err);
      ++index;
      if (early_exit && err > target.eps) {
        stop = true;
        return;
      }
      if (depth + 1 < target.N) {
        const ComplexMatrix next = prefix ? ComplexMatrix(*prefix * x) : x;
        visit(&next, depth + 1);
      }
    }
  };
  require(!words.empty(), ErrorKind::parameter, "word list is empty");
  visit(nullptr, 0);
  out.words = index;
  out.member = !stop && out.max_error <= target.eps;
  return out;
}

Proportion wilson_interval(std::size_t successes, std::size_t trials) {
  Proportion p;
  p.successes = successes;
  p.trials = trials;
  if (trials == 0) return p;
  const double n = static_cast<double>(trials);
  const double f = static_cast<double>(successes) / n;
  const double z2 = kZ99 * kZ99;
  const double denom = 1.0 + z2 / n;
  const double center = (f + z2 / (2.0 * n)) / denom;
  const double half = kZ99 * std::sqrt(f * (1.0 - f) / n + z2 / (4.0 * n * n)) / denom;
  p.value = f;
  p.lo = std::max(0.0, center - half);
  p.hi = std::min(1.0, center + half);
  return p;
}

ThetaFractionResult theta_fraction(const StepFunctionSpec& h1, const StepFunctionSpec& h2,
                                   const ThetaFractionConfig& cfg) {
  require(cfg.trials >= 100, ErrorKind::parameter, "theta_fraction needs at least 100 trials");
  h1.validate();
  h2.validate();
  const double R = std::max(h1.sup_abs(), h2.sup_abs());
  const auto target = GammaTarget::free_tuple({h1.moments(cfg.N), h2.moments(cfg.N)}, cfg.N, cfg.eps, R);
  const auto words = enumerate_word_targets(target);

  std::vector<unsigned char> member(cfg.trials, 0);
  std::vector<unsigned char> norm_flag(cfg.trials, 0);
  std::vector<double> log_w(cfg.trials, 0.0);
  parallel_for(cfg.trials, cfg.threads, [&](std::size_t t) {
    const std::uint64_t s = stream_seed(cfg.seed, t);
    const MatrixMicrostate pair[2] = {sample_omega(h1, cfg.k, stream_seed(s, 1), false),
                                      sample_omega(h2, cfg.k, stream_seed(s, 2), false)};
    const auto m = microstate_membership(pair, target, words, true);
    member[t] = m.member ? 1 : 0;
    norm_flag[t] = m.norm_violation ? 1 : 0;
    log_w[t] = log_vandermonde_sq(pair[0].spectrum) + log_vandermonde_sq(pair[1].spectrum);
  });

  ThetaFractionResult out;
  std::size_t hits = 0;
  for (std::size_t t = 0; t < cfg.trials; ++t) {
    hits += member[t];
    out.any_norm_violation = out.any_norm_violation || norm_flag[t];
  }
  out.unweighted = wilson_interval(hits, cfg.trials);
  const double mx = *std::max_element(log_w.begin(), log_w.end());
  double sw = 0.0, sw2 = 0.0, swm = 0.0;
  for (std::size_t t = 0; t < cfg.trials; ++t) {
    const double w = std::exp(log_w[t] - mx);
    sw += w;
    sw2 += w * w;
    swm += w * member[t];
  }
  out.weighted = swm / sw;
  out.ess = sw * sw / sw2;
  return out;
}

// ---- spectra --------------------------------------------------------------

std::vector<double> sum_spectrum_eigenvalues(const Measure& alpha, const Measure& beta, std::size_t k,
                                             std::uint64_t seed) {
  require(k >= 32, ErrorKind::parameter, "sum spectrum experiment needs k >= 32");
  std::vector<double> qa(k), qb(k);
  for (std::size_t i = 0; i < k; ++i) {
    const double u = (static_cast<double>(i) + 0.5) / static_cast<double>(k);
    qa[i] = alpha.quantile(u);
    qb[i] = beta.quantile(u);
  }
  const ComplexMatrix u = haar_unitary(k, stream_seed(seed, 1));
  const ComplexMatrix v = haar_unitary(k, stream_seed(seed, 2));
  const ComplexMatrix sum = conjugate_diagonal(u, qa) + conjugate_diagonal(v, qb);
  return sorted_eigenvalues(sum);
}

Measure sum_spectrum_experiment(const Measure& alpha, const Measure& beta, std::size_t k, std::uint64_t seed) {
  const auto ev = sum_spectrum_eigenvalues(alpha, beta, k, seed);
  return empirical_measure(ev);
}

double empirical_chi(std::span<const double> eigenvalues) {
  const std::size_t k = eigenvalues.size();
  require(k >= 2, ErrorKind::parameter, "empirical chi needs at least 2 eigenvalues");
  std::vector<double> l(eigenvalues.begin(), eigenvalues.end());
  std::sort(l.begin(), l.end());
  require(l.back() > l.front(), ErrorKind::parameter, "empirical chi needs distinct eigenvalues");
  for (std::size_t i = 1; i < k; ++i)
    if (l[i] - l[i - 1] <= 1e-14) return -std::numeric_limits<double>::infinity();
  const double kk = static_cast<double>(k);
  return log_vandermonde_sq(l) / (kk * kk) + chi_constant();
}

SumContainmentResult check_sum_containment(const StepFunctionSpec& h1, const StepFunctionSpec& h2,
                                           const SumContainmentConfig& cfg) {
  require(cfg.trials >= 100, ErrorKind::parameter, "check_sum_containment needs at least 100 trials");
  require(cfg.N1 >= 1 && cfg.eps1 > 0.0, ErrorKind::parameter, "N1 >= 1 and eps1 > 0 are required");
  h1.validate();
  h2.validate();
  SumContainmentResult out;
  out.trials = cfg.trials;
  out.R = std::max(h1.sup_abs(), h2.sup_abs());
  out.N = cfg.N > 0 ? cfg.N : 2 * cfg.N1;
  out.eps = cfg.eps > 0.0 ? cfg.eps : cfg.eps1 / (4.0 * std::pow(2.0 * out.R, static_cast<double>(cfg.N1)));

  const auto pair_target = GammaTarget::free_tuple({h1.moments(out.N), h2.moments(out.N)}, out.N, out.eps, out.R);
  const auto pair_words = enumerate_word_targets(pair_target);

  // X + Y from the free convolution of the two laws.
  const auto conv = free_convolve(h1.law(), h2.law());
  out.sum_moments.assign(cfg.N1 + 1, 1.0);
  for (std::size_t p = 1; p <= cfg.N1; ++p) out.sum_moments[p] = moment(conv.measure, static_cast<int>(p));
  const auto sum_target = GammaTarget::single(out.sum_moments, cfg.N1, cfg.eps1, 2.0 * out.R);
  const auto sum_words = enumerate_word_targets(sum_target);

  // 0 = outside Theta(k), 1 = member whose sum fails, 2 = member whose sum passes.
  std::vector<unsigned char> state(cfg.trials, 0);
  parallel_for(cfg.trials, cfg.threads, [&](std::size_t t) {
    const std::uint64_t s = stream_seed(cfg.seed, t);
    const MatrixMicrostate pair[2] = {sample_omega(h1, cfg.k, stream_seed(s, 1), false),
                                      sample_omega(h2, cfg.k, stream_seed(s, 2), false)};
    if (!microstate_membership(pair, pair_target, pair_words, true).member) return;
    const MatrixMicrostate sum{cfg.k, (pair[0].entries + pair[1].entries).eval(), Provenance::sum, "", {}};
    state[t] = microstate_membership(std::span(&sum, 1), sum_target, sum_words, true).member ? 2 : 1;
  });
  std::size_t passed = 0;
  for (unsigned char s : state) {
    out.filtered += s > 0;
    passed += s == 2;
  }
  out.empty_filter = out.filtered == 0;
  out.pass = wilson_interval(passed, out.filtered);
  return out;
}

}  // namespace fepi
