#include "fepi/measure.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <numeric>
#include <random>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "fepi/error.hpp"

namespace fepi {

namespace {

constexpr double kPi = std::numbers::pi;

// Piece of the CDF: either a density segment [start, end] or an atom (start == end).
struct Piece {
  double start;
  double end;
  double mass_before;
  double mass;
};

std::vector<Piece> build_pieces(double lo, double width, std::span<const double> density,
                                std::span<const Atom> atoms) {
  std::vector<Piece> pieces;
  pieces.reserve(density.size() + 2 * atoms.size());
  std::size_t a = 0;
  double cumulative = 0.0;
  auto push = [&](double s, double e, double m) {
    if (m <= 0.0) return;
    pieces.push_back({s, e, cumulative, m});
    cumulative += m;
  };
  for (std::size_t i = 0; i < density.size(); ++i) {
    const double x0 = lo + static_cast<double>(i) * width;
    const double x1 = lo + static_cast<double>(i + 1) * width;
    double cursor = x0;
    while (a < atoms.size() && atoms[a].location < x1) {
      const double loc = std::max(atoms[a].location, x0);
      push(cursor, loc, density[i] * (loc - cursor));
      push(loc, loc, atoms[a].weight);
      cursor = loc;
      ++a;
    }
    push(cursor, x1, density[i] * (x1 - cursor));
  }
  for (; a < atoms.size(); ++a) push(atoms[a].location, atoms[a].location, atoms[a].weight);
  return pieces;
}

double semicircle_cdf(double x, double variance) {
  const double r = 2.0 * std::sqrt(variance);
  if (x <= -r) return 0.0;
  if (x >= r) return 1.0;
  return 0.5 + x * std::sqrt(r * r - x * x) / (kPi * r * r) + std::asin(x / r) / kPi;
}

double arcsine_cdf(double x, double r) {
  if (x <= -r) return 0.0;
  if (x >= r) return 1.0;
  return 0.5 + std::asin(x / r) / kPi;
}

// Cell averages of a density from its CDF on the window [lo, lo + cells*width].
template <class Cdf>
std::vector<double> cell_averages(double lo, double width, std::size_t cells, Cdf&& cdf) {
  std::vector<double> out(cells);
  double previous = cdf(lo);
  for (std::size_t i = 0; i < cells; ++i) {
    const double next = cdf(lo + static_cast<double>(i + 1) * width);
    out[i] = std::max(0.0, next - previous) / width;
    previous = next;
  }
  return out;
}

struct Window {
  double lo;
  double hi;
};

Window padded_window(double support_lo, double support_hi, double padding) {
  const double center = 0.5 * (support_lo + support_hi);
  double half = 0.5 * (support_hi - support_lo) * padding;
  if (!(half > 0.0)) half = 0.5 * padding;
  return {center - half, center + half};
}

double param(std::span<const double> p, std::size_t i, double fallback) {
  return i < p.size() ? p[i] : fallback;
}

}  // namespace

void GridConfig::validate(bool for_convolution) const {
  require(cells >= 2, ErrorKind::parameter, "grid needs at least 2 cells");
  require(!for_convolution || cells >= 64, ErrorKind::parameter,
          "convolution grids need at least 64 cells");
  require(std::isfinite(padding) && padding >= 1.0, ErrorKind::parameter,
          "grid padding must be >= 1");
}

Measure::Measure(double lo, double hi, std::vector<double> density, std::vector<Atom> atoms)
    : lo_(lo), hi_(hi), density_(std::move(density)) {
  require(std::isfinite(lo) && std::isfinite(hi) && hi > lo, ErrorKind::parameter,
          "measure window needs finite lo < hi");
  require(density_.size() >= 2, ErrorKind::parameter, "measure needs at least 2 cells");
  width_ = (hi_ - lo_) / static_cast<double>(density_.size());
  for (double d : density_) {
    require(std::isfinite(d) && d >= 0.0, ErrorKind::parameter,
            "density values must be finite and nonnegative");
  }
  std::sort(atoms.begin(), atoms.end(),
            [](const Atom& a, const Atom& b) { return a.location < b.location; });
  for (const Atom& atom : atoms) {
    require(std::isfinite(atom.location) && std::isfinite(atom.weight) && atom.weight > 0.0,
            ErrorKind::parameter, "atoms need finite location and positive weight");
    require(atom.location >= lo_ && atom.location <= hi_, ErrorKind::parameter,
            "atom location outside the measure window");
    if (!atoms_.empty() && atoms_.back().location == atom.location) {
      atoms_.back().weight += atom.weight;
    } else {
      atoms_.push_back(atom);
    }
  }
  const double total = std::accumulate(density_.begin(), density_.end(), 0.0) * width_ + atom_mass();
  require(std::isfinite(total) && total > 0.0, ErrorKind::parameter, "measure has no mass");
  for (double& d : density_) d /= total;
  for (Atom& atom : atoms_) atom.weight /= total;
}

double Measure::atom_mass() const noexcept {
  double m = 0.0;
  for (const Atom& a : atoms_) m += a.weight;
  return m;
}

double Measure::continuous_mass() const noexcept {
  return std::accumulate(density_.begin(), density_.end(), 0.0) * width_;
}

double Measure::mean() const { return moment(*this, 1); }

double Measure::variance() const {
  const double m1 = moment(*this, 1);
  return moment(*this, 2) - m1 * m1;
}

double Measure::support_lo() const noexcept {
  double s = hi_;
  for (std::size_t i = 0; i < density_.size(); ++i) {
    if (density_[i] > 0.0) {
      s = node(i);
      break;
    }
  }
  if (!atoms_.empty()) s = std::min(s, atoms_.front().location);
  return s;
}

double Measure::support_hi() const noexcept {
  double s = lo_;
  for (std::size_t i = density_.size(); i-- > 0;) {
    if (density_[i] > 0.0) {
      s = node(i + 1);
      break;
    }
  }
  if (!atoms_.empty()) s = std::max(s, atoms_.back().location);
  return s;
}

double Measure::cdf(double x) const noexcept {
  if (x < lo_) return 0.0;
  if (x >= hi_) return 1.0;
  double mass = 0.0;
  const double pos = (x - lo_) / width_;
  const auto full = std::min(static_cast<std::size_t>(pos), density_.size());
  for (std::size_t i = 0; i < full; ++i) mass += density_[i];
  mass *= width_;
  if (full < density_.size()) mass += density_[full] * (x - node(full));
  for (const Atom& a : atoms_) {
    if (a.location > x) break;
    mass += a.weight;
  }
  return std::min(1.0, mass);
}

double Measure::quantile(double u) const {
  require(u >= 0.0 && u <= 1.0, ErrorKind::parameter, "quantile level must lie in [0, 1]");
  const auto pieces = build_pieces(lo_, width_, density_, atoms_);
  auto it = std::lower_bound(pieces.begin(), pieces.end(), u, [](const Piece& p, double level) {
    return p.mass_before + p.mass < level;
  });
  if (it == pieces.end()) it = std::prev(pieces.end());
  if (it->end == it->start) return it->start;
  const double frac = std::clamp((u - it->mass_before) / it->mass, 0.0, 1.0);
  return it->start + frac * (it->end - it->start);
}

std::optional<double> Measure::point_mass_location(double tol) const noexcept {
  for (const Atom& a : atoms_) {
    if (a.weight >= 1.0 - tol) return a.location;
  }
  return std::nullopt;
}

Family parse_family(const std::string& name) {
  if (name == "semicircle") return Family::semicircle;
  if (name == "bernoulli") return Family::bernoulli;
  if (name == "arcsine") return Family::arcsine;
  if (name == "uniform") return Family::uniform;
  if (name == "free_poisson") return Family::free_poisson;
  throw Error(ErrorKind::parameter, "unknown measure family '" + name + "'");
}

std::string to_string(Family family) {
  switch (family) {
    case Family::semicircle: return "semicircle";
    case Family::bernoulli: return "bernoulli";
    case Family::arcsine: return "arcsine";
    case Family::uniform: return "uniform";
    case Family::free_poisson: return "free_poisson";
  }
  return "unknown";
}

Measure standard_family(Family family, std::span<const double> params, const GridConfig& grid) {
  grid.validate();
  const std::size_t n = grid.cells;
  switch (family) {
    case Family::semicircle: {
      require(!params.empty(), ErrorKind::parameter, "semicircle needs a variance");
      const double variance = params[0];
      const double center = param(params, 1, 0.0);
      require(std::isfinite(variance) && variance > 0.0, ErrorKind::parameter,
              "semicircle variance must be positive");
      const double r = 2.0 * std::sqrt(variance);
      const auto w = padded_window(center - r, center + r, grid.padding);
      const double h = (w.hi - w.lo) / static_cast<double>(n);
      return Measure(w.lo, w.hi, cell_averages(w.lo, h, n, [&](double x) {
                       return semicircle_cdf(x - center, variance);
                     }));
    }
    case Family::arcsine: {
      require(!params.empty(), ErrorKind::parameter, "arcsine needs a radius");
      const double r = params[0];
      const double center = param(params, 1, 0.0);
      require(std::isfinite(r) && r > 0.0, ErrorKind::parameter, "arcsine radius must be positive");
      const auto w = padded_window(center - r, center + r, grid.padding);
      const double h = (w.hi - w.lo) / static_cast<double>(n);
      return Measure(w.lo, w.hi,
                     cell_averages(w.lo, h, n, [&](double x) { return arcsine_cdf(x - center, r); }));
    }
    case Family::uniform: {
      require(params.size() >= 2, ErrorKind::parameter, "uniform needs endpoints a < b");
      const double a = params[0];
      const double b = params[1];
      require(std::isfinite(a) && std::isfinite(b) && a < b, ErrorKind::parameter,
              "uniform needs endpoints a < b");
      const auto w = padded_window(a, b, grid.padding);
      const double h = (w.hi - w.lo) / static_cast<double>(n);
      return Measure(w.lo, w.hi, cell_averages(w.lo, h, n, [&](double x) {
                       return std::clamp((x - a) / (b - a), 0.0, 1.0);
                     }));
    }
    case Family::bernoulli: {
      require(params.size() >= 3, ErrorKind::parameter, "bernoulli needs (p, a, b)");
      const double p = params[0];
      const double a = params[1];
      const double b = params[2];
      require(p >= 0.0 && p <= 1.0 && std::isfinite(a) && std::isfinite(b), ErrorKind::parameter,
              "bernoulli needs p in [0,1] and finite atoms");
      const auto w = padded_window(std::min(a, b), std::max(a, b), grid.padding);
      std::vector<Atom> atoms;
      if (p > 0.0) atoms.push_back({a, p});
      if (p < 1.0) atoms.push_back({b, 1.0 - p});
      return Measure(w.lo, w.hi, std::vector<double>(n, 0.0), std::move(atoms));
    }
    case Family::free_poisson: {
      require(!params.empty(), ErrorKind::parameter, "free_poisson needs a rate");
      const double rate = params[0];
      const double jump = param(params, 1, 1.0);
      require(std::isfinite(rate) && rate > 0.0 && std::isfinite(jump) && jump > 0.0,
              ErrorKind::parameter, "free_poisson needs positive rate and jump");
      const double a = jump * std::pow(1.0 - std::sqrt(rate), 2);
      const double b = jump * std::pow(1.0 + std::sqrt(rate), 2);
      const bool atom = rate < 1.0;
      const auto w = padded_window(atom ? 0.0 : a, b, grid.padding);
      const double h = (w.hi - w.lo) / static_cast<double>(n);
      auto density = [&](double x) {
        if (x <= a || x >= b) return 0.0;
        return std::sqrt((b - x) * (x - a)) / (2.0 * kPi * jump * x);
      };
      boost::math::quadrature::tanh_sinh<double> integrator;
      std::vector<double> cells(n, 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        const double x0 = std::max(w.lo + static_cast<double>(i) * h, a);
        const double x1 = std::min(w.lo + static_cast<double>(i + 1) * h, b);
        if (x1 > x0) cells[i] = integrator.integrate(density, x0, x1) / h;
      }
      std::vector<Atom> atoms;
      if (atom) atoms.push_back({0.0, 1.0 - rate});
      return Measure(w.lo, w.hi, std::move(cells), std::move(atoms));
    }
  }
  throw Error(ErrorKind::parameter, "unknown measure family");
}

Measure point_mass(double location, const GridConfig& grid) {
  grid.validate();
  require(std::isfinite(location), ErrorKind::parameter, "point mass location must be finite");
  const auto w = padded_window(location, location, grid.padding);
  return Measure(w.lo, w.hi, std::vector<double>(grid.cells, 0.0), {{location, 1.0}});
}

Measure regrid(const Measure& mu, double lo, double hi, std::size_t cells) {
  require(std::isfinite(lo) && std::isfinite(hi) && hi > lo && cells >= 2, ErrorKind::parameter,
          "regrid needs a valid window");
  const double tol = 1e-12 * (std::abs(lo) + std::abs(hi) + 1.0);
  require(mu.support_lo() >= lo - tol && mu.support_hi() <= hi + tol, ErrorKind::parameter,
          "regrid window does not contain the support");
  const auto src = mu.density();
  const double h_src = mu.cell_width();
  // Continuous-part CDF of mu, exact for the piecewise-constant density.
  std::vector<double> prefix(src.size() + 1, 0.0);
  for (std::size_t i = 0; i < src.size(); ++i) prefix[i + 1] = prefix[i] + src[i] * h_src;
  auto continuous_cdf = [&](double x) {
    if (x <= mu.lo()) return 0.0;
    if (x >= mu.hi()) return prefix.back();
    const double pos = (x - mu.lo()) / h_src;
    const auto i = std::min(static_cast<std::size_t>(pos), src.size() - 1);
    return prefix[i] + src[i] * (x - mu.node(i));
  };
  const double h = (hi - lo) / static_cast<double>(cells);
  auto density = cell_averages(lo, h, cells, continuous_cdf);
  std::vector<Atom> atoms;
  for (const Atom& a : mu.atoms()) atoms.push_back({std::clamp(a.location, lo, hi), a.weight});
  return Measure(lo, hi, std::move(density), std::move(atoms));
}

Measure mixture(std::span<const Measure> components, std::span<const double> weights,
                const GridConfig& grid) {
  require(!components.empty() && components.size() == weights.size(), ErrorKind::parameter,
          "mixture needs one weight per component");
  grid.validate();
  double total = 0.0;
  for (double w : weights) {
    require(std::isfinite(w) && w >= 0.0, ErrorKind::parameter, "mixture weights must be >= 0");
    total += w;
  }
  require(total > 0.0, ErrorKind::parameter, "mixture weights sum to zero");
  double lo = components[0].lo();
  double hi = components[0].hi();
  for (const Measure& m : components) {
    lo = std::min(lo, m.lo());
    hi = std::max(hi, m.hi());
  }
  std::vector<double> density(grid.cells, 0.0);
  std::vector<Atom> atoms;
  for (std::size_t c = 0; c < components.size(); ++c) {
    if (weights[c] == 0.0) continue;
    const Measure re = regrid(components[c], lo, hi, grid.cells);
    const double w = weights[c] / total;
    for (std::size_t i = 0; i < density.size(); ++i) density[i] += w * re.density()[i];
    for (const Atom& a : re.atoms()) atoms.push_back({a.location, w * a.weight});
  }
  return Measure(lo, hi, std::move(density), std::move(atoms));
}

Measure empirical_measure(std::span<const double> values) {
  require(!values.empty(), ErrorKind::parameter, "empirical measure needs at least one value");
  const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
  require(std::isfinite(*mn) && std::isfinite(*mx), ErrorKind::parameter,
          "empirical measure values must be finite");
  const double span = *mx - *mn;
  const double pad = span > 0.0 ? 0.01 * span : 0.5;
  std::vector<Atom> atoms;
  atoms.reserve(values.size());
  const double w = 1.0 / static_cast<double>(values.size());
  for (double v : values) atoms.push_back({v, w});
  return Measure(*mn - pad, *mx + pad, std::vector<double>(64, 0.0), std::move(atoms));
}

double moment(const Measure& mu, int p) {
  require(p >= 0 && p <= 16, ErrorKind::parameter, "moment order must lie in [0, 16]");
  if (p == 0) return 1.0;
  const auto rho = mu.density();
  const double h = mu.cell_width();
  const std::size_t n = rho.size();
  auto minmod = [](double a, double b) {
    if (a * b <= 0.0) return 0.0;
    return std::abs(a) < std::abs(b) ? a : b;
  };
  using Gauss = boost::math::quadrature::gauss<double, 10>;
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double left = i > 0 ? rho[i - 1] : 0.0;
    const double right = i + 1 < n ? rho[i + 1] : 0.0;
    if (rho[i] == 0.0 && left == 0.0 && right == 0.0) continue;
    const double slope = minmod(rho[i] - left, right - rho[i]) / h;
    const double mid = mu.midpoint(i);
    const double level = rho[i];
    sum += Gauss::integrate(
        [&](double t) { return (level + slope * (t - mid)) * std::pow(t, p); }, mu.node(i),
        mu.node(i + 1));
  }
  for (const Atom& a : mu.atoms()) sum += a.weight * std::pow(a.location, p);
  return sum;
}

Measure affine_pushforward(const Measure& mu, double a, double b) {
  require(std::isfinite(a) && std::isfinite(b) && a != 0.0, ErrorKind::parameter,
          "affine pushforward needs a finite nonzero scale");
  std::vector<double> density(mu.density().begin(), mu.density().end());
  double lo = a * mu.lo() + b;
  double hi = a * mu.hi() + b;
  if (a < 0.0) {
    std::reverse(density.begin(), density.end());
    std::swap(lo, hi);
  }
  for (double& d : density) d /= std::abs(a);
  std::vector<Atom> atoms;
  for (const Atom& atom : mu.atoms()) {
    atoms.push_back({std::clamp(a * atom.location + b, lo, hi), atom.weight});
  }
  return Measure(lo, hi, std::move(density), std::move(atoms));
}

std::vector<double> sample(const Measure& mu, std::size_t count, std::uint64_t seed) {
  require(count >= 1, ErrorKind::parameter, "sample count must be >= 1");
  const auto pieces = build_pieces(mu.lo(), mu.cell_width(), mu.density(), mu.atoms());
  std::mt19937_64 engine(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> out(count);
  for (double& x : out) {
    const double u = unit(engine);
    auto it = std::upper_bound(pieces.begin(), pieces.end(), u, [](double level, const Piece& p) {
      return level < p.mass_before + p.mass;
    });
    if (it == pieces.end()) it = std::prev(pieces.end());
    if (it->end == it->start) {
      x = it->start;
    } else {
      const double frac = std::clamp((u - it->mass_before) / it->mass, 0.0, 1.0);
      x = it->start + frac * (it->end - it->start);
    }
  }
  return out;
}

double kolmogorov_distance(const Measure& mu, const Measure& nu) {
  std::vector<double> points;
  points.reserve(mu.cells() + nu.cells() + mu.atoms().size() + nu.atoms().size() + 2);
  for (std::size_t j = 0; j <= mu.cells(); ++j) points.push_back(mu.node(j));
  for (std::size_t j = 0; j <= nu.cells(); ++j) points.push_back(nu.node(j));
  for (const Atom& a : mu.atoms()) points.push_back(a.location);
  for (const Atom& a : nu.atoms()) points.push_back(a.location);
  std::sort(points.begin(), points.end());
  points.erase(std::unique(points.begin(), points.end()), points.end());

  // Running CDFs evaluated by sweeping the sorted points once.
  auto sweep_cdf = [&](const Measure& m) {
    std::vector<double> right(points.size());
    std::vector<double> left(points.size());
    const auto rho = m.density();
    const double h = m.cell_width();
    std::vector<double> prefix(rho.size() + 1, 0.0);
    for (std::size_t i = 0; i < rho.size(); ++i) prefix[i + 1] = prefix[i] + rho[i] * h;
    std::size_t a = 0;
    double atoms_below = 0.0;  // atoms strictly below the current point
    const auto atoms = m.atoms();
    for (std::size_t k = 0; k < points.size(); ++k) {
      const double x = points[k];
      while (a < atoms.size() && atoms[a].location < x) atoms_below += atoms[a++].weight;
      double atom_here = 0.0;
      for (std::size_t b = a; b < atoms.size() && atoms[b].location == x; ++b) atom_here += atoms[b].weight;
      double cont = 0.0;
      if (x >= m.hi()) {
        cont = prefix.back();
      } else if (x > m.lo()) {
        const auto i = std::min(static_cast<std::size_t>((x - m.lo()) / h), rho.size() - 1);
        cont = prefix[i] + rho[i] * (x - m.node(i));
      }
      left[k] = cont + atoms_below;
      right[k] = left[k] + atom_here;
    }
    return std::pair{left, right};
  };
  const auto [mu_left, mu_right] = sweep_cdf(mu);
  const auto [nu_left, nu_right] = sweep_cdf(nu);
  double d = 0.0;
  for (std::size_t k = 0; k < points.size(); ++k) {
    d = std::max(d, std::abs(mu_left[k] - nu_left[k]));
    d = std::max(d, std::abs(mu_right[k] - nu_right[k]));
  }
  return d;
}

double l1_distance(const Measure& mu, const Measure& nu) {
  std::vector<double> points;
  points.reserve(mu.cells() + nu.cells() + 2);
  for (std::size_t j = 0; j <= mu.cells(); ++j) points.push_back(mu.node(j));
  for (std::size_t j = 0; j <= nu.cells(); ++j) points.push_back(nu.node(j));
  std::sort(points.begin(), points.end());
  points.erase(std::unique(points.begin(), points.end()), points.end());
  auto value = [](const Measure& m, double x) {
    if (x <= m.lo() || x >= m.hi()) return 0.0;
    const auto i = std::min(static_cast<std::size_t>((x - m.lo()) / m.cell_width()), m.cells() - 1);
    return m.density()[i];
  };
  double d = 0.0;
  for (std::size_t k = 0; k + 1 < points.size(); ++k) {
    const double mid = 0.5 * (points[k] + points[k + 1]);
    d += std::abs(value(mu, mid) - value(nu, mid)) * (points[k + 1] - points[k]);
  }
  std::map<double, double> atom_diff;
  for (const Atom& a : mu.atoms()) atom_diff[a.location] += a.weight;
  for (const Atom& a : nu.atoms()) atom_diff[a.location] -= a.weight;
  for (const auto& [loc, w] : atom_diff) d += std::abs(w);
  return d;
}

}  // namespace fepi
