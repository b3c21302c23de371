#include "fepi/geometry.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>

#include "fepi/error.hpp"
#include "fepi/parallel.hpp"

namespace fepi {

namespace {

constexpr std::size_t kExactDimLimit = 64;
constexpr std::size_t kMcDimLimit = 10;
constexpr std::size_t kThetaDimLimit = 12;
constexpr std::size_t kSumDimLimit = 6;
constexpr double kHoleTolerance = 1e-3;

double center_at(const SetSpec& s, std::size_t i) { return s.center.empty() ? 0.0 : s.center[i]; }

double log_exact_volume(const SetSpec& s) {
  switch (s.kind) {
    case SetKind::ball:
      return log_unit_ball_volume(s.n) + static_cast<double>(s.n) * std::log(s.radius);
    case SetKind::box: {
      double v = 0.0;
      for (double a : s.axes) v += std::log(2.0 * a);
      return v;
    }
    case SetKind::ellipsoid: {
      double v = log_unit_ball_volume(s.n);
      for (double a : s.axes) v += std::log(a);
      return v;
    }
    case SetKind::scaled:
      return static_cast<double>(s.n) * std::log(s.factor) + log_exact_volume(s.parts.front());
    case SetKind::intersection:
      break;
  }
  throw Error(ErrorKind::parameter, "intersection volume has no closed form");
}

// Index of the member used as rejection proposal; parts.size() means the
// bounding box of the intersection.
std::size_t choose_proposal(const SetSpec& s) {
  std::size_t best = s.parts.size();
  double best_log = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < s.parts.size(); ++i) {
    if (!s.parts[i].exact()) continue;
    const double v = log_exact_volume(s.parts[i]);
    if (v < best_log) {
      best_log = v;
      best = i;
    }
  }
  if (best < s.parts.size()) {
    std::vector<double> lo(s.n), hi(s.n);
    s.bounding_box(lo.data(), hi.data());
    double box = 0.0;
    for (std::size_t i = 0; i < s.n; ++i) box += std::log(hi[i] - lo[i]);
    if (box < best_log) best = s.parts.size();
  }
  return best;
}

SetSpec box_from_bounds(const std::vector<double>& lo, const std::vector<double>& hi) {
  std::vector<double> half(lo.size()), mid(lo.size());
  for (std::size_t i = 0; i < lo.size(); ++i) {
    half[i] = 0.5 * (hi[i] - lo[i]);
    mid[i] = 0.5 * (hi[i] + lo[i]);
  }
  return SetSpec::box(std::move(half), std::move(mid));
}

std::mutex& registry_mutex() {
  static std::mutex m;
  return m;
}

std::map<std::string, ThetaPredicate>& registry() {
  static std::map<std::string, ThetaPredicate> r = {
      {"first_coordinates_same_sign",
       [](const double* x, const double* y, std::size_t) { return x[0] * y[0] >= 0.0; }},
      {"x_first_leq_y_first", [](const double* x, const double* y, std::size_t) { return x[0] <= y[0]; }},
  };
  return r;
}

ThetaPredicate lookup_predicate(const std::string& id) {
  std::lock_guard lock(registry_mutex());
  const auto it = registry().find(id);
  require(it != registry().end(), ErrorKind::parameter, "unknown custom theta predicate '" + id + "'");
  return it->second;
}

// Marked cells whose full 3^n neighbourhood is marked (separable erosion,
// one pass per axis). For a convex sum such cells lie inside it. Neighbours
// beyond the grid count as marked: the grid spans the bounding box of the
// sum, which is tight for the unrestricted sum.
std::vector<unsigned char> interior_flags(const std::vector<unsigned char>& marks, std::size_t g,
                                          std::size_t n) {
  std::vector<unsigned char> cur = marks;
  std::vector<unsigned char> next(marks.size());
  for (std::size_t k = 0, stride = 1; k < n; ++k, stride *= g) {
    for (std::size_t idx = 0; idx < cur.size(); ++idx) {
      const std::size_t c = (idx / stride) % g;
      bool v = cur[idx] != 0;
      if (v && c > 0) v = cur[idx - stride] != 0;
      if (v && c + 1 < g) v = cur[idx + stride] != 0;
      next[idx] = v ? 1 : 0;
    }
    cur.swap(next);
  }
  return cur;
}

std::size_t parent_index(std::size_t idx, std::size_t g, std::size_t n) {
  const std::size_t h = g / 2;
  std::size_t target = 0;
  std::size_t scale = 1;
  for (std::size_t k = 0; k < n; ++k) {
    target += ((idx % g) / 2) * scale;
    idx /= g;
    scale *= h;
  }
  return target;
}

// OR-merge of 2^n blocks; g must be even.
std::vector<unsigned char> coarsen(const std::vector<unsigned char>& marks, std::size_t g, std::size_t n) {
  const std::size_t h = g / 2;
  std::size_t total = 1;
  for (std::size_t k = 0; k < n; ++k) total *= h;
  std::vector<unsigned char> out(total, 0);
  for (std::size_t idx = 0; idx < marks.size(); ++idx) {
    if (marks[idx]) out[parent_index(idx, g, n)] = 1;
  }
  return out;
}

}  // namespace

std::string to_string(SetKind kind) {
  switch (kind) {
    case SetKind::ball: return "ball";
    case SetKind::box: return "box";
    case SetKind::ellipsoid: return "ellipsoid";
    case SetKind::intersection: return "intersection";
    case SetKind::scaled: return "scaled";
  }
  return "unknown";
}

SetKind parse_set_kind(const std::string& name) {
  for (SetKind k : {SetKind::ball, SetKind::box, SetKind::ellipsoid, SetKind::intersection, SetKind::scaled}) {
    if (to_string(k) == name) return k;
  }
  throw Error(ErrorKind::parameter, "unknown set kind '" + name + "'");
}

std::string to_string(VolumeMethod method) {
  switch (method) {
    case VolumeMethod::exact: return "exact";
    case VolumeMethod::mc_hit_or_miss: return "mc_hit_or_miss";
    case VolumeMethod::occupancy_grid: return "occupancy_grid";
  }
  return "unknown";
}

SetSpec SetSpec::ball(std::size_t n, double radius, std::vector<double> center) {
  SetSpec s;
  s.kind = SetKind::ball;
  s.n = n;
  s.radius = radius;
  s.center = std::move(center);
  s.validate();
  return s;
}

SetSpec SetSpec::box(std::vector<double> half_widths, std::vector<double> center) {
  SetSpec s;
  s.kind = SetKind::box;
  s.n = half_widths.size();
  s.axes = std::move(half_widths);
  s.center = std::move(center);
  s.validate();
  return s;
}

SetSpec SetSpec::ellipsoid(std::vector<double> semi_axes, std::vector<double> center) {
  SetSpec s;
  s.kind = SetKind::ellipsoid;
  s.n = semi_axes.size();
  s.axes = std::move(semi_axes);
  s.center = std::move(center);
  s.validate();
  return s;
}

SetSpec SetSpec::intersection(std::vector<SetSpec> members) {
  SetSpec s;
  s.kind = SetKind::intersection;
  s.n = members.empty() ? 0 : members.front().n;
  s.parts = std::move(members);
  s.validate();
  return s;
}

SetSpec SetSpec::scaled(SetSpec base, double factor) {
  SetSpec s;
  s.kind = SetKind::scaled;
  s.n = base.n;
  s.factor = factor;
  s.parts.push_back(std::move(base));
  s.validate();
  return s;
}

void SetSpec::validate() const {
  require(n >= 1, ErrorKind::parameter, "set dimension must be >= 1");
  require(center.empty() || center.size() == n, ErrorKind::parameter, "set center has wrong dimension");
  for (double c : center) require(std::isfinite(c), ErrorKind::parameter, "set center must be finite");
  switch (kind) {
    case SetKind::ball:
      require(std::isfinite(radius) && radius > 0.0, ErrorKind::parameter, "ball radius must be positive");
      break;
    case SetKind::box:
    case SetKind::ellipsoid:
      require(axes.size() == n, ErrorKind::parameter, "axis vector has wrong dimension");
      for (double a : axes) {
        require(std::isfinite(a) && a > 0.0, ErrorKind::parameter, "half-widths and semi-axes must be positive");
      }
      break;
    case SetKind::intersection:
      require(!parts.empty(), ErrorKind::parameter, "intersection needs at least one member");
      for (const auto& p : parts) {
        require(p.n == n, ErrorKind::parameter, "intersection members must share a dimension");
        p.validate();
      }
      break;
    case SetKind::scaled:
      require(parts.size() == 1, ErrorKind::parameter, "scaled set needs exactly one base");
      require(std::isfinite(factor) && factor > 0.0, ErrorKind::parameter, "scale factor must be positive");
      require(parts.front().n == n, ErrorKind::parameter, "scaled set dimension mismatch");
      parts.front().validate();
      break;
  }
}

bool SetSpec::contains(const double* x) const {
  switch (kind) {
    case SetKind::ball: {
      double r2 = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double d = x[i] - center_at(*this, i);
        r2 += d * d;
      }
      return r2 <= radius * radius;
    }
    case SetKind::box:
      for (std::size_t i = 0; i < n; ++i) {
        if (std::abs(x[i] - center_at(*this, i)) > axes[i]) return false;
      }
      return true;
    case SetKind::ellipsoid: {
      double q = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double d = (x[i] - center_at(*this, i)) / axes[i];
        q += d * d;
      }
      return q <= 1.0;
    }
    case SetKind::intersection:
      return std::all_of(parts.begin(), parts.end(), [x](const SetSpec& p) { return p.contains(x); });
    case SetKind::scaled: {
      std::vector<double> y(x, x + n);
      for (double& v : y) v /= factor;
      return parts.front().contains(y.data());
    }
  }
  return false;
}

void SetSpec::bounding_box(double* lo, double* hi) const {
  switch (kind) {
    case SetKind::ball:
      for (std::size_t i = 0; i < n; ++i) {
        lo[i] = center_at(*this, i) - radius;
        hi[i] = center_at(*this, i) + radius;
      }
      return;
    case SetKind::box:
    case SetKind::ellipsoid:
      for (std::size_t i = 0; i < n; ++i) {
        lo[i] = center_at(*this, i) - axes[i];
        hi[i] = center_at(*this, i) + axes[i];
      }
      return;
    case SetKind::intersection: {
      std::vector<double> plo(n), phi(n);
      for (std::size_t i = 0; i < n; ++i) {
        lo[i] = -std::numeric_limits<double>::infinity();
        hi[i] = std::numeric_limits<double>::infinity();
      }
      for (const auto& p : parts) {
        p.bounding_box(plo.data(), phi.data());
        for (std::size_t i = 0; i < n; ++i) {
          lo[i] = std::max(lo[i], plo[i]);
          hi[i] = std::min(hi[i], phi[i]);
        }
      }
      for (std::size_t i = 0; i < n; ++i) {
        require(lo[i] < hi[i], ErrorKind::degenerate_input, "intersection has an empty bounding box");
      }
      return;
    }
    case SetKind::scaled:
      parts.front().bounding_box(lo, hi);
      for (std::size_t i = 0; i < n; ++i) {
        lo[i] *= factor;
        hi[i] *= factor;
      }
      return;
  }
}

bool SetSpec::exact() const {
  if (kind == SetKind::intersection) return false;
  if (kind == SetKind::scaled) return parts.front().exact();
  return true;
}

double log_unit_ball_volume(std::size_t n) {
  const double h = 0.5 * static_cast<double>(n);
  return h * std::log(std::numbers::pi) - std::lgamma(h + 1.0);
}

double unit_ball_volume(std::size_t n) { return std::exp(log_unit_ball_volume(n)); }

VolumeEstimate volume(const SetSpec& set, const VolumeConfig& cfg) {
  set.validate();
  if (set.exact()) {
    require(set.n <= kExactDimLimit, ErrorKind::parameter, "exact volumes are limited to n <= 64");
    return {std::exp(log_exact_volume(set)), 0.0, 0, VolumeMethod::exact};
  }
  require(set.n <= kMcDimLimit, ErrorKind::parameter, "Monte Carlo volumes are limited to n <= 10");
  require(cfg.samples >= 1, ErrorKind::parameter, "volume needs at least one sample");
  // Hit-or-miss from the proposal region of the outermost intersection,
  // scaled by any enclosing scale factors.
  const SetSpec* core = &set;
  double scale = 1.0;
  while (core->kind == SetKind::scaled) {
    scale *= std::pow(core->factor, static_cast<double>(core->n));
    core = &core->parts.front();
  }
  const std::size_t choice = choose_proposal(*core);
  SetSpec proposal;
  if (choice < core->parts.size()) {
    proposal = core->parts[choice];
  } else {
    std::vector<double> lo(core->n), hi(core->n);
    core->bounding_box(lo.data(), hi.data());
    proposal = box_from_bounds(lo, hi);
  }
  const double proposal_volume = volume(proposal, cfg).value;
  SetSampler sampler(proposal);
  std::mt19937_64 engine(stream_seed(cfg.seed, 0));
  std::vector<double> x(core->n);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < cfg.samples; ++i) {
    sampler.draw(engine, x.data());
    if (core->contains(x.data())) ++hits;
  }
  const double m = static_cast<double>(cfg.samples);
  const double p = static_cast<double>(hits) / m;
  return {scale * proposal_volume * p, scale * proposal_volume * std::sqrt(p * (1.0 - p) / m), cfg.samples,
          VolumeMethod::mc_hit_or_miss};
}

SetSampler::SetSampler(const SetSpec& set) : set_(set) {
  set_.validate();
  if (set_.kind == SetKind::intersection) {
    proposal_ = choose_proposal(set_);
    proposal_is_box_ = proposal_ >= set_.parts.size();
  }
}

double SetSampler::acceptance_rate() const noexcept {
  return proposed_ == 0 ? 1.0 : static_cast<double>(accepted_) / static_cast<double>(proposed_);
}

void SetSampler::draw(std::mt19937_64& engine, double* out) {
  if (set_.kind != SetKind::intersection) {
    draw_direct(set_, engine, out);
    return;
  }
  thread_local std::vector<double> lo, hi;
  if (proposal_is_box_) {
    lo.resize(set_.n);
    hi.resize(set_.n);
    set_.bounding_box(lo.data(), hi.data());
  }
  for (std::size_t attempt = 0; attempt < 10'000'000; ++attempt) {
    if (proposal_is_box_) {
      for (std::size_t i = 0; i < set_.n; ++i) out[i] = lo[i] + (hi[i] - lo[i]) * unit_(engine);
    } else {
      draw_direct(set_.parts[proposal_], engine, out);
    }
    ++proposed_;
    if (set_.contains(out)) {
      ++accepted_;
      return;
    }
  }
  throw Error(ErrorKind::degenerate_input, "rejection sampler found no point of the intersection");
}

void SetSampler::draw_boundary_weighted(std::mt19937_64& engine, double* out) {
  if (set_.kind == SetKind::intersection) {
    draw(engine, out);
    return;
  }
  draw_direct(set_, engine, out, true);
}

void SetSampler::draw_direct(const SetSpec& s, std::mt19937_64& engine, double* out, bool outward) {
  switch (s.kind) {
    case SetKind::ball:
    case SetKind::ellipsoid: {
      double norm2 = 0.0;
      for (std::size_t i = 0; i < s.n; ++i) {
        out[i] = normal_(engine);
        norm2 += out[i] * out[i];
      }
      // Outward draws use radius U^(1/(4n)), concentrated within ~1/(4n) of
      // the boundary.
      const double power = (outward ? 4.0 : 1.0) * static_cast<double>(s.n);
      const double r = std::pow(unit_(engine), 1.0 / power) / std::sqrt(norm2);
      for (std::size_t i = 0; i < s.n; ++i) {
        const double axis = s.kind == SetKind::ball ? s.radius : s.axes[i];
        out[i] = out[i] * r * axis + center_at(s, i);
      }
      return;
    }
    case SetKind::box:
      for (std::size_t i = 0; i < s.n; ++i) {
        const double u = unit_(engine);
        // Arcsine law on [-1, 1] for outward draws.
        const double t = outward ? std::sin(std::numbers::pi * (u - 0.5)) : 2.0 * u - 1.0;
        out[i] = center_at(s, i) + s.axes[i] * t;
      }
      return;
    case SetKind::scaled:
      draw_direct(s.parts.front(), engine, out, outward);
      for (std::size_t i = 0; i < s.n; ++i) out[i] *= s.factor;
      return;
    case SetKind::intersection: {
      SetSampler inner(s);
      inner.draw(engine, out);
      proposed_ += inner.proposed_;
      accepted_ += inner.accepted_;
      return;
    }
  }
}

std::string to_string(ThetaKind kind) {
  switch (kind) {
    case ThetaKind::full: return "full";
    case ThetaKind::inner_product_leq: return "inner_product_leq";
    case ThetaKind::sum_norm_leq: return "sum_norm_leq";
    case ThetaKind::complement_fraction: return "complement_fraction";
    case ThetaKind::custom: return "custom";
  }
  return "unknown";
}

ThetaKind parse_theta_kind(const std::string& name) {
  for (ThetaKind k : {ThetaKind::full, ThetaKind::inner_product_leq, ThetaKind::sum_norm_leq,
                      ThetaKind::complement_fraction, ThetaKind::custom}) {
    if (to_string(k) == name) return k;
  }
  throw Error(ErrorKind::parameter, "unknown theta kind '" + name + "'");
}

void register_theta_predicate(const std::string& id, ThetaPredicate predicate) {
  require(!id.empty() && static_cast<bool>(predicate), ErrorKind::parameter,
          "custom predicates need an id and a callable");
  std::lock_guard lock(registry_mutex());
  registry()[id] = std::move(predicate);
}

ThetaSpec ThetaSpec::full() { return {}; }

ThetaSpec ThetaSpec::inner_product_leq(double c) {
  ThetaSpec t;
  t.kind = ThetaKind::inner_product_leq;
  t.value = c;
  t.validate();
  return t;
}

ThetaSpec ThetaSpec::sum_norm_leq(double radius) {
  ThetaSpec t;
  t.kind = ThetaKind::sum_norm_leq;
  t.value = radius;
  t.validate();
  return t;
}

ThetaSpec ThetaSpec::complement_fraction(double fraction, std::uint64_t seed, double cell) {
  ThetaSpec t;
  t.kind = ThetaKind::complement_fraction;
  t.value = fraction;
  t.seed = seed;
  t.cell = cell;
  t.validate();
  return t;
}

ThetaSpec ThetaSpec::custom(std::string id) {
  ThetaSpec t;
  t.kind = ThetaKind::custom;
  t.id = std::move(id);
  t.validate();
  return t;
}

void ThetaSpec::validate() const {
  switch (kind) {
    case ThetaKind::full:
      break;
    case ThetaKind::inner_product_leq:
      require(std::isfinite(value), ErrorKind::parameter, "inner-product bound must be finite");
      break;
    case ThetaKind::sum_norm_leq:
      require(std::isfinite(value) && value > 0.0, ErrorKind::parameter, "sum-norm radius must be positive");
      break;
    case ThetaKind::complement_fraction:
      require(value >= 0.0 && value < 1.0, ErrorKind::parameter, "removed fraction must lie in [0, 1)");
      require(std::isfinite(cell) && cell > 0.0, ErrorKind::parameter, "lattice spacing must be positive");
      break;
    case ThetaKind::custom:
      lookup_predicate(id);
      break;
  }
}

bool ThetaSpec::contains(const double* x, const double* y, std::size_t n) const {
  switch (kind) {
    case ThetaKind::full:
      return true;
    case ThetaKind::inner_product_leq: {
      double dot = 0.0;
      for (std::size_t i = 0; i < n; ++i) dot += x[i] * y[i];
      return dot <= value;
    }
    case ThetaKind::sum_norm_leq: {
      double s2 = 0.0;
      for (std::size_t i = 0; i < n; ++i) s2 += (x[i] + y[i]) * (x[i] + y[i]);
      return s2 <= value * value;
    }
    case ThetaKind::complement_fraction: {
      std::uint64_t key = mix64(seed);
      for (std::size_t i = 0; i < n; ++i) {
        key = mix64(key ^ static_cast<std::uint64_t>(static_cast<std::int64_t>(std::floor(x[i] / cell))));
      }
      for (std::size_t i = 0; i < n; ++i) {
        key = mix64(key ^ static_cast<std::uint64_t>(static_cast<std::int64_t>(std::floor(y[i] / cell))));
      }
      const double u = static_cast<double>(key >> 11) * 0x1.0p-53;
      return u >= value;
    }
    case ThetaKind::custom:
      return lookup_predicate(id)(x, y, n);
  }
  return false;
}

std::size_t default_grid_cells(std::size_t n) {
  switch (n) {
    case 1: return 4096;
    case 2: return 512;
    case 3: return 128;
    case 4: return 40;
    case 5: return 20;
    default: return 12;
  }
}

RestrictedSumResult restricted_sum_volume(const SetSpec& a, const SetSpec& b, const ThetaSpec& theta,
                                          const RestrictedSumConfig& cfg) {
  a.validate();
  b.validate();
  theta.validate();
  require(a.n == b.n, ErrorKind::parameter, "A and B must share a dimension");
  const std::size_t n = a.n;
  require(n <= kThetaDimLimit, ErrorKind::parameter, "theta volumes are limited to n <= 12");
  require(cfg.theta_only || n <= kSumDimLimit, ErrorKind::parameter,
          "sumset volumes are limited to n <= 6");
  require(cfg.pair_samples >= 1 && cfg.streams >= 1, ErrorKind::parameter,
          "restricted sum needs samples and streams");

  const VolumeConfig vcfg{std::max<std::size_t>(cfg.pair_samples, 100'000), stream_seed(cfg.seed, ~0ULL)};
  const VolumeEstimate va = volume(a, vcfg);
  const VolumeEstimate vb = volume(b, {vcfg.samples, stream_seed(cfg.seed, ~1ULL)});

  RestrictedSumResult result;
  result.volume_a = va;
  result.volume_b = vb;
  const std::size_t g = cfg.theta_only ? 0 : (cfg.grid_cells_per_axis ? cfg.grid_cells_per_axis
                                                                       : default_grid_cells(n));
  result.grid_cells_per_axis = g;
  std::vector<double> lo(n), hi(n), width(n);
  std::size_t total_cells = 1;
  if (!cfg.theta_only) {
    require(g >= 2, ErrorKind::parameter, "occupancy grid needs >= 2 cells per axis");
    std::vector<double> blo(n), bhi(n);
    a.bounding_box(lo.data(), hi.data());
    b.bounding_box(blo.data(), bhi.data());
    for (std::size_t i = 0; i < n; ++i) {
      lo[i] += blo[i];
      hi[i] += bhi[i];
      width[i] = (hi[i] - lo[i]) / static_cast<double>(g);
      require(total_cells <= (std::size_t{1} << 28) / g, ErrorKind::parameter, "occupancy grid too large");
      total_cells *= g;
    }
  }
  std::vector<std::atomic<unsigned char>> marks(cfg.theta_only ? 0 : total_cells);

  struct StreamStats {
    std::size_t samples = 0;
    std::size_t hits = 0;
    double acceptance_a = 1.0;
    double acceptance_b = 1.0;
  };
  std::vector<StreamStats> stats(cfg.streams);
  const std::size_t per_stream = cfg.pair_samples / cfg.streams;
  const std::size_t extra = cfg.pair_samples % cfg.streams;

  auto mark = [&](const std::vector<double>& x, const std::vector<double>& y) {
    std::size_t index = 0;
    for (std::size_t k = n; k-- > 0;) {
      const double t = (x[k] + y[k] - lo[k]) / width[k];
      const std::size_t c = std::min(g - 1, static_cast<std::size_t>(std::max(0.0, t)));
      index = index * g + c;
    }
    marks[index].store(1, std::memory_order_relaxed);
  };

  std::vector<double> mid(n), center_a(n), center_b(n);
  double scale_a = 0.0;
  double scale_b = 0.0;
  if (!cfg.theta_only) {
    std::vector<double> tlo(n), thi(n);
    a.bounding_box(tlo.data(), thi.data());
    for (std::size_t k = 0; k < n; ++k) {
      scale_a = std::max(scale_a, 0.5 * (thi[k] - tlo[k]));
      center_a[k] = 0.5 * (thi[k] + tlo[k]);
    }
    b.bounding_box(tlo.data(), thi.data());
    for (std::size_t k = 0; k < n; ++k) {
      scale_b = std::max(scale_b, 0.5 * (thi[k] - tlo[k]));
      center_b[k] = 0.5 * (thi[k] + tlo[k]);
    }
    for (std::size_t k = 0; k < n; ++k) mid[k] = 0.5 * (lo[k] + hi[k]);
  }
  // Outward pushes from a pair inside Theta. Each move picks a direction
  // (dx, dy) and bisects for the largest t with (x + t dx, y + t dy) still
  // feasible; every accepted endpoint is a witness and gets marked.
  auto walk = [&](std::vector<double>& x, std::vector<double>& y, std::mt19937_64& engine) {
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_int_distribution<int> pick_move(0, 4);
    std::uniform_int_distribution<std::size_t> pick_axis(0, n - 1);
    std::vector<double> dx(n), dy(n), xt(n), yt(n);
    const double reach = 2.0 * (scale_a + scale_b);
    auto feasible = [&](double t) {
      for (std::size_t k = 0; k < n; ++k) {
        xt[k] = x[k] + t * dx[k];
        yt[k] = y[k] + t * dy[k];
      }
      return a.contains(xt.data()) && b.contains(yt.data()) && theta.contains(xt.data(), yt.data(), n);
    };
    for (std::size_t step = 0; step < cfg.walk_steps; ++step) {
      std::fill(dx.begin(), dx.end(), 0.0);
      std::fill(dy.begin(), dy.end(), 0.0);
      switch (pick_move(engine)) {
        case 0:  // both points away from their centres
          for (std::size_t k = 0; k < n; ++k) {
            dx[k] = x[k] - center_a[k];
            dy[k] = y[k] - center_b[k];
          }
          break;
        case 1:
          for (std::size_t k = 0; k < n; ++k) dx[k] = x[k] - center_a[k];
          break;
        case 2:
          for (std::size_t k = 0; k < n; ++k) dy[k] = y[k] - center_b[k];
          break;
        case 3: {  // one coordinate of the sum outwards
          const std::size_t k = pick_axis(engine);
          const double sign = x[k] + y[k] >= mid[k] ? 1.0 : -1.0;
          dx[k] = sign * scale_a;
          dy[k] = sign * scale_b;
          break;
        }
        default: {  // random direction, oriented away from the sum's centre
          double dot = 0.0;
          for (std::size_t k = 0; k < n; ++k) {
            dx[k] = scale_a * normal(engine);
            dy[k] = scale_b * normal(engine);
            dot += (dx[k] + dy[k]) * (x[k] + y[k] - mid[k]);
          }
          if (dot < 0.0) {
            for (std::size_t k = 0; k < n; ++k) {
              dx[k] = -dx[k];
              dy[k] = -dy[k];
            }
          }
          break;
        }
      }
      double norm = 0.0;
      for (std::size_t k = 0; k < n; ++k) norm += dx[k] * dx[k] + dy[k] * dy[k];
      if (!(norm > 0.0)) continue;
      double good = 0.0;
      double bad = reach / std::sqrt(norm);
      for (int it = 0; it < 14; ++it) {
        const double t = 0.5 * (good + bad);
        if (feasible(t)) {
          good = t;
        } else {
          bad = t;
        }
      }
      if (good > 0.0 && feasible(good)) {
        x.swap(xt);
        y.swap(yt);
        mark(x, y);
      }
    }
  };

  parallel_for(cfg.streams, cfg.threads, [&](std::size_t s) {
    std::mt19937_64 engine(stream_seed(cfg.seed, s));
    SetSampler sa(a);
    SetSampler sb(b);
    std::vector<double> x(n), y(n);
    std::size_t walk_counter = 0;
    StreamStats& st = stats[s];
    st.samples = per_stream + (s < extra ? 1 : 0);
    for (std::size_t i = 0; i < st.samples; ++i) {
      sa.draw(engine, x.data());
      sb.draw(engine, y.data());
      if (theta.contains(x.data(), y.data(), n)) {
        ++st.hits;
        if (!cfg.theta_only) mark(x, y);
      }
      if (cfg.theta_only || !cfg.boundary_coverage) continue;
      sa.draw_boundary_weighted(engine, x.data());
      sb.draw_boundary_weighted(engine, y.data());
      if (!theta.contains(x.data(), y.data(), n)) continue;
      mark(x, y);
      if (cfg.walk_every > 0 && ++walk_counter % cfg.walk_every == 0) walk(x, y, engine);
    }
    st.acceptance_a = sa.acceptance_rate();
    st.acceptance_b = sb.acceptance_rate();
  });

  double acc_a = 0.0;
  double acc_b = 0.0;
  for (const auto& st : stats) {
    result.hits += st.hits;
    acc_a += st.acceptance_a;
    acc_b += st.acceptance_b;
  }
  result.acceptance_a = acc_a / static_cast<double>(cfg.streams);
  result.acceptance_b = acc_b / static_cast<double>(cfg.streams);
  require(result.hits > 0, ErrorKind::degenerate_input, "no sampled pair fell inside Theta");

  const double m = static_cast<double>(cfg.pair_samples);
  const double f = static_cast<double>(result.hits) / m;
  result.theta_fraction = f;
  result.fraction_stderr = std::sqrt(f * (1.0 - f) / m);
  const double vab = va.value * vb.value;
  const double rel_ab = std::hypot(va.value > 0 ? va.std_error / va.value : 0.0,
                                   vb.value > 0 ? vb.std_error / vb.value : 0.0);
  result.theta_volume = {f * vab, vab * std::hypot(result.fraction_stderr, f * rel_ab), cfg.pair_samples,
                         VolumeMethod::mc_hit_or_miss};

  if (!cfg.theta_only) {
    std::vector<unsigned char> flat(total_cells);
    for (std::size_t i = 0; i < total_cells; ++i) flat[i] = marks[i].load(std::memory_order_relaxed);
    std::vector<std::atomic<unsigned char>>().swap(marks);
    double cell_volume = 1.0;
    for (double w : width) cell_volume *= w;
    // Build the pyramid finest first. A level counts as fully covered when
    // almost no child of an interior cell of the next coarser level is
    // unmarked: such children lie deep inside the sum, so a gap there is a
    // sampling hole rather than geometry.
    std::vector<std::vector<unsigned char>> pyramid{std::move(flat)};
    std::vector<std::size_t> sizes{g};
    while (sizes.back() % 2 == 0 && sizes.back() / 2 >= 4 && sizes.size() < 5) {
      pyramid.push_back(coarsen(pyramid.back(), sizes.back(), n));
      sizes.push_back(sizes.back() / 2);
    }
    std::vector<std::vector<unsigned char>> inner;
    for (std::size_t l = 0; l < pyramid.size(); ++l) inner.push_back(interior_flags(pyramid[l], sizes[l], n));
    std::size_t chosen = pyramid.size() - 1;
    bool found = false;
    for (std::size_t l = 0; l < pyramid.size(); ++l) {
      const double volume_unit = cell_volume * std::pow(2.0, static_cast<double>(n * l));
      RestrictedSumResult::GridLevel level{sizes[l], 0.0, 0.0, 0.0};
      std::size_t marked = 0;
      std::size_t interior = 0;
      for (std::size_t i = 0; i < pyramid[l].size(); ++i) {
        marked += pyramid[l][i];
        interior += inner[l][i];
      }
      level.interior = static_cast<double>(interior) * volume_unit;
      level.marked = static_cast<double>(marked) * volume_unit;
      if (l + 1 < pyramid.size()) {
        std::size_t holes = 0;
        std::size_t children = 0;
        for (std::size_t i = 0; i < pyramid[l].size(); ++i) {
          if (!inner[l + 1][parent_index(i, sizes[l], n)]) continue;
          ++children;
          if (!pyramid[l][i]) ++holes;
        }
        level.hole_fraction = children ? static_cast<double>(holes) / static_cast<double>(children) : 1.0;
      }
      if (!found && level.hole_fraction <= kHoleTolerance) {
        chosen = l;
        found = true;
      }
      result.levels.push_back(level);
    }
    const auto& level = result.levels[chosen];
    result.grid_cells_per_axis = level.cells_per_axis;
    result.sum_interior = level.interior;
    result.sum_marked = level.marked;
    // Marked cells overshoot the boundary by about half a cell and the eroded
    // interior falls short by about one and a half, so the estimate sits a
    // quarter of the way down the bracket. The 99% interval spans the whole
    // bracket.
    const double gap = level.marked - level.interior;
    result.sum_volume = {level.marked - 0.25 * gap, 0.75 * gap / kZ99, cfg.pair_samples,
                         VolumeMethod::occupancy_grid};
    result.low_bias = true;
  }
  return result;
}

}  // namespace fepi
