#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

namespace fepi {

/// Two-sided 99% normal quantile.
inline constexpr double kZ99 = 2.5758293035489004;

enum class SetKind { ball, box, ellipsoid, intersection, scaled };

std::string to_string(SetKind kind);
SetKind parse_set_kind(const std::string& name);

/// A set in R^n. Balls, boxes and ellipsoids are axis-aligned and carry an
/// optional center (empty = origin); `scaled` is t * base about the origin.
struct SetSpec {
  SetKind kind = SetKind::ball;
  std::size_t n = 1;
  double radius = 1.0;
  /// Half-widths (box) or semi-axes (ellipsoid).
  std::vector<double> axes;
  std::vector<double> center;
  /// Members of an intersection, or the single base of a scaled set.
  std::vector<SetSpec> parts;
  double factor = 1.0;

  static SetSpec ball(std::size_t n, double radius, std::vector<double> center = {});
  static SetSpec box(std::vector<double> half_widths, std::vector<double> center = {});
  static SetSpec ellipsoid(std::vector<double> semi_axes, std::vector<double> center = {});
  static SetSpec intersection(std::vector<SetSpec> members);
  static SetSpec scaled(SetSpec base, double factor);

  /// Throws a parameter error for nonpositive sizes or mismatched dimensions.
  void validate() const;
  bool contains(const double* x) const;
  void bounding_box(double* lo, double* hi) const;
  /// True when the volume has a closed form.
  bool exact() const;
};

enum class VolumeMethod { exact, mc_hit_or_miss, occupancy_grid };
std::string to_string(VolumeMethod method);

struct VolumeEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t samples = 0;
  VolumeMethod method = VolumeMethod::exact;
};

/// Volume of the Euclidean unit ball in R^n, and its logarithm.
double unit_ball_volume(std::size_t n);
double log_unit_ball_volume(std::size_t n);

struct VolumeConfig {
  std::size_t samples = 1'000'000;
  std::uint64_t seed = 1;
};

/// Exact for ball/box/ellipsoid (n <= 64) and scalings of those; hit-or-miss
/// Monte Carlo for intersections (n <= 10).
VolumeEstimate volume(const SetSpec& set, const VolumeConfig& cfg = {});

/// Uniform sampler on a set. Intersections are sampled by rejection from
/// their member of smallest exact volume.
class SetSampler {
 public:
  explicit SetSampler(const SetSpec& set);
  void draw(std::mt19937_64& engine, double* out);
  /// A draw from a law with the same support that puts extra mass near the
  /// boundary (radius or coordinates pushed outwards). Intersections fall
  /// back to uniform draws.
  void draw_boundary_weighted(std::mt19937_64& engine, double* out);
  /// Accepted / proposed draws so far (1 for direct samplers).
  double acceptance_rate() const noexcept;

 private:
  void draw_direct(const SetSpec& s, std::mt19937_64& engine, double* out, bool outward = false);

  SetSpec set_;
  // Member of an intersection used as the rejection proposal.
  std::size_t proposal_ = 0;
  bool proposal_is_box_ = false;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> unit_{0.0, 1.0};
  std::size_t proposed_ = 0;
  std::size_t accepted_ = 0;
};

enum class ThetaKind { full, inner_product_leq, sum_norm_leq, complement_fraction, custom };

std::string to_string(ThetaKind kind);
ThetaKind parse_theta_kind(const std::string& name);

using ThetaPredicate = std::function<bool(const double* x, const double* y, std::size_t n)>;

/// Adds a named predicate usable through ThetaSpec::custom. Registering an
/// existing id replaces it. Built in: "first_coordinates_same_sign",
/// "x_first_leq_y_first".
void register_theta_predicate(const std::string& id, ThetaPredicate predicate);

/// Restriction set Theta within A x B.
///   inner_product_leq  <x, y> <= value
///   sum_norm_leq       |x + y| <= value
///   complement_fraction removes a seeded pseudo-random fraction `value` of
///     A x B: (x, y) is quantized to a lattice of spacing `cell` and the
///     lattice cell is dropped when its hash falls below `value`. Specs with
///     the same seed and cell are nested in `value`.
struct ThetaSpec {
  ThetaKind kind = ThetaKind::full;
  double value = 0.0;
  std::uint64_t seed = 0;
  double cell = 0.05;
  std::string id;

  static ThetaSpec full();
  static ThetaSpec inner_product_leq(double c);
  static ThetaSpec sum_norm_leq(double radius);
  static ThetaSpec complement_fraction(double fraction, std::uint64_t seed, double cell = 0.05);
  static ThetaSpec custom(std::string id);

  void validate() const;
  bool contains(const double* x, const double* y, std::size_t n) const;
};

struct RestrictedSumConfig {
  std::size_t pair_samples = 1'000'000;
  /// Occupancy grid resolution; 0 picks a per-dimension default.
  std::size_t grid_cells_per_axis = 0;
  std::uint64_t seed = 1;
  /// Independent sample streams; results depend on this, never on threads.
  std::size_t streams = 16;
  unsigned threads = 1;
  /// Skip the occupancy grid (theta volume only).
  bool theta_only = false;
  /// Each uniform pair is followed by one boundary-weighted pair that only
  /// feeds the occupancy grid. The sumset depends on the support of the
  /// sampling law alone, and the extra pairs reach its extremes far more
  /// often.
  bool boundary_coverage = true;
  /// Every `walk_every`-th boundary-weighted pair inside Theta starts a
  /// greedy random walk that pushes x + y away from the centre of the sum's
  /// bounding box while staying in Theta; every visited sum is marked. 0
  /// disables the walks.
  std::size_t walk_every = 8;
  std::size_t walk_steps = 6;
};

std::size_t default_grid_cells(std::size_t n);

struct RestrictedSumResult {
  VolumeEstimate theta_volume;
  VolumeEstimate sum_volume;
  VolumeEstimate volume_a;
  VolumeEstimate volume_b;
  /// lambda(Theta) / (lambda(A) lambda(B)) and its standard error.
  double theta_fraction = 0.0;
  double fraction_stderr = 0.0;
  std::size_t hits = 0;
  /// Occupancy bracket on the selected grid: cells whose whole 3^n
  /// neighbourhood is marked, and all marked cells (times cell volume).
  double sum_interior = 0.0;
  double sum_marked = 0.0;
  /// Resolution the estimate was taken at.
  std::size_t grid_cells_per_axis = 0;
  struct GridLevel {
    std::size_t cells_per_axis = 0;
    double interior = 0.0;
    double marked = 0.0;
    /// Unmarked share of the children of the next coarser level's interior
    /// cells (0 for the coarsest level).
    double hole_fraction = 0.0;
  };
  /// The requested grid and its 2x coarsenings, finest first. The estimate
  /// uses the finest level with hole_fraction <= 1e-3.
  std::vector<GridLevel> levels;
  /// The grid estimate is biased low for sparsely covered regions.
  bool low_bias = true;
  double acceptance_a = 1.0;
  double acceptance_b = 1.0;
};

/// lambda(Theta) by hit-or-miss over A x B and lambda(A +_Theta B) by an
/// occupancy grid over the Minkowski-sum bounding box.
RestrictedSumResult restricted_sum_volume(const SetSpec& a, const SetSpec& b, const ThetaSpec& theta,
                                          const RestrictedSumConfig& cfg = {});

}  // namespace fepi
