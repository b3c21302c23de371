#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace fepi {

/// Discretization of the support window used by the measure constructors.
struct GridConfig {
  std::size_t cells = 2048;
  /// Factor by which the window exceeds the measure's support.
  double padding = 1.25;

  /// Throws a parameter error when the config cannot be used. Convolution
  /// inputs need at least 64 cells.
  void validate(bool for_convolution = false) const;
};

struct Atom {
  double location = 0.0;
  double weight = 0.0;
};

/// Compactly supported probability measure on the real line: a cell-averaged
/// density on a uniform grid over [lo, hi] plus a finite list of atoms.
///
/// Immutable once built. The constructor validates the layout and rescales
/// so that the total mass is 1.
class Measure {
 public:
  Measure(double lo, double hi, std::vector<double> density, std::vector<Atom> atoms = {});

  double lo() const noexcept { return lo_; }
  double hi() const noexcept { return hi_; }
  std::size_t cells() const noexcept { return density_.size(); }
  double cell_width() const noexcept { return width_; }
  double node(std::size_t j) const noexcept { return lo_ + static_cast<double>(j) * width_; }
  double midpoint(std::size_t i) const noexcept { return lo_ + (static_cast<double>(i) + 0.5) * width_; }

  std::span<const double> density() const noexcept { return density_; }
  std::span<const Atom> atoms() const noexcept { return atoms_; }
  bool has_atoms() const noexcept { return !atoms_.empty(); }
  double atom_mass() const noexcept;
  double continuous_mass() const noexcept;

  double mean() const;
  double variance() const;

  /// Smallest / largest point carrying mass (cell edges for the density).
  double support_lo() const noexcept;
  double support_hi() const noexcept;

  /// mu((-inf, x]).
  double cdf(double x) const noexcept;
  /// Left-continuous inverse of the CDF, u in [0, 1].
  double quantile(double u) const;

  /// Location of the point mass when all mass sits (within `tol`) on one atom.
  std::optional<double> point_mass_location(double tol = 1e-9) const noexcept;

 private:
  double lo_;
  double hi_;
  double width_;
  std::vector<double> density_;
  std::vector<Atom> atoms_;  // sorted by location, distinct locations
};

enum class Family { semicircle, bernoulli, arcsine, uniform, free_poisson };

Family parse_family(const std::string& name);
std::string to_string(Family family);

/// Standard test measures.
///   semicircle   {variance[, center]}
///   bernoulli    {p, a, b}            atoms a:p, b:1-p
///   arcsine      {radius[, center]}   density 1/(pi sqrt(r^2 - x^2))
///   uniform      {a, b}
///   free_poisson {rate[, jump]}       Marchenko-Pastur law
/// Edge cells carry exact cell integrals of the density.
Measure standard_family(Family family, std::span<const double> params, const GridConfig& grid = {});

Measure point_mass(double location, const GridConfig& grid = {});

/// Convex combination, re-gridded onto a common window.
Measure mixture(std::span<const Measure> components, std::span<const double> weights,
                const GridConfig& grid = {});

/// Exact transfer of the piecewise-constant density onto a new uniform grid;
/// atoms are kept as atoms. The window must contain the support.
Measure regrid(const Measure& mu, double lo, double hi, std::size_t cells);

/// Empirical measure with atoms of weight 1/size at each value.
Measure empirical_measure(std::span<const double> values);

/// Integral of t^p, p <= 16. Cells are integrated exactly against a
/// slope-limited linear reconstruction of the cell averages; atoms exactly.
double moment(const Measure& mu, int p);

/// Law of aX + b.
Measure affine_pushforward(const Measure& mu, double a, double b);

/// count i.i.d. draws by inverse CDF on the grid plus an atom lottery.
std::vector<double> sample(const Measure& mu, std::size_t count, std::uint64_t seed);

/// sup_x |F_mu(x) - F_nu(x)|, exact for the piecewise-linear / step CDFs.
double kolmogorov_distance(const Measure& mu, const Measure& nu);

/// Total-variation style L1 distance: integral |p - q| over the densities plus
/// the atom mismatch.
double l1_distance(const Measure& mu, const Measure& nu);

}  // namespace fepi
