#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "fepi/freeentropy.hpp"

using namespace fepi;

namespace {

constexpr double kPi = std::numbers::pi;

Measure family(Family f, std::vector<double> p) { return standard_family(f, p); }

// Log-energy of the unit-variance semicircle by nested quadrature, split at
// the log singularity.
double semicircle_log_energy_oracle() {
  boost::math::quadrature::tanh_sinh<double> rule;
  auto p = [](double t) { return std::sqrt(std::max(0.0, 4.0 - t * t)) / (2.0 * kPi); };
  auto inner = [&](double s) {
    auto f = [&](double t) { return t == s ? 0.0 : std::log(std::abs(s - t)) * p(t); };
    return rule.integrate(f, -2.0, s) + rule.integrate(f, s, 2.0);
  };
  return rule.integrate([&](double s) { return p(s) * inner(s); }, -2.0, 2.0);
}

}  // namespace

TEST(FreeEntropy, ConstantValue) { EXPECT_NEAR(chi_constant(), 0.75 + 0.5 * std::log(2.0 * kPi), 1e-15); }

TEST(FreeEntropy, SemicircleLogEnergyAgainstQuadrature) {
  const double oracle = semicircle_log_energy_oracle();
  EXPECT_NEAR(oracle, -0.25, 1e-8);
  EXPECT_NEAR(log_energy(family(Family::semicircle, {1.0})).value, oracle, 1e-4);
}

TEST(FreeEntropy, UniformChi) {
  const auto x = chi(family(Family::uniform, {0.0, 1.0}));
  EXPECT_FALSE(x.divergent);
  EXPECT_NEAR(x.value, -0.75 + 0.5 * std::log(2.0 * kPi), 1e-4);
}

TEST(FreeEntropy, ScalingAddsLog) {
  const Measure mu = family(Family::arcsine, {1.0});
  const double base = chi(mu).value;
  for (double a : {0.3, 2.0, -1.7}) EXPECT_NEAR(chi(affine_pushforward(mu, a, 0.4)).value, base + std::log(std::abs(a)), 2e-3);
}

TEST(FreeEntropy, AtomsDiverge) {
  const auto x = chi(point_mass(0.0));
  EXPECT_TRUE(x.divergent);
  EXPECT_TRUE(std::isinf(x.value) && x.value < 0);
  EXPECT_EQ(x.power(), 0.0);
}

TEST(FreeEntropy, EpiEqualityForSemicircles) {
  const auto rep = epi_deficit(family(Family::semicircle, {1.0}), family(Family::semicircle, {1.0}));
  EXPECT_NEAR(rep.deficit / rep.power_sum, 0.0, 2e-2);
  EXPECT_NEAR(rep.power_sum, 2.0 * rep.power_alpha, 2e-2 * rep.power_sum);
}

TEST(FreeEntropy, EpiDeficitNonnegative) {
  const auto rep = epi_deficit(family(Family::uniform, {0.0, 1.0}), family(Family::arcsine, {0.7}));
  const double scale = std::max({rep.power_alpha, rep.power_beta, rep.power_sum});
  EXPECT_GE(rep.deficit, -2e-2 * scale);
}

TEST(FreeEntropy, EpiWithAtomicInput) {
  // A point mass has zero power, so the deficit reduces to a translation.
  const auto rep = epi_deficit(point_mass(1.0), family(Family::semicircle, {1.0}));
  EXPECT_TRUE(rep.alpha_divergent);
  EXPECT_EQ(rep.power_alpha, 0.0);
  EXPECT_NEAR(rep.deficit, 0.0, 1e-3 * rep.power_beta);
}

TEST(FreeFisher, SemicircleIsInverseVariance) {
  EXPECT_NEAR(free_fisher(family(Family::semicircle, {1.0})), 1.0, 1e-3);
  EXPECT_NEAR(free_fisher(family(Family::semicircle, {4.0})), 0.25, 1e-3);
  EXPECT_NEAR(stam_deficit(family(Family::semicircle, {1.0}), family(Family::semicircle, {2.0})), 0.0, 5e-3);
}
