#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "fepi/error.hpp"
#include "fepi/measure.hpp"

using namespace fepi;

namespace {

Measure semicircle(double variance, double center = 0.0, GridConfig grid = {}) {
  const std::vector<double> p{variance, center};
  return standard_family(Family::semicircle, p, grid);
}

Measure uniform(double a, double b) {
  const std::vector<double> p{a, b};
  return standard_family(Family::uniform, p);
}

}  // namespace

TEST(Measure, SemicircleMomentsAreCatalan) {
  // Even moments of the variance-s semicircle are C_j s^j.
  for (double s : {0.5, 1.0, 3.0}) {
    const Measure mu = semicircle(s);
    EXPECT_NEAR(moment(mu, 1), 0.0, 1e-10);
    EXPECT_NEAR(moment(mu, 2), s, 2e-5 * s);
    EXPECT_NEAR(moment(mu, 4), 2.0 * s * s, 1e-4 * s * s);
    EXPECT_NEAR(moment(mu, 6), 5.0 * s * s * s, 3e-4 * s * s * s);
  }
}

TEST(Measure, UniformMeanAndVariance) {
  const Measure mu = uniform(-1.0, 3.0);
  EXPECT_NEAR(mu.mean(), 1.0, 1e-12);
  EXPECT_NEAR(mu.variance(), 16.0 / 12.0, 1e-6);
  EXPECT_NEAR(mu.support_lo(), -1.0, mu.cell_width());
  EXPECT_NEAR(mu.support_hi(), 3.0, mu.cell_width());
}

TEST(Measure, BernoulliIsPureAtoms) {
  const std::vector<double> p{0.25, -1.0, 2.0};
  const Measure mu = standard_family(Family::bernoulli, p);
  EXPECT_TRUE(mu.has_atoms());
  EXPECT_DOUBLE_EQ(mu.atom_mass(), 1.0);
  EXPECT_NEAR(mu.mean(), 0.25 * -1.0 + 0.75 * 2.0, 1e-14);
  EXPECT_NEAR(mu.cdf(0.0), 0.25, 1e-14);
  EXPECT_FALSE(mu.point_mass_location().has_value());
}

TEST(Measure, PointMassLocation) {
  const Measure mu = point_mass(1.5);
  ASSERT_TRUE(mu.point_mass_location().has_value());
  EXPECT_DOUBLE_EQ(*mu.point_mass_location(), 1.5);
  EXPECT_DOUBLE_EQ(moment(mu, 3), 1.5 * 1.5 * 1.5);
}

TEST(Measure, MixtureMeanIsWeightedMean) {
  const std::vector<Measure> parts{uniform(0.0, 1.0), point_mass(4.0), semicircle(1.0, -2.0)};
  const std::vector<double> w{0.5, 0.2, 0.3};
  const Measure mu = mixture(parts, w);
  EXPECT_NEAR(mu.continuous_mass() + mu.atom_mass(), 1.0, 1e-12);
  EXPECT_NEAR(mu.atom_mass(), 0.2, 1e-12);
  EXPECT_NEAR(mu.mean(), 0.5 * 0.5 + 0.2 * 4.0 + 0.3 * -2.0, 1e-4);
}

TEST(Measure, FreePoissonBelowRateOneHasAtomAtZero) {
  const std::vector<double> p{0.5};
  const Measure mu = standard_family(Family::free_poisson, p);
  EXPECT_NEAR(mu.atom_mass(), 0.5, 1e-12);
  // Mean rate * jump, variance rate * jump^2.
  EXPECT_NEAR(mu.mean(), 0.5, 1e-4);
  EXPECT_NEAR(mu.variance(), 0.5, 1e-3);
}

TEST(Measure, QuantileInvertsCdf) {
  const Measure mu = semicircle(1.0);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> x(-1.9, 1.9);
  for (int i = 0; i < 200; ++i) {
    const double v = x(rng);
    EXPECT_NEAR(mu.quantile(mu.cdf(v)), v, 1e-9);
  }
}

TEST(Measure, CdfIsMonotone) {
  const Measure mu = mixture(std::vector<Measure>{uniform(0, 1), point_mass(0.5)}, std::vector<double>{0.6, 0.4});
  double prev = 0.0;
  for (double x = -0.5; x <= 1.5; x += 1e-3) {
    const double f = mu.cdf(x);
    EXPECT_GE(f, prev - 1e-15);
    prev = f;
  }
  EXPECT_NEAR(prev, 1.0, 1e-12);
}

TEST(Measure, RegridPreservesMassAndMean) {
  const Measure mu = semicircle(2.0, 0.3);
  const Measure nu = regrid(mu, mu.lo() - 1.0, mu.hi() + 2.0, 3001);
  EXPECT_NEAR(nu.continuous_mass(), 1.0, 1e-12);
  EXPECT_NEAR(nu.mean(), mu.mean(), 1e-6);
  EXPECT_LT(kolmogorov_distance(mu, nu), 1e-3);
}

TEST(Measure, AffinePushforwardScalesMoments) {
  const Measure mu = uniform(0.0, 1.0);
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> d(-3.0, 3.0);
  for (int i = 0; i < 10; ++i) {
    double a = d(rng);
    if (std::abs(a) < 0.1) a = 0.5;
    const double b = d(rng);
    const Measure nu = affine_pushforward(mu, a, b);
    EXPECT_NEAR(nu.mean(), a * 0.5 + b, 1e-9);
    EXPECT_NEAR(nu.variance(), a * a / 12.0, 1e-6 * a * a);
  }
}

TEST(Measure, KolmogorovDistanceBasics) {
  const Measure a = semicircle(1.0);
  const Measure b = uniform(-1.0, 1.0);
  EXPECT_DOUBLE_EQ(kolmogorov_distance(a, a), 0.0);
  EXPECT_NEAR(kolmogorov_distance(a, b), kolmogorov_distance(b, a), 1e-15);
  EXPECT_NEAR(kolmogorov_distance(point_mass(0.0), point_mass(1.0)), 1.0, 1e-15);
  EXPECT_NEAR(l1_distance(a, a), 0.0, 1e-15);
}

TEST(Measure, EmpiricalMeasureMoments) {
  const std::vector<double> v{-1.0, 0.5, 2.0, 2.5};
  const Measure mu = empirical_measure(v);
  EXPECT_NEAR(moment(mu, 1), 1.0, 1e-14);
  EXPECT_NEAR(moment(mu, 2), (1.0 + 0.25 + 4.0 + 6.25) / 4.0, 1e-14);
}

TEST(Measure, SamplingMatchesMean) {
  const Measure mu = uniform(2.0, 4.0);
  const auto xs = sample(mu, 200'000, 17);
  double m = 0.0;
  for (double x : xs) m += x;
  m /= static_cast<double>(xs.size());
  EXPECT_NEAR(m, 3.0, 4.0 * std::sqrt(1.0 / 3.0 / 200'000.0));
  EXPECT_EQ(sample(mu, 10, 5), sample(mu, 10, 5));
}

TEST(Measure, RejectsBadParameters) {
  const std::vector<double> bad{-1.0};
  try {
    standard_family(Family::semicircle, bad);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::parameter);
  }
  EXPECT_THROW(parse_family("gaussian"), Error);
  EXPECT_THROW(Measure(1.0, 0.0, std::vector<double>(4, 1.0)), Error);
}
