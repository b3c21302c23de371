#include <gtest/gtest.h>

#include <cmath>

#include "fepi/freeconv.hpp"

using namespace fepi;

namespace {

Measure family(Family f, std::vector<double> p, std::size_t cells = 1024) {
  GridConfig g;
  g.cells = cells;
  return standard_family(f, p, g);
}

FreeConvolutionConfig config(std::size_t cells = 1024) {
  FreeConvolutionConfig c;
  c.grid.cells = cells;
  return c;
}

}  // namespace

TEST(FreeConvolution, SemicirclesAddVariances) {
  const auto r = free_convolve(family(Family::semicircle, {1.0}), family(Family::semicircle, {2.0}), config());
  EXPECT_EQ(r.unconverged_points, 0u);
  EXPECT_LT(l1_distance(r.measure, family(Family::semicircle, {3.0})), 1e-2);
  EXPECT_NEAR(r.measure.variance(), 3.0, 1e-3);
}

TEST(FreeConvolution, SymmetricBernoulliGivesArcsine) {
  const auto b = family(Family::bernoulli, {0.5, -1.0, 1.0});
  const auto r = free_convolve(b, b, config(2048));
  EXPECT_LT(kolmogorov_distance(r.measure, family(Family::arcsine, {2.0}, 2048)), 1e-2);
}

TEST(FreeConvolution, PointMassTranslates) {
  const auto mu = family(Family::uniform, {0.0, 1.0});
  const auto r = free_convolve(mu, point_mass(2.0), config());
  EXPECT_TRUE(r.translation_shortcut);
  EXPECT_NEAR(r.measure.mean(), 2.5, 1e-9);
  EXPECT_LT(kolmogorov_distance(r.measure, affine_pushforward(mu, 1.0, 2.0)), 1e-9);
}

TEST(FreeConvolution, MeansAndVariancesAdd) {
  const Measure pairs[][2] = {
      {family(Family::uniform, {-1.0, 2.0}), family(Family::arcsine, {1.0, 0.5})},
      {family(Family::free_poisson, {2.0}), family(Family::semicircle, {0.5, -1.0})},
  };
  for (const auto& p : pairs) {
    const auto r = free_convolve(p[0], p[1], config());
    EXPECT_NEAR(r.measure.mean(), p[0].mean() + p[1].mean(), 2e-3);
    EXPECT_NEAR(r.measure.variance(), p[0].variance() + p[1].variance(), 5e-3);
  }
}

TEST(FreeConvolution, CumulantsAdd) {
  const auto a = family(Family::uniform, {0.0, 1.0});
  const auto b = family(Family::arcsine, {0.8});
  const auto r = free_convolve(a, b, config(2048));
  for (int k = 1; k <= 4; ++k)
    EXPECT_NEAR(free_cumulant(r.measure, k), free_cumulant(a, k) + free_cumulant(b, k), 5e-3) << k;
}

TEST(FreeConvolution, ResultDoesNotDependOnThreads) {
  const auto a = family(Family::uniform, {0.0, 1.0});
  const auto b = family(Family::semicircle, {1.0});
  auto c1 = config(512);
  auto c3 = config(512);
  c3.threads = 3;
  const auto r1 = free_convolve(a, b, c1);
  const auto r3 = free_convolve(a, b, c3);
  ASSERT_EQ(r1.measure.cells(), r3.measure.cells());
  for (std::size_t i = 0; i < r1.measure.cells(); ++i)
    ASSERT_EQ(r1.measure.density()[i], r3.measure.density()[i]);
}

TEST(Subordination, ImaginaryPartsPushUp) {
  const CauchyKernel a(family(Family::uniform, {-1.0, 1.0}));
  const CauchyKernel b(family(Family::semicircle, {1.0}));
  for (Complex z : {Complex(0.0, 0.1), Complex(1.5, 0.01), Complex(-2.5, 1.0)}) {
    const auto s = solve_subordination(a, b, z, z, FreeConvolutionConfig{});
    ASSERT_TRUE(s.converged);
    EXPECT_GE(s.omega1.imag(), z.imag() - 1e-12);
    EXPECT_GE(s.omega2.imag(), z.imag() - 1e-12);
    // G_a(omega1) = G_b(omega2).
    EXPECT_NEAR(std::abs(a.evaluate(s.omega1).g - b.evaluate(s.omega2).g), 0.0, 1e-8);
  }
}
