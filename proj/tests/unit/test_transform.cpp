#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fepi/error.hpp"
#include "fepi/transform.hpp"

using namespace fepi;

namespace {

Measure semicircle1() { return standard_family(Family::semicircle, std::vector<double>{1.0}); }

// Closed form for the unit-variance semicircle; the product of principal
// roots picks the branch that decays at infinity in the upper half-plane.
Complex semicircle_g(Complex z) { return 0.5 * (z - std::sqrt(z - 2.0) * std::sqrt(z + 2.0)); }

}  // namespace

TEST(Cauchy, SemicircleMatchesClosedForm) {
  const Measure mu = semicircle1();
  for (Complex z : {Complex(0.5, 1.0), Complex(-1.5, 0.3), Complex(3.0, 0.1), Complex(0.0, 5.0)}) {
    const Complex g = cauchy_transform(mu, z);
    EXPECT_NEAR(std::abs(g - semicircle_g(z)), 0.0, 2e-6) << z;
  }
}

TEST(Cauchy, PointMassIsExact) {
  const Measure mu = point_mass(0.7);
  const Complex z(0.2, 0.4);
  EXPECT_NEAR(std::abs(cauchy_transform(mu, z) - 1.0 / (z - 0.7)), 0.0, 1e-14);
}

TEST(Cauchy, MapsUpperHalfPlaneDown) {
  const Measure mu = standard_family(Family::arcsine, std::vector<double>{1.5});
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> re(-4.0, 4.0);
  std::uniform_real_distribution<double> im(1e-3, 3.0);
  for (int i = 0; i < 200; ++i) {
    const Complex z(re(rng), im(rng));
    EXPECT_LT(cauchy_transform(mu, z).imag(), 0.0);
  }
  const Complex far(0.0, 1e4);
  EXPECT_NEAR(std::abs(far * cauchy_transform(mu, far) - 1.0), 0.0, 1e-7);
}

TEST(Cauchy, DerivativeMatchesFiniteDifference) {
  const Measure mu = standard_family(Family::uniform, std::vector<double>{-1.0, 2.0});
  const CauchyKernel k(mu);
  const Complex z(0.3, 0.5);
  const double h = 1e-6;
  const Complex fd = (k.evaluate(z + h).g - k.evaluate(z - h).g) / (2.0 * h);
  EXPECT_NEAR(std::abs(k.evaluate(z).dg - fd), 0.0, 1e-6);
}

TEST(Cauchy, LogPotentialImagInRange) {
  const CauchyKernel k(semicircle1());
  for (double x = -3.0; x <= 3.0; x += 0.25) {
    const double v = k.log_potential_imag(Complex(x, 1e-6));
    EXPECT_GE(v, -1e-12);
    EXPECT_LE(v, std::numbers::pi + 1e-12);
  }
}

TEST(Stieltjes, RecoversSemicircleFromClosedForm) {
  const Measure ref = semicircle1();
  const auto inv = stieltjes_invert(semicircle_g, ref.lo(), ref.hi(), ref.cells(),
                                    default_inversion_eta(ref.lo(), ref.hi(), ref.cells()));
  EXPECT_NEAR(inv.raw_mass, 1.0, 2e-2);
  EXPECT_LT(l1_distance(inv.measure, ref), 1e-2);
}

TEST(Stieltjes, RejectsMasslessTransform) {
  auto zero = [](Complex) { return Complex(0.0, -1e-9); };
  EXPECT_THROW(stieltjes_invert(zero, -1.0, 1.0, 128, 0.01), Error);
}

TEST(RTransform, SemicircleIsLinear) {
  const std::vector<double> p{2.0};
  const Measure mu = standard_family(Family::semicircle, p);
  for (Complex w : {Complex(0.1, 0.05), Complex(-0.2, 0.1)}) {
    EXPECT_NEAR(std::abs(r_transform(mu, w) - 2.0 * w), 0.0, 1e-5);
  }
}

TEST(RTransform, SymmetricBernoulli) {
  const Measure mu = standard_family(Family::bernoulli, std::vector<double>{0.5, -1.0, 1.0});
  const Complex w(0.15, 0.1);
  const Complex expected = (std::sqrt(1.0 + 4.0 * w * w) - 1.0) / (2.0 * w);
  EXPECT_NEAR(std::abs(r_transform(mu, w) - expected), 0.0, 1e-9);
}
