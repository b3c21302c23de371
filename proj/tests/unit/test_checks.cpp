#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fepi/checks.hpp"
#include "fepi/error.hpp"

using namespace fepi;

namespace {

CheckConfig config(std::size_t samples, std::uint64_t seed = 3) {
  CheckConfig c;
  c.sampling.pair_samples = samples;
  c.sampling.seed = seed;
  return c;
}

}  // namespace

TEST(Verdicts, Classify) {
  EXPECT_EQ(classify(0.5, 0.1), Verdict::holds);
  EXPECT_EQ(classify(-0.1, 0.1), Verdict::holds);
  EXPECT_EQ(classify(-0.2, 0.1), Verdict::inconclusive);
  EXPECT_EQ(classify(-0.31, 0.1), Verdict::violated);
  EXPECT_EQ(classify(-1e-9, 0.0), Verdict::violated);
  EXPECT_EQ(to_string(Verdict::inconclusive), "inconclusive");
}

TEST(Verdicts, GateWithExactFraction) {
  EXPECT_TRUE(evaluate_gate(1.0, 0.0, 0.99, "r").passed);
  EXPECT_TRUE(evaluate_gate(0.99, 0.0, 0.99, "r").passed);
  EXPECT_FALSE(evaluate_gate(0.98, 0.0, 0.99, "r").passed);
}

TEST(Verdicts, GateTieAndClearance) {
  const auto clear = evaluate_gate(0.995, 1e-4, 0.99, "r");
  EXPECT_TRUE(clear.passed);
  EXPECT_FALSE(clear.tie);
  const auto tie = evaluate_gate(0.9901, 1e-3, 0.99, "r");
  EXPECT_TRUE(tie.tie);
  EXPECT_FALSE(tie.passed);
  EXPECT_FALSE(evaluate_gate(0.5, 1e-3, 0.99, "r").passed);
}

TEST(BallExample, EqualityIsExact) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> rho(0.05, 0.99);
  for (int i = 0; i < 50; ++i) {
    const std::size_t n = 2 + i % 15;
    const double r = rho(rng);
    const auto ex = ball_example_exact(r, n);
    EXPECT_NEAR(ex.sum_radius, std::sqrt(1.0 + r * r), 1e-14);
    const double scale = std::pow(unit_ball_volume(n), 2.0 / static_cast<double>(n)) * (1.0 + r * r);
    EXPECT_NEAR(ex.equality_gap, 0.0, 1e-12 * scale);
    EXPECT_DOUBLE_EQ(ex.theta_fraction, 0.5);
  }
}

TEST(GammaCheck, FactorFormula) {
  EXPECT_NEAR(remark16_factor(3.0, 0.5, 0.5, 4), 1.0 - 3.0 * 0.5 * std::sqrt(std::log(3.0) / 4.0), 1e-15);
  EXPECT_GT(remark16_factor(3.0, 0.1, 0.9, 100), remark16_factor(3.0, 0.1, 0.1, 100));
}

TEST(RestrictedSumCheck, FullThetaHolds) {
  const auto r = check_theorem12(SetSpec::ball(2, 1.0), SetSpec::box({0.4, 0.2}), ThetaSpec::full(), config(200'000));
  EXPECT_TRUE(r.gate.passed);
  EXPECT_EQ(r.verdict, Verdict::holds);
  EXPECT_TRUE(r.conclusion_holds);
  ASSERT_TRUE(r.context.rho.has_value());
  EXPECT_EQ(r.context.n, 2u);
}

TEST(RestrictedSumCheck, GateFailureIsInconclusive) {
  const auto r = check_theorem12(SetSpec::ball(3, 1.0), SetSpec::ball(3, 0.5), ThetaSpec::inner_product_leq(0.0),
                                 config(100'000));
  EXPECT_FALSE(r.gate.passed);
  EXPECT_EQ(r.verdict, Verdict::inconclusive);
  // The inequality itself still holds in the ball example.
  EXPECT_TRUE(r.conclusion_holds);
}

TEST(DeltaCheck, DeltaRange) {
  const auto a = SetSpec::box({1.0, 1.0});
  const auto b = SetSpec::box({0.5, 0.5});
  EXPECT_THROW(check_corollary15(a, b, ThetaSpec::full(), 0.9, config(10'000)), Error);
  const auto r = check_corollary15(a, b, ThetaSpec::complement_fraction(0.02, 1), 0.1, config(200'000));
  EXPECT_EQ(r.verdict, Verdict::holds);
  EXPECT_NEAR(r.details.at("rhs_factor"), 1.0 - 3.0 * 0.1 / 2.0, 1e-15);
}

TEST(Fubini, LowerBoundHolds) {
  const auto r = fubini_lower_bound(SetSpec::box({1.0, 1.0}), SetSpec::ball(2, 0.3),
                                    ThetaSpec::complement_fraction(0.2, 4), config(200'000));
  EXPECT_EQ(r.verdict, Verdict::holds);
  EXPECT_THROW(fubini_lower_bound(SetSpec::ball(2, 0.3), SetSpec::box({1.0, 1.0}), ThetaSpec::full(), config(1000)),
               Error);
}

TEST(Bll, CentredBallsAreTheirOwnSymmetrization) {
  const auto r = bll_symmetrization_check(SetSpec::ball(2, 1.0), SetSpec::ball(2, 0.5), SetSpec::ball(2, 0.8),
                                          config(200'000));
  EXPECT_EQ(r.verdict, Verdict::holds);
  EXPECT_NEAR(r.deficit, 0.0, 3.0 * r.ci_halfwidth + 1e-12);
}

TEST(Bll, OffsetSetsLoseMass) {
  const auto r = bll_symmetrization_check(SetSpec::box({1.0, 0.2}), SetSpec::ball(2, 0.5, {1.5, 0.0}),
                                          SetSpec::ball(2, 0.8), config(200'000));
  EXPECT_EQ(r.verdict, Verdict::holds);
  EXPECT_GT(r.deficit, 0.0);
}

TEST(GammaCheck, GatedOnGamma) {
  const auto r = check_remark16(SetSpec::ball(2, 1.0), SetSpec::ball(2, 0.5), ThetaSpec::inner_product_leq(0.0), 0.3,
                                config(200'000));
  EXPECT_TRUE(r.gate.passed);
  EXPECT_EQ(r.verdict, Verdict::holds);
}

TEST(Checks, Deterministic) {
  const auto a = check_theorem12(SetSpec::ball(2, 1.0), SetSpec::ball(2, 0.7), ThetaSpec::sum_norm_leq(1.5), config(50'000, 11));
  auto cfg = config(50'000, 11);
  cfg.sampling.threads = 2;
  const auto b = check_theorem12(SetSpec::ball(2, 1.0), SetSpec::ball(2, 0.7), ThetaSpec::sum_norm_leq(1.5), cfg);
  EXPECT_EQ(a.lhs, b.lhs);
  EXPECT_EQ(a.deficit, b.deficit);
  EXPECT_EQ(a.details, b.details);
}
