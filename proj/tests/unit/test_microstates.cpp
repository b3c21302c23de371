#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "fepi/error.hpp"
#include "fepi/freeconv.hpp"
#include "fepi/freeentropy.hpp"
#include "fepi/geometry.hpp"
#include "fepi/microstates.hpp"

using namespace fepi;

namespace {

Measure semicircle1() { return standard_family(Family::semicircle, std::vector<double>{1.0}); }

std::vector<double> quantile_points(const Measure& mu, std::size_t k) {
  std::vector<double> out(k);
  for (std::size_t i = 0; i < k; ++i) out[i] = mu.quantile((static_cast<double>(i) + 0.5) / static_cast<double>(k));
  return out;
}

}  // namespace

TEST(StepFunction, AffineMomentsAreExact) {
  const auto h = StepFunctionSpec::affine(2.0, -1.0);
  const auto m = h.moments(4);
  // h(Z) uniform on [-1, 1].
  EXPECT_NEAR(m[0], 1.0, 1e-15);
  EXPECT_NEAR(m[1], 0.0, 1e-15);
  EXPECT_NEAR(m[2], 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(m[4], 1.0 / 5.0, 1e-15);
  EXPECT_DOUBLE_EQ(h.sup_abs(), 1.0);
  EXPECT_NEAR(h(0.25), -0.5, 1e-15);
}

TEST(StepFunction, QuantileOfUniformIsIdentity) {
  const auto h = StepFunctionSpec::from_quantile(standard_family(Family::uniform, std::vector<double>{0.0, 1.0}));
  for (double u : {0.1, 0.5, 0.77}) EXPECT_NEAR(h(u), u, 1e-6);
  EXPECT_LT(kolmogorov_distance(h.law(), standard_family(Family::uniform, std::vector<double>{0.0, 1.0})), 1e-3);
}

TEST(StepFunction, RejectsNonIncreasingTables) {
  EXPECT_THROW(StepFunctionSpec::from_table({0.0, 0.5, 1.0}, {0.0, 0.0, 1.0}), Error);
  EXPECT_THROW(StepFunctionSpec::from_table({0.0, 1.0}, {0.0}), Error);
}

TEST(Haar, IsUnitary) {
  const auto u = haar_unitary(32, std::uint64_t{5});
  const auto id = ComplexMatrix::Identity(32, 32);
  EXPECT_LT((u.adjoint() * u - id).norm(), 1e-12);
}

TEST(Haar, EntriesHaveVarianceOneOverK) {
  const std::size_t k = 8;
  double mean_abs2 = 0.0;
  const int reps = 4000;
  for (int r = 0; r < reps; ++r) mean_abs2 += std::norm(haar_unitary(k, static_cast<std::uint64_t>(r))(0, 0));
  mean_abs2 /= reps;
  // |U_11|^2 ~ Beta(1, k - 1): mean 1/k, variance (k-1)/(k^2 (k+1)).
  const double sd = std::sqrt((k - 1.0) / (k * k * (k + 1.0)) / reps);
  EXPECT_NEAR(mean_abs2, 1.0 / k, 4.0 * sd);
}

TEST(Omega, SlotsPartitionTheRange) {
  const auto h = StepFunctionSpec::affine(1.0, 0.0);
  const auto slots = eigenvalue_slots(h, 10);
  ASSERT_EQ(slots.size(), 10u);
  for (std::size_t s = 0; s < slots.size(); ++s) {
    EXPECT_NEAR(slots[s].first, (2.0 * s) / 20.0, 1e-15);
    EXPECT_NEAR(slots[s].second, (2.0 * s + 1.0) / 20.0, 1e-15);
    if (s > 0) {
      EXPECT_LT(slots[s - 1].second, slots[s].first);
    }
  }
}

TEST(Omega, SamplesAreHermitianWithSlottedSpectrum) {
  const auto h = StepFunctionSpec::from_quantile(semicircle1());
  const auto m = sample_omega(h, 24, 3);
  EXPECT_LT(m.hermitian_defect(), 1e-12);
  EXPECT_EQ(m.provenance, Provenance::omega_sample);
  const auto slots = eigenvalue_slots(h, 24);
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(m.entries);
  for (std::size_t s = 0; s < 24; ++s) {
    EXPECT_GE(es.eigenvalues()[s], slots[s].first - 1e-10);
    EXPECT_LE(es.eigenvalues()[s], slots[s].second + 1e-10);
  }
}

TEST(Omega, SameSeedSameMatrix) {
  const auto h = StepFunctionSpec::affine(1.0, 0.0);
  EXPECT_EQ(sample_omega(h, 16, 77).entries, sample_omega(h, 16, 77).entries);
  EXPECT_NE(sample_omega(h, 16, 77).entries, sample_omega(h, 16, 78).entries);
}

TEST(Words, CountAndOrder) {
  const auto t = GammaTarget::free_tuple({{1, 0, 1, 0}, {1, 0, 1, 0}}, 3, 0.1, 2.0);
  const auto words = enumerate_word_targets(t);
  EXPECT_EQ(words.size(), 2u + 4u + 8u);
  EXPECT_EQ(words.front().word, std::vector<int>{0});
  EXPECT_EQ(words[1].word, (std::vector<int>{0, 0}));
  // tau(x y) = 0 for centred free variables; tau(x x) = 1.
  for (const auto& w : words) {
    if (w.word == std::vector<int>{0, 1}) {
      EXPECT_NEAR(w.value, 0.0, 1e-15);
    }
    if (w.word == std::vector<int>{1, 1}) {
      EXPECT_NEAR(w.value, 1.0, 1e-15);
    }
  }
}

TEST(Membership, LargeOmegaSampleIsMember) {
  const auto h = StepFunctionSpec::affine(1.0, 0.0);
  const MatrixMicrostate m[1] = {sample_omega(h, 64, 9)};
  const auto r = microstate_membership(m, GammaTarget::single(h.moments(3), 3, 0.05, 1.0));
  EXPECT_TRUE(r.member);
  EXPECT_FALSE(r.norm_violation);
  EXPECT_EQ(r.words, 3u);
  const auto strict = microstate_membership(m, GammaTarget::single(h.moments(3), 3, 1e-9, 1.0));
  EXPECT_FALSE(strict.member);
}

TEST(Membership, NormBoundIsEnforced) {
  const auto h = StepFunctionSpec::affine(4.0, 0.0);
  const MatrixMicrostate m[1] = {sample_omega(h, 16, 1)};
  const auto r = microstate_membership(m, GammaTarget::single({1.0, 0.0}, 1, 10.0, 1.0));
  EXPECT_TRUE(r.norm_violation);
  EXPECT_FALSE(r.member);
}

TEST(Wilson, ClosedFormEndpoints) {
  const double z2 = kZ99 * kZ99;
  const auto none = wilson_interval(0, 100);
  EXPECT_NEAR(none.lo, 0.0, 1e-15);
  EXPECT_NEAR(none.hi, z2 / (100.0 + z2), 1e-12);
  const auto all = wilson_interval(100, 100);
  EXPECT_NEAR(all.lo, 100.0 / (100.0 + z2), 1e-12);
  EXPECT_DOUBLE_EQ(all.value, 1.0);
  const auto half = wilson_interval(50, 100);
  EXPECT_NEAR(half.lo + half.hi, 1.0, 1e-12);
}

TEST(ThetaFraction, DeterministicAcrossThreads) {
  const auto h = StepFunctionSpec::affine(1.0, 0.0);
  ThetaFractionConfig cfg;
  cfg.k = 16;
  cfg.N = 2;
  cfg.eps = 0.1;
  cfg.trials = 100;
  cfg.seed = 4;
  const auto a = theta_fraction(h, h, cfg);
  cfg.threads = 3;
  const auto b = theta_fraction(h, h, cfg);
  EXPECT_EQ(a.unweighted.successes, b.unweighted.successes);
  EXPECT_EQ(a.weighted, b.weighted);
  EXPECT_EQ(a.ess, b.ess);
  EXPECT_GE(a.ess, 1.0);
  EXPECT_LE(a.ess, 100.0);
}

TEST(SumSpectrum, ApproachesFreeConvolution) {
  const Measure mu = semicircle1();
  const auto emp = sum_spectrum_experiment(mu, mu, 256, 2);
  FreeConvolutionConfig cfg;
  cfg.grid.cells = 1024;
  EXPECT_LT(kolmogorov_distance(emp, free_convolve(mu, mu, cfg).measure), 0.05);
  EXPECT_THROW(sum_spectrum_experiment(mu, mu, 8, 2), Error);
}

TEST(EmpiricalChi, ConvergesWithK) {
  const Measure mu = semicircle1();
  const double target = chi(mu).value;
  double prev = 1.0;
  for (std::size_t k : {64, 128, 256, 512}) {
    const auto pts = quantile_points(mu, k);
    const double err = std::abs(empirical_chi(pts) - target);
    EXPECT_LT(err, prev);
    prev = err;
  }
  const std::vector<double> repeated{0.0, 1.0, 1.0};
  EXPECT_TRUE(std::isinf(empirical_chi(repeated)));
}

TEST(FlagConstant, TwoByTwoByHand) {
  // Gaussian integral (2 pi)^2 over the ordered integral of (l2 - l1)^2
  // exp(-(l1^2 + l2^2) / 2), which is 2 pi.
  const auto c = flag_constant(2);
  EXPECT_NEAR(c.log_closed_form, std::log(2.0 * std::numbers::pi), 1e-14);
  EXPECT_NEAR(c.log_calibrated, c.log_closed_form, 1e-12);
}

TEST(FlagConstant, SelfTest) { EXPECT_LT(flag_constant_self_test(), 1e-6); }

TEST(OmegaVolume, ReproducibleAndBelowChi) {
  const auto h = StepFunctionSpec::affine(1.0, 0.0);
  OmegaVolumeConfig cfg;
  cfg.k = 8;
  cfg.mc_samples = 20'000;
  cfg.seed = 3;
  const auto a = estimate_log_volume_omega(h, cfg);
  cfg.threads = 2;
  const auto b = estimate_log_volume_omega(h, cfg);
  EXPECT_EQ(a.value, b.value);
  EXPECT_GT(a.ess, 100.0);
  // The shell volume approaches chi from below as k grows.
  EXPECT_LT(a.value, chi(h.law()).value);
}

TEST(SumContainment, RejectsTooFewTrials) {
  const auto h = StepFunctionSpec::affine(1.0, 0.0);
  SumContainmentConfig cfg;
  cfg.trials = 10;
  EXPECT_THROW(check_sum_containment(h, h, cfg), Error);
}
