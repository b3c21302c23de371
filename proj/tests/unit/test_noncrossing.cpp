#include <gtest/gtest.h>

#include <cmath>

#include "fepi/noncrossing.hpp"

using namespace fepi;

namespace {

bool crosses(const Partition& p) {
  for (std::size_t a = 0; a < p.size(); ++a)
    for (std::size_t b = 0; b < p.size(); ++b) {
      if (a == b) continue;
      for (int i : p[a])
        for (int j : p[b])
          for (int k : p[a])
            for (int l : p[b])
              if (i < j && j < k && k < l) return true;
    }
  return false;
}

}  // namespace

TEST(Noncrossing, CountsAreCatalan) {
  const std::size_t catalan[] = {1, 1, 2, 5, 14, 42, 132, 429, 1430, 4862, 16796};
  for (int n = 1; n <= 10; ++n) EXPECT_EQ(noncrossing_partitions(n).size(), catalan[n]) << n;
}

TEST(Noncrossing, PartitionsAreNoncrossingAndCover) {
  for (const auto& p : noncrossing_partitions(6)) {
    EXPECT_FALSE(crosses(p));
    int covered = 0;
    for (const auto& block : p) covered += static_cast<int>(block.size());
    EXPECT_EQ(covered, 6);
  }
}

TEST(Noncrossing, SemicircleHasOnlySecondCumulant) {
  const std::vector<double> m{1, 0, 1, 0, 2, 0, 5, 0, 14};
  const auto k = free_cumulants_from_moments(m);
  for (std::size_t i = 1; i < k.size(); ++i) EXPECT_NEAR(k[i], i == 2 ? 1.0 : 0.0, 1e-12) << i;
}

TEST(Noncrossing, FreePoissonCumulantsAreConstant) {
  // Marchenko-Pastur moments at rate 2 are Narayana polynomials.
  const std::vector<double> m{1, 2, 6, 22, 90};
  const auto k = free_cumulants_from_moments(m);
  for (std::size_t i = 1; i < k.size(); ++i) EXPECT_NEAR(k[i], 2.0, 1e-12);
  const auto back = moments_from_free_cumulants(k);
  for (std::size_t i = 0; i < m.size(); ++i) EXPECT_NEAR(back[i], m[i], 1e-12);
}

TEST(Noncrossing, MixedMomentsOfFreeVariables) {
  // Cumulants of two centred free variables with variances 1 and 2.
  const std::vector<std::vector<double>> k{{0, 0, 1, 0, 0}, {0, 0, 2, 0, 0}};
  const std::vector<int> alternating{0, 1, 0, 1};
  const std::vector<int> grouped{0, 0, 1, 1};
  EXPECT_NEAR(free_word_moment(alternating, k), 0.0, 1e-14);
  EXPECT_NEAR(free_word_moment(grouped, k), 2.0, 1e-14);
}
