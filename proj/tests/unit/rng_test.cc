#include "swarmrecon/rng.h"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

namespace swarmrecon {
namespace {

TEST(RngTest, DerivedStreamsDifferByNameAndIndex) {
  EXPECT_NE(DeriveSeed(1, "env"), DeriveSeed(1, "policy"));
  EXPECT_NE(DeriveSeed(1, "env", 0), DeriveSeed(1, "env", 1));
  EXPECT_NE(DeriveSeed(1, "env"), DeriveSeed(2, "env"));
  EXPECT_EQ(DeriveSeed(7, "eval", 3), DeriveSeed(7, "eval", 3));
}

TEST(RngTest, Uniform01StaysInUnitInterval) {
  Rng rng = MakeRng(3, "u");
  double sum = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double u = Uniform01(rng);
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / 100000, 0.5, 0.01);
}

TEST(RngTest, UniformIndexIsUnbiased) {
  Rng rng = MakeRng(5, "idx");
  std::vector<int> counts(5, 0);
  const int draws = 50000;
  for (int i = 0; i < draws; ++i) ++counts[UniformIndex(rng, 5)];
  const double sigma = std::sqrt(draws * 0.2 * 0.8);
  for (int c : counts) EXPECT_LT(std::abs(c - draws * 0.2), 4 * sigma);
}

TEST(RngTest, StandardNormalMoments) {
  Rng rng = MakeRng(11, "normal");
  double sum = 0.0, sum_sq = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double z = StandardNormal(rng);
    sum += z;
    sum_sq += z * z;
  }
  EXPECT_NEAR(sum / n, 0.0, 0.02);
  EXPECT_NEAR(sum_sq / n, 1.0, 0.02);
}

TEST(RngTest, SameSeedSameSequence) {
  Rng a = MakeRng(42, "x", 9);
  Rng b = MakeRng(42, "x", 9);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a(), b());
}

}  // namespace
}  // namespace swarmrecon
