#include "vqbench/rng.hpp"

#include <set>

#include <gtest/gtest.h>

using namespace vqbench;

TEST(Rng, StreamDerivationIsDeterministic) {
  EXPECT_EQ(derive_stream(42, "alpha", 3), derive_stream(42, "alpha", 3));
  EXPECT_NE(derive_stream(42, "alpha", 3), derive_stream(42, "alpha", 4));
  EXPECT_NE(derive_stream(42, "alpha", 3), derive_stream(43, "alpha", 3));
  EXPECT_NE(derive_stream(42, "alpha"), derive_stream(42, "beta"));
}

TEST(Rng, DistinctStreamsDecorrelate) {
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 1000; ++i) {
    seen.insert(derive_stream(7, "stream", i));
  }
  EXPECT_EQ(seen.size(), 1000u);
}

TEST(Rng, SameSeedSameSequence) {
  Rng a(123), b(123);
  for (int i = 0; i < 100; ++i) {
    EXPECT_EQ(a.next_u64(), b.next_u64());
  }
}

TEST(Rng, UniformRangeRespected) {
  Rng rng(9);
  for (int i = 0; i < 1000; ++i) {
    const double v = rng.uniform(-2.0, 3.0);
    EXPECT_GE(v, -2.0);
    EXPECT_LT(v, 3.0);
  }
  for (int i = 0; i < 1000; ++i) {
    const int v = rng.uniform_int(2, 5);
    EXPECT_GE(v, 2);
    EXPECT_LE(v, 5);
  }
}

TEST(Rng, NormalMoments) {
  Rng rng(17);
  double sum = 0.0, sum2 = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double v = rng.normal(0.0, 0.1);
    sum += v;
    sum2 += v * v;
  }
  const double mean = sum / n;
  const double std = std::sqrt(sum2 / n - mean * mean);
  EXPECT_NEAR(mean, 0.0, 2e-3);
  EXPECT_NEAR(std, 0.1, 2e-3);
}
