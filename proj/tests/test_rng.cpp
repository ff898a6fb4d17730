#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tpbb/errors.hpp"
#include "tpbb/rng.hpp"

using namespace tpbb;

TEST(StochasticRound, IntegersAreExact) {
  Rng rng(1);
  for (int t = 0; t < 1000; ++t) {
    EXPECT_EQ(stochastic_round(3.0, rng), 3);
    EXPECT_EQ(stochastic_round(0.0, rng), 0);
  }
  EXPECT_THROW(stochastic_round(-0.5, rng), ValidationError);
}

TEST(StochasticRound, MeanMatchesInput) {
  Rng rng(2);
  const int n = 100000;
  long long sum = 0;
  for (int t = 0; t < n; ++t) {
    const long long r = stochastic_round(2.3, rng);
    ASSERT_TRUE(r == 2 || r == 3);
    sum += r;
  }
  EXPECT_NEAR(static_cast<double>(sum) / n, 2.3, 0.005);
}

TEST(StochasticRoundPair, MarginalsAndSumBound) {
  Rng rng(3);
  const double a = 6666.6666666666679, b = 3333.3333333333339;  // sums to 10000 in exact arithmetic
  const int n = 200000;
  long long sa = 0, sb = 0;
  for (int t = 0; t < n; ++t) {
    const auto [ra, rb] = stochastic_round_pair(a, b, rng);
    ASSERT_TRUE(ra == 6666 || ra == 6667);
    ASSERT_TRUE(rb == 3333 || rb == 3334);
    ASSERT_LE(ra + rb, 10000);
    sa += ra;
    sb += rb;
  }
  // 3 sigma of a Bernoulli(2/3) resp. Bernoulli(1/3) mean.
  const double sd = std::sqrt(2.0 / 9.0 / n);
  EXPECT_NEAR(static_cast<double>(sa) / n, a, 3 * sd);
  EXPECT_NEAR(static_cast<double>(sb) / n, b, 3 * sd);
}

TEST(StochasticRoundPair, IndependentFractionsKeepMarginals) {
  Rng rng(4);
  const int n = 200000;
  long long sa = 0, sb = 0;
  for (int t = 0; t < n; ++t) {
    const auto [ra, rb] = stochastic_round_pair(1.25, 0.4, rng);
    ASSERT_LE(ra + rb, 2);  // ceil(a + b)
    sa += ra;
    sb += rb;
  }
  EXPECT_NEAR(static_cast<double>(sa) / n, 1.25, 3 * std::sqrt(0.25 * 0.75 / n));
  EXPECT_NEAR(static_cast<double>(sb) / n, 0.4, 3 * std::sqrt(0.4 * 0.6 / n));
}

TEST(SampleUniform, SupportAndMean) {
  Rng rng(5);
  EXPECT_TRUE(sample_uniform(0, 1, 0, rng).empty());
  const auto xs = sample_uniform(0.0, 1.0, 100000, rng);
  for (double x : xs) {
    ASSERT_GE(x, 0.0);
    ASSERT_LE(x, 1.0);
  }
  EXPECT_NEAR(std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size(), 0.5, 0.003);
  EXPECT_THROW(sample_uniform(1.0, 1.0, 3, rng), ValidationError);
}

TEST(UniformIndex, CoversRangeEvenly) {
  Rng rng(6);
  std::vector<int> counts(7, 0);
  const int n = 70000;
  for (int t = 0; t < n; ++t) ++counts[uniform_index(rng, 7)];
  for (int c : counts) EXPECT_NEAR(c, n / 7.0, 4 * std::sqrt(n / 7.0));
}

TEST(PartialShuffle, SelectsDistinctUniformSubsets) {
  Rng rng(7);
  std::vector<int> hits(10, 0);
  const int trials = 30000;
  for (int t = 0; t < trials; ++t) {
    std::vector<std::size_t> idx(10);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    partial_shuffle(idx, 3, rng);
    std::vector<std::size_t> sorted = idx;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < 10; ++i) ASSERT_EQ(sorted[i], i);  // still a permutation
    for (int m = 0; m < 3; ++m) ++hits[idx[m]];
  }
  const double expect = trials * 0.3;
  for (int h : hits) EXPECT_NEAR(h, expect, 4 * std::sqrt(expect * 0.7));
}

TEST(Rng, SeededStreamsRepeat) {
  Rng a(42), b(42);
  for (int t = 0; t < 100; ++t) EXPECT_EQ(uniform01(a), uniform01(b));
  EXPECT_EQ(kRngName, "mt19937_64");
}
