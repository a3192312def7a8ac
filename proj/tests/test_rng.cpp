#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <unordered_set>
#include <vector>

#include "jlsketch/rng.hpp"
#include "oracles.hpp"

using namespace jlsketch;

TEST(DeriveSeed, NoCollisionsOverAMillionIndices) {
  const Seed root{42};
  EXPECT_NE(derive_seed(root, 0), derive_seed(root, 1));
  std::vector<std::uint64_t> seeds(1'000'000);
  for (std::size_t i = 0; i < seeds.size(); ++i) seeds[i] = derive_seed(root, i).value;
  std::sort(seeds.begin(), seeds.end());
  EXPECT_EQ(std::adjacent_find(seeds.begin(), seeds.end()), seeds.end());
}

TEST(DeriveSeed, DocumentedFormula) {
  const std::uint64_t root = 7;
  const std::uint64_t want = mix64(mix64(root) + 0x9e3779b97f4a7c15ULL * 4);
  EXPECT_EQ(derive_seed(Seed{root}, 3).value, want);
}

TEST(Rng, DistinctRootsGiveDisjointStreams) {
  Rng a(Seed{1});
  Rng b(Seed{2});
  std::unordered_set<std::uint64_t> seen;
  for (int i = 0; i < 10000; ++i) seen.insert(a.next());
  for (int i = 0; i < 10000; ++i) EXPECT_FALSE(seen.contains(b.next()));
}

TEST(Rng, SameSeedSameStream) {
  Rng a(Seed{99});
  Rng b(Seed{99});
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(a.next(), b.next());
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(a.normal(), b.normal());
}

TEST(Rng, UniformInUnitInterval) {
  Rng rng(Seed{5});
  std::vector<double> xs(200000);
  for (auto& x : xs) {
    x = rng.uniform();
    ASSERT_GE(x, 0.0);
    ASSERT_LT(x, 1.0);
  }
  EXPECT_LT(oracle::ks_distance(xs, [](double x) { return x; }), 0.005);
}

TEST(Rng, BoundedIsUniform) {
  Rng rng(Seed{6});
  constexpr std::uint64_t kBins = 7;
  constexpr int kDraws = 700000;
  std::vector<int> counts(kBins, 0);
  for (int i = 0; i < kDraws; ++i) {
    const auto v = rng.bounded(kBins);
    ASSERT_LT(v, kBins);
    ++counts[v];
  }
  const double expected = static_cast<double>(kDraws) / kBins;
  double chi2 = 0.0;
  for (int c : counts) chi2 += (c - expected) * (c - expected) / expected;
  EXPECT_LT(chi2, 22.46);  // 0.999 quantile of chi-square with 6 degrees of freedom
}

TEST(Rng, NormalMatchesGaussianCdf) {
  Rng rng(Seed{7});
  std::vector<double> xs(1'000'000);
  for (auto& x : xs) x = rng.normal();
  EXPECT_LT(oracle::ks_distance(xs, oracle::normal_cdf), 0.005);
}

TEST(SignStream, LeastSignificantBitFirst) {
  Rng reference(Seed{8});
  const std::uint64_t word = reference.next();
  Rng rng(Seed{8});
  SignStream signs(rng);
  for (int b = 0; b < 64; ++b) EXPECT_EQ(signs.negative(), ((word >> b) & 1U) != 0);
}
