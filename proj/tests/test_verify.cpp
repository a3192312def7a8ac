#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include <boost/math/special_functions/binomial.hpp>

#include "jlsketch/bounds.hpp"
#include "jlsketch/errors.hpp"
#include "jlsketch/verify.hpp"

using namespace jlsketch;

namespace {

const Matrix kSwap = Matrix::from_rows({{0, 1}, {1, 0}});

// E[overlap^p] of two uniform s-subsets of [m]; the overlap is hypergeometric.
double hypergeometric_moment(unsigned m, unsigned s, unsigned p) {
  double out = 0.0;
  const double total = boost::math::binomial_coefficient<double>(m, s);
  for (unsigned k = 0; k <= s; ++k) {
    if (s - k > m - s) continue;
    const double prob = boost::math::binomial_coefficient<double>(s, k) *
                        boost::math::binomial_coefficient<double>(m - s, s - k) / total;
    out += prob * std::pow(static_cast<double>(k), p);
  }
  return out;
}

bool same_report(const ExperimentReport& a, const ExperimentReport& b) {
  if (a.failures != b.failures || a.rate != b.rate || a.ci_low != b.ci_low || a.ci_high != b.ci_high ||
      a.curve.size() != b.curve.size())
    return false;
  for (std::size_t i = 0; i < a.curve.size(); ++i) {
    if (a.curve[i].exceedances != b.curve[i].exceedances || a.curve[i].bound != b.curve[i].bound) return false;
  }
  return true;
}

}  // namespace

TEST(BinomialCI, ClopperPearsonReference) {
  const auto [low, high] = binomial_ci(5, 100, 0.95);
  EXPECT_NEAR(low, 0.0164, 1e-3);
  EXPECT_NEAR(high, 0.1128, 1e-3);
}

TEST(BinomialCI, Edges) {
  EXPECT_EQ(binomial_ci(0, 50).first, 0.0);
  EXPECT_EQ(binomial_ci(50, 50).second, 1.0);
  EXPECT_NEAR(binomial_ci(0, 50, 0.99).second, 1.0 - std::pow(0.005, 1.0 / 50.0), 1e-12);
  EXPECT_THROW(binomial_ci(3, 2), DomainError);
}

TEST(BinomialCI, ContainsPointEstimate) {
  for (std::size_t trials : {1u, 7u, 100u, 2000u}) {
    for (std::size_t f = 0; f <= trials; f += std::max<std::size_t>(1, trials / 13)) {
      const auto [low, high] = binomial_ci(f, trials);
      const double rate = static_cast<double>(f) / trials;
      EXPECT_LE(low, rate);
      EXPECT_GE(high, rate);
    }
  }
}

TEST(JLFailureRate, OneRowBinaryCoinAlwaysFails) {
  const Vector x{1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0)};
  const ExperimentReport r =
      jl_failure_rate(SketchSpec::binary_coin(1, 2, Seed{1}), 0.5, 300, Seed{1}, VectorSource::provided({x}));
  EXPECT_EQ(r.failures, 300u);
  EXPECT_EQ(r.rate, 1.0);
}

TEST(JLFailureRate, BasisFastPathMatchesFullSketch) {
  Vector e1(50, 0.0);
  e1[0] = 1.0;
  for (const auto& spec : {SketchSpec::gaussian(20, 50, Seed{}), SketchSpec::spherical(20, 50, Seed{}),
                           SketchSpec::sparse_jl(20, 50, 4, Seed{})}) {
    const auto fast = jl_failure_rate(spec, 0.3, 500, Seed{2}, VectorSource::basis());
    std::size_t failures = 0;
    for (std::size_t i = 0; i < 500; ++i) {
      const Sketch sk = build_sketch(spec.with_seed(derive_seed(Seed{2}, i)));
      failures += distortion(sk, e1) > 0.3;
    }
    EXPECT_EQ(fast.failures, failures) << spec.name();
  }
}

TEST(JLFailureRate, UnitNormBasisNeverFails) {
  const auto r = jl_failure_rate(SketchSpec::spherical(767, 1024, Seed{}), 0.5, 2000, Seed{3}, VectorSource::basis());
  EXPECT_EQ(r.failures, 0u);
}

TEST(JLFailureRate, ProvidedTrialFailsIfAnyVectorFails) {
  const Vector good{1.0, 0.0};
  const Vector bad{1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0)};
  const auto spec = SketchSpec::binary_coin(1, 2, Seed{});
  EXPECT_EQ(jl_failure_rate(spec, 0.5, 100, Seed{4}, VectorSource::provided({good})).failures, 0u);
  EXPECT_EQ(jl_failure_rate(spec, 0.5, 100, Seed{4}, VectorSource::provided({good, bad})).failures, 100u);
}

TEST(JLFailureRate, IndependentOfThreadCount) {
  const auto spec = SketchSpec::gaussian(30, 200, Seed{});
  JLOptions one;
  JLOptions many;
  many.threads = 4;
  EXPECT_TRUE(same_report(jl_failure_rate(spec, 0.2, 400, Seed{5}, VectorSource::random_unit(), one),
                          jl_failure_rate(spec, 0.2, 400, Seed{5}, VectorSource::random_unit(), many)));
}

TEST(JLFailureRate, ReportInvariants) {
  const auto r = jl_failure_rate(SketchSpec::sparse_jl(16, 64, 4, Seed{}), 0.3, 1000, Seed{6}, VectorSource::random_unit());
  EXPECT_LE(r.failures, 1000u);
  EXPECT_LE(r.ci_low, r.rate);
  EXPECT_LE(r.rate, r.ci_high);
  EXPECT_EQ(r.echo.trials, 1000u);
  EXPECT_THROW(jl_failure_rate(SketchSpec::gaussian(4, 4, Seed{}), 0.3, 99, Seed{}, VectorSource::basis()), DomainError);
}

TEST(HWExact, SwapMatrixOutcomes) {
  const ExactTail exact = hw_exact_enumeration(kSwap, 1);
  EXPECT_EQ(exact.outcome_count(), 4u);
  const auto dist = exact.distribution();
  ASSERT_EQ(dist.size(), 2u);
  EXPECT_DOUBLE_EQ(dist[0].first, -2.0);
  EXPECT_DOUBLE_EQ(dist[0].second, 0.5);
  EXPECT_DOUBLE_EQ(dist[1].first, 2.0);
  EXPECT_DOUBLE_EQ(dist[1].second, 0.5);
  EXPECT_EQ(exact.tail(2.0), 1.0);
  EXPECT_EQ(exact.tail(2.5), 0.0);
}

TEST(HWExact, RejectsLargeInstances) {
  EXPECT_THROW(hw_exact_enumeration(Matrix(9, 9), 2), DimensionError);
}

TEST(HWEmpirical, SwapMatrixWithRademacherVectors) {
  const std::vector<double> grid{2.0};
  const auto r = hw_empirical_tail(DistributionSpec::rademacher(1), kSwap, grid, 1000, Seed{7});
  ASSERT_EQ(r.curve.size(), 1u);
  EXPECT_EQ(r.curve[0].exceedances, 1000u);
  EXPECT_EQ(r.curve[0].rate, hw_exact_enumeration(kSwap, 1).tail(2.0));
}

TEST(HWEmpirical, ConvergesToExactEnumeration) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Matrix a = random_symmetric(3, Seed{seed});
    const ExactTail exact = hw_exact_enumeration(a, 2);
    const std::vector<double> grid = default_t_grid(off_diagonal_part(a), 1.0 / std::sqrt(2.0), 2, 20);
    constexpr std::size_t kTrials = 20000;
    const auto r = hw_empirical_tail(DistributionSpec::scaled_cube(2), a, grid, kTrials, Seed{seed + 100});
    for (const auto& point : r.curve) {
      const double p = exact.tail(point.t);
      EXPECT_LE(std::abs(point.rate - p), 4.0 * std::sqrt(p * (1.0 - p) / kTrials) + 1.0 / kTrials) << "t=" << point.t;
    }
  }
}

TEST(HWEmpirical, BoundedBySphericalHansonWright) {
  const Matrix a = random_symmetric(32, Seed{8});
  const auto grid = default_t_grid(off_diagonal_part(a), 0.25, 16, 20);
  const auto r = hw_empirical_tail(DistributionSpec::spherical(16), a, grid, 20000, Seed{8});
  for (const auto& point : r.curve) EXPECT_LE(point.ci_low, point.bound) << "t=" << point.t;
}

TEST(HWEmpirical, IndependentOfThreadCount) {
  const Matrix a = random_symmetric(6, Seed{9});
  const auto grid = default_t_grid(off_diagonal_part(a), 0.5, 4, 10);
  EXPECT_TRUE(same_report(hw_empirical_tail(DistributionSpec::gaussian(4), a, grid, 3000, Seed{9}, 1),
                          hw_empirical_tail(DistributionSpec::gaussian(4), a, grid, 3000, Seed{9}, 3)));
}

TEST(HWStatistic, IgnoresDiagonalAndAsymmetry) {
  std::mt19937_64 gen(10);
  std::normal_distribution<double> normal;
  Matrix a(4, 4);
  Matrix x(4, 3);
  for (auto& v : a.data()) v = normal(gen);
  for (auto& v : x.data()) v = normal(gen);
  double direct = 0.0;
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j)
      if (i != j) direct += a(i, j) * dot(x.row(i), x.row(j));
  EXPECT_NEAR(hw_statistic(off_diagonal_part(a), x), direct, 1e-12 * std::max(1.0, std::abs(direct)));
}

TEST(EtaMoment, FirstMomentIsSSquaredOverM) {
  EXPECT_NEAR(eta_moment_exact(4, 2, 1).moment, 1.0, 1e-15);
}

TEST(EtaMoment, MatchesHypergeometricLaw) {
  for (unsigned m = 1; m <= 8; ++m)
    for (unsigned s = 1; s <= m; ++s)
      for (unsigned p = 1; p <= 6; ++p) {
        const EtaMoment e = eta_moment_exact(m, s, p);
        EXPECT_NEAR(e.moment, hypergeometric_moment(m, s, p), 1e-10 * std::max(1.0, e.moment));
        EXPECT_TRUE(std::isfinite(e.ratio));
        EXPECT_GT(e.scale, 0.0);
      }
  EXPECT_NEAR(eta_moment_exact(6, 2, 2).moment, 0.8, 1e-15);
}

TEST(GaussianDiag, BoundDominatesMonteCarloTail) {
  Vector x{0.5, 0.5, 0.5, 0.5};
  std::vector<double> grid;
  for (int k = 1; k <= 20; ++k) grid.push_back(0.1 * k);
  const auto r = gaussian_diag_empirical_tail(x, 8, grid, 100000, Seed{11});
  for (const auto& point : r.curve) {
    EXPECT_LE(point.rate, point.bound) << "t=" << point.t;
    EXPECT_LE(point.ci_low, point.bound);
  }
}
