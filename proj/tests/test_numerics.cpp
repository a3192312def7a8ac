#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "jlsketch/errors.hpp"
#include "jlsketch/numerics.hpp"
#include "oracles.hpp"

using namespace jlsketch;

namespace {

Matrix random_matrix(std::size_t rows, std::size_t cols, std::mt19937_64& gen) {
  std::normal_distribution<double> normal;
  Matrix a(rows, cols);
  for (auto& v : a.data()) v = normal(gen);
  return a;
}

Matrix random_symmetric_matrix(std::size_t n, std::mt19937_64& gen) {
  const Matrix a = random_matrix(n, n, gen);
  return 0.5 * (a + a.transpose());
}

}  // namespace

TEST(Matrix, RejectsNonFiniteEntries) {
  EXPECT_THROW(Matrix(1, 2, std::vector<double>{1.0, std::numeric_limits<double>::quiet_NaN()}), DomainError);
  EXPECT_THROW(Matrix(2, 2, std::vector<double>{1.0, 2.0, 3.0}), DimensionError);
}

TEST(Matrix, ProductAgreesWithEigen) {
  std::mt19937_64 gen(11);
  const Matrix a = random_matrix(4, 3, gen);
  const Matrix b = random_matrix(3, 5, gen);
  const Eigen::MatrixXd want = oracle::to_eigen(a) * oracle::to_eigen(b);
  EXPECT_LT((oracle::to_eigen(a * b) - want).norm(), 1e-12);
  EXPECT_THROW(a * a, DimensionError);
}

TEST(FrobeniusNorm, RankOneOuterProduct) {
  const Vector x{3.0, 4.0};
  EXPECT_NEAR(frobenius_norm(outer(x, x)), 25.0, 1e-12);
}

TEST(FrobeniusNorm, OneToNine) {
  const Matrix a = Matrix::from_rows({{1, 2, 3}, {4, 5, 6}, {7, 8, 9}});
  double sum = 0.0;
  for (int v = 1; v <= 9; ++v) sum += v * v;
  EXPECT_NEAR(frobenius_norm(a), std::sqrt(sum), 1e-12);
  EXPECT_NEAR(frobenius_norm(a), 16.881943016134134, 1e-12);
}

TEST(FrobeniusNorm, SquareEqualsTraceOfGram) {
  std::mt19937_64 gen(3);
  for (int rep = 0; rep < 50; ++rep) {
    const Matrix a = random_matrix(1 + rep % 7, 1 + rep % 5, gen);
    const double f = frobenius_norm(a);
    EXPECT_NEAR(f * f, trace(a.transpose() * a), 1e-12 * f * f);
  }
}

TEST(SpectralNorm, RankOneOuterProduct) {
  const Vector x{3.0, 4.0};
  EXPECT_NEAR(spectral_norm_symmetric(outer(x, x)), 25.0, 1e-8);
}

TEST(SpectralNorm, MatchesEigensolver) {
  std::mt19937_64 gen(5);
  for (int rep = 0; rep < 20; ++rep) {
    const Matrix a = random_symmetric_matrix(5, gen);
    EXPECT_NEAR(spectral_norm_symmetric(a), oracle::spectral_norm(a), 1e-8);
  }
}

TEST(SpectralNorm, NeverExceedsFrobenius) {
  std::mt19937_64 gen(6);
  for (int rep = 0; rep < 100; ++rep) {
    const Matrix a = random_symmetric_matrix(1 + rep % 9, gen);
    EXPECT_LE(spectral_norm_symmetric(a), frobenius_norm(a) * (1.0 + 1e-12));
  }
}

TEST(SpectralNorm, DominantNegativeEigenvalue) {
  const Vector diag{2.0, -5.0, 1.0};
  EXPECT_NEAR(spectral_norm_symmetric(Matrix::diagonal(diag)), 5.0, 1e-8);
}

TEST(SpectralNorm, ZeroMatrix) { EXPECT_EQ(spectral_norm_symmetric(Matrix(3, 3)), 0.0); }

TEST(SpectralNorm, RejectsBadInput) {
  EXPECT_THROW(spectral_norm_symmetric(Matrix(2, 3)), DimensionError);
  EXPECT_THROW(spectral_norm_symmetric(Matrix::from_rows({{0, 1}, {0, 0}})), DomainError);
}

TEST(Cholesky, HandInstance) {
  const Matrix l = cholesky(Matrix::from_rows({{4, 2}, {2, 3}}));
  EXPECT_NEAR(l(0, 0), 2.0, 1e-15);
  EXPECT_EQ(l(0, 1), 0.0);
  EXPECT_NEAR(l(1, 0), 1.0, 1e-15);
  EXPECT_NEAR(l(1, 1), std::sqrt(2.0), 1e-15);
}

TEST(Cholesky, ReproducesLowerFactor) {
  std::mt19937_64 gen(8);
  std::uniform_real_distribution<double> pos(0.5, 2.0);
  for (int rep = 0; rep < 50; ++rep) {
    const std::size_t n = 1 + rep % 8;
    Matrix l = random_matrix(n, n, gen);
    for (std::size_t i = 0; i < n; ++i) {
      l(i, i) = pos(gen);
      for (std::size_t j = i + 1; j < n; ++j) l(i, j) = 0.0;
    }
    EXPECT_LT(oracle::relative_frobenius(cholesky(l * l.transpose()), l), 1e-8);
  }
}

TEST(Cholesky, ReportsFailingPivot) {
  try {
    cholesky(Matrix::from_rows({{1, 0, 0}, {0, 1, 2}, {0, 2, 1}}));
    FAIL() << "expected NotPositiveDefiniteError";
  } catch (const NotPositiveDefiniteError& e) {
    EXPECT_EQ(e.pivot(), 2u);
  }
}

TEST(Cholesky, SolveAndInverseAgreeWithEigen) {
  std::mt19937_64 gen(9);
  const Matrix g = random_matrix(6, 6, gen);
  const Matrix p = g * g.transpose() + Matrix::identity(6);
  const Matrix inv = spd_inverse(p);
  EXPECT_LT(oracle::relative_frobenius(inv, oracle::from_eigen(oracle::to_eigen(p).inverse())), 1e-10);
  EXPECT_TRUE(is_symmetric(inv, 0.0));
  const Vector b{1, 2, 3, 4, 5, 6};
  const Vector x = cholesky_solve(cholesky(p), b);
  const Vector back = multiply(p, x);
  for (std::size_t i = 0; i < b.size(); ++i) EXPECT_NEAR(back[i], b[i], 1e-10);
}
