#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace jlsketch {

using Vector = std::vector<double>;

/// Dense row-major matrix of finite doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  /// Takes ownership of `row_major`; throws if the size does not match or an entry is not finite.
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> row_major);

  static Matrix identity(std::size_t n);
  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);
  static Matrix diagonal(std::span<const double> diag);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return data_.empty(); }
  bool is_square() const noexcept { return rows_ == cols_; }

  double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) noexcept { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const noexcept { return {data_.data() + i * cols_, cols_}; }
  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  Matrix transpose() const;

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix operator*(const Matrix& a, const Matrix& b);
Matrix operator+(const Matrix& a, const Matrix& b);
Matrix operator-(const Matrix& a, const Matrix& b);
Matrix operator*(double c, const Matrix& a);
Vector multiply(const Matrix& a, std::span<const double> x);

double dot(std::span<const double> x, std::span<const double> y);
double squared_norm(std::span<const double> x);
double norm(std::span<const double> x);
/// x yᵀ
Matrix outer(std::span<const double> x, std::span<const double> y);

double trace(const Matrix& a);
double frobenius_norm(const Matrix& a);
/// max |a_ij - a_ji| <= tol * max(1, max |a_ij|)
bool is_symmetric(const Matrix& a, double tol = 1e-10);

/// Largest absolute eigenvalue of a symmetric matrix by power iteration.
///
/// Iterates v <- A v / |A v| from a seeded random start. Each step estimates the norm by the
/// largest |Ritz value| on span{v, A v}, which also resolves eigenvalue pairs +-lambda where
/// |A v| alone converges arbitrarily slowly. The estimates converge geometrically; iteration stops when the remaining error extrapolated from the last two
/// changes is below tol * max(1, estimate), or the change is at rounding level. A start vector that is
/// annihilated by A triggers a restart from a fresh random vector; after a bounded number of
/// restarts the matrix is taken to be zero on every direction tried, which for a symmetric
/// matrix means A = 0. Throws DimensionError for non-square input, DomainError for asymmetric
/// input and ConvergenceError if `max_iterations` is reached.
double spectral_norm_symmetric(const Matrix& a, double tol = 1e-10, std::size_t max_iterations = 100000);

/// Lower-triangular L with L Lᵀ = p. Throws NotPositiveDefiniteError naming the failing pivot.
Matrix cholesky(const Matrix& p);

/// Solves (L Lᵀ) X = B given the Cholesky factor L.
Matrix cholesky_solve(const Matrix& lower, const Matrix& b);
Vector cholesky_solve(const Matrix& lower, std::span<const double> b);

/// Inverse of an SPD matrix through its Cholesky factor, symmetrized.
Matrix spd_inverse(const Matrix& p);

}  // namespace jlsketch
