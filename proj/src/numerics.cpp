#include "jlsketch/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "jlsketch/errors.hpp"
#include "jlsketch/rng.hpp"

namespace jlsketch {

namespace {

void require_finite(std::span<const double> values) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw DomainError("matrix entry " + std::to_string(i) + " is not finite");
    }
  }
}

void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError(std::string(op) + ": shape mismatch " + std::to_string(a.rows()) + "x" +
                         std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                         std::to_string(b.cols()));
  }
}

// Forward substitution L y = b, in place.
void lower_solve_in_place(const Matrix& lower, std::span<double> b) {
  const std::size_t n = lower.rows();
  for (std::size_t i = 0; i < n; ++i) {
    double acc = b[i];
    const auto row = lower.row(i);
    for (std::size_t k = 0; k < i; ++k) acc -= row[k] * b[k];
    b[i] = acc / row[i];
  }
}

// Back substitution Lᵀ x = y, in place.
void upper_transpose_solve_in_place(const Matrix& lower, std::span<double> b) {
  const std::size_t n = lower.rows();
  for (std::size_t ii = n; ii-- > 0;) {
    double acc = b[ii];
    for (std::size_t k = ii + 1; k < n; ++k) acc -= lower(k, ii) * b[k];
    b[ii] = acc / lower(ii, ii);
  }
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill) : rows_(rows), cols_(cols), data_(rows * cols, fill) {
  if (rows == 0 || cols == 0) throw DimensionError("matrix dimensions must be positive");
  if (!std::isfinite(fill)) throw DomainError("matrix fill value is not finite");
}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> row_major)
    : rows_(rows), cols_(cols), data_(std::move(row_major)) {
  if (rows == 0 || cols == 0) throw DimensionError("matrix dimensions must be positive");
  if (data_.size() != rows * cols) {
    throw DimensionError("matrix data has " + std::to_string(data_.size()) + " entries, expected " +
                         std::to_string(rows * cols));
  }
  require_finite(data_);
}

Matrix Matrix::identity(std::size_t n) {
  Matrix out(n, n);
  for (std::size_t i = 0; i < n; ++i) out(i, i) = 1.0;
  return out;
}

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows.begin()->size();
  std::vector<double> data;
  data.reserve(r * c);
  for (const auto& row : rows) {
    if (row.size() != c) throw DimensionError("ragged row list");
    data.insert(data.end(), row.begin(), row.end());
  }
  return Matrix(r, c, std::move(data));
}

Matrix Matrix::diagonal(std::span<const double> diag) {
  Matrix out(diag.size(), diag.size());
  for (std::size_t i = 0; i < diag.size(); ++i) out(i, i) = diag[i];
  require_finite(out.data());
  return out;
}

Matrix Matrix::transpose() const {
  Matrix out(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) out(j, i) = (*this)(i, j);
  return out;
}

Matrix operator*(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw DimensionError("matrix product: inner dimensions " + std::to_string(a.cols()) + " and " +
                         std::to_string(b.rows()) + " differ");
  }
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto dst = out.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      const auto src = b.row(k);
      for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += aik * src[j];
    }
  }
  return out;
}

Matrix operator+(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "matrix sum");
  Matrix out = a;
  auto dst = out.data();
  const auto src = b.data();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
  return out;
}

Matrix operator-(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "matrix difference");
  Matrix out = a;
  auto dst = out.data();
  const auto src = b.data();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] -= src[i];
  return out;
}

Matrix operator*(double c, const Matrix& a) {
  Matrix out = a;
  for (double& v : out.data()) v *= c;
  return out;
}

Vector multiply(const Matrix& a, std::span<const double> x) {
  if (a.cols() != x.size()) {
    throw DimensionError("matrix-vector product: matrix has " + std::to_string(a.cols()) +
                         " columns, vector has dimension " + std::to_string(x.size()));
  }
  Vector out(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) out[i] = dot(a.row(i), x);
  return out;
}

double dot(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DimensionError("dot product of vectors with different dimensions");
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) acc += x[i] * y[i];
  return acc;
}

double squared_norm(std::span<const double> x) {
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return acc;
}

double norm(std::span<const double> x) { return std::sqrt(squared_norm(x)); }

Matrix outer(std::span<const double> x, std::span<const double> y) {
  Matrix out(x.size(), y.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = 0; j < y.size(); ++j) out(i, j) = x[i] * y[j];
  return out;
}

double trace(const Matrix& a) {
  if (!a.is_square()) throw DimensionError("trace of a non-square matrix");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i) acc += a(i, i);
  return acc;
}

double frobenius_norm(const Matrix& a) { return norm(a.data()); }

bool is_symmetric(const Matrix& a, double tol) {
  if (!a.is_square()) return false;
  double scale = 1.0;
  for (double v : a.data()) scale = std::max(scale, std::abs(v));
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = i + 1; j < a.cols(); ++j)
      if (std::abs(a(i, j) - a(j, i)) > tol * scale) return false;
  return true;
}

namespace {

// Largest |Ritz value| of `a` on span{v, a v} for a unit vector v; w = a v on entry.
// Returns the estimate and leaves q as scratch. A pair of eigenvalues +-lambda (common for
// zero-diagonal matrices) makes plain power iteration stall, but lies inside this span.
double ritz_estimate(const Matrix& a, std::span<const double> v, std::span<const double> w, Vector& q, Vector& u) {
  const std::size_t n = v.size();
  const double alpha = dot(v, w);
  for (std::size_t i = 0; i < n; ++i) q[i] = w[i] - alpha * v[i];
  const double beta = norm(q);
  if (beta <= 64.0 * std::numeric_limits<double>::epsilon() * norm(w)) return std::abs(alpha);
  for (double& x : q) x /= beta;
  for (std::size_t i = 0; i < n; ++i) u[i] = dot(a.row(i), q);
  const double gamma = dot(q, u);
  const double mean = 0.5 * (alpha + gamma);
  const double radius = std::hypot(0.5 * (alpha - gamma), beta);
  return std::max(std::abs(mean + radius), std::abs(mean - radius));
}

}  // namespace

double spectral_norm_symmetric(const Matrix& a, double tol, std::size_t max_iterations) {
  if (!a.is_square()) throw DimensionError("spectral_norm_symmetric: matrix is not square");
  if (!is_symmetric(a)) throw DomainError("spectral_norm_symmetric: matrix is not symmetric");

  const std::size_t n = a.rows();
  constexpr int kMaxRestarts = 8;
  Rng rng(Seed{0x5eed5eed5eedULL + n});
  Vector v(n);
  Vector w(n);
  Vector q(n);
  Vector u(n);

  for (int restart = 0; restart < kMaxRestarts; ++restart) {
    for (double& x : v) x = rng.normal();
    const double start_norm = norm(v);
    for (double& x : v) x /= start_norm;

    double estimate = -1.0;
    double previous_change = -1.0;
    bool annihilated = false;
    for (std::size_t it = 0; it < max_iterations; ++it) {
      for (std::size_t i = 0; i < n; ++i) w[i] = dot(a.row(i), v);
      const double length = norm(w);
      if (length == 0.0) {
        annihilated = true;
        break;
      }
      const double next = ritz_estimate(a, v, w, q, u);
      for (std::size_t i = 0; i < n; ++i) v[i] = w[i] / length;
      if (estimate >= 0.0) {
        const double scale = std::max(1.0, next);
        const double change = std::abs(next - estimate);
        // The estimate converges geometrically; with ratio q the distance left is about
        // change * q / (1 - q), which is what must fall below the tolerance.
        if (change <= 8.0 * std::numeric_limits<double>::epsilon() * scale) return next;
        if (previous_change > 0.0 && change < previous_change) {
          const double ratio = change / previous_change;
          if (change * (1.0 + ratio / (1.0 - ratio)) < tol * scale) return next;
        }
        previous_change = change;
      }
      estimate = next;
    }
    if (!annihilated) {
      throw ConvergenceError("spectral_norm_symmetric: no convergence after " + std::to_string(max_iterations) +
                             " iterations");
    }
  }
  return 0.0;
}

Matrix cholesky(const Matrix& p) {
  if (!p.is_square()) throw DimensionError("cholesky: matrix is not square");
  const std::size_t n = p.rows();
  Matrix lower(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double diag = p(j, j);
    for (std::size_t k = 0; k < j; ++k) diag -= lower(j, k) * lower(j, k);
    if (!(diag > 0.0)) throw NotPositiveDefiniteError(j, diag);
    const double ljj = std::sqrt(diag);
    lower(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double acc = p(i, j);
      for (std::size_t k = 0; k < j; ++k) acc -= lower(i, k) * lower(j, k);
      lower(i, j) = acc / ljj;
    }
  }
  return lower;
}

Vector cholesky_solve(const Matrix& lower, std::span<const double> b) {
  if (lower.rows() != b.size()) throw DimensionError("cholesky_solve: right-hand side has wrong dimension");
  Vector x(b.begin(), b.end());
  lower_solve_in_place(lower, x);
  upper_transpose_solve_in_place(lower, x);
  return x;
}

Matrix cholesky_solve(const Matrix& lower, const Matrix& b) {
  if (lower.rows() != b.rows()) throw DimensionError("cholesky_solve: right-hand side has wrong row count");
  const std::size_t n = b.rows();
  Matrix out = b;
  Vector column(n);
  for (std::size_t j = 0; j < b.cols(); ++j) {
    for (std::size_t i = 0; i < n; ++i) column[i] = b(i, j);
    lower_solve_in_place(lower, column);
    upper_transpose_solve_in_place(lower, column);
    for (std::size_t i = 0; i < n; ++i) out(i, j) = column[i];
  }
  return out;
}

Matrix spd_inverse(const Matrix& p) {
  const Matrix lower = cholesky(p);
  Matrix inv = cholesky_solve(lower, Matrix::identity(p.rows()));
  for (std::size_t i = 0; i < inv.rows(); ++i)
    for (std::size_t j = i + 1; j < inv.cols(); ++j) {
      const double avg = 0.5 * (inv(i, j) + inv(j, i));
      inv(i, j) = avg;
      inv(j, i) = avg;
    }
  return inv;
}

}  // namespace jlsketch
