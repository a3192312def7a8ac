#include "jlsketch/factorization.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <Eigen/Dense>

#include "jlsketch/errors.hpp"
#include "jlsketch/samplers.hpp"

namespace jlsketch {

namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Eigen::Map<const RowMajor> view(const Matrix& a) { return {a.data().data(), static_cast<Eigen::Index>(a.rows()), static_cast<Eigen::Index>(a.cols())}; }

Matrix to_matrix(const RowMajor& a) {
  return Matrix(static_cast<std::size_t>(a.rows()), static_cast<std::size_t>(a.cols()),
                std::vector<double>(a.data(), a.data() + a.size()));
}

// V diag(f(lambda)) Vᵀ for a symmetric matrix.
template <typename F>
Matrix symmetric_function(const Matrix& a, F f) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(view(a));
  if (eig.info() != Eigen::Success) throw ConvergenceError("symmetric eigendecomposition failed");
  const Eigen::VectorXd mapped = eig.eigenvalues().unaryExpr(f);
  const RowMajor out = eig.eigenvectors() * mapped.asDiagonal() * eig.eigenvectors().transpose();
  Matrix result = to_matrix(out);
  for (std::size_t i = 0; i < result.rows(); ++i)
    for (std::size_t j = i + 1; j < result.cols(); ++j) {
      const double avg = 0.5 * (result(i, j) + result(j, i));
      result(i, j) = avg;
      result(j, i) = avg;
    }
  return result;
}

void fill_noise(FactorSampler sampler, std::span<double> out, Rng& rng) {
  switch (sampler) {
    case FactorSampler::Spherical: fill_spherical(out, rng); return;
    case FactorSampler::BinaryCoin: fill_scaled_cube(out, rng); return;
    case FactorSampler::Gaussian: fill_gaussian_column(out, rng); return;
  }
  throw DomainError("unknown factor sampler");
}

Matrix checked_precision_factor(const FactorizerState& st) {
  const Matrix lower = cholesky(st.precision);
  double lo = lower(0, 0);
  double hi = lower(0, 0);
  for (std::size_t i = 1; i < st.d; ++i) {
    lo = std::min(lo, lower(i, i));
    hi = std::max(hi, lower(i, i));
  }
  const double condition = (hi / lo) * (hi / lo);
  if (!(condition <= 1e12)) {
    throw ConvergenceError("posterior precision is numerically singular (condition estimate " + std::to_string(condition) + ")");
  }
  return lower;
}

void require_dim(const FactorizerState& st, std::span<const double> x) {
  if (x.size() != st.d) {
    throw DimensionError("expected a vector of dimension " + std::to_string(st.d) + ", got " + std::to_string(x.size()));
  }
}

// Zᵀ X (M x d) and Xᵀ X (d x d) rebuilt from the history and regenerated noise rows.
struct DirectOperators {
  Matrix zt_x;
  Matrix xt_x;
};

DirectOperators direct_operators(const FactorizerState& st) {
  DirectOperators out{Matrix(st.M, st.d), st.prior_inv_sqrt * st.prior_inv_sqrt};
  for (std::size_t j = 0; j < st.d; ++j) {
    const Vector z = factor_noise_row(st, j);
    const auto xrow = st.prior_inv_sqrt.row(j);
    for (std::size_t r = 0; r < st.M; ++r)
      for (std::size_t c = 0; c < st.d; ++c) out.zt_x(r, c) += z[r] * xrow[c];
  }
  const double inv_sigma = 1.0 / st.sigma;
  for (std::size_t t = 0; t < st.history.size(); ++t) {
    const Vector z = factor_noise_row(st, st.d + t);
    const Vector& x = st.history[t];
    for (std::size_t r = 0; r < st.M; ++r)
      for (std::size_t c = 0; c < st.d; ++c) out.zt_x(r, c) += z[r] * x[c] * inv_sigma;
    for (std::size_t a = 0; a < st.d; ++a)
      for (std::size_t b = 0; b < st.d; ++b) out.xt_x(a, b) += x[a] * x[b] * inv_sigma * inv_sigma;
  }
  return out;
}

bool close(double a, double b, double rel) { return std::abs(a - b) <= rel * std::max({std::abs(a), std::abs(b), 1e-300}); }

double ratio_with_identity(const Matrix& a_factor, const Matrix& cov, const DirectOperators& ops, std::span<const double> x) {
  const Vector w = multiply(cov, x);
  const double denom = dot(x, w);
  if (!(denom > 0.0)) throw DomainError("quadratic_ratio: xᵀ Sigma x must be positive");
  const Vector at_x = multiply(a_factor.transpose(), x);
  const double numer = squared_norm(at_x);

  const double projected = squared_norm(multiply(ops.zt_x, w));
  const double whitened = dot(w, multiply(ops.xt_x, w));
  if (!close(numer, projected, 1e-8) || !close(denom, whitened, 1e-8)) {
    throw std::logic_error("factorization identity check failed: xᵀAAᵀx = " + std::to_string(numer) + " vs |ZᵀXΣx|² = " +
                           std::to_string(projected) + ", xᵀΣx = " + std::to_string(denom) +
                           " vs |XΣx|² = " + std::to_string(whitened));
  }
  return numer / denom;
}

void record(SetCheck& out, std::size_t i, double ratio, double eps) {
  if (i == 0 || ratio < out.min_ratio) {
    out.min_ratio = ratio;
    out.argmin = i;
  }
  if (i == 0 || ratio > out.max_ratio) {
    out.max_ratio = ratio;
    out.argmax = i;
  }
  if (ratio < 1.0 - eps || ratio > 1.0 + eps) {
    ++out.outside;
    out.pass = false;
  }
}

}  // namespace

Vector factor_noise_row(const FactorizerState& st, std::uint64_t j) {
  Vector z(st.M);
  Rng rng(derive_seed(st.root, j));
  fill_noise(st.sampler, z, rng);
  return z;
}

FactorizerState factorizer_init(const Matrix& prior_cov, double sigma, std::size_t M, Seed seed, FactorSampler sampler) {
  if (!prior_cov.is_square() || prior_cov.empty()) throw DimensionError("prior covariance must be square and non-empty");
  if (!is_symmetric(prior_cov)) throw DomainError("prior covariance must be symmetric");
  if (!(sigma > 0.0)) throw DomainError("noise scale sigma must be positive");
  if (M == 0) throw DimensionError("sketch width M must be positive");

  FactorizerState st;
  st.d = prior_cov.rows();
  st.M = M;
  st.sigma = sigma;
  st.root = seed;
  st.sampler = sampler;
  st.precision = spd_inverse(prior_cov);  // throws NotPositiveDefiniteError for a non-SPD prior
  st.prior_inv_sqrt = symmetric_function(prior_cov, [](double v) { return 1.0 / std::sqrt(v); });
  st.accumulator = Matrix(st.d, M);
  for (std::size_t j = 0; j < st.d; ++j) {
    const Vector z = factor_noise_row(st, j);
    for (std::size_t i = 0; i < st.d; ++i) {
      const double c = st.prior_inv_sqrt(i, j);
      if (c == 0.0) continue;
      auto row = st.accumulator.row(i);
      for (std::size_t k = 0; k < M; ++k) row[k] += c * z[k];
    }
  }
  return st;
}

void observe(FactorizerState& st, std::span<const double> x) {
  require_dim(st, x);
  const Vector z = factor_noise_row(st, st.d + st.t());
  const double inv_sigma = 1.0 / st.sigma;
  const double inv_var = inv_sigma * inv_sigma;
  for (std::size_t i = 0; i < st.d; ++i) {
    for (std::size_t j = 0; j < st.d; ++j) st.precision(i, j) += inv_var * x[i] * x[j];
    const double c = inv_sigma * x[i];
    if (c == 0.0) continue;
    auto row = st.accumulator.row(i);
    for (std::size_t k = 0; k < st.M; ++k) row[k] += c * z[k];
  }
  st.history.emplace_back(x.begin(), x.end());
}

Matrix factor(const FactorizerState& st) { return cholesky_solve(checked_precision_factor(st), st.accumulator); }

Matrix posterior_cov(const FactorizerState& st) {
  Matrix cov = cholesky_solve(checked_precision_factor(st), Matrix::identity(st.d));
  for (std::size_t i = 0; i < st.d; ++i)
    for (std::size_t j = i + 1; j < st.d; ++j) {
      const double avg = 0.5 * (cov(i, j) + cov(j, i));
      cov(i, j) = avg;
      cov(j, i) = avg;
    }
  return cov;
}

Matrix factor_direct(const FactorizerState& st) {
  const DirectOperators ops = direct_operators(st);
  return spd_inverse(ops.xt_x) * ops.zt_x.transpose();
}

double quadratic_ratio(const FactorizerState& st, std::span<const double> x) {
  require_dim(st, x);
  return ratio_with_identity(factor(st), posterior_cov(st), direct_operators(st), x);
}

double SetCheck::worst_deviation() const { return std::max(std::abs(min_ratio - 1.0), std::abs(max_ratio - 1.0)); }

SetCheck check_set(const FactorizerState& st, std::span<const Vector> xs, double eps) {
  if (xs.empty()) throw DomainError("check_set: the set is empty");
  if (!(eps > 0.0)) throw DomainError("check_set: eps must be positive");
  const Matrix a_factor = factor(st);
  const Matrix cov = posterior_cov(st);
  const DirectOperators ops = direct_operators(st);
  SetCheck out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    require_dim(st, xs[i]);
    record(out, i, ratio_with_identity(a_factor, cov, ops, xs[i]), eps);
  }
  return out;
}

SetCheck check_sphere(const FactorizerState& st, double eps) {
  if (st.d > 40) throw DimensionError("check_sphere supports d <= 40");
  if (!(eps > 0.0)) throw DomainError("check_sphere: eps must be positive");
  const Matrix a_factor = factor(st);
  const Matrix root = symmetric_function(st.precision, [](double v) { return std::sqrt(v); });
  const Matrix whitened = root * a_factor;
  const RowMajor op = view(whitened) * view(whitened).transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(op, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) throw ConvergenceError("check_sphere: eigendecomposition failed");
  SetCheck out;
  out.min_ratio = eig.eigenvalues().minCoeff();
  out.max_ratio = eig.eigenvalues().maxCoeff();
  out.pass = out.min_ratio >= 1.0 - eps && out.max_ratio <= 1.0 + eps;
  out.outside = out.pass ? 0 : 1;
  return out;
}

double NetPoints::size_budget() const { return std::pow(1.0 + 2.0 / eps, static_cast<double>(d)); }

namespace {

std::vector<Vector> fibonacci_sphere(std::size_t count) {
  const double golden_angle = std::numbers::pi * (3.0 - std::sqrt(5.0));
  std::vector<Vector> points;
  points.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double z = 1.0 - (2.0 * static_cast<double>(i) + 1.0) / static_cast<double>(count);
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = golden_angle * static_cast<double>(i);
    Vector p{r * std::cos(phi), r * std::sin(phi), z};
    const double len = norm(p);
    for (double& v : p) v /= len;
    points.push_back(std::move(p));
  }
  return points;
}

// Largest distance from a sampled unit vector to its nearest net point.
double sampled_covering_radius(const std::vector<Vector>& points, std::size_t d, Seed seed) {
  double worst_dot = 1.0;
  Vector u(d);
  for (std::size_t s = 0; s < kNetCertificationSamples; ++s) {
    Rng rng(derive_seed(seed, s));
    fill_spherical(u, rng);
    double best = -1.0;
    for (const auto& p : points) best = std::max(best, dot(u, p));
    worst_dot = std::min(worst_dot, best);
  }
  return std::sqrt(std::max(0.0, 2.0 - 2.0 * worst_dot));
}

}  // namespace

NetPoints epsilon_net(std::size_t d, double eps, Seed certification_seed) {
  if (!(eps > 0.0 && eps < 1.0)) throw DomainError("epsilon_net: eps must lie in (0, 1)");
  NetPoints net;
  net.d = d;
  net.eps = eps;
  if (d == 2) {
    const double max_angle = 2.0 * std::asin(eps / 2.0);
    const auto k = static_cast<std::size_t>(std::ceil(2.0 * std::numbers::pi / max_angle));
    for (std::size_t i = 0; i < k; ++i) {
      const double angle = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(k);
      net.points.push_back({std::cos(angle), std::sin(angle)});
    }
    net.certified_radius = 2.0 * std::sin(std::numbers::pi / (2.0 * static_cast<double>(k)));
    return net;
  }
  if (d != 3) throw DimensionError("epsilon_net supports d in {2, 3}");

  std::size_t count = 4;
  for (int doubling = 0; doubling <= 20; ++doubling, count *= 2) {
    auto points = fibonacci_sphere(count);
    const double radius = sampled_covering_radius(points, d, certification_seed);
    if (radius <= eps) {
      net.points = std::move(points);
      net.certified_radius = radius;
      return net;
    }
  }
  throw ConvergenceError("epsilon_net: certification failed after 20 doublings");
}

NetNormCheck net_norm_check(const Matrix& a, const NetPoints& net) {
  if (!(net.eps < 0.5)) throw DomainError("net_norm_check requires net eps < 1/2");
  if (!a.is_square() || a.rows() != net.d) throw DimensionError("net_norm_check: matrix must be d x d");
  NetNormCheck out;
  out.spectral = spectral_norm_symmetric(a);
  for (const auto& p : net.points) out.net_max = std::max(out.net_max, std::abs(dot(p, multiply(a, p))));
  out.bound = out.net_max / (1.0 - 2.0 * net.eps);
  out.holds = out.spectral <= out.bound * (1.0 + 1e-12);
  return out;
}

}  // namespace jlsketch
