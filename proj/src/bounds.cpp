#include "jlsketch/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "jlsketch/errors.hpp"

namespace jlsketch {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// num / den with num / 0 = +inf for num > 0 and 0 / 0 = 0.
double ratio(double num, double den) {
  if (den > 0.0) return num / den;
  return num > 0.0 ? kInf : 0.0;
}

double two_sided(double quadratic_exponent, double linear_exponent) {
  return std::min(1.0, 2.0 * std::exp(-std::min(quadratic_exponent, linear_exponent)));
}

void check_eps_delta(double eps, double delta) {
  if (!(eps > 0.0 && eps < 1.0)) throw DomainError("eps must lie in (0, 1)");
  if (!(delta > 0.0 && delta < 0.5)) throw DomainError("delta must lie in (0, 1/2)");
}

std::size_t ceil_to_size(double v) {
  // Absorb rounding noise in products that are integers in exact arithmetic.
  const double rounded = std::round(v);
  if (std::abs(v - rounded) <= 1e-12 * std::max(1.0, rounded)) return static_cast<std::size_t>(rounded);
  return static_cast<std::size_t>(std::ceil(v));
}

}  // namespace

double hw_tail_bound(const HWInput& in) {
  if (!(in.t >= 0.0)) throw DomainError("hw_tail_bound: t must be non-negative");
  if (!(in.K > 0.0)) throw DomainError("hw_tail_bound: K must be positive");
  if (in.m == 0) throw DomainError("hw_tail_bound: m must be positive");
  if (!(in.spec >= 0.0) || in.frob < in.spec * (1.0 - 1e-12)) {
    throw DomainError("hw_tail_bound: norms must satisfy |A|_F >= |A|_2 >= 0");
  }
  const double k2 = in.K * in.K;
  const double quad = ratio(in.t * in.t, 64.0 * static_cast<double>(in.m) * k2 * k2 * in.frob * in.frob);
  const double lin = ratio(in.t, 8.0 * std::numbers::sqrt2 * k2 * in.spec);
  return two_sided(quad, lin);
}

double hw_gen_tail_bound(const GenHWInput& in) {
  if (!(in.t >= 0.0)) throw DomainError("hw_gen_tail_bound: t must be non-negative");
  if (!(in.K > 0.0)) throw DomainError("hw_gen_tail_bound: K must be positive");
  if (!(in.slice_frob_sq_sum >= 0.0) || !(in.slice_spec_max >= 0.0)) {
    throw DomainError("hw_gen_tail_bound: slice functionals must be non-negative");
  }
  const double k2 = in.K * in.K;
  const double quad = ratio(in.t * in.t, 64.0 * k2 * k2 * in.slice_frob_sq_sum);
  const double lin = ratio(in.t, 8.0 * std::numbers::sqrt2 * k2 * in.slice_spec_max);
  return two_sided(quad, lin);
}

namespace {

std::size_t check_slices(std::size_t n, std::span<const Vector> b) {
  if (b.size() != n) {
    throw DimensionError("slice functionals need one b vector per row of A (" + std::to_string(n) + "), got " +
                         std::to_string(b.size()));
  }
  if (n == 0) throw DimensionError("slice functionals need n >= 1");
  const std::size_t m = b.front().size();
  for (const auto& bi : b) {
    if (bi.size() != m) throw DimensionError("b vectors must share one dimension");
  }
  if (m == 0) throw DimensionError("b vectors must be non-empty");
  return m;
}

}  // namespace

// Slices are small; iterate close to machine precision.
constexpr double kSliceSpectralTol = 1e-14;

SliceFunctionals build_slice_functionals(const Matrix& a, std::span<const Vector> b) {
  if (!a.is_square()) throw DimensionError("build_slice_functionals: A must be square");
  const std::size_t n = a.rows();
  const std::size_t m = check_slices(n, b);
  SliceFunctionals out;
  Matrix slice(n, n);
  for (std::size_t k = 0; k < m; ++k) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) slice(i, j) = a(i, j) * b[i][k] * b[j][k];
    const double frob = frobenius_norm(slice);
    out.frob_sq_sum += frob * frob;
    out.spec_max = std::max(out.spec_max, spectral_norm_symmetric(slice, kSliceSpectralTol));
  }
  return out;
}

SliceFunctionals rank_one_slice_functionals(double scale, std::span<const double> x, std::span<const Vector> b) {
  const std::size_t m = check_slices(x.size(), b);
  SliceFunctionals out;
  for (std::size_t k = 0; k < m; ++k) {
    double weight = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) weight += x[i] * x[i] * b[i][k] * b[i][k];
    const double norm_k = std::abs(scale) * weight;
    out.frob_sq_sum += norm_k * norm_k;
    out.spec_max = std::max(out.spec_max, norm_k);
  }
  return out;
}

double squared_norm_tail_bound(double u, std::size_t n, double sigma) {
  if (!(u > 0.0)) throw DomainError("squared_norm_tail_bound: u must be positive");
  if (n == 0) throw DomainError("squared_norm_tail_bound: n must be positive");
  if (!(sigma > 0.0)) throw DomainError("squared_norm_tail_bound: sigma must be positive");
  const double s2 = sigma * sigma;
  return std::exp(-0.125 * std::min(u * u / (static_cast<double>(n) * s2 * s2), u / s2));
}

double gaussian_diag_tail_bound(double t, std::span<const double> x, std::size_t m) {
  if (!(t > 0.0)) throw DomainError("gaussian_diag_tail_bound: t must be positive");
  if (m == 0) throw DomainError("gaussian_diag_tail_bound: m must be positive");
  if (std::abs(norm(x) - 1.0) > 1e-9) throw DomainError("gaussian_diag_tail_bound: x must have unit norm");
  double fourth = 0.0;
  double max_sq = 0.0;
  for (double v : x) {
    const double sq = v * v;
    fourth += sq * sq;
    max_sq = std::max(max_sq, sq);
  }
  return std::exp(-static_cast<double>(m) * std::min(t * t / (8.0 * fourth), t / (8.0 * max_sq)));
}

std::size_t required_dim(const DimensionQuery& query, double eps, double delta) {
  check_eps_delta(eps, delta);
  const double inv_eps2 = 1.0 / (eps * eps);
  switch (query.kind) {
    case DimensionKind::UnitNorm:
      return ceil_to_size(64.0 * inv_eps2 * std::log(2.0 / delta));
    case DimensionKind::Gaussian: {
      const double c = 1.0 + 2.0 * std::numbers::sqrt2;
      return ceil_to_size(8.0 * c * c * inv_eps2 * std::log(4.0 / delta));
    }
    case DimensionKind::FactorCompact:
      if (query.d == 0) throw DomainError("required_dim: compact-set dimension d must be positive");
      return ceil_to_size(64.0 * inv_eps2 * (static_cast<double>(query.d) * std::log(9.0) + std::log(2.0 / delta)));
    case DimensionKind::FactorFinite:
      if (query.cardinality == 0) throw DomainError("required_dim: finite set must be non-empty");
      return ceil_to_size(64.0 * inv_eps2 * std::log(2.0 * static_cast<double>(query.cardinality) / delta));
  }
  throw DomainError("required_dim: unknown kind");
}

SparseParams sparse_jl_params(double eps, double delta, double c_m, double c_s) {
  check_eps_delta(eps, delta);
  if (!(c_m > 0.0) || !(c_s > 0.0)) throw DomainError("sparse_jl_params: constants must be positive");
  const double log_term = std::log(1.0 / delta);
  SparseParams out;
  out.m = std::max<std::size_t>(1, ceil_to_size(c_m * log_term / (eps * eps)));
  out.s = std::min(out.m, std::max<std::size_t>(1, ceil_to_size(c_s * log_term / eps)));
  return out;
}

}  // namespace jlsketch
