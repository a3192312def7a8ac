#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "jlsketch/numerics.hpp"

namespace jlsketch {

/// Inputs of the high-dimensional Hanson-Wright tail bound for S = sum_{i != j} a_ij <X_i, X_j>.
struct HWInput {
  double t = 0.0;
  double K = 1.0;       // max sub-Gaussian constant of the X_i
  std::size_t m = 1;    // dimension of each X_i
  double frob = 0.0;    // |A|_F
  double spec = 0.0;    // |A|_2
};

/// Inputs of the generalized bound for sum_{i != j} a_ij <b_i . X_i, b_j . X_j>.
struct GenHWInput {
  double t = 0.0;
  double K = 1.0;
  double slice_frob_sq_sum = 0.0;  // sum_k |A^b_k|_F^2
  double slice_spec_max = 0.0;     // max_k |A^b_k|_2
};

struct SliceFunctionals {
  double frob_sq_sum = 0.0;
  double spec_max = 0.0;
};

/// min(1, 2 exp(-min(t^2 / (64 m K^4 |A|_F^2), t / (8 sqrt2 K^2 |A|_2)))).
/// A term with a zero denominator is +infinity, so A = 0 gives 0 for t > 0.
double hw_tail_bound(const HWInput& in);

/// min(1, 2 exp(-min(t^2 / (64 K^4 sum_k |A^b_k|_F^2), t / (8 sqrt2 K^2 max_k |A^b_k|_2)))).
double hw_gen_tail_bound(const GenHWInput& in);

/// Slice matrices A^b_k(i, j) = a_ij b_ik b_jk for k = 0..m-1, formed explicitly.
/// `a` is n x n and symmetric; `b` holds n vectors of a common dimension m.
SliceFunctionals build_slice_functionals(const Matrix& a, std::span<const Vector> b);

/// Closed form for a = scale * x xᵀ: every slice is rank one,
/// |A^b_k|_2 = |A^b_k|_F = scale * sum_i x_i^2 b_ik^2.
SliceFunctionals rank_one_slice_functionals(double scale, std::span<const double> x, std::span<const Vector> b);

/// Upper tail of |X|^2 - n sigma^2 for a sigma-sub-Gaussian X in R^n:
/// exp(-(1/8) min(u^2 / (n sigma^4), u / sigma^2)).
double squared_norm_tail_bound(double u, std::size_t n, double sigma);

/// Upper tail of the diagonal term sum_i x_i^2 (|z_i|^2 - 1) of a Gaussian sketch, |x| = 1:
/// exp(-m min(t^2 / (8 sum_i x_i^4), t / (8 max_i x_i^2))).
double gaussian_diag_tail_bound(double t, std::span<const double> x, std::size_t m);

enum class DimensionKind { UnitNorm, Gaussian, FactorCompact, FactorFinite };

struct DimensionQuery {
  DimensionKind kind = DimensionKind::UnitNorm;
  std::size_t d = 0;            // FactorCompact
  std::size_t cardinality = 0;  // FactorFinite

  static DimensionQuery unit_norm() { return {DimensionKind::UnitNorm, 0, 0}; }
  static DimensionQuery gaussian() { return {DimensionKind::Gaussian, 0, 0}; }
  static DimensionQuery factor_compact(std::size_t d) { return {DimensionKind::FactorCompact, d, 0}; }
  static DimensionQuery factor_finite(std::size_t card) { return {DimensionKind::FactorFinite, 0, card}; }
};

/// Smallest dimension guaranteeing the (eps, delta) norm-preservation property (natural logs):
///  - UnitNorm (spherical, binary coin): 64 eps^-2 ln(2/delta)
///  - Gaussian:                          8 (1 + 2 sqrt2)^2 eps^-2 ln(4/delta)
///  - FactorCompact(d):                  64 eps^-2 (d ln 9 + ln(2/delta))
///  - FactorFinite(|X|):                 64 eps^-2 ln(2 |X| / delta)
/// Requires 0 < eps < 1 and 0 < delta < 1/2.
std::size_t required_dim(const DimensionQuery& query, double eps, double delta);

struct SparseParams {
  std::size_t m = 0;
  std::size_t s = 0;
};

/// m = ceil(c_m eps^-2 ln(1/delta)), s = min(m, ceil(c_s eps^-1 ln(1/delta))).
SparseParams sparse_jl_params(double eps, double delta, double c_m, double c_s);

}  // namespace jlsketch
