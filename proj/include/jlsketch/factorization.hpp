#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "jlsketch/numerics.hpp"
#include "jlsketch/rng.hpp"

namespace jlsketch {

/// Law of the random rows z in R^M. Spherical is the default.
enum class FactorSampler : std::uint8_t { Spherical = 0, BinaryCoin = 1, Gaussian = 2 };

/// Streaming state of the covariance factorization
///
///   A = Sigma (Sigma0^{-1/2} Z0 + (1/sigma) sum_t x_t z_tᵀ),
///   Sigma = (Sigma0^{-1} + (1/sigma^2) sum_t x_t x_tᵀ)^{-1}.
///
/// Stores the precision P = Sigma^{-1} and the accumulator B = Sigma0^{-1/2} Z0 + (1/sigma) sum x_t z_tᵀ;
/// Sigma and A are solved for on demand. Row j of Z0 comes from derive_seed(root, j) and z_t (for
/// the observation with zero-based index t) from derive_seed(root, d + t), so the random part can
/// be regenerated from the root seed alone. The observed x_t are kept for the identity check in
/// quadratic_ratio and for checkpoints.
struct FactorizerState {
  std::size_t d = 0;
  std::size_t M = 0;
  double sigma = 1.0;
  Seed root;
  FactorSampler sampler = FactorSampler::Spherical;
  Matrix prior_inv_sqrt;  // Sigma0^{-1/2}, symmetric root
  Matrix precision;       // d x d
  Matrix accumulator;     // d x M
  std::vector<Vector> history;

  std::uint64_t t() const noexcept { return history.size(); }
};

/// Row j of Z0 (j < d) or z_t (j = d + t) as drawn by the state.
Vector factor_noise_row(const FactorizerState& st, std::uint64_t j);

FactorizerState factorizer_init(const Matrix& prior_cov, double sigma, std::size_t M, Seed seed,
                                FactorSampler sampler = FactorSampler::Spherical);

/// P += x xᵀ / sigma^2;  B += (1/sigma) x z_tᵀ.
void observe(FactorizerState& st, std::span<const double> x);

/// A = P^{-1} B by Cholesky solves. Throws ConvergenceError when the condition estimate of P
/// exceeds 1e12.
Matrix factor(const FactorizerState& st);

/// Sigma = P^{-1}, symmetrized.
Matrix posterior_cov(const FactorizerState& st);

/// Eq. (4) assembled from scratch out of the stored history and regenerated noise:
/// Sigma Xᵀ Z with X = (Sigma0^{-1/2}; x_1ᵀ/sigma; ...) and Z = (Z0; z_1ᵀ; ...).
Matrix factor_direct(const FactorizerState& st);

/// (xᵀ A Aᵀ x) / (xᵀ Sigma x). Also checks xᵀ A Aᵀ x = |Zᵀ X Sigma x|^2 and xᵀ Sigma x = |X Sigma x|^2
/// to 1e-8 relative and throws std::logic_error if either fails.
double quadratic_ratio(const FactorizerState& st, std::span<const double> x);

struct SetCheck {
  bool pass = true;
  double min_ratio = 0.0;
  double max_ratio = 0.0;
  std::size_t argmin = 0;
  std::size_t argmax = 0;
  std::size_t outside = 0;  // vectors with ratio outside [1 - eps, 1 + eps]
  /// Largest |ratio - 1|.
  double worst_deviation() const;
};

/// Checks (1 - eps) xᵀ Sigma x <= xᵀ A Aᵀ x <= (1 + eps) xᵀ Sigma x for every x in `xs`.
SetCheck check_set(const FactorizerState& st, std::span<const Vector> xs, double eps);

/// Same check over the whole unit sphere: the extreme ratios are the extreme eigenvalues of the
/// whitened operator Sigma^{-1/2} A Aᵀ Sigma^{-1/2}. Limited to d <= 40.
SetCheck check_sphere(const FactorizerState& st, double eps);

/// Finite covering of S^{d-1}.
struct NetPoints {
  std::size_t d = 0;
  double eps = 0.0;
  double certified_radius = 0.0;
  std::vector<Vector> points;

  /// (1 + 2/eps)^d
  double size_budget() const;
};

inline constexpr std::size_t kNetCertificationSamples = 100000;

/// d = 2: k = ceil(2 pi / (2 asin(eps/2))) equally spaced angles, so adjacent points are at
/// chord distance <= eps; the covering radius is exactly 2 sin(pi / (2k)).
/// d = 3: Fibonacci sphere lattice, point count doubled until 1e5 seeded random unit vectors
/// all lie within eps of the net; certified_radius is the largest such distance observed.
/// Throws ConvergenceError if 20 doublings do not certify.
NetPoints epsilon_net(std::size_t d, double eps, Seed certification_seed = Seed{0x6e6574ULL});

struct NetNormCheck {
  double spectral = 0.0;  // |A|_2
  double net_max = 0.0;   // max over the net of |xᵀ A x|
  double bound = 0.0;     // net_max / (1 - 2 eps)
  bool holds = true;
};

/// |A|_2 <= (1 - 2 eps)^{-1} max_{x in net} |xᵀ A x|. Requires net.eps < 1/2.
NetNormCheck net_norm_check(const Matrix& a, const NetPoints& net);

}  // namespace jlsketch
