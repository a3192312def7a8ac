#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "jlsketch/numerics.hpp"
#include "jlsketch/rng.hpp"

namespace jlsketch {

enum class DistributionKind { Spherical, ScaledCube, IsotropicGaussian, SHot, Rademacher };

/// A law on R^m.
///  - Spherical:          uniform on the unit sphere S^{m-1}
///  - ScaledCube:         (1/sqrt m) * uniform {+1,-1}^m
///  - IsotropicGaussian:  N(0, I_m / m)
///  - SHot:               0/1 vector with exactly s ones, support uniform over all C(m, s) subsets
///  - Rademacher:         uniform {+1,-1}^m, unscaled
struct DistributionSpec {
  DistributionKind kind = DistributionKind::Spherical;
  std::size_t m = 1;
  std::size_t s = 0;

  static DistributionSpec spherical(std::size_t m) { return {DistributionKind::Spherical, m, 0}; }
  static DistributionSpec scaled_cube(std::size_t m) { return {DistributionKind::ScaledCube, m, 0}; }
  static DistributionSpec gaussian(std::size_t m) { return {DistributionKind::IsotropicGaussian, m, 0}; }
  static DistributionSpec s_hot(std::size_t m, std::size_t s) { return {DistributionKind::SHot, m, s}; }
  static DistributionSpec rademacher(std::size_t m) { return {DistributionKind::Rademacher, m, 0}; }

  void validate() const;
  std::string name() const;
};

DistributionKind parse_distribution_kind(const std::string& name);

/// Sub-Gaussian constant K of the vector law: 1/sqrt(m) for the three normalized laws, 1 for
/// Rademacher. SHot is not mean zero and has none; DomainError.
double sub_gaussian_constant(const DistributionSpec& dist);

// Stream-level samplers fill `out` (its size is the dimension) from `rng`.
void fill_spherical(std::span<double> out, Rng& rng);
void fill_scaled_cube(std::span<double> out, Rng& rng);
void fill_gaussian_column(std::span<double> out, Rng& rng);
void fill_rademacher(std::span<double> out, Rng& rng);
void fill(const DistributionSpec& dist, std::span<double> out, Rng& rng);

/// Sorted support of a uniform s-subset of {0, ..., m-1} by Floyd's algorithm.
/// `marks` is scratch of size >= m that must be all false on entry; it is left all false.
void s_hot_support(std::size_t m, std::size_t s, Rng& rng, std::vector<char>& marks, std::vector<std::uint32_t>& out);
std::vector<std::uint32_t> s_hot_support(std::size_t m, std::size_t s, Rng& rng);

Vector sample_spherical(std::size_t m, Seed seed);
Vector sample_scaled_cube(std::size_t m, Seed seed);
Vector sample_gaussian_column(std::size_t m, Seed seed);
Vector sample_s_hot(std::size_t m, std::size_t s, Seed seed);
Vector sample(const DistributionSpec& dist, Seed seed);

/// Column generator plugged into sketches and moment checks: fills a column of the given size.
using ColumnSampler = std::function<void(std::span<double>, Rng&)>;

struct BetaParams {
  double alpha = 1.0;
  double beta = 1.0;
};

double beta_variance(BetaParams p);

/// E[(X - EX)^k] for X ~ Beta(alpha, beta) from the two-term central-moment recurrence
///
///   mu_k = (k-1)(beta-alpha) / ((alpha+beta)(alpha+beta+k-1)) * mu_{k-1}
///        + (k-1) alpha beta / ((alpha+beta)^2 (alpha+beta+k-1)) * mu_{k-2},
///
/// started from mu_0 = 1, mu_1 = 0.
double beta_central_moment(BetaParams p, unsigned k);
/// mu_0 .. mu_{k_max}.
std::vector<double> beta_central_moments(BetaParams p, unsigned k_max);

/// E[<z, v>^k] for z uniform on S^{m-1} and any unit v. The marginal is 2 Beta((m-1)/2, (m-1)/2) - 1,
/// which is centered, so this is 2^k times the Beta central moment. Requires m >= 2.
double spherical_marginal_moment(std::size_t m, unsigned k);

struct BernsteinRow {
  unsigned k = 0;
  double moment = 0.0;  // empirical E| |z|^2 - mean |^k
  double ci_low = 0.0;
  double ci_high = 0.0;
  double bound = 0.0;   // C k! (1/m)^{(k-2)/2}
  bool violated = false;
};

struct BernsteinOptions {
  std::size_t bootstrap_resamples = 1000;
  double confidence = 0.99;
  unsigned threads = 1;
};

struct BernsteinReport {
  std::string distribution;
  std::size_t m = 0;
  double C = 0.0;
  std::size_t trials = 0;
  Seed seed;
  double mean_squared_norm = 0.0;
  std::vector<BernsteinRow> rows;

  bool any_violation() const;
};

/// Empirical central absolute moments of |z|^2 for k = 3..k_max with percentile-bootstrap
/// intervals, checked against the Bernstein growth bound. A row is flagged when the point
/// estimate exceeds the bound.
BernsteinReport bernstein_margin(const DistributionSpec& dist, unsigned k_max, std::size_t trials, Seed seed, double C,
                                 const BernsteinOptions& options = {});
BernsteinReport bernstein_margin(const std::string& name, std::size_t m, const ColumnSampler& sampler, unsigned k_max,
                                 std::size_t trials, Seed seed, double C, const BernsteinOptions& options = {});

}  // namespace jlsketch
