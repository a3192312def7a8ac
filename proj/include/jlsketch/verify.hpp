#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "jlsketch/numerics.hpp"
#include "jlsketch/rng.hpp"
#include "jlsketch/samplers.hpp"
#include "jlsketch/sketch.hpp"

namespace jlsketch {

inline constexpr double kDefaultConfidence = 0.99;

/// Clopper-Pearson exact interval for a binomial proportion.
std::pair<double, double> binomial_ci(std::size_t failures, std::size_t trials, double confidence = kDefaultConfidence);

/// Settings echoed into every report. Unset optionals are blank in CSV output.
struct RunEcho {
  std::string construction;
  std::optional<std::uint64_t> m, n, s, M, d, T;
  std::optional<double> eps, delta;
  std::size_t trials = 0;
  Seed seed;
};

struct TailPoint {
  double t = 0.0;
  std::size_t exceedances = 0;
  double rate = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double bound = 0.0;
};

struct ExperimentReport {
  RunEcho echo;
  std::size_t failures = 0;
  double rate = 0.0;
  double ci_low = 0.0;
  double ci_high = 1.0;
  std::optional<double> bound;
  std::vector<TailPoint> curve;
};

/// Fills failures/rate/ci from a count.
void set_rate(ExperimentReport& report, std::size_t failures, std::size_t trials, double confidence = kDefaultConfidence);

/// Which vector(s) each trial projects.
struct VectorSource {
  enum class Kind { Basis, RandomUnit, Provided };
  Kind kind = Kind::RandomUnit;
  std::vector<Vector> vectors;  // Provided only

  static VectorSource basis() { return {Kind::Basis, {}}; }
  static VectorSource random_unit() { return {Kind::RandomUnit, {}}; }
  static VectorSource provided(std::vector<Vector> v) { return {Kind::Provided, std::move(v)}; }
};

/// Index under the root seed reserved for the random test vector; trial i uses derive_seed(seed, i).
inline constexpr std::uint64_t kVectorStream = ~std::uint64_t{0};

/// The fixed unit vector RandomUnit sources use: uniform on S^{n-1}.
Vector random_unit_vector(std::size_t n, Seed seed);

struct JLOptions {
  unsigned threads = 1;
  double confidence = kDefaultConfidence;
  std::optional<double> delta;  // echoed, and reported as the target in `bound`
};

/// Empirical P(distortion > eps) over independent sketches.
///
/// Trial i projects with spec.with_seed(derive_seed(seed, i)). For a Basis source only the
/// first column is generated: |Pi e_1|^2 = |z_1|^2 and columns are independent, so this is the
/// same law as building the whole sketch. A Provided trial fails if any vector in the list does.
ExperimentReport jl_failure_rate(const SketchSpec& spec, double eps, std::size_t trials, Seed seed,
                                 const VectorSource& source, const JLOptions& options = {});

/// Symmetrized off-diagonal part (A + Aᵀ)/2 with the diagonal zeroed; the quadratic form
/// sum_{i != j} a_ij <X_i, X_j> depends on A only through it.
Matrix off_diagonal_part(const Matrix& a);

/// sum_{i != j} a_ij <X_i, X_j> for the rows X_i of `x` (n x m), given a = off_diagonal_part(A).
double hw_statistic(const Matrix& off_diag, const Matrix& x);

/// Symmetric n x n matrix with i.i.d. N(0, 1) entries on and above the diagonal; the diagonal is
/// zero when `zero_diagonal` is set.
Matrix random_symmetric(std::size_t n, Seed seed, bool zero_diagonal = true);

/// points equally spaced values t_max * k / points, k = 1..points, with t_max five standard
/// deviations of S for isotropic vectors: sd = sqrt(2) |A_off|_F K^2 sqrt(m).
std::vector<double> default_t_grid(const Matrix& off_diag, double K, std::size_t m, std::size_t points);

/// Monte Carlo tail P(|S| >= t) of S = sum_{i != j} a_ij <X_i, X_j>, X_i i.i.d. from `dist`,
/// against hw_tail_bound evaluated with the norms of off_diagonal_part(A).
ExperimentReport hw_empirical_tail(const DistributionSpec& dist, const Matrix& a, std::span<const double> t_grid,
                                   std::size_t trials, Seed seed, unsigned threads = 1,
                                   double confidence = kDefaultConfidence);

/// Exact law of S when every X_i is uniform on {+-1/sqrt m}^m, by enumerating all (2^m)^n outcomes.
class ExactTail {
 public:
  explicit ExactTail(std::vector<double> outcomes);

  /// P(|S| >= t).
  double tail(double t) const;
  /// Distinct values with probabilities; values closer than 1e-12 relative are merged.
  std::vector<std::pair<double, double>> distribution() const;
  std::size_t outcome_count() const noexcept { return sorted_abs_.size(); }
  double max_abs() const noexcept { return sorted_abs_.empty() ? 0.0 : sorted_abs_.back(); }

 private:
  std::vector<double> outcomes_;
  std::vector<double> sorted_abs_;
};

inline constexpr std::size_t kMaxEnumerationOutcomes = 65536;

ExactTail hw_exact_enumeration(const Matrix& a, std::size_t m);

/// |S| >= t with a relative slack of 1e-12, shared by the Monte Carlo and exact paths so that
/// atoms sitting exactly on a grid point count the same way in both.
bool exceeds(double statistic, double t) noexcept;

struct EtaMoment {
  double moment = 0.0;  // E[(sum_k eta_ik eta_jk)^p]
  double scale = 0.0;   // (sqrt(s^2/m) sqrt(p) + p)^p
  double ratio = 0.0;   // moment / scale
};

/// Exact p-th moment of the overlap of two independent uniform s-subsets of [m], by enumerating
/// all C(m, s)^2 pairs. Limits: m <= 10, 1 <= s <= m, 1 <= p <= 8.
EtaMoment eta_moment_exact(std::size_t m, std::size_t s, unsigned p);

/// Monte Carlo upper tail P(D >= t) of the diagonal term D = sum_i x_i^2 (|z_i|^2 - 1) of a
/// Gaussian sketch with m rows, against gaussian_diag_tail_bound. x must have unit norm.
ExperimentReport gaussian_diag_empirical_tail(std::span<const double> x, std::size_t m, std::span<const double> t_grid,
                                              std::size_t trials, Seed seed, unsigned threads = 1,
                                              double confidence = kDefaultConfidence);

}  // namespace jlsketch
