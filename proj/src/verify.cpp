#include "jlsketch/verify.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include <boost/math/special_functions/beta.hpp>

#include "jlsketch/bounds.hpp"
#include "jlsketch/errors.hpp"
#include "jlsketch/parallel.hpp"

namespace jlsketch {

std::pair<double, double> binomial_ci(std::size_t failures, std::size_t trials, double confidence) {
  if (trials == 0 || failures > trials) throw DomainError("binomial_ci requires 0 <= failures <= trials, trials > 0");
  if (!(confidence > 0.0 && confidence < 1.0)) throw DomainError("binomial_ci: confidence must lie in (0, 1)");
  const double alpha = 1.0 - confidence;
  const auto k = static_cast<double>(failures);
  const auto n = static_cast<double>(trials);
  const double low = failures == 0 ? 0.0 : boost::math::ibeta_inv(k, n - k + 1.0, alpha / 2.0);
  const double high = failures == trials ? 1.0 : boost::math::ibeta_inv(k + 1.0, n - k, 1.0 - alpha / 2.0);
  return {low, high};
}

void set_rate(ExperimentReport& report, std::size_t failures, std::size_t trials, double confidence) {
  report.failures = failures;
  report.rate = static_cast<double>(failures) / static_cast<double>(trials);
  std::tie(report.ci_low, report.ci_high) = binomial_ci(failures, trials, confidence);
  report.ci_low = std::min(report.ci_low, report.rate);
  report.ci_high = std::max(report.ci_high, report.rate);
}

namespace {

TailPoint tail_point(double t, std::size_t exceed, std::size_t trials, double bound, double confidence) {
  TailPoint p;
  p.t = t;
  p.exceedances = exceed;
  p.rate = static_cast<double>(exceed) / static_cast<double>(trials);
  std::tie(p.ci_low, p.ci_high) = binomial_ci(exceed, trials, confidence);
  p.ci_low = std::min(p.ci_low, p.rate);
  p.ci_high = std::max(p.ci_high, p.rate);
  p.bound = bound;
  return p;
}

}  // namespace

Vector random_unit_vector(std::size_t n, Seed seed) { return sample_spherical(n, derive_seed(seed, kVectorStream)); }

ExperimentReport jl_failure_rate(const SketchSpec& spec, double eps, std::size_t trials, Seed seed,
                                 const VectorSource& source, const JLOptions& options) {
  spec.validate();
  if (trials < 100) throw DomainError("jl_failure_rate requires at least 100 trials");
  if (!(eps > 0.0)) throw DomainError("jl_failure_rate: eps must be positive");

  std::vector<Vector> vectors;
  switch (source.kind) {
    case VectorSource::Kind::Basis:
      break;
    case VectorSource::Kind::RandomUnit:
      vectors.push_back(random_unit_vector(spec.n, seed));
      break;
    case VectorSource::Kind::Provided:
      if (source.vectors.empty()) throw DomainError("jl_failure_rate: provided vector list is empty");
      for (const auto& v : source.vectors) {
        if (v.size() != spec.n) throw DimensionError("jl_failure_rate: provided vector has the wrong dimension");
        if (!(squared_norm(v) > 0.0)) throw DomainError("jl_failure_rate: provided vector is zero");
      }
      vectors = source.vectors;
      break;
  }

  std::vector<char> failed(trials, 0);
  parallel_for(trials, options.threads, [&](std::size_t i) {
    const SketchSpec trial_spec = spec.with_seed(derive_seed(seed, i));
    if (source.kind == VectorSource::Kind::Basis) {
      const Vector z = column(trial_spec, 0);
      failed[i] = std::abs(squared_norm(z) - 1.0) > eps;
      return;
    }
    for (const auto& x : vectors) {
      if (relative_distortion(x, project(trial_spec, x)) > eps) {
        failed[i] = 1;
        return;
      }
    }
  });

  std::size_t failures = 0;
  for (char f : failed) failures += f != 0;

  ExperimentReport report;
  report.echo.construction = spec.name();
  report.echo.m = spec.m;
  report.echo.n = spec.n;
  if (spec.is_sparse()) report.echo.s = spec.s;
  report.echo.eps = eps;
  report.echo.delta = options.delta;
  report.echo.trials = trials;
  report.echo.seed = seed;
  report.bound = options.delta;
  set_rate(report, failures, trials, options.confidence);
  return report;
}

Matrix off_diagonal_part(const Matrix& a) {
  if (!a.is_square()) throw DimensionError("quadratic form matrix must be square");
  Matrix out(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      if (i != j) out(i, j) = 0.5 * (a(i, j) + a(j, i));
  return out;
}

double hw_statistic(const Matrix& off_diag, const Matrix& x) {
  const std::size_t n = off_diag.rows();
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double a = off_diag(i, j);
      if (a != 0.0) total += 2.0 * a * dot(x.row(i), x.row(j));
    }
  }
  return total;
}

Matrix random_symmetric(std::size_t n, Seed seed, bool zero_diagonal) {
  if (n == 0) throw DimensionError("random_symmetric: n must be positive");
  Matrix a(n, n);
  Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      const double v = rng.normal();
      if (i == j) {
        a(i, i) = zero_diagonal ? 0.0 : v;
      } else {
        a(i, j) = v;
        a(j, i) = v;
      }
    }
  return a;
}

std::vector<double> default_t_grid(const Matrix& off_diag, double K, std::size_t m, std::size_t points) {
  if (points == 0) throw DomainError("t grid needs at least one point");
  const double sd = std::sqrt(2.0) * frobenius_norm(off_diag) * K * K * std::sqrt(static_cast<double>(m));
  const double t_max = sd > 0.0 ? 5.0 * sd : 1.0;
  std::vector<double> grid(points);
  for (std::size_t k = 0; k < points; ++k) grid[k] = t_max * static_cast<double>(k + 1) / static_cast<double>(points);
  return grid;
}

bool exceeds(double statistic, double t) noexcept {
  return std::abs(statistic) >= t - 1e-12 * std::max(1.0, std::abs(t));
}

namespace {

HWInput hw_input_for(const Matrix& off_diag, double K, std::size_t m) {
  HWInput in;
  in.K = K;
  in.m = m;
  in.frob = frobenius_norm(off_diag);
  in.spec = spectral_norm_symmetric(off_diag);
  return in;
}

void check_grid(std::span<const double> t_grid) {
  if (t_grid.empty()) throw DomainError("t grid is empty");
  for (double t : t_grid)
    if (!(t >= 0.0)) throw DomainError("t grid values must be non-negative");
}

}  // namespace

ExperimentReport hw_empirical_tail(const DistributionSpec& dist, const Matrix& a, std::span<const double> t_grid,
                                   std::size_t trials, Seed seed, unsigned threads, double confidence) {
  dist.validate();
  check_grid(t_grid);
  if (trials == 0) throw DomainError("hw_empirical_tail: trials must be positive");
  const Matrix off = off_diagonal_part(a);
  const std::size_t n = off.rows();
  const double K = sub_gaussian_constant(dist);

  std::vector<double> stats(trials);
  parallel_for(trials, threads, [&](std::size_t i) {
    Rng rng(derive_seed(seed, i));
    Matrix x(n, dist.m);
    for (std::size_t r = 0; r < n; ++r) fill(dist, x.row(r), rng);
    stats[i] = hw_statistic(off, x);
  });

  HWInput in = hw_input_for(off, K, dist.m);
  ExperimentReport report;
  report.echo.construction = dist.name();
  report.echo.m = dist.m;
  report.echo.n = n;
  if (dist.kind == DistributionKind::SHot) report.echo.s = dist.s;
  report.echo.trials = trials;
  report.echo.seed = seed;
  for (double t : t_grid) {
    const auto count = static_cast<std::size_t>(std::count_if(stats.begin(), stats.end(), [&](double s) { return exceeds(s, t); }));
    in.t = t;
    report.curve.push_back(tail_point(t, count, trials, hw_tail_bound(in), confidence));
  }
  set_rate(report, 0, trials, confidence);
  return report;
}

ExactTail::ExactTail(std::vector<double> outcomes) : outcomes_(std::move(outcomes)) {
  sorted_abs_.reserve(outcomes_.size());
  for (double v : outcomes_) sorted_abs_.push_back(std::abs(v));
  std::sort(sorted_abs_.begin(), sorted_abs_.end());
}

double ExactTail::tail(double t) const {
  const auto first = std::find_if(sorted_abs_.begin(), sorted_abs_.end(), [&](double v) { return exceeds(v, t); });
  return static_cast<double>(sorted_abs_.end() - first) / static_cast<double>(sorted_abs_.size());
}

std::vector<std::pair<double, double>> ExactTail::distribution() const {
  std::vector<double> values = outcomes_;
  std::sort(values.begin(), values.end());
  const double weight = 1.0 / static_cast<double>(values.size());
  std::vector<std::pair<double, double>> atoms;
  for (double v : values) {
    if (!atoms.empty() && std::abs(v - atoms.back().first) <= 1e-12 * std::max(1.0, std::abs(v))) {
      atoms.back().second += weight;
    } else {
      atoms.emplace_back(v, weight);
    }
  }
  return atoms;
}

ExactTail hw_exact_enumeration(const Matrix& a, std::size_t m) {
  const Matrix off = off_diagonal_part(a);
  const std::size_t n = off.rows();
  if (m == 0) throw DimensionError("hw_exact_enumeration: m must be positive");
  const std::size_t bits = n * m;
  if (bits > 16 || (std::size_t{1} << bits) > kMaxEnumerationOutcomes) {
    throw DimensionError("hw_exact_enumeration: (2^m)^n exceeds " + std::to_string(kMaxEnumerationOutcomes) + " outcomes");
  }
  const double mag = 1.0 / std::sqrt(static_cast<double>(m));
  const std::size_t total = std::size_t{1} << bits;
  std::vector<double> outcomes(total);
  Matrix x(n, m);
  for (std::size_t code = 0; code < total; ++code) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < m; ++k) x(i, k) = ((code >> (i * m + k)) & 1U) ? -mag : mag;
    outcomes[code] = hw_statistic(off, x);
  }
  return ExactTail(std::move(outcomes));
}

EtaMoment eta_moment_exact(std::size_t m, std::size_t s, unsigned p) {
  if (m == 0 || m > 10) throw DimensionError("eta_moment_exact: m must lie in [1, 10]");
  if (s == 0 || s > m) throw DimensionError("eta_moment_exact: s must lie in [1, m]");
  if (p == 0 || p > 8) throw DimensionError("eta_moment_exact: p must lie in [1, 8]");
  std::vector<unsigned> supports;
  for (unsigned mask = 0; mask < (1U << m); ++mask)
    if (static_cast<std::size_t>(std::popcount(mask)) == s) supports.push_back(mask);

  double sum = 0.0;
  for (unsigned u : supports)
    for (unsigned v : supports) sum += std::pow(static_cast<double>(std::popcount(u & v)), static_cast<double>(p));
  const auto count = static_cast<double>(supports.size());

  EtaMoment out;
  out.moment = sum / (count * count);
  const auto sd = static_cast<double>(s);
  const auto pd = static_cast<double>(p);
  out.scale = std::pow(std::sqrt(sd * sd / static_cast<double>(m)) * std::sqrt(pd) + pd, pd);
  out.ratio = out.moment / out.scale;
  return out;
}

ExperimentReport gaussian_diag_empirical_tail(std::span<const double> x, std::size_t m, std::span<const double> t_grid,
                                              std::size_t trials, Seed seed, unsigned threads, double confidence) {
  check_grid(t_grid);
  if (m == 0) throw DimensionError("gaussian_diag_empirical_tail: m must be positive");
  if (trials == 0) throw DomainError("gaussian_diag_empirical_tail: trials must be positive");
  if (std::abs(norm(x) - 1.0) > 1e-9) throw DomainError("gaussian_diag_empirical_tail: x must have unit norm");
  const std::size_t n = x.size();

  std::vector<double> diag(trials);
  parallel_for(trials, threads, [&](std::size_t i) {
    const SketchSpec spec = SketchSpec::gaussian(m, n, derive_seed(seed, i));
    Vector z(m);
    double total = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (x[j] == 0.0) continue;
      generate_column(spec, j, z);
      total += x[j] * x[j] * (squared_norm(z) - 1.0);
    }
    diag[i] = total;
  });

  ExperimentReport report;
  report.echo.construction = "gaussian";
  report.echo.m = m;
  report.echo.n = n;
  report.echo.trials = trials;
  report.echo.seed = seed;
  for (double t : t_grid) {
    const auto count = static_cast<std::size_t>(std::count_if(diag.begin(), diag.end(), [&](double v) { return v >= t; }));
    const double bound = t > 0.0 ? gaussian_diag_tail_bound(t, x, m) : 1.0;
    report.curve.push_back(tail_point(t, count, trials, bound, confidence));
  }
  set_rate(report, 0, trials, confidence);
  return report;
}

}  // namespace jlsketch
