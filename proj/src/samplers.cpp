#include "jlsketch/samplers.hpp"

#include <algorithm>
#include <cmath>

#include "jlsketch/errors.hpp"
#include "jlsketch/parallel.hpp"

namespace jlsketch {

void DistributionSpec::validate() const {
  if (m == 0) throw DimensionError("distribution dimension m must be positive");
  if (kind == DistributionKind::SHot && (s == 0 || s > m)) {
    throw DimensionError("s-hot sparsity must satisfy 1 <= s <= m (s = " + std::to_string(s) +
                         ", m = " + std::to_string(m) + ")");
  }
}

std::string DistributionSpec::name() const {
  switch (kind) {
    case DistributionKind::Spherical: return "spherical";
    case DistributionKind::ScaledCube: return "scaled-cube";
    case DistributionKind::IsotropicGaussian: return "gaussian";
    case DistributionKind::SHot: return "s-hot";
    case DistributionKind::Rademacher: return "rademacher";
  }
  return "unknown";
}

DistributionKind parse_distribution_kind(const std::string& name) {
  if (name == "spherical") return DistributionKind::Spherical;
  if (name == "scaled-cube" || name == "binary-coin") return DistributionKind::ScaledCube;
  if (name == "gaussian") return DistributionKind::IsotropicGaussian;
  if (name == "s-hot") return DistributionKind::SHot;
  if (name == "rademacher") return DistributionKind::Rademacher;
  throw DomainError("unknown distribution '" + name + "'");
}

double sub_gaussian_constant(const DistributionSpec& dist) {
  dist.validate();
  switch (dist.kind) {
    case DistributionKind::Spherical:
    case DistributionKind::ScaledCube:
    case DistributionKind::IsotropicGaussian:
      return 1.0 / std::sqrt(static_cast<double>(dist.m));
    case DistributionKind::Rademacher:
      return 1.0;
    case DistributionKind::SHot:
      break;
  }
  throw DomainError("s-hot vectors are not mean zero; no sub-Gaussian constant");
}

void fill_spherical(std::span<double> out, Rng& rng) {
  // The norm of a Gaussian draw is below 1e-150 with negligible probability; redraw if it is.
  double sq = 0.0;
  do {
    sq = 0.0;
    for (double& v : out) {
      v = rng.normal();
      sq += v * v;
    }
  } while (sq < 1e-300);
  const double inv = 1.0 / std::sqrt(sq);
  for (double& v : out) v *= inv;
}

void fill_scaled_cube(std::span<double> out, Rng& rng) {
  const double mag = 1.0 / std::sqrt(static_cast<double>(out.size()));
  SignStream signs(rng);
  for (double& v : out) v = signs.negative() ? -mag : mag;
}

void fill_gaussian_column(std::span<double> out, Rng& rng) {
  const double scale = 1.0 / std::sqrt(static_cast<double>(out.size()));
  for (double& v : out) v = scale * rng.normal();
}

void fill_rademacher(std::span<double> out, Rng& rng) {
  SignStream signs(rng);
  for (double& v : out) v = signs.negative() ? -1.0 : 1.0;
}

void s_hot_support(std::size_t m, std::size_t s, Rng& rng, std::vector<char>& marks, std::vector<std::uint32_t>& out) {
  if (s == 0 || s > m) throw DimensionError("s-hot sparsity must satisfy 1 <= s <= m");
  if (marks.size() < m) throw DimensionError("s_hot_support: scratch smaller than m");
  out.clear();
  // Floyd: for j = m-s .. m-1 pick t uniform in [0, j]; take t unless already taken, else j.
  for (std::size_t j = m - s; j < m; ++j) {
    const auto t = static_cast<std::size_t>(rng.bounded(j + 1));
    const std::size_t pick = marks[t] ? j : t;
    marks[pick] = 1;
    out.push_back(static_cast<std::uint32_t>(pick));
  }
  if (s * 8 >= m) {
    out.clear();
    for (std::size_t i = 0; i < m; ++i) {
      if (marks[i]) {
        out.push_back(static_cast<std::uint32_t>(i));
        marks[i] = 0;
      }
    }
  } else {
    std::sort(out.begin(), out.end());
    for (auto i : out) marks[i] = 0;
  }
}

std::vector<std::uint32_t> s_hot_support(std::size_t m, std::size_t s, Rng& rng) {
  std::vector<char> marks(m, 0);
  std::vector<std::uint32_t> out;
  out.reserve(s);
  s_hot_support(m, s, rng, marks, out);
  return out;
}

void fill(const DistributionSpec& dist, std::span<double> out, Rng& rng) {
  switch (dist.kind) {
    case DistributionKind::Spherical: fill_spherical(out, rng); return;
    case DistributionKind::ScaledCube: fill_scaled_cube(out, rng); return;
    case DistributionKind::IsotropicGaussian: fill_gaussian_column(out, rng); return;
    case DistributionKind::Rademacher: fill_rademacher(out, rng); return;
    case DistributionKind::SHot: {
      std::fill(out.begin(), out.end(), 0.0);
      for (auto i : s_hot_support(out.size(), dist.s, rng)) out[i] = 1.0;
      return;
    }
  }
}

Vector sample(const DistributionSpec& dist, Seed seed) {
  dist.validate();
  Vector out(dist.m);
  Rng rng(seed);
  fill(dist, out, rng);
  return out;
}

Vector sample_spherical(std::size_t m, Seed seed) { return sample(DistributionSpec::spherical(m), seed); }
Vector sample_scaled_cube(std::size_t m, Seed seed) { return sample(DistributionSpec::scaled_cube(m), seed); }
Vector sample_gaussian_column(std::size_t m, Seed seed) { return sample(DistributionSpec::gaussian(m), seed); }
Vector sample_s_hot(std::size_t m, std::size_t s, Seed seed) { return sample(DistributionSpec::s_hot(m, s), seed); }

double beta_variance(BetaParams p) {
  const double ab = p.alpha + p.beta;
  return p.alpha * p.beta / (ab * ab * (ab + 1.0));
}

std::vector<double> beta_central_moments(BetaParams p, unsigned k_max) {
  if (!(p.alpha > 0.0) || !(p.beta > 0.0)) throw DomainError("Beta parameters must be positive");
  std::vector<double> mu(static_cast<std::size_t>(k_max) + 1, 0.0);
  mu[0] = 1.0;
  const double ab = p.alpha + p.beta;
  for (unsigned k = 2; k <= k_max; ++k) {
    const double km1 = k - 1.0;
    const double denom = ab + km1;
    mu[k] = km1 * (p.beta - p.alpha) / (ab * denom) * mu[k - 1] + km1 * p.alpha * p.beta / (ab * ab * denom) * mu[k - 2];
  }
  return mu;
}

double beta_central_moment(BetaParams p, unsigned k) { return beta_central_moments(p, k)[k]; }

double spherical_marginal_moment(std::size_t m, unsigned k) {
  if (m < 2) throw DomainError("spherical_marginal_moment requires m >= 2");
  const double half = (static_cast<double>(m) - 1.0) / 2.0;
  return std::ldexp(beta_central_moment({half, half}, k), static_cast<int>(k));
}

bool BernsteinReport::any_violation() const {
  return std::any_of(rows.begin(), rows.end(), [](const BernsteinRow& r) { return r.violated; });
}

namespace {

double factorial(unsigned k) {
  double out = 1.0;
  for (unsigned i = 2; i <= k; ++i) out *= i;
  return out;
}

// Fills moments[k - 3] with mean over `indices` (or all samples) of |d|^k for k = 3..k_max.
template <typename IndexFn>
void absolute_moments(std::span<const double> deviations, std::size_t count, IndexFn index, unsigned k_max,
                      std::span<double> moments) {
  std::fill(moments.begin(), moments.end(), 0.0);
  for (std::size_t i = 0; i < count; ++i) {
    const double a = std::abs(deviations[index(i)]);
    double power = a * a * a;
    for (unsigned k = 3; k <= k_max; ++k) {
      moments[k - 3] += power;
      power *= a;
    }
  }
  for (double& v : moments) v /= static_cast<double>(count);
}

BernsteinReport bernstein_from_norms(std::string name, std::size_t m, std::vector<double> sq_norms, unsigned k_max,
                                     Seed seed, double C, const BernsteinOptions& options) {
  const std::size_t trials = sq_norms.size();
  BernsteinReport report;
  report.distribution = std::move(name);
  report.m = m;
  report.C = C;
  report.trials = trials;
  report.seed = seed;

  double mean = 0.0;
  for (double v : sq_norms) mean += v;
  mean /= static_cast<double>(trials);
  report.mean_squared_norm = mean;
  for (double& v : sq_norms) v -= mean;

  const std::size_t nk = k_max - 2;
  std::vector<double> point(nk);
  absolute_moments(sq_norms, trials, [](std::size_t i) { return i; }, k_max, point);

  const std::size_t resamples = options.bootstrap_resamples;
  std::vector<double> boot(resamples * nk);
  const Seed boot_root = derive_seed(seed, ~std::uint64_t{0});
  parallel_for(resamples, options.threads, [&](std::size_t r) {
    Rng rng(derive_seed(boot_root, r));
    std::vector<std::size_t> picks(trials);
    for (auto& p : picks) p = static_cast<std::size_t>(rng.bounded(trials));
    absolute_moments(sq_norms, trials, [&](std::size_t i) { return picks[i]; }, k_max,
                     std::span<double>(boot.data() + r * nk, nk));
  });

  const double tail = (1.0 - options.confidence) / 2.0;
  std::vector<double> column(resamples);
  for (unsigned k = 3; k <= k_max; ++k) {
    BernsteinRow row;
    row.k = k;
    row.moment = point[k - 3];
    row.bound = C * factorial(k) * std::pow(1.0 / static_cast<double>(m), (k - 2.0) / 2.0);
    if (resamples > 0) {
      for (std::size_t r = 0; r < resamples; ++r) column[r] = boot[r * nk + (k - 3)];
      std::sort(column.begin(), column.end());
      const auto at = [&](double q) {
        const auto idx = static_cast<std::size_t>(std::floor(q * static_cast<double>(resamples - 1) + 0.5));
        return column[std::min(idx, resamples - 1)];
      };
      row.ci_low = at(tail);
      row.ci_high = at(1.0 - tail);
    } else {
      row.ci_low = row.ci_high = row.moment;
    }
    row.violated = row.moment > row.bound;
    report.rows.push_back(row);
  }
  return report;
}

void check_bernstein_args(unsigned k_max, std::size_t trials, double C) {
  if (k_max < 3) throw DomainError("bernstein_margin requires k_max >= 3");
  if (k_max > 60) throw DomainError("bernstein_margin supports k_max <= 60");
  if (trials < 1000) throw DomainError("bernstein_margin requires at least 1000 trials");
  if (!(C > 0.0)) throw DomainError("bernstein_margin requires C > 0");
}

}  // namespace

BernsteinReport bernstein_margin(const DistributionSpec& dist, unsigned k_max, std::size_t trials, Seed seed, double C,
                                 const BernsteinOptions& options) {
  dist.validate();
  return bernstein_margin(dist.name(), dist.m, [dist](std::span<double> out, Rng& rng) { fill(dist, out, rng); },
                          k_max, trials, seed, C, options);
}

BernsteinReport bernstein_margin(const std::string& name, std::size_t m, const ColumnSampler& sampler, unsigned k_max,
                                 std::size_t trials, Seed seed, double C, const BernsteinOptions& options) {
  check_bernstein_args(k_max, trials, C);
  if (m == 0) throw DimensionError("bernstein_margin: m must be positive");
  std::vector<double> sq_norms(trials);
  parallel_for(trials, options.threads, [&](std::size_t i) {
    thread_local std::vector<double> column;
    column.resize(m);
    Rng rng(derive_seed(seed, i));
    sampler(column, rng);
    sq_norms[i] = squared_norm(column);
  });
  return bernstein_from_norms(name, m, std::move(sq_norms), k_max, seed, C, options);
}

}  // namespace jlsketch
