#include "jlsketch/sketch.hpp"

#include <cmath>

#include "jlsketch/errors.hpp"
#include "jlsketch/parallel.hpp"

namespace jlsketch {

namespace {

void check_input(std::size_t n, std::span<const double> x) {
  if (x.size() != n) {
    throw DimensionError("sketch expects vectors of dimension " + std::to_string(n) + ", got " +
                         std::to_string(x.size()));
  }
}

inline void axpy(double a, std::span<const double> col, std::span<double> y) {
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += a * col[i];
}

}  // namespace

std::string to_string(SketchKind kind) {
  switch (kind) {
    case SketchKind::Gaussian: return "gaussian";
    case SketchKind::BinaryCoin: return "binary-coin";
    case SketchKind::Spherical: return "spherical";
    case SketchKind::SparseJL: return "sparse-jl";
    case SketchKind::Custom: return "custom";
  }
  return "unknown";
}

SketchKind parse_sketch_kind(const std::string& name) {
  if (name == "gaussian") return SketchKind::Gaussian;
  if (name == "binary-coin") return SketchKind::BinaryCoin;
  if (name == "spherical") return SketchKind::Spherical;
  if (name == "sparse-jl") return SketchKind::SparseJL;
  throw DomainError("unknown construction '" + name + "'");
}

void SketchSpec::validate() const {
  if (m == 0 || n == 0) throw DimensionError("sketch dimensions m and n must be positive");
  if (m > 0xffffffffULL) throw DimensionError("sketch target dimension exceeds 2^32 - 1");
  if (kind == SketchKind::SparseJL && (s == 0 || s > m)) {
    throw DimensionError("sparse JL requires 1 <= s <= m (s = " + std::to_string(s) + ", m = " + std::to_string(m) + ")");
  }
  if (kind == SketchKind::Custom && !sampler) throw DomainError("custom sketch has no column sampler");
}

SketchSpec SketchSpec::with_seed(Seed other) const {
  SketchSpec out = *this;
  out.seed = other;
  return out;
}

std::string SketchSpec::name() const { return kind == SketchKind::Custom ? custom_name : to_string(kind); }

void SparseColumns::validate() const {
  if (offsets.size() != n + 1 || offsets.front() != 0 || offsets.back() != rows.size() || rows.size() != values.size()) {
    throw FormatError("sparse columns: inconsistent offsets", 0);
  }
  for (std::size_t j = 0; j < n; ++j) {
    if (offsets[j] > offsets[j + 1]) throw FormatError("sparse columns: decreasing offsets", j);
    for (std::size_t k = offsets[j]; k < offsets[j + 1]; ++k) {
      if (rows[k] >= m) throw FormatError("sparse columns: row index out of range", k);
      if (k > offsets[j] && rows[k] <= rows[k - 1]) throw FormatError("sparse columns: row indices not increasing", k);
    }
  }
}

void generate_column(const SketchSpec& spec, std::size_t j, std::span<double> out) {
  if (out.size() != spec.m) throw DimensionError("generate_column: output length must equal m");
  const Seed column_seed = derive_seed(spec.seed, j);
  switch (spec.kind) {
    case SketchKind::Gaussian: {
      Rng rng(derive_seed(column_seed, SketchSpec::kValueStream));
      fill_gaussian_column(out, rng);
      return;
    }
    case SketchKind::Spherical: {
      Rng rng(derive_seed(column_seed, SketchSpec::kValueStream));
      fill_spherical(out, rng);
      return;
    }
    case SketchKind::BinaryCoin: {
      Rng rng(derive_seed(column_seed, SketchSpec::kSignStream));
      fill_scaled_cube(out, rng);
      return;
    }
    case SketchKind::Custom: {
      Rng rng(derive_seed(column_seed, SketchSpec::kValueStream));
      spec.sampler(out, rng);
      return;
    }
    case SketchKind::SparseJL:
      break;
  }
  throw DomainError("generate_column: sparse JL columns are generated by generate_sparse_column");
}

void generate_sparse_column(const SketchSpec& spec, std::size_t j, SparseColumnScratch& scratch,
                            std::span<std::uint32_t> rows, std::span<double> values) {
  if (spec.kind != SketchKind::SparseJL) throw DomainError("generate_sparse_column: not a sparse JL spec");
  if (rows.size() != spec.s || values.size() != spec.s) throw DimensionError("generate_sparse_column: output length must equal s");
  const Seed column_seed = derive_seed(spec.seed, j);
  if (scratch.marks.size() < spec.m) scratch.marks.assign(spec.m, 0);

  Rng support_rng(derive_seed(column_seed, SketchSpec::kSupportStream));
  s_hot_support(spec.m, spec.s, support_rng, scratch.marks, scratch.support);

  // sqrt(m/s) * (1/sqrt(m)) = 1/sqrt(s); the k-th sign goes to the k-th smallest row.
  const double mag = 1.0 / std::sqrt(static_cast<double>(spec.s));
  Rng sign_rng(derive_seed(column_seed, SketchSpec::kSignStream));
  SignStream signs(sign_rng);
  for (std::size_t k = 0; k < spec.s; ++k) {
    rows[k] = scratch.support[k];
    values[k] = signs.negative() ? -mag : mag;
  }
}

Vector column(const SketchSpec& spec, std::size_t j) {
  spec.validate();
  if (j >= spec.n) throw DimensionError("column index out of range");
  Vector out(spec.m, 0.0);
  if (spec.is_sparse()) {
    SparseColumnScratch scratch;
    std::vector<std::uint32_t> rows(spec.s);
    Vector values(spec.s);
    generate_sparse_column(spec, j, scratch, rows, values);
    for (std::size_t k = 0; k < spec.s; ++k) out[rows[k]] = values[k];
  } else {
    generate_column(spec, j, out);
  }
  return out;
}

Sketch build_sketch(const SketchSpec& spec, unsigned threads) {
  spec.validate();
  if (spec.is_sparse()) {
    SparseColumns storage;
    storage.m = spec.m;
    storage.n = spec.n;
    storage.offsets.resize(spec.n + 1);
    for (std::size_t j = 0; j <= spec.n; ++j) storage.offsets[j] = j * spec.s;
    storage.rows.resize(spec.n * spec.s);
    storage.values.resize(spec.n * spec.s);
    parallel_for(spec.n, threads, [&](std::size_t j) {
      thread_local SparseColumnScratch scratch;
      generate_sparse_column(spec, j, scratch, std::span(storage.rows).subspan(j * spec.s, spec.s),
                             std::span(storage.values).subspan(j * spec.s, spec.s));
    });
    return Sketch(spec, std::move(storage));
  }
  DenseColumns storage;
  storage.m = spec.m;
  storage.n = spec.n;
  storage.values.resize(spec.m * spec.n);
  parallel_for(spec.n, threads, [&](std::size_t j) { generate_column(spec, j, storage.column(j)); });
  return Sketch(spec, std::move(storage));
}

Vector apply(const DenseColumns& storage, std::span<const double> x) {
  check_input(storage.n, x);
  Vector y(storage.m, 0.0);
  for (std::size_t j = 0; j < storage.n; ++j) {
    if (x[j] != 0.0) axpy(x[j], storage.column(j), y);
  }
  return y;
}

Vector apply(const SparseColumns& storage, std::span<const double> x) {
  check_input(storage.n, x);
  Vector y(storage.m, 0.0);
  for (std::size_t j = 0; j < storage.n; ++j) {
    const double xj = x[j];
    if (xj == 0.0) continue;
    for (std::size_t k = storage.offsets[j]; k < storage.offsets[j + 1]; ++k) y[storage.rows[k]] += xj * storage.values[k];
  }
  return y;
}

Vector apply(const Sketch& sketch, std::span<const double> x) {
  return std::visit([&](const auto& storage) { return apply(storage, x); }, sketch.storage());
}

Vector project(const SketchSpec& spec, std::span<const double> x) {
  spec.validate();
  check_input(spec.n, x);
  Vector y(spec.m, 0.0);
  if (spec.is_sparse()) {
    SparseColumnScratch scratch;
    std::vector<std::uint32_t> rows(spec.s);
    Vector values(spec.s);
    for (std::size_t j = 0; j < spec.n; ++j) {
      const double xj = x[j];
      if (xj == 0.0) continue;
      generate_sparse_column(spec, j, scratch, rows, values);
      for (std::size_t k = 0; k < spec.s; ++k) y[rows[k]] += xj * values[k];
    }
    return y;
  }
  Vector col(spec.m);
  for (std::size_t j = 0; j < spec.n; ++j) {
    if (x[j] == 0.0) continue;
    generate_column(spec, j, col);
    axpy(x[j], col, y);
  }
  return y;
}

Matrix materialize(const Sketch& sketch, std::size_t cap) {
  const std::size_t m = sketch.rows();
  const std::size_t n = sketch.cols();
  if (m * n > cap) {
    throw DimensionError("materialize: " + std::to_string(m) + "x" + std::to_string(n) + " exceeds the cap of " +
                         std::to_string(cap) + " entries");
  }
  Matrix out(m, n);
  if (const auto* dense = std::get_if<DenseColumns>(&sketch.storage())) {
    for (std::size_t j = 0; j < n; ++j) {
      const auto col = dense->column(j);
      for (std::size_t i = 0; i < m; ++i) out(i, j) = col[i];
    }
  } else {
    const auto& sparse = std::get<SparseColumns>(sketch.storage());
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = sparse.offsets[j]; k < sparse.offsets[j + 1]; ++k) out(sparse.rows[k], j) = sparse.values[k];
  }
  return out;
}

double relative_distortion(std::span<const double> x, std::span<const double> projected) {
  const double xx = squared_norm(x);
  if (!(xx > 0.0)) throw DomainError("distortion is undefined for the zero vector");
  return std::abs(squared_norm(projected) - xx) / xx;
}

double distortion(const Sketch& sketch, std::span<const double> x) { return relative_distortion(x, apply(sketch, x)); }

}  // namespace jlsketch
