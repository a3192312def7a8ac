#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "jlsketch/numerics.hpp"
#include "jlsketch/rng.hpp"
#include "jlsketch/samplers.hpp"

namespace jlsketch {

enum class SketchKind { Gaussian, BinaryCoin, Spherical, SparseJL, Custom };

std::string to_string(SketchKind kind);
SketchKind parse_sketch_kind(const std::string& name);

/// Recipe for an m x n projection Pi = (z_1, ..., z_n).
///
/// Column j is generated from its own seed derive_seed(seed, j), so any column can be produced
/// without the others. Within a column, SparseJL draws its support from
/// derive_seed(column_seed, kSupportStream) and its signs from derive_seed(column_seed, kSignStream);
/// BinaryCoin draws its signs from the same sign stream, which makes SparseJL(s = m) and
/// BinaryCoin identical entrywise. Gaussian and Spherical columns use
/// derive_seed(column_seed, kValueStream).
struct SketchSpec {
  static constexpr std::uint64_t kSupportStream = 0;
  static constexpr std::uint64_t kSignStream = 1;
  static constexpr std::uint64_t kValueStream = 2;

  SketchKind kind = SketchKind::Spherical;
  std::size_t m = 1;
  std::size_t n = 1;
  std::size_t s = 0;  // SparseJL only
  Seed seed;
  std::string custom_name;  // Custom only
  ColumnSampler sampler;    // Custom only; fills a column of length m

  static SketchSpec gaussian(std::size_t m, std::size_t n, Seed seed) { return {SketchKind::Gaussian, m, n, 0, seed, {}, {}}; }
  static SketchSpec binary_coin(std::size_t m, std::size_t n, Seed seed) { return {SketchKind::BinaryCoin, m, n, 0, seed, {}, {}}; }
  static SketchSpec spherical(std::size_t m, std::size_t n, Seed seed) { return {SketchKind::Spherical, m, n, 0, seed, {}, {}}; }
  static SketchSpec sparse_jl(std::size_t m, std::size_t n, std::size_t s, Seed seed) {
    return {SketchKind::SparseJL, m, n, s, seed, {}, {}};
  }
  /// Any column law, e.g. a member of the sub-Gaussian class with the Bernstein condition.
  static SketchSpec custom(std::string name, std::size_t m, std::size_t n, Seed seed, ColumnSampler sampler) {
    return {SketchKind::Custom, m, n, 0, seed, std::move(name), std::move(sampler)};
  }

  void validate() const;
  bool is_sparse() const noexcept { return kind == SketchKind::SparseJL; }
  /// Same recipe with another root seed.
  SketchSpec with_seed(Seed other) const;
  std::string name() const;
};

/// m x n, column-major.
struct DenseColumns {
  std::size_t m = 0;
  std::size_t n = 0;
  std::vector<double> values;

  std::span<const double> column(std::size_t j) const { return {values.data() + j * m, m}; }
  std::span<double> column(std::size_t j) { return {values.data() + j * m, m}; }
};

/// Compressed sparse columns; column j holds entries [offsets[j], offsets[j+1]) with
/// strictly increasing row indices.
struct SparseColumns {
  std::size_t m = 0;
  std::size_t n = 0;
  std::vector<std::size_t> offsets;  // n + 1 entries
  std::vector<std::uint32_t> rows;
  std::vector<double> values;

  std::size_t nnz(std::size_t j) const { return offsets[j + 1] - offsets[j]; }
  /// Throws FormatError when offsets or indices are inconsistent.
  void validate() const;
};

using SketchStorage = std::variant<DenseColumns, SparseColumns>;

class Sketch {
 public:
  Sketch(SketchSpec spec, SketchStorage storage) : spec_(std::move(spec)), storage_(std::move(storage)) {}

  const SketchSpec& spec() const noexcept { return spec_; }
  const SketchStorage& storage() const noexcept { return storage_; }
  std::size_t rows() const noexcept { return spec_.m; }
  std::size_t cols() const noexcept { return spec_.n; }

 private:
  SketchSpec spec_;
  SketchStorage storage_;
};

/// Scratch reused across sparse column draws.
struct SparseColumnScratch {
  std::vector<char> marks;
  std::vector<std::uint32_t> support;
};

/// Writes column j of a dense-kind sketch (not SparseJL) into `out` (length m).
void generate_column(const SketchSpec& spec, std::size_t j, std::span<double> out);
/// Writes the s sorted row indices and values of SparseJL column j. Nonzeros are +-1/sqrt(s).
void generate_sparse_column(const SketchSpec& spec, std::size_t j, SparseColumnScratch& scratch,
                            std::span<std::uint32_t> rows, std::span<double> values);
/// Column j as a dense vector of length m, for any kind.
Vector column(const SketchSpec& spec, std::size_t j);

/// Builds every column. Output does not depend on `threads`.
Sketch build_sketch(const SketchSpec& spec, unsigned threads = 1);

Vector apply(const DenseColumns& storage, std::span<const double> x);
Vector apply(const SparseColumns& storage, std::span<const double> x);
Vector apply(const Sketch& sketch, std::span<const double> x);

/// Pi x for the sketch described by `spec` without storing it: columns are generated one at a
/// time and accumulated in column order, so the result is bit-identical to
/// apply(build_sketch(spec), x). Columns with x_j = 0 are skipped.
Vector project(const SketchSpec& spec, std::span<const double> x);

inline constexpr std::size_t kDefaultMaterializeCap = 100'000'000;

/// Dense m x n matrix of the sketch. Throws DimensionError if m*n exceeds `cap`.
Matrix materialize(const Sketch& sketch, std::size_t cap = kDefaultMaterializeCap);

/// | |y|^2 - |x|^2 | / |x|^2 where y = Pi x. Throws DomainError for x = 0.
double relative_distortion(std::span<const double> x, std::span<const double> projected);
double distortion(const Sketch& sketch, std::span<const double> x);

}  // namespace jlsketch
