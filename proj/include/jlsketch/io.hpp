#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "jlsketch/factorization.hpp"
#include "jlsketch/numerics.hpp"
#include "jlsketch/sketch.hpp"
#include "jlsketch/verify.hpp"

namespace jlsketch {

/// One line of the CSV report. Column order is fixed:
///
///   run_id,subcommand,construction,m,n,s,M,d,T,eps,delta,t,trials,failures,rate,ci_low,ci_high,bound,seed
///
/// Unset optionals are written as empty fields. Reals use 17 significant digits so that reading
/// a row back reproduces every field exactly.
struct ReportRow {
  std::string run_id;
  std::string subcommand;
  std::string construction;
  std::optional<std::uint64_t> m, n, s, M, d, T;
  std::optional<double> eps, delta, t;
  std::uint64_t trials = 0;
  std::uint64_t failures = 0;
  double rate = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::optional<double> bound;
  std::uint64_t seed = 0;

  bool operator==(const ReportRow&) const = default;
};

extern const char* const kReportHeader;

/// One summary row, or one row per curve point sharing the run id.
std::vector<ReportRow> to_rows(const ExperimentReport& report, const std::string& run_id, const std::string& subcommand);

std::string format_row(const ReportRow& row);
ReportRow parse_row(const std::string& line);

void write_report_csv(std::ostream& out, const std::vector<ReportRow>& rows, bool with_header);
/// Appends to `path`; the header is written only when the file does not exist yet.
void write_report_csv(const std::vector<ReportRow>& rows, const std::filesystem::path& path);
std::vector<ReportRow> read_report_csv(const std::filesystem::path& path);

/// Deterministic 16-hex-digit id from a canonical description of the run.
std::string make_run_id(const std::string& canonical_config);

/// JLM1 binary matrix file, all integers and reals little-endian:
///
///   "JLM1" | u32 rows | u32 cols | u8 kind
///   kind 0 (dense):  rows*cols f64, row-major
///   kind 1 (sparse): per column: u32 count, then count x (u32 row, f64 value)
using MatrixFile = std::variant<Matrix, SparseColumns>;

void write_matrix(std::ostream& out, const Matrix& m);
void write_matrix(std::ostream& out, const SparseColumns& m);
void write_matrix(std::ostream& out, const DenseColumns& m);
void write_matrix_file(const Matrix& m, const std::filesystem::path& path);
/// Dense sketches are written as kind 0, SparseJL as kind 1.
void write_matrix_file(const Sketch& sketch, const std::filesystem::path& path);
MatrixFile read_matrix(std::istream& in);
MatrixFile read_matrix_file(const std::filesystem::path& path);

/// Checkpoint of a FactorizerState:
///
///   "JLS1" | u32 d | u32 M | f64 sigma | u64 root seed | u8 sampler | u64 t
///   | JLM1 Sigma0^{-1/2} | JLM1 precision | JLM1 accumulator | JLM1 history (t x d, only if t > 0)
void write_state(std::ostream& out, const FactorizerState& st);
void write_state_file(const FactorizerState& st, const std::filesystem::path& path);
FactorizerState read_state(std::istream& in);
FactorizerState read_state_file(const std::filesystem::path& path);

/// One vector per non-empty line, comma separated. All rows must share a dimension.
std::vector<Vector> read_vectors_csv(std::istream& in);
std::vector<Vector> read_vectors_csv(const std::filesystem::path& path);
void write_vectors_csv(std::ostream& out, const std::vector<Vector>& rows);

/// "%.17g"
std::string format_real(double v);

}  // namespace jlsketch
