#include "jlsketch/io.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "jlsketch/errors.hpp"

namespace jlsketch {

const char* const kReportHeader =
    "run_id,subcommand,construction,m,n,s,M,d,T,eps,delta,t,trials,failures,rate,ci_low,ci_high,bound,seed";

std::string format_real(double v) {
  std::array<char, 40> buf{};
  const int len = std::snprintf(buf.data(), buf.size(), "%.17g", v);
  return std::string(buf.data(), static_cast<std::size_t>(len));
}

namespace {

constexpr std::size_t kReportColumns = 19;

std::string field(const std::optional<std::uint64_t>& v) { return v ? std::to_string(*v) : std::string(); }
std::string field(const std::optional<double>& v) { return v ? format_real(*v) : std::string(); }

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::uint64_t parse_u64(const std::string& s, std::size_t column) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw FormatError("bad integer '" + s + "'", column);
  return v;
}

double parse_f64(const std::string& s, std::size_t column) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw FormatError("bad number '" + s + "'", column);
  return v;
}

std::optional<std::uint64_t> opt_u64(const std::string& s, std::size_t column) {
  if (s.empty()) return std::nullopt;
  return parse_u64(s, column);
}

std::optional<double> opt_f64(const std::string& s, std::size_t column) {
  if (s.empty()) return std::nullopt;
  return parse_f64(s, column);
}

// Little-endian primitives with a running byte offset for error reports.
class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}

  void bytes(const char* data, std::size_t n) { out_.write(data, static_cast<std::streamsize>(n)); }
  void u8(std::uint8_t v) { out_.put(static_cast<char>(v)); }
  void u32(std::uint32_t v) { le(v, 4); }
  void u64(std::uint64_t v) { le(v, 8); }
  void f64(double v) { le(std::bit_cast<std::uint64_t>(v), 8); }

 private:
  void le(std::uint64_t v, int n) {
    std::array<char, 8> buf{};
    for (int i = 0; i < n; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    out_.write(buf.data(), n);
  }
  std::ostream& out_;
};

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  std::size_t offset() const { return offset_; }

  void bytes(char* data, std::size_t n) {
    in_.read(data, static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) throw FormatError("unexpected end of input", offset_ + in_.gcount());
    offset_ += n;
  }
  std::uint8_t u8() {
    char c = 0;
    bytes(&c, 1);
    return static_cast<std::uint8_t>(c);
  }
  std::uint32_t u32() { return static_cast<std::uint32_t>(le(4)); }
  std::uint64_t u64() { return le(8); }
  double f64() { return std::bit_cast<double>(le(8)); }

 private:
  std::uint64_t le(int n) {
    std::array<char, 8> buf{};
    bytes(buf.data(), static_cast<std::size_t>(n));
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf[i])) << (8 * i);
    return v;
  }
  std::istream& in_;
  std::size_t offset_ = 0;
};

std::uint32_t checked_u32(std::size_t v, const char* what) {
  if (v > 0xffffffffULL) throw DimensionError(std::string(what) + " exceeds the 32-bit limit of the file format");
  return static_cast<std::uint32_t>(v);
}

void header(Writer& w, std::size_t rows, std::size_t cols, std::uint8_t kind) {
  w.bytes("JLM1", 4);
  w.u32(checked_u32(rows, "row count"));
  w.u32(checked_u32(cols, "column count"));
  w.u8(kind);
}

MatrixFile read_matrix_from(Reader& r) {
  const std::size_t start = r.offset();
  std::array<char, 4> magic{};
  r.bytes(magic.data(), magic.size());
  if (std::string(magic.data(), magic.size()) != "JLM1") throw FormatError("bad magic, expected JLM1", start);
  const std::uint32_t rows = r.u32();
  const std::uint32_t cols = r.u32();
  if (rows == 0 || cols == 0) throw FormatError("matrix dimensions must be positive", start + 4);
  const std::size_t kind_offset = r.offset();
  const std::uint8_t kind = r.u8();
  if (kind == 0) {
    std::vector<double> data(static_cast<std::size_t>(rows) * cols);
    for (std::size_t i = 0; i < data.size(); ++i) {
      const std::size_t at = r.offset();
      data[i] = r.f64();
      if (!std::isfinite(data[i])) throw FormatError("non-finite matrix entry", at);
    }
    return Matrix(rows, cols, std::move(data));
  }
  if (kind == 1) {
    SparseColumns sparse;
    sparse.m = rows;
    sparse.n = cols;
    sparse.offsets.push_back(0);
    for (std::size_t j = 0; j < cols; ++j) {
      const std::size_t count_offset = r.offset();
      const std::uint32_t count = r.u32();
      if (count > rows) throw FormatError("column holds more entries than rows", count_offset);
      for (std::uint32_t k = 0; k < count; ++k) {
        const std::size_t at = r.offset();
        const std::uint32_t row = r.u32();
        const double value = r.f64();
        if (row >= rows) throw FormatError("row index out of range", at);
        if (k > 0 && row <= sparse.rows.back()) throw FormatError("row indices not increasing", at);
        if (!std::isfinite(value)) throw FormatError("non-finite matrix entry", at + 4);
        sparse.rows.push_back(row);
        sparse.values.push_back(value);
      }
      sparse.offsets.push_back(sparse.rows.size());
    }
    return sparse;
  }
  throw FormatError("unknown matrix kind " + std::to_string(kind), kind_offset);
}

Matrix read_dense_from(Reader& r, const char* what) {
  const std::size_t at = r.offset();
  auto file = read_matrix_from(r);
  if (auto* dense = std::get_if<Matrix>(&file)) return std::move(*dense);
  throw FormatError(std::string(what) + " must be a dense matrix", at);
}

std::ofstream open_out(const std::filesystem::path& path, std::ios::openmode mode) {
  std::ofstream out(path, mode);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  return out;
}

std::ifstream open_in(const std::filesystem::path& path, std::ios::openmode mode) {
  std::ifstream in(path, mode);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "' for reading");
  return in;
}

void finish(std::ostream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw std::runtime_error("write to '" + path.string() + "' failed");
}

}  // namespace

std::vector<ReportRow> to_rows(const ExperimentReport& report, const std::string& run_id, const std::string& subcommand) {
  ReportRow base;
  base.run_id = run_id;
  base.subcommand = subcommand;
  base.construction = report.echo.construction;
  base.m = report.echo.m;
  base.n = report.echo.n;
  base.s = report.echo.s;
  base.M = report.echo.M;
  base.d = report.echo.d;
  base.T = report.echo.T;
  base.eps = report.echo.eps;
  base.delta = report.echo.delta;
  base.trials = report.echo.trials;
  base.seed = report.echo.seed.value;

  std::vector<ReportRow> rows;
  if (report.curve.empty()) {
    base.failures = report.failures;
    base.rate = report.rate;
    base.ci_low = report.ci_low;
    base.ci_high = report.ci_high;
    base.bound = report.bound;
    rows.push_back(base);
    return rows;
  }
  for (const auto& p : report.curve) {
    ReportRow row = base;
    row.t = p.t;
    row.failures = p.exceedances;
    row.rate = p.rate;
    row.ci_low = p.ci_low;
    row.ci_high = p.ci_high;
    row.bound = p.bound;
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string format_row(const ReportRow& r) {
  std::string out;
  const std::vector<std::string> fields = {
      r.run_id,          r.subcommand,       r.construction,          field(r.m),       field(r.n),
      field(r.s),        field(r.M),         field(r.d),              field(r.T),       field(r.eps),
      field(r.delta),    field(r.t),         std::to_string(r.trials), std::to_string(r.failures),
      format_real(r.rate), format_real(r.ci_low), format_real(r.ci_high), field(r.bound), std::to_string(r.seed)};
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i > 0) out += ',';
    out += fields[i];
  }
  return out;
}

ReportRow parse_row(const std::string& line) {
  const auto f = split(trim(line), ',');
  if (f.size() != kReportColumns) {
    throw FormatError("report row has " + std::to_string(f.size()) + " fields, expected " + std::to_string(kReportColumns), 0);
  }
  ReportRow r;
  r.run_id = f[0];
  r.subcommand = f[1];
  r.construction = f[2];
  r.m = opt_u64(f[3], 3);
  r.n = opt_u64(f[4], 4);
  r.s = opt_u64(f[5], 5);
  r.M = opt_u64(f[6], 6);
  r.d = opt_u64(f[7], 7);
  r.T = opt_u64(f[8], 8);
  r.eps = opt_f64(f[9], 9);
  r.delta = opt_f64(f[10], 10);
  r.t = opt_f64(f[11], 11);
  r.trials = parse_u64(f[12], 12);
  r.failures = parse_u64(f[13], 13);
  r.rate = parse_f64(f[14], 14);
  r.ci_low = parse_f64(f[15], 15);
  r.ci_high = parse_f64(f[16], 16);
  r.bound = opt_f64(f[17], 17);
  r.seed = parse_u64(f[18], 18);
  return r;
}

void write_report_csv(std::ostream& out, const std::vector<ReportRow>& rows, bool with_header) {
  if (with_header) out << kReportHeader << '\n';
  for (const auto& r : rows) out << format_row(r) << '\n';
}

void write_report_csv(const std::vector<ReportRow>& rows, const std::filesystem::path& path) {
  const bool is_new = !std::filesystem::exists(path);
  auto out = open_out(path, std::ios::app);
  write_report_csv(out, rows, is_new);
  finish(out, path);
}

std::vector<ReportRow> read_report_csv(const std::filesystem::path& path) {
  auto in = open_in(path, std::ios::in);
  std::vector<ReportRow> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    if (line_no == 1 && trim(line) == kReportHeader) continue;
    try {
      rows.push_back(parse_row(line));
    } catch (const FormatError& e) {
      throw FormatError(std::string("report line ") + std::to_string(line_no) + ": " + e.what(), line_no);
    }
  }
  return rows;
}

std::string make_run_id(const std::string& canonical_config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (unsigned char c : canonical_config) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  h = mix64(h);
  std::array<char, 17> buf{};
  std::snprintf(buf.data(), buf.size(), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf.data(), 16);
}

void write_matrix(std::ostream& out, const Matrix& m) {
  Writer w(out);
  header(w, m.rows(), m.cols(), 0);
  for (double v : m.data()) w.f64(v);
}

void write_matrix(std::ostream& out, const DenseColumns& m) {
  Writer w(out);
  header(w, m.m, m.n, 0);
  for (std::size_t i = 0; i < m.m; ++i)
    for (std::size_t j = 0; j < m.n; ++j) w.f64(m.values[j * m.m + i]);
}

void write_matrix(std::ostream& out, const SparseColumns& m) {
  Writer w(out);
  header(w, m.m, m.n, 1);
  for (std::size_t j = 0; j < m.n; ++j) {
    w.u32(checked_u32(m.nnz(j), "column entry count"));
    for (std::size_t k = m.offsets[j]; k < m.offsets[j + 1]; ++k) {
      w.u32(m.rows[k]);
      w.f64(m.values[k]);
    }
  }
}

void write_matrix_file(const Matrix& m, const std::filesystem::path& path) {
  auto out = open_out(path, std::ios::binary | std::ios::trunc);
  write_matrix(out, m);
  finish(out, path);
}

void write_matrix_file(const Sketch& sketch, const std::filesystem::path& path) {
  auto out = open_out(path, std::ios::binary | std::ios::trunc);
  std::visit([&](const auto& storage) { write_matrix(out, storage); }, sketch.storage());
  finish(out, path);
}

MatrixFile read_matrix(std::istream& in) {
  Reader r(in);
  return read_matrix_from(r);
}

MatrixFile read_matrix_file(const std::filesystem::path& path) {
  auto in = open_in(path, std::ios::binary);
  return read_matrix(in);
}

void write_state(std::ostream& out, const FactorizerState& st) {
  Writer w(out);
  w.bytes("JLS1", 4);
  w.u32(checked_u32(st.d, "d"));
  w.u32(checked_u32(st.M, "M"));
  w.f64(st.sigma);
  w.u64(st.root.value);
  w.u8(static_cast<std::uint8_t>(st.sampler));
  w.u64(st.t());
  write_matrix(out, st.prior_inv_sqrt);
  write_matrix(out, st.precision);
  write_matrix(out, st.accumulator);
  if (st.t() > 0) {
    Matrix history(st.history.size(), st.d);
    for (std::size_t t = 0; t < st.history.size(); ++t)
      for (std::size_t j = 0; j < st.d; ++j) history(t, j) = st.history[t][j];
    write_matrix(out, history);
  }
}

void write_state_file(const FactorizerState& st, const std::filesystem::path& path) {
  auto out = open_out(path, std::ios::binary | std::ios::trunc);
  write_state(out, st);
  finish(out, path);
}

FactorizerState read_state(std::istream& in) {
  Reader r(in);
  std::array<char, 4> magic{};
  r.bytes(magic.data(), magic.size());
  if (std::string(magic.data(), magic.size()) != "JLS1") throw FormatError("bad magic, expected JLS1", 0);
  FactorizerState st;
  st.d = r.u32();
  st.M = r.u32();
  st.sigma = r.f64();
  st.root = Seed{r.u64()};
  const std::size_t sampler_offset = r.offset();
  const std::uint8_t sampler = r.u8();
  if (sampler > 2) throw FormatError("unknown sampler code", sampler_offset);
  st.sampler = static_cast<FactorSampler>(sampler);
  const std::uint64_t t = r.u64();
  if (st.d == 0 || st.M == 0 || !(st.sigma > 0.0)) throw FormatError("invalid state header", 4);

  const auto expect_shape = [&](const Matrix& m, std::size_t rows, std::size_t cols, const char* what, std::size_t at) {
    if (m.rows() != rows || m.cols() != cols) throw FormatError(std::string(what) + " has the wrong shape", at);
  };
  std::size_t at = r.offset();
  st.prior_inv_sqrt = read_dense_from(r, "prior root");
  expect_shape(st.prior_inv_sqrt, st.d, st.d, "prior root", at);
  at = r.offset();
  st.precision = read_dense_from(r, "precision");
  expect_shape(st.precision, st.d, st.d, "precision", at);
  at = r.offset();
  st.accumulator = read_dense_from(r, "accumulator");
  expect_shape(st.accumulator, st.d, st.M, "accumulator", at);
  if (t > 0) {
    at = r.offset();
    const Matrix history = read_dense_from(r, "history");
    expect_shape(history, t, st.d, "history", at);
    for (std::size_t i = 0; i < t; ++i) st.history.emplace_back(history.row(i).begin(), history.row(i).end());
  }
  return st;
}

FactorizerState read_state_file(const std::filesystem::path& path) {
  auto in = open_in(path, std::ios::binary);
  return read_state(in);
}

std::vector<Vector> read_vectors_csv(std::istream& in) {
  std::vector<Vector> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    Vector v;
    for (const auto& cell : split(body, ',')) {
      const std::string c = trim(cell);
      double value = 0.0;
      const auto [ptr, ec] = std::from_chars(c.data(), c.data() + c.size(), value);
      if (c.empty() || ec != std::errc() || ptr != c.data() + c.size() || !std::isfinite(value)) {
        throw FormatError("bad vector entry '" + c + "' on line " + std::to_string(line_no), line_no);
      }
      v.push_back(value);
    }
    if (!rows.empty() && v.size() != rows.front().size()) {
      throw FormatError("vector on line " + std::to_string(line_no) + " has dimension " + std::to_string(v.size()) +
                            ", expected " + std::to_string(rows.front().size()),
                        line_no);
    }
    rows.push_back(std::move(v));
  }
  return rows;
}

std::vector<Vector> read_vectors_csv(const std::filesystem::path& path) {
  auto in = open_in(path, std::ios::in);
  return read_vectors_csv(in);
}

void write_vectors_csv(std::ostream& out, const std::vector<Vector>& rows) {
  for (const auto& v : rows) {
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i > 0) out << ',';
      out << format_real(v[i]);
    }
    out << '\n';
  }
}

}  // namespace jlsketch
