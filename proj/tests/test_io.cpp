#include <gtest/gtest.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "jlsketch/errors.hpp"
#include "jlsketch/io.hpp"

using namespace jlsketch;
namespace fs = std::filesystem;

namespace {

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() /
            ("jlsketch_io_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "_" +
             ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

ReportRow random_row(std::mt19937_64& gen) {
  std::uniform_real_distribution<double> unit;
  std::bernoulli_distribution coin(0.5);
  auto maybe_int = [&]() -> std::optional<std::uint64_t> {
    if (coin(gen)) return std::nullopt;
    return gen() >> (gen() % 64);
  };
  auto maybe_real = [&]() -> std::optional<double> {
    if (coin(gen)) return std::nullopt;
    return std::ldexp(unit(gen), static_cast<int>(gen() % 200) - 100);
  };
  ReportRow r;
  r.run_id = make_run_id(std::to_string(gen()));
  r.subcommand = coin(gen) ? "jl-verify" : "hw-tail";
  r.construction = coin(gen) ? "spherical" : "sparse-jl";
  r.m = maybe_int();
  r.n = maybe_int();
  r.s = maybe_int();
  r.M = maybe_int();
  r.d = maybe_int();
  r.T = maybe_int();
  r.eps = maybe_real();
  r.delta = maybe_real();
  r.t = maybe_real();
  r.trials = gen();
  r.failures = gen();
  r.rate = unit(gen);
  r.ci_low = unit(gen) / 3.0;
  r.ci_high = 1.0 - unit(gen) / 7.0;
  r.bound = maybe_real();
  r.seed = gen();
  return r;
}

std::string bytes_of(const auto& value) {
  std::ostringstream out(std::ios::binary);
  write_matrix(out, value);
  return out.str();
}

}  // namespace

TEST(ReportRow, RoundTripsEveryField) {
  std::mt19937_64 gen(1);
  for (int rep = 0; rep < 2000; ++rep) {
    const ReportRow r = random_row(gen);
    EXPECT_EQ(parse_row(format_row(r)), r) << format_row(r);
  }
}

TEST(ReportRow, HeaderColumnOrder) {
  EXPECT_STREQ(kReportHeader,
               "run_id,subcommand,construction,m,n,s,M,d,T,eps,delta,t,trials,failures,rate,ci_low,ci_high,bound,seed");
  ReportRow r;
  r.run_id = "abc";
  r.subcommand = "bounds";
  EXPECT_EQ(format_row(r), "abc,bounds,,,,,,,,,,,0,0,0,0,0,,0");
  EXPECT_THROW(parse_row("a,b,c"), FormatError);
}

TEST(ReportCsv, AppendsAndWritesHeaderOnce) {
  TempDir dir;
  std::mt19937_64 gen(2);
  const std::vector<ReportRow> first{random_row(gen), random_row(gen)};
  const std::vector<ReportRow> second{random_row(gen)};
  write_report_csv(first, dir / "r.csv");
  write_report_csv(second, dir / "r.csv");
  std::ifstream in(dir / "r.csv");
  std::string line;
  int headers = 0;
  while (std::getline(in, line)) headers += line == kReportHeader;
  EXPECT_EQ(headers, 1);
  const auto rows = read_report_csv(dir / "r.csv");
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0], first[0]);
  EXPECT_EQ(rows[2], second[0]);
}

TEST(ReportCsv, CurveBecomesOneRowPerPoint) {
  ExperimentReport report;
  report.echo.construction = "spherical";
  report.echo.trials = 10;
  report.curve.resize(3);
  for (std::size_t i = 0; i < 3; ++i) report.curve[i].t = static_cast<double>(i + 1);
  const auto rows = to_rows(report, "id", "hw-tail");
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[2].t, 3.0);
  EXPECT_EQ(rows[0].run_id, rows[2].run_id);
}

TEST(RunId, DeterministicAndSensitive) {
  EXPECT_EQ(make_run_id("jl-verify|--seed=7"), make_run_id("jl-verify|--seed=7"));
  EXPECT_NE(make_run_id("jl-verify|--seed=7"), make_run_id("jl-verify|--seed=8"));
  EXPECT_EQ(make_run_id("x").size(), 16u);
}

TEST(MatrixFile, DenseByteLayout) {
  const Matrix m = Matrix::from_rows({{1.0, 2.0}});
  const std::string bytes = bytes_of(m);
  ASSERT_EQ(bytes.size(), 4u + 4u + 4u + 1u + 16u);
  EXPECT_EQ(bytes.substr(0, 4), "JLM1");
  EXPECT_EQ(bytes.substr(4, 9), std::string("\x01\x00\x00\x00\x02\x00\x00\x00\x00", 9));
  double second;
  std::memcpy(&second, bytes.data() + 21, 8);
  EXPECT_EQ(second, 2.0);
}

TEST(MatrixFile, DenseRoundTripIsBitExact) {
  std::mt19937_64 gen(3);
  std::normal_distribution<double> normal;
  Matrix m(7, 5);
  for (auto& v : m.data()) v = normal(gen);
  std::istringstream in(bytes_of(m));
  EXPECT_EQ(std::get<Matrix>(read_matrix(in)), m);
}

TEST(MatrixFile, SparseRoundTripPreservesOrderAndValues) {
  const Sketch sk = build_sketch(SketchSpec::sparse_jl(40, 25, 6, Seed{4}));
  const auto& sparse = std::get<SparseColumns>(sk.storage());
  const std::string bytes = bytes_of(sparse);
  std::istringstream in(bytes);
  const auto back = std::get<SparseColumns>(read_matrix(in));
  EXPECT_EQ(back.offsets, sparse.offsets);
  EXPECT_EQ(back.rows, sparse.rows);
  EXPECT_EQ(back.values, sparse.values);
  EXPECT_EQ(bytes_of(back), bytes);
}

TEST(MatrixFile, DenseSketchIsWrittenRowMajor) {
  TempDir dir;
  const Sketch sk = build_sketch(SketchSpec::gaussian(3, 4, Seed{5}));
  write_matrix_file(sk, dir / "g.jlm");
  EXPECT_EQ(std::get<Matrix>(read_matrix_file(dir / "g.jlm")), materialize(sk));
}

TEST(MatrixFile, ErrorsCarryByteOffsets) {
  std::string bytes = bytes_of(Matrix::from_rows({{1.0, 2.0}, {3.0, 4.0}}));
  {
    std::string bad = bytes;
    bad[0] = 'X';
    std::istringstream in(bad);
    try {
      read_matrix(in);
      FAIL();
    } catch (const FormatError& e) {
      EXPECT_EQ(e.offset(), 0u);
    }
  }
  {
    std::istringstream in(bytes.substr(0, 20));
    try {
      read_matrix(in);
      FAIL();
    } catch (const FormatError& e) {
      EXPECT_EQ(e.offset(), 20u);
    }
  }
  {
    std::string bad = bytes;
    bad[12] = 7;
    std::istringstream in(bad);
    try {
      read_matrix(in);
      FAIL();
    } catch (const FormatError& e) {
      EXPECT_EQ(e.offset(), 12u);
    }
  }
}

TEST(StateFile, ResumedStreamMatchesUninterrupted) {
  std::mt19937_64 gen(6);
  std::normal_distribution<double> normal;
  std::vector<Vector> xs(12, Vector(4));
  for (auto& x : xs)
    for (auto& v : x) v = normal(gen);
  FactorizerState full = factorizer_init(Matrix::identity(4), 0.8, 9, Seed{6}, FactorSampler::BinaryCoin);
  FactorizerState part = full;
  for (std::size_t t = 0; t < 12; ++t) observe(full, xs[t]);
  for (std::size_t t = 0; t < 5; ++t) observe(part, xs[t]);

  std::stringstream buffer(std::ios::in | std::ios::out | std::ios::binary);
  write_state(buffer, part);
  FactorizerState resumed = read_state(buffer);
  EXPECT_EQ(resumed.t(), 5u);
  EXPECT_EQ(resumed.sampler, FactorSampler::BinaryCoin);
  for (std::size_t t = 5; t < 12; ++t) observe(resumed, xs[t]);
  EXPECT_EQ(resumed.precision, full.precision);
  EXPECT_EQ(resumed.accumulator, full.accumulator);
  EXPECT_EQ(factor(resumed), factor(full));
}

TEST(VectorsCsv, ReadsAndRoundTrips) {
  std::istringstream in("# comment\n1, 2.5,-3\n\n4,5,6e-3\n");
  const auto rows = read_vectors_csv(in);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0], (Vector{1.0, 2.5, -3.0}));
  std::ostringstream out;
  write_vectors_csv(out, rows);
  std::istringstream back(out.str());
  EXPECT_EQ(read_vectors_csv(back), rows);
  std::istringstream ragged("1,2\n3\n");
  EXPECT_THROW(read_vectors_csv(ragged), FormatError);
}
