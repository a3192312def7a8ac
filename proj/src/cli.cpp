#include "jlsketch/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "jlsketch/bounds.hpp"
#include "jlsketch/errors.hpp"
#include "jlsketch/factorization.hpp"
#include "jlsketch/io.hpp"
#include "jlsketch/samplers.hpp"
#include "jlsketch/sketch.hpp"
#include "jlsketch/verify.hpp"

namespace jlsketch::cli {

namespace {

using nlohmann::json;

class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Common {
  std::uint64_t seed = 1;
  unsigned threads = 0;
  std::string out;
  std::string format = "csv";
};

void add_seed(CLI::App* sub, Common& c) { sub->add_option("--seed", c.seed, "Root seed"); }

void add_threads(CLI::App* sub, Common& c) {
  sub->add_option("--threads", c.threads, "Worker threads; 0 uses every hardware thread. Output does not depend on it");
}

void add_output(CLI::App* sub, Common& c) {
  sub->add_option("--out", c.out, "Output path; standard output when empty");
  sub->add_option("--format", c.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
}

// Flags that do not change results are left out of the run id.
std::string canonical_config(const CLI::App* sub) {
  std::map<std::string, std::string> entries;
  for (const CLI::Option* opt : sub->get_options()) {
    const std::string name = opt->get_name();
    if (name == "--help" || name == "--threads" || name == "--out" || name == "--format" || opt->count() == 0) continue;
    std::string joined;
    for (const auto& r : opt->results()) joined += r + ";";
    entries[name] = joined;
  }
  std::string out = sub->get_name();
  for (const auto& [k, v] : entries) out += "|" + k + "=" + v;
  return out;
}

json optional_json(const auto& v) { return v ? json(*v) : json(nullptr); }

json row_json(const ReportRow& r) {
  return json{{"run_id", r.run_id},   {"subcommand", r.subcommand}, {"construction", r.construction},
              {"m", optional_json(r.m)}, {"n", optional_json(r.n)}, {"s", optional_json(r.s)},
              {"M", optional_json(r.M)}, {"d", optional_json(r.d)}, {"T", optional_json(r.T)},
              {"eps", optional_json(r.eps)}, {"delta", optional_json(r.delta)}, {"t", optional_json(r.t)},
              {"trials", r.trials},   {"failures", r.failures},     {"rate", r.rate},
              {"ci_low", r.ci_low},   {"ci_high", r.ci_high},       {"bound", optional_json(r.bound)},
              {"seed", r.seed}};
}

void write_text(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream file(path, std::ios::trunc);
  if (!file) throw std::runtime_error("cannot open '" + path + "' for writing");
  file << text;
  file.flush();
  if (!file) throw std::runtime_error("write to '" + path + "' failed");
}

void emit_report(const std::vector<ReportRow>& rows, const Common& c, std::ostream& out) {
  if (c.format == "json") {
    json arr = json::array();
    for (const auto& r : rows) arr.push_back(row_json(r));
    write_text(arr.dump(2) + "\n", c.out, out);
    return;
  }
  if (c.out.empty()) {
    write_report_csv(out, rows, true);
  } else {
    write_report_csv(rows, c.out);
  }
}

// A small named-column table for subcommands whose results are not trial reports.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  void emit(const Common& c, std::ostream& out) const {
    std::ostringstream text;
    if (c.format == "json") {
      json arr = json::array();
      for (const auto& row : rows) {
        json obj = json::object();
        for (std::size_t i = 0; i < columns.size(); ++i) obj[columns[i]] = json::parse(row[i]);
        arr.push_back(obj);
      }
      text << arr.dump(2) << "\n";
    } else {
      for (std::size_t i = 0; i < columns.size(); ++i) text << (i ? "," : "") << columns[i];
      text << "\n";
      for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) text << (i ? "," : "") << row[i];
        text << "\n";
      }
    }
    write_text(text.str(), c.out, out);
  }
};

std::string num(double v) { return format_real(v); }
std::string num(std::size_t v) { return std::to_string(v); }
std::string boolean(bool v) { return v ? "true" : "false"; }

Matrix read_dense_file(const std::string& path) {
  auto file = read_matrix_file(path);
  if (auto* dense = std::get_if<Matrix>(&file)) return std::move(*dense);
  throw UsageError("'" + path + "' holds a sparse matrix; a dense matrix is required");
}

// ---------------------------------------------------------------------------------------------
// gen / apply

struct GenArgs {
  Common common;
  std::string construction;
  std::size_t m = 0;
  std::size_t n = 0;
  std::size_t s = 0;
  std::string out;
};

void register_gen(CLI::App& app, GenArgs& a, std::function<int()>& run, std::ostream& out) {
  auto* sub = app.add_subcommand("gen", "Build a sketch and save it as a JLM1 file");
  sub->add_option("--construction", a.construction, "gaussian | binary-coin | spherical | sparse-jl")
      ->required()
      ->check(CLI::IsMember({"gaussian", "binary-coin", "spherical", "sparse-jl"}));
  sub->add_option("--m", a.m, "Target dimension")->required();
  sub->add_option("--n", a.n, "Source dimension")->required();
  sub->add_option("--s", a.s, "Nonzeros per column (sparse-jl)");
  sub->add_option("--out", a.out, "Output JLM1 path")->required();
  add_seed(sub, a.common);
  add_threads(sub, a.common);
  sub->callback([&a, &run, &out] {
    run = [&a, &out] {
      SketchSpec spec{parse_sketch_kind(a.construction), a.m, a.n, a.s, Seed{a.common.seed}, {}, {}};
      if (spec.kind == SketchKind::SparseJL && a.s == 0) throw UsageError("--s is required for sparse-jl");
      spec.validate();
      const Sketch sketch = build_sketch(spec, a.common.threads);
      write_matrix_file(sketch, a.out);
      out << "wrote " << a.m << "x" << a.n << " " << a.construction << " sketch to " << a.out << "\n";
      return kSuccess;
    };
  });
}

struct ApplyArgs {
  Common common;
  std::string sketch;
  std::string input;
};

void register_apply(CLI::App& app, ApplyArgs& a, std::function<int()>& run, std::ostream& out) {
  auto* sub = app.add_subcommand("apply", "Project the vectors of a CSV file with a saved sketch");
  sub->add_option("--sketch", a.sketch, "JLM1 sketch file")->required();
  sub->add_option("--input", a.input, "CSV file, one vector per line")->required();
  sub->add_option("--out", a.common.out, "Output CSV path; standard output when empty");
  sub->callback([&a, &run, &out] {
    run = [&a, &out] {
      const auto file = read_matrix_file(a.sketch);
      const auto vectors = read_vectors_csv(std::filesystem::path(a.input));
      std::vector<Vector> projected;
      projected.reserve(vectors.size());
      for (const auto& x : vectors) {
        if (const auto* dense = std::get_if<Matrix>(&file)) {
          projected.push_back(multiply(*dense, x));
        } else {
          projected.push_back(jlsketch::apply(std::get<SparseColumns>(file), x));
        }
      }
      std::ostringstream text;
      write_vectors_csv(text, projected);
      write_text(text.str(), a.common.out, out);
      return kSuccess;
    };
  });
}

// ---------------------------------------------------------------------------------------------
// jl-verify

struct JLArgs {
  Common common;
  std::string construction;
  double eps = 0.5;
  double delta = 0.1;
  std::size_t n = 0;
  std::size_t m = 0;
  std::size_t s = 0;
  double c_m = 1.0;
  double c_s = 1.0;
  std::size_t trials = 2000;
  std::string x = "random";
  std::string x_file;
};

void register_jl(CLI::App& app, JLArgs& a, std::function<int()>& run, std::ostream& out) {
  auto* sub = app.add_subcommand("jl-verify", "Monte Carlo failure rate of the (eps, delta) norm-preservation property");
  sub->add_option("--construction", a.construction, "gaussian | binary-coin | spherical | sparse-jl")
      ->required()
      ->check(CLI::IsMember({"gaussian", "binary-coin", "spherical", "sparse-jl"}));
  sub->add_option("--eps", a.eps, "Distortion threshold");
  sub->add_option("--delta", a.delta, "Target failure probability");
  sub->add_option("--n", a.n, "Source dimension")->required();
  sub->add_option("--m", a.m, "Target dimension; 0 derives it from eps and delta");
  sub->add_option("--s", a.s, "Nonzeros per column for sparse-jl; 0 derives it from eps and delta");
  sub->add_option("--c-m", a.c_m, "Constant in m = c_m eps^-2 ln(1/delta) (sparse-jl)");
  sub->add_option("--c-s", a.c_s, "Constant in s = c_s eps^-1 ln(1/delta) (sparse-jl)");
  sub->add_option("--trials", a.trials, "Independent sketches");
  sub->add_option("--x", a.x, "Projected vector")->check(CLI::IsMember({"random", "basis", "file"}));
  sub->add_option("--x-file", a.x_file, "CSV of vectors for --x file; a trial fails if any of them does");
  add_seed(sub, a.common);
  add_threads(sub, a.common);
  add_output(sub, a.common);
  sub->callback([&a, &run, &out, sub] {
    run = [&a, &out, sub] {
      const SketchKind kind = parse_sketch_kind(a.construction);
      std::size_t m = a.m;
      std::size_t s = a.s;
      std::optional<std::size_t> guaranteed;
      if (kind == SketchKind::SparseJL) {
        const SparseParams params = sparse_jl_params(a.eps, a.delta, a.c_m, a.c_s);
        if (m == 0) m = params.m;
        if (s == 0) s = std::min(m, params.s);
      } else {
        guaranteed = required_dim(kind == SketchKind::Gaussian ? DimensionQuery::gaussian() : DimensionQuery::unit_norm(),
                                  a.eps, a.delta);
        if (m == 0) m = *guaranteed;
      }
      const SketchSpec spec{kind, m, a.n, s, Seed{a.common.seed}, {}, {}};
      VectorSource source = VectorSource::random_unit();
      if (a.x == "basis") source = VectorSource::basis();
      if (a.x == "file") {
        if (a.x_file.empty()) throw UsageError("--x file needs --x-file");
        source = VectorSource::provided(read_vectors_csv(std::filesystem::path(a.x_file)));
      }
      JLOptions options;
      options.threads = a.common.threads;
      options.delta = a.delta;
      const ExperimentReport report = jl_failure_rate(spec, a.eps, a.trials, Seed{a.common.seed}, source, options);
      emit_report(to_rows(report, make_run_id(canonical_config(sub)), "jl-verify"), a.common, out);
      const bool violated = guaranteed && m >= *guaranteed && report.ci_low > a.delta;
      return violated ? kViolation : kSuccess;
    };
  });
}

// ---------------------------------------------------------------------------------------------
// hw-tail / hw-exact

struct HWArgs {
  Common common;
  std::string dist = "spherical";
  std::size_t m = 16;
  std::size_t n = 32;
  std::string matrix;
  double t_max = 0.0;
  std::size_t points = 20;
  std::size_t trials = 100000;
};

Matrix hw_matrix(const std::string& path, std::size_t n, Seed seed) {
  if (path.empty()) return random_symmetric(n, derive_seed(seed, kVectorStream), true);
  Matrix a = read_dense_file(path);
  if (!a.is_square()) throw UsageError("--matrix must be square");
  return a;
}

std::vector<double> grid_from(double t_max, std::size_t points) {
  std::vector<double> grid(points);
  for (std::size_t k = 0; k < points; ++k) grid[k] = t_max * static_cast<double>(k + 1) / static_cast<double>(points);
  return grid;
}

void register_hw_tail(CLI::App& app, HWArgs& a, std::function<int()>& run, std::ostream& out) {
  auto* sub = app.add_subcommand("hw-tail", "Monte Carlo tail of sum_{i!=j} a_ij <X_i, X_j> against the Hanson-Wright bound");
  sub->add_option("--dist", a.dist, "Law of each X_i")->check(CLI::IsMember({"spherical", "scaled-cube", "gaussian", "rademacher"}));
  sub->add_option("--m", a.m, "Dimension of each X_i");
  sub->add_option("--n", a.n, "Number of vectors (size of the random matrix)");
  sub->add_option("--matrix", a.matrix, "Dense JLM1 matrix A; a random symmetric zero-diagonal matrix when empty");
  sub->add_option("--t-max", a.t_max, "Largest grid value; 0 uses five standard deviations of the statistic");
  sub->add_option("--points", a.points, "Grid points");
  sub->add_option("--trials", a.trials, "Monte Carlo trials");
  add_seed(sub, a.common);
  add_threads(sub, a.common);
  add_output(sub, a.common);
  sub->callback([&a, &run, &out, sub] {
    run = [&a, &out, sub] {
      const DistributionSpec dist{parse_distribution_kind(a.dist), a.m, 0};
      dist.validate();
      const Seed seed{a.common.seed};
      const Matrix matrix = hw_matrix(a.matrix, a.n, seed);
      if (a.points == 0) throw UsageError("--points must be positive");
      const std::vector<double> grid = a.t_max > 0.0
                                           ? grid_from(a.t_max, a.points)
                                           : default_t_grid(off_diagonal_part(matrix), sub_gaussian_constant(dist), a.m, a.points);
      const ExperimentReport report = hw_empirical_tail(dist, matrix, grid, a.trials, seed, a.common.threads);
      emit_report(to_rows(report, make_run_id(canonical_config(sub)), "hw-tail"), a.common, out);
      const bool violated = std::any_of(report.curve.begin(), report.curve.end(),
                                        [](const TailPoint& p) { return p.ci_low > p.bound; });
      return violated ? kViolation : kSuccess;
    };
  });
}

struct HWExactArgs {
  Common common;
  std::size_t m = 1;
  std::size_t n = 2;
  std::string matrix;
  double t_max = 0.0;
  std::size_t points = 20;
};

void register_hw_exact(CLI::App& app, HWExactArgs& a, std::function<int()>& run, std::ostream& out) {
  auto* sub = app.add_subcommand("hw-exact", "Exact tail for scaled-cube vectors by enumeration, against the Hanson-Wright bound");
  sub->add_option("--m", a.m, "Dimension of each X_i");
  sub->add_option("--n", a.n, "Number of vectors (size of the random matrix)");
  sub->add_option("--matrix", a.matrix, "Dense JLM1 matrix A; a random symmetric zero-diagonal matrix when empty");
  sub->add_option("--t-max", a.t_max, "Largest grid value; 0 uses the largest |S|");
  sub->add_option("--points", a.points, "Grid points");
  add_seed(sub, a.common);
  add_output(sub, a.common);
  sub->callback([&a, &run, &out, sub] {
    run = [&a, &out, sub] {
      const Seed seed{a.common.seed};
      const Matrix matrix = hw_matrix(a.matrix, a.n, seed);
      if (a.points == 0) throw UsageError("--points must be positive");
      const ExactTail exact = hw_exact_enumeration(matrix, a.m);
      const Matrix off = off_diagonal_part(matrix);
      HWInput in;
      in.K = 1.0 / std::sqrt(static_cast<double>(a.m));
      in.m = a.m;
      in.frob = frobenius_norm(off);
      in.spec = spectral_norm_symmetric(off);
      const double t_max = a.t_max > 0.0 ? a.t_max : (exact.max_abs() > 0.0 ? exact.max_abs() : 1.0);

      ExperimentReport report;
      report.echo.construction = "scaled-cube";
      report.echo.m = a.m;
      report.echo.n = matrix.rows();
      report.echo.trials = exact.outcome_count();
      report.echo.seed = seed;
      bool violated = false;
      for (double t : grid_from(t_max, a.points)) {
        in.t = t;
        TailPoint p;
        p.t = t;
        p.rate = exact.tail(t);
        p.exceedances = static_cast<std::size_t>(std::llround(p.rate * static_cast<double>(exact.outcome_count())));
        p.ci_low = p.ci_high = p.rate;
        p.bound = hw_tail_bound(in);
        violated = violated || p.rate > p.bound;
        report.curve.push_back(p);
      }
      emit_report(to_rows(report, make_run_id(canonical_config(sub)), "hw-exact"), a.common, out);
      return violated ? kViolation : kSuccess;
    };
  });
}

// ---------------------------------------------------------------------------------------------
// beta-moments / eta-moments / bernstein-check

struct BetaArgs {
  Common common;
  double alpha = 2.0;
  double beta = 2.0;
  std::size_t sphere_m = 0;
  unsigned k_max = 8;
};

double double_factorial(unsigned k) {
  double out = 1.0;
  for (unsigned i = k; i > 1; i -= 2) out *= i;
  return out;
}

void register_beta(CLI::App& app, BetaArgs& a, std::function<int()>& run, std::ostream& out) {
  auto* sub = app.add_subcommand("beta-moments", "Central moments of Beta(alpha, beta) by the two-term recurrence");
  sub->add_option("--alpha", a.alpha, "First shape parameter");
  sub->add_option("--beta", a.beta, "Second shape parameter");
  sub->add_option("--sphere-m", a.sphere_m, "Use alpha = beta = (m-1)/2 and also report E<z, v>^k for z uniform on S^{m-1}");
  sub->add_option("--k-max", a.k_max, "Largest order");
  add_output(sub, a.common);
  sub->callback([&a, &run, &out] {
    run = [&a, &out] {
      BetaParams p{a.alpha, a.beta};
      if (a.sphere_m != 0) {
        if (a.sphere_m < 2) throw UsageError("--sphere-m must be at least 2");
        const double half = (static_cast<double>(a.sphere_m) - 1.0) / 2.0;
        p = {half, half};
      }
      if (!(p.alpha > 0.0) || !(p.beta > 0.0)) throw UsageError("Beta parameters must be positive");
      const auto moments = beta_central_moments(p, a.k_max);
      const double var = beta_variance(p);
      Table table;
      table.columns = {"k", "central_moment", "normalized", "even_bound"};
      if (a.sphere_m != 0) table.columns.push_back("sphere_marginal_moment");
      double factorial = 1.0;
      for (unsigned k = 0; k <= a.k_max; ++k) {
        if (k > 1) factorial *= k;
        const double even_bound = k % 2 == 0 ? std::pow(var, k / 2.0) / double_factorial(k) : 0.0;
        std::vector<std::string> row = {num(std::size_t{k}), num(moments[k]), num(moments[k] / factorial), num(even_bound)};
        if (a.sphere_m != 0) row.push_back(num(std::ldexp(moments[k], static_cast<int>(k))));
        table.rows.push_back(std::move(row));
      }
      table.emit(a.common, out);
      return kSuccess;
    };
  });
}

struct EtaArgs {
  Common common;
  std::size_t m = 6;
  std::size_t s = 2;
  unsigned p_max = 4;
};

void register_eta(CLI::App& app, EtaArgs& a, std::function<int()>& run, std::ostream& out) {
  auto* sub = app.add_subcommand("eta-moments", "Exact moments of the overlap of two uniform s-subsets of [m]");
  sub->add_option("--m", a.m, "Ground set size (<= 10)");
  sub->add_option("--s", a.s, "Subset size");
  sub->add_option("--p-max", a.p_max, "Largest moment order (<= 8)");
  add_output(sub, a.common);
  sub->callback([&a, &run, &out] {
    run = [&a, &out] {
      Table table;
      table.columns = {"p", "moment", "scale", "ratio"};
      for (unsigned p = 1; p <= a.p_max; ++p) {
        const EtaMoment e = eta_moment_exact(a.m, a.s, p);
        table.rows.push_back({num(std::size_t{p}), num(e.moment), num(e.scale), num(e.ratio)});
      }
      table.emit(a.common, out);
      return kSuccess;
    };
  });
}

struct BernsteinArgs {
  Common common;
  std::string dist = "gaussian";
  std::size_t m = 8;
  std::size_t s = 0;
  unsigned k_max = 8;
  std::size_t trials = 100000;
  double C = 2.0;
  std::size_t bootstrap = 1000;
  double confidence = 0.99;
};

void register_bernstein(CLI::App& app, BernsteinArgs& a, std::function<int()>& run, std::ostream& out) {
  auto* sub = app.add_subcommand("bernstein-check", "Empirical central moments of |z|^2 against C k! (1/m)^{(k-2)/2}");
  sub->add_option("--dist", a.dist, "Column law")
      ->check(CLI::IsMember({"spherical", "scaled-cube", "gaussian", "s-hot", "rademacher"}));
  sub->add_option("--m", a.m, "Dimension");
  sub->add_option("--s", a.s, "Sparsity (s-hot)");
  sub->add_option("--k-max", a.k_max, "Largest order (>= 3)");
  sub->add_option("--trials", a.trials, "Samples (>= 1000)");
  sub->add_option("--C", a.C, "Constant C of the growth bound");
  sub->add_option("--bootstrap", a.bootstrap, "Bootstrap resamples");
  sub->add_option("--confidence", a.confidence, "Bootstrap interval level");
  add_seed(sub, a.common);
  add_threads(sub, a.common);
  add_output(sub, a.common);
  sub->callback([&a, &run, &out] {
    run = [&a, &out] {
      const DistributionSpec dist{parse_distribution_kind(a.dist), a.m, a.s};
      BernsteinOptions options;
      options.bootstrap_resamples = a.bootstrap;
      options.confidence = a.confidence;
      options.threads = a.common.threads;
      const BernsteinReport report = bernstein_margin(dist, a.k_max, a.trials, Seed{a.common.seed}, a.C, options);
      Table table;
      table.columns = {"k", "moment", "ci_low", "ci_high", "bound", "violated"};
      for (const auto& r : report.rows)
        table.rows.push_back({num(std::size_t{r.k}), num(r.moment), num(r.ci_low), num(r.ci_high), num(r.bound), boolean(r.violated)});
      table.emit(a.common, out);
      return report.any_violation() ? kViolation : kSuccess;
    };
  });
}

// ---------------------------------------------------------------------------------------------
// bounds / sparse-params

struct BoundsArgs {
  std::string kind;
  double eps = 0.5;
  double delta = 0.1;
  std::size_t d = 0;
  std::size_t card = 0;
  double t = 0.0;
  double K = 1.0;
  std::size_t m = 1;
  double frob = 0.0;
  double spec = 0.0;
  double slice_frob_sq = 0.0;
  double slice_spec = 0.0;
  double u = 0.0;
  std::size_t n = 1;
  double sigma = 1.0;
  std::string x_file;
};

void register_bounds(CLI::App& app, BoundsArgs& a, std::function<int()>& run, std::ostream& out) {
  auto* sub = app.add_subcommand("bounds", "Evaluate a closed-form bound or required dimension");
  sub->add_option("--kind", a.kind,
                  "unit-norm | gaussian | factor-compact | factor-finite (dimensions); "
                  "hw | hw-gen | squared-norm | gaussian-diag (tail probabilities)")
      ->required()
      ->check(CLI::IsMember({"unit-norm", "gaussian", "factor-compact", "factor-finite", "hw", "hw-gen", "squared-norm",
                             "gaussian-diag"}));
  sub->add_option("--eps", a.eps, "Distortion");
  sub->add_option("--delta", a.delta, "Failure probability");
  sub->add_option("--d", a.d, "Feature dimension (factor-compact)");
  sub->add_option("--card", a.card, "Set size (factor-finite)");
  sub->add_option("--t", a.t, "Deviation (hw, hw-gen, gaussian-diag)");
  sub->add_option("--K", a.K, "Sub-Gaussian constant (hw, hw-gen)");
  sub->add_option("--m", a.m, "Vector dimension (hw) or sketch rows (gaussian-diag)");
  sub->add_option("--frob", a.frob, "Frobenius norm of A (hw)");
  sub->add_option("--spec", a.spec, "Spectral norm of A (hw)");
  sub->add_option("--slice-frob-sq", a.slice_frob_sq, "Sum of squared slice Frobenius norms (hw-gen)");
  sub->add_option("--slice-spec", a.slice_spec, "Largest slice spectral norm (hw-gen)");
  sub->add_option("--u", a.u, "Deviation (squared-norm)");
  sub->add_option("--n", a.n, "Dimension (squared-norm)");
  sub->add_option("--sigma", a.sigma, "Sub-Gaussian constant (squared-norm)");
  sub->add_option("--x-file", a.x_file, "CSV holding the unit vector x (gaussian-diag)");
  sub->callback([&a, &run, &out] {
    run = [&a, &out] {
      if (a.kind == "unit-norm") out << required_dim(DimensionQuery::unit_norm(), a.eps, a.delta) << "\n";
      else if (a.kind == "gaussian") out << required_dim(DimensionQuery::gaussian(), a.eps, a.delta) << "\n";
      else if (a.kind == "factor-compact") out << required_dim(DimensionQuery::factor_compact(a.d), a.eps, a.delta) << "\n";
      else if (a.kind == "factor-finite") out << required_dim(DimensionQuery::factor_finite(a.card), a.eps, a.delta) << "\n";
      else if (a.kind == "hw") out << format_real(hw_tail_bound({a.t, a.K, a.m, a.frob, a.spec})) << "\n";
      else if (a.kind == "hw-gen") out << format_real(hw_gen_tail_bound({a.t, a.K, a.slice_frob_sq, a.slice_spec})) << "\n";
      else if (a.kind == "squared-norm") out << format_real(squared_norm_tail_bound(a.u, a.n, a.sigma)) << "\n";
      else {
        if (a.x_file.empty()) throw UsageError("gaussian-diag needs --x-file");
        const auto xs = read_vectors_csv(std::filesystem::path(a.x_file));
        if (xs.size() != 1) throw UsageError("--x-file must hold exactly one vector");
        out << format_real(gaussian_diag_tail_bound(a.t, xs.front(), a.m)) << "\n";
      }
      return kSuccess;
    };
  });
}

struct SparseArgs {
  double eps = 0.5;
  double delta = 0.1;
  double c_m = 1.0;
  double c_s = 1.0;
};

void register_sparse(CLI::App& app, SparseArgs& a, std::function<int()>& run, std::ostream& out) {
  auto* sub = app.add_subcommand("sparse-params", "Sparse JL dimensions m and s for (eps, delta)");
  sub->add_option("--eps", a.eps, "Distortion");
  sub->add_option("--delta", a.delta, "Failure probability");
  sub->add_option("--c-m", a.c_m, "Constant in m = c_m eps^-2 ln(1/delta)");
  sub->add_option("--c-s", a.c_s, "Constant in s = c_s eps^-1 ln(1/delta)");
  sub->callback([&a, &run, &out] {
    run = [&a, &out] {
      const SparseParams p = sparse_jl_params(a.eps, a.delta, a.c_m, a.c_s);
      out << "m,s\n" << p.m << "," << p.s << "\n";
      return kSuccess;
    };
  });
}

// ---------------------------------------------------------------------------------------------
// factorize

struct FactorizeArgs {
  Common common;
  std::string input;
  std::size_t d = 0;
  std::size_t M = 0;
  double sigma = 1.0;
  std::string prior;
  double prior_scale = 1.0;
  std::string sampler = "spherical";
  std::string resume;
  std::string checkpoint;
  std::string factor_out;
  std::string check_set;
  bool check_sphere = false;
  double eps = 0.5;
  double delta = 0.1;
};

FactorSampler parse_factor_sampler(const std::string& name) {
  if (name == "spherical") return FactorSampler::Spherical;
  if (name == "binary-coin") return FactorSampler::BinaryCoin;
  return FactorSampler::Gaussian;
}

std::string factor_sampler_name(FactorSampler s) {
  switch (s) {
    case FactorSampler::Spherical: return "spherical";
    case FactorSampler::BinaryCoin: return "binary-coin";
    case FactorSampler::Gaussian: return "gaussian";
  }
  return "unknown";
}

void register_factorize(CLI::App& app, FactorizeArgs& a, std::function<int()>& run, std::ostream& out) {
  auto* sub = app.add_subcommand("factorize", "Stream observations into the covariance factorization, checkpoint and check it");
  sub->add_option("--input", a.input, "CSV of observations x_t, one per line");
  sub->add_option("--d", a.d, "Feature dimension; taken from --prior or --input when 0");
  sub->add_option("--M", a.M, "Sketch width (required unless --resume)");
  sub->add_option("--sigma", a.sigma, "Observation noise standard deviation");
  sub->add_option("--prior", a.prior, "Dense JLM1 prior covariance; prior-scale * I when empty");
  sub->add_option("--prior-scale", a.prior_scale, "Scale of the identity prior");
  sub->add_option("--sampler", a.sampler, "Law of the random rows")->check(CLI::IsMember({"spherical", "binary-coin", "gaussian"}));
  sub->add_option("--resume", a.resume, "Continue from a JLS1 checkpoint");
  sub->add_option("--checkpoint", a.checkpoint, "Write the final state as a JLS1 checkpoint");
  sub->add_option("--factor-out", a.factor_out, "Write the factor A as a dense JLM1 matrix");
  sub->add_option("--check-set", a.check_set, "CSV of query vectors for the (1 +- eps) quadratic-form check");
  sub->add_flag("--check-sphere", a.check_sphere, "Check the quadratic form over the whole unit sphere");
  sub->add_option("--eps", a.eps, "Tolerance of the quadratic-form check");
  sub->add_option("--delta", a.delta, "Failure probability (echoed)");
  add_seed(sub, a.common);
  add_output(sub, a.common);
  sub->callback([&a, &run, &out, sub] {
    run = [&a, &out, sub] {
      std::vector<Vector> observations;
      if (!a.input.empty()) observations = read_vectors_csv(std::filesystem::path(a.input));

      FactorizerState st;
      if (!a.resume.empty()) {
        st = read_state_file(a.resume);
      } else {
        if (a.M == 0) throw UsageError("--M is required unless --resume is given");
        Matrix prior;
        if (!a.prior.empty()) {
          prior = read_dense_file(a.prior);
        } else {
          std::size_t d = a.d;
          if (d == 0 && !observations.empty()) d = observations.front().size();
          if (d == 0) throw UsageError("cannot infer d: give --d, --prior or --input");
          if (!(a.prior_scale > 0.0)) throw UsageError("--prior-scale must be positive");
          prior = a.prior_scale * Matrix::identity(d);
        }
        st = factorizer_init(prior, a.sigma, a.M, Seed{a.common.seed}, parse_factor_sampler(a.sampler));
      }
      if (a.d != 0 && a.d != st.d) throw UsageError("--d does not match the prior or checkpoint dimension");
      for (const auto& x : observations) observe(st, x);

      if (!a.checkpoint.empty()) write_state_file(st, a.checkpoint);
      if (!a.factor_out.empty()) write_matrix_file(factor(st), a.factor_out);

      ExperimentReport report;
      report.echo.construction = factor_sampler_name(st.sampler);
      report.echo.M = st.M;
      report.echo.d = st.d;
      report.echo.T = st.t();
      report.echo.eps = a.eps;
      report.echo.delta = a.delta;
      report.echo.seed = st.root;
      bool violated = false;
      std::vector<ReportRow> rows;
      const std::string run_id = make_run_id(canonical_config(sub));
      if (!a.check_set.empty()) {
        const auto xs = read_vectors_csv(std::filesystem::path(a.check_set));
        if (xs.empty()) throw UsageError("--check-set file is empty");
        const SetCheck check = check_set(st, xs, a.eps);
        report.echo.trials = xs.size();
        set_rate(report, check.outside, xs.size());
        report.bound = a.delta;
        violated = !check.pass;
        auto r = to_rows(report, run_id, "factorize");
        rows.insert(rows.end(), r.begin(), r.end());
      }
      if (a.check_sphere) {
        const SetCheck check = check_sphere(st, a.eps);
        ExperimentReport sphere = report;
        sphere.echo.construction = report.echo.construction + "/sphere";
        sphere.echo.trials = 1;
        set_rate(sphere, check.outside, 1);
        sphere.bound = a.delta;
        violated = violated || !check.pass;
        auto r = to_rows(sphere, run_id, "factorize");
        rows.insert(rows.end(), r.begin(), r.end());
      }
      if (!rows.empty()) emit_report(rows, a.common, out);
      return violated ? kViolation : kSuccess;
    };
  });
}

// ---------------------------------------------------------------------------------------------
// net

struct NetArgs {
  Common common;
  std::size_t d = 2;
  double eps = 0.5;
  std::string points_out;
  std::size_t check_random = 0;
};

void register_net(CLI::App& app, NetArgs& a, std::function<int()>& run, std::ostream& out) {
  auto* sub = app.add_subcommand("net", "Epsilon-net of the unit sphere in d <= 3 and the net-based spectral norm check");
  sub->add_option("--d", a.d, "Dimension (2 or 3)");
  sub->add_option("--eps", a.eps, "Covering radius");
  sub->add_option("--points-out", a.points_out, "Write the net points as a dense JLM1 matrix");
  sub->add_option("--check-random", a.check_random, "Number of random symmetric matrices to check (needs eps < 1/2)");
  add_seed(sub, a.common);
  add_output(sub, a.common);
  sub->callback([&a, &run, &out] {
    run = [&a, &out] {
      const NetPoints net = epsilon_net(a.d, a.eps, derive_seed(Seed{a.common.seed}, kVectorStream));
      if (!a.points_out.empty()) {
        Matrix pts(net.points.size(), net.d);
        for (std::size_t i = 0; i < net.points.size(); ++i)
          for (std::size_t j = 0; j < net.d; ++j) pts(i, j) = net.points[i][j];
        write_matrix_file(pts, a.points_out);
      }
      std::size_t violations = 0;
      for (std::size_t i = 0; i < a.check_random; ++i) {
        const Matrix m = random_symmetric(net.d, derive_seed(Seed{a.common.seed}, i), false);
        if (!net_norm_check(m, net).holds) ++violations;
      }
      Table table;
      table.columns = {"d", "eps", "points", "certified_radius", "budget", "within_budget", "checked", "violations"};
      table.rows.push_back({num(net.d), num(net.eps), num(net.points.size()), num(net.certified_radius),
                            num(net.size_budget()), boolean(static_cast<double>(net.points.size()) <= net.size_budget()),
                            num(a.check_random), num(violations)});
      table.emit(a.common, out);
      return violations > 0 ? kViolation : kSuccess;
    };
  });
}

}  // namespace

int parse_and_dispatch(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Johnson-Lindenstrauss sketches, Hanson-Wright tail bounds and streaming covariance factorization"};
  app.name(argv.empty() ? "jlsketch" : argv.front());
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);

  std::function<int()> run;
  GenArgs gen;
  ApplyArgs apply_args;
  JLArgs jl;
  HWArgs hw;
  HWExactArgs hw_exact;
  BetaArgs beta;
  EtaArgs eta;
  BernsteinArgs bernstein;
  BoundsArgs bounds;
  SparseArgs sparse;
  FactorizeArgs factorize;
  NetArgs net;
  register_gen(app, gen, run, out);
  register_apply(app, apply_args, run, out);
  register_jl(app, jl, run, out);
  register_hw_tail(app, hw, run, out);
  register_hw_exact(app, hw_exact, run, out);
  register_beta(app, beta, run, out);
  register_eta(app, eta, run, out);
  register_bernstein(app, bernstein, run, out);
  register_bounds(app, bounds, run, out);
  register_sparse(app, sparse, run, out);
  register_factorize(app, factorize, run, out);
  register_net(app, net, run, out);

  std::vector<std::string> args(argv.size() > 1 ? argv.begin() + 1 : argv.end(), argv.end());
  std::reverse(args.begin(), args.end());  // CLI11 consumes the vector from the back
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    const CLI::App* target = &app;
    for (const CLI::App* sub : app.get_subcommands()) target = sub;
    out << target->help();
    return kSuccess;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n";
    const CLI::App* target = &app;
    for (const CLI::App* sub : app.get_subcommands()) target = sub;
    err << target->help();
    return kUsageError;
  }

  try {
    return run ? run() : kUsageError;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kRuntimeError;
  }
}

int parse_and_dispatch(int argc, const char* const* argv) {
  std::vector<std::string> args(argv, argv + argc);
  return parse_and_dispatch(args, std::cout, std::cerr);
}

}  // namespace jlsketch::cli
