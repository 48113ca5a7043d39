// Command-line front end: solve, reduce, gen, cycle, bench.
//
// Exit codes: 0 success, 2 unreadable input or bad arguments, 3 solver
// failure.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "frpath/bench.hpp"
#include "frpath/cyclecmp.hpp"
#include "frpath/facered.hpp"
#include "frpath/io.hpp"

namespace {

using namespace frpath;
using frpath::io::json;

constexpr int kExitParse = 2;
constexpr int kExitSolver = 3;

struct Common {
  double sigma = 0.6;
  double tol = 1e-12;
  int max_iter = 200;
  double rank_abs_tol = 1e-8;
  std::uint64_t seed = 1;

  SolverConfig config() const {
    SolverConfig c;
    c.sigma = sigma;
    c.tol = tol;
    c.max_iter = max_iter;
    c.validate();
    return c;
  }
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--sigma", c.sigma, "alpha shrink factor on full steps")->check(CLI::Range(0.0, 1.0));
  sub->add_option("--tol", c.tol, "target alpha and residual scale")->check(CLI::PositiveNumber);
  sub->add_option("--max-iter", c.max_iter, "iteration cap")->check(CLI::PositiveNumber);
  sub->add_option("--rank-abs-tol", c.rank_abs_tol, "absolute eigenvalue cutoff")->check(CLI::PositiveNumber);
  sub->add_option("--seed", c.seed, "random seed");
}

std::string spectrum_line(const Vector& v) {
  std::string s;
  for (Index i = 0; i < v.size(); ++i) s += (i ? " " : "") + bench::sci(v(i));
  return s;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::InvalidArgument, "cannot write " + path);
  out << text;
}

int cmd_solve(const std::string& file, const std::string& out, const Common& c) {
  const Spectrahedron p = io::read_problem(file);
  const SolveResult res = solve(p, c.config());
  const Vector ex = eig_sym(res.X).values;
  const Vector ez = eig_sym(res.Z).values;
  const auto cls = classify_spectrum(ex, 1e-12, c.rank_abs_tol);

  std::printf("n=%ld m=%ld iterations=%d\n", static_cast<long>(p.n()), static_cast<long>(p.m()), res.iterations);
  std::printf("alpha_f %s\n", bench::sci(res.alpha).c_str());
  std::printf("feasibility %s\n", bench::sci((p.map.apply(res.X) - p.b).norm()).c_str());
  std::printf("complementarity %s\n", bench::sci(trace_inner(res.Z, res.X)).c_str());
  std::printf("r=%ld\n", static_cast<long>(cls.rank()));
  std::printf("ambiguous=%zu\n", cls.ambiguous.size());
  std::printf("eig_X %s\n", spectrum_line(ex).c_str());
  std::printf("eig_Z %s\n", spectrum_line(ez).c_str());

  if (!out.empty()) {
    io::write_json_file(out + ".solution.json", {{"X", io::matrix_to_json(res.X.mat())},
                                                 {"y", io::vector_to_json(res.y)},
                                                 {"Z", io::matrix_to_json(res.Z.mat())},
                                                 {"alpha", res.alpha},
                                                 {"iterations", res.iterations}});
    std::ofstream diag(out + ".diag.jsonl");
    io::write_diagnostics(diag, res.history);
  }
  return 0;
}

int cmd_reduce(const std::string& file, const std::string& out, const Common& c) {
  const Spectrahedron p = io::read_problem(file);
  const SolveResult res = solve(p, c.config());
  const auto cls = classify_spectrum(eig_sym(res.X).values, 1e-12, c.rank_abs_tol);
  const FaceDescriptor f = extract_face(p, res.X, res.Z, cls);
  const ExposingReport ex = verify_exposing(p, res.Z, res.y, f.V);
  const RegularizedProblem reg = regularized_problem(p, f);
  json rep = io::reduction_report(f, reg, ex);
  std::cout << rep.dump(2) << '\n';
  if (!out.empty()) {
    io::write_json_file(out + ".report.json", rep);
    io::write_json_file(out + ".reduced.json", io::problem_to_json(reg.reduced));
  }
  return 0;
}

int cmd_gen(Index n, Index m, Index r, Index g, const std::string& out, const Common& c) {
  const GeneratedInstance gi = generate({n, m, r, g, c.seed});
  if (out.empty()) {
    std::cout << io::problem_to_json(gi.spect).dump(2) << '\n';
  } else {
    io::write_json_file(out + ".json", io::problem_to_json(gi.spect));
    io::write_json_file(out + ".witness.json", io::witness_to_json(gi));
  }
  return 0;
}

int cmd_cycle(Index n, double theta, double phi, const std::vector<double>& raw, const Common& c) {
  json rep;
  if (!raw.empty()) {
    if (raw.size() != 3) throw Error(ErrorKind::ParseError, "--raw takes a,b,c");
    const CyclePattern cp = CyclePattern::raw(n, raw[0], raw[1], raw[2]);
    const SymMatrix x = max_det_completion(cp);
    rep["status"] = "PD";
    rep["completion"] = io::matrix_to_json(x.mat());
    rep["spectrum"] = io::vector_to_json(eig_sym(x).values);
    rep["toeplitz_deviation"] = toeplitz_deviation(x);
    rep["persymmetry_deviation"] = persymmetry_deviation(x);
    std::cout << rep.dump(2) << '\n';
    return 0;
  }
  const CyclePattern cp = CyclePattern::from_angles(n, theta, phi);
  const Completability st = completable(cp);
  rep["status"] = to_string(st);
  if (st == Completability::PD) {
    const SymMatrix x = max_det_completion(cp);
    rep["completion"] = io::matrix_to_json(x.mat());
    rep["spectrum"] = io::vector_to_json(eig_sym(x).values);
    rep["toeplitz_deviation"] = toeplitz_deviation(x);
    rep["persymmetry_deviation"] = persymmetry_deviation(x);
  } else if (st == Completability::PSD_only) {
    const CycleExposing ex = exposing_vector_cycle(cp, c.config());
    rep["completion"] = io::matrix_to_json(ex.path.X.mat());
    rep["spectrum"] = io::vector_to_json(eig_sym(ex.path.X).values);
    rep["toeplitz_deviation"] = toeplitz_deviation(ex.path.X);
    rep["exposing_vector"] = {{"a", ex.form.a}, {"b", ex.form.b}, {"c", ex.form.c}, {"d", ex.form.d}};
    rep["fitted_relation_residuals"] = {ex.fitted_residuals.first, ex.fitted_residuals.second};
    rep["relation_residuals"] = {ex.residuals.first, ex.residuals.second};
    rep["exposing_min_eig"] = min_eig(ex.CE);
  }
  std::cout << rep.dump(2) << '\n';
  return 0;
}

std::vector<Index> parse_sizes(const std::string& s) {
  std::vector<Index> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    try {
      std::size_t used = 0;
      const long v = std::stol(tok, &used);
      if (used != tok.size() || v < 4) throw Error(ErrorKind::ParseError, "bad size " + tok);
      out.push_back(v);
    } catch (const std::logic_error&) {
      throw Error(ErrorKind::ParseError, "bad size " + tok);
    }
  }
  return out;
}

int cmd_bench(const std::string& suite_name, const std::string& sizes, int seeds, const std::string& csv_prefix,
              const Common& c) {
  const bench::Suite suite = suite_name == "sd1" ? bench::Suite::SD1 : bench::Suite::SD2;
  std::vector<std::vector<std::string>> prow, drow;
  int failed = 0;
  for (Index n : parse_sizes(sizes)) {
    const auto row = bench::run_row(bench::row_for(suite, n), seeds, c.seed, c.config());
    failed += row.failed;
    for (const auto& f : row.failures) std::cerr << "n=" << n << ": " << f << '\n';
    prow.push_back(bench::primal_cells(row, suite));
    drow.push_back(bench::dual_cells(row, suite));
  }
  std::cout << "Primal\n\n" << bench::markdown(bench::primal_header(suite), prow) << "\nDual\n\n"
            << bench::markdown(bench::dual_header(suite), drow);
  if (!csv_prefix.empty()) {
    write_text(csv_prefix + "_primal.csv", bench::csv(bench::primal_header(suite), prow));
    write_text(csv_prefix + "_dual.csv", bench::csv(bench::dual_header(suite), drow));
  }
  return failed ? kExitSolver : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Facial reduction by parametric path following"};
  app.require_subcommand(1);

  Common common;
  std::string file, out;

  auto* solve_cmd = app.add_subcommand("solve", "follow the path to its limit");
  solve_cmd->add_option("file", file, "problem JSON")->required();
  solve_cmd->add_option("--out", out, "output prefix for solution and diagnostics");
  add_common(solve_cmd, common);

  auto* reduce_cmd = app.add_subcommand("reduce", "solve, then build the reduced problem");
  reduce_cmd->add_option("file", file, "problem JSON")->required();
  reduce_cmd->add_option("--out", out, "output prefix for report and reduced problem");
  add_common(reduce_cmd, common);

  Index gn = 0, gm = 0, gr = 0, gg = 0;
  auto* gen_cmd = app.add_subcommand("gen", "generate a test spectrahedron");
  gen_cmd->add_option("--n", gn)->required();
  gen_cmd->add_option("--m", gm)->required();
  gen_cmd->add_option("--r", gr)->required();
  gen_cmd->add_option("--g", gg);
  gen_cmd->add_option("--out", out, "output prefix; prints the problem when omitted");
  add_common(gen_cmd, common);

  Index cn = 4;
  double theta = 0.0, phi = 0.0;
  std::vector<double> raw;
  auto* cycle_cmd = app.add_subcommand("cycle", "completions of a partial cycle");
  cycle_cmd->add_option("--n", cn)->required();
  auto* th_opt = cycle_cmd->add_option("--theta", theta);
  auto* ph_opt = cycle_cmd->add_option("--phi", phi);
  auto* raw_opt = cycle_cmd->add_option("--raw", raw, "diagonal,band,corner")->delimiter(',');
  raw_opt->excludes(th_opt)->excludes(ph_opt);
  add_common(cycle_cmd, common);

  std::string suite = "sd1", sizes = "20,50", csv_prefix;
  int seeds = 5;
  auto* bench_cmd = app.add_subcommand("bench", "seeded table runs");
  bench_cmd->add_option("--suite", suite)->check(CLI::IsMember({"sd1", "sd2"}));
  bench_cmd->add_option("--sizes", sizes, "comma-separated n values");
  bench_cmd->add_option("--seeds", seeds)->check(CLI::PositiveNumber);
  bench_cmd->add_option("--csv", csv_prefix, "write <prefix>_primal.csv and <prefix>_dual.csv");
  add_common(bench_cmd, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitParse;
  }

  try {
    if (*solve_cmd) return cmd_solve(file, out, common);
    if (*reduce_cmd) return cmd_reduce(file, out, common);
    if (*gen_cmd) return cmd_gen(gn, gm, gr, gg, out, common);
    if (*cycle_cmd) {
      if (raw.empty() && (!*th_opt || !*ph_opt)) throw Error(ErrorKind::ParseError, "need --theta and --phi, or --raw");
      return cmd_cycle(cn, theta, phi, raw, common);
    }
    if (*bench_cmd) return cmd_bench(suite, sizes, seeds, csv_prefix, common);
  } catch (const Error& e) {
    std::cerr << e.what() << '\n';
    const bool input = e.kind() == ErrorKind::ParseError || e.kind() == ErrorKind::InvalidArgument;
    return input ? kExitParse : kExitSolver;
  } catch (const std::exception& e) {
    std::cerr << e.what() << '\n';
    return kExitSolver;
  }
  return 0;
}
