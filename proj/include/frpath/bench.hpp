#pragma once

#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

#include "frpath/instgen.hpp"

namespace frpath::bench {

enum class Suite { SD1, SD2 };

struct RowSpec {
  Index n, m, r, g;
};

/// sd1: m = 2n, r = n/2. sd2: m = 2n, r = round(n/3), g = n/10.
inline RowSpec row_for(Suite s, Index n) {
  if (s == Suite::SD1) return {n, 2 * n, n / 2, 0};
  return {n, 2 * n, static_cast<Index>(std::lround(static_cast<double>(n) / 3.0)), n / 10};
}

/// Metrics of one seeded run.
struct RunMetrics {
  Vector eig_x;  ///< descending
  Vector eig_z;
  double feasibility = 0.0;
  double complementarity = 0.0;
  double alpha_f = 0.0;
  int iterations = 0;
};

struct RowResult {
  RowSpec spec;
  std::vector<RunMetrics> runs;
  int failed = 0;
  std::vector<std::string> failures;
};

inline RunMetrics run_one(const RowSpec& rs, std::uint64_t seed, const SolverConfig& cfg) {
  auto gi = generate({rs.n, rs.m, rs.r, rs.g, seed});
  auto res = solve(gi.spect, cfg);
  RunMetrics m;
  m.eig_x = eig_sym(res.X).values;
  m.eig_z = eig_sym(res.Z).values;
  m.feasibility = (gi.spect.map.apply(res.X) - gi.spect.b).norm();
  m.complementarity = trace_inner(res.Z, res.X);
  m.alpha_f = res.alpha;
  m.iterations = res.iterations;
  return m;
}

inline RowResult run_row(const RowSpec& rs, int seeds, std::uint64_t base_seed, const SolverConfig& cfg) {
  RowResult out{rs, {}, 0, {}};
  for (int s = 0; s < seeds; ++s) {
    try {
      out.runs.push_back(run_one(rs, base_seed + static_cast<std::uint64_t>(s), cfg));
    } catch (const Error& e) {
      ++out.failed;
      out.failures.push_back(e.what());
    }
  }
  return out;
}

/// Column label and the 1-based eigenvalue position it reports.
struct EigColumn {
  std::string label;
  Index pos;
};

inline std::vector<EigColumn> primal_columns(const RowSpec& rs, Suite s) {
  if (s == Suite::SD1) {
    return {{"lambda_1", 1}, {"lambda_r", rs.r}, {"lambda_r+1", rs.r + 1}, {"lambda_n", rs.n}};
  }
  return {{"lambda_1", 1},
          {"lambda_r", rs.r},
          {"lambda_r+1", rs.r + 1},
          {"lambda_r+g", rs.r + rs.g},
          {"lambda_r+g+1", rs.r + rs.g + 1},
          {"lambda_n", rs.n}};
}

inline std::vector<EigColumn> dual_columns(const RowSpec& rs, Suite s) {
  const Index rd = rs.n - rs.r - rs.g;
  if (s == Suite::SD1) {
    return {{"lambda_1_Z", 1}, {"lambda_rd_Z", rd}, {"lambda_rd+1_Z", rd + 1}, {"lambda_n_Z", rs.n}};
  }
  return {{"lambda_1_Z", 1},
          {"lambda_rd_Z", rd},
          {"lambda_rd+1_Z", rd + 1},
          {"lambda_rd+g_Z", rd + rs.g},
          {"lambda_rd+g+1_Z", rd + rs.g + 1},
          {"lambda_n_Z", rs.n}};
}

/// Frozen CSV headers.
inline std::vector<std::string> primal_header(Suite s) {
  std::vector<std::string> h{"n", "m", "r"};
  if (s == Suite::SD2) h.push_back("g");
  for (const auto& c : primal_columns({4, 8, 1, 1}, s)) h.push_back(c.label);
  for (const char* k : {"feasibility", "complementarity", "alpha_f", "failed_seeds"}) h.push_back(k);
  return h;
}

inline std::vector<std::string> dual_header(Suite s) {
  std::vector<std::string> h{"n", "m", "r"};
  if (s == Suite::SD2) h.push_back("g");
  for (const auto& c : dual_columns({4, 8, 1, 1}, s)) h.push_back(c.label);
  h.push_back("failed_seeds");
  return h;
}

inline std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2e", v);
  return buf;
}

inline double mean_of(const RowResult& row, auto&& get) {
  if (row.runs.empty()) return std::numeric_limits<double>::quiet_NaN();
  double s = 0.0;
  for (const auto& r : row.runs) s += get(r);
  return s / static_cast<double>(row.runs.size());
}

inline std::vector<std::string> primal_cells(const RowResult& row, Suite s) {
  std::vector<std::string> c{std::to_string(row.spec.n), std::to_string(row.spec.m), std::to_string(row.spec.r)};
  if (s == Suite::SD2) c.push_back(std::to_string(row.spec.g));
  for (const auto& col : primal_columns(row.spec, s)) {
    c.push_back(sci(mean_of(row, [&](const RunMetrics& r) { return r.eig_x(col.pos - 1); })));
  }
  c.push_back(sci(mean_of(row, [](const RunMetrics& r) { return r.feasibility; })));
  c.push_back(sci(mean_of(row, [](const RunMetrics& r) { return r.complementarity; })));
  c.push_back(sci(mean_of(row, [](const RunMetrics& r) { return r.alpha_f; })));
  c.push_back(std::to_string(row.failed));
  return c;
}

inline std::vector<std::string> dual_cells(const RowResult& row, Suite s) {
  std::vector<std::string> c{std::to_string(row.spec.n), std::to_string(row.spec.m), std::to_string(row.spec.r)};
  if (s == Suite::SD2) c.push_back(std::to_string(row.spec.g));
  for (const auto& col : dual_columns(row.spec, s)) {
    c.push_back(sci(mean_of(row, [&](const RunMetrics& r) { return r.eig_z(col.pos - 1); })));
  }
  c.push_back(std::to_string(row.failed));
  return c;
}

inline std::string join(const std::vector<std::string>& v, const std::string& sep) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? sep : "") + v[i];
  return s;
}

inline std::string csv(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
  std::string s = join(header, ",") + "\n";
  for (const auto& r : rows) s += join(r, ",") + "\n";
  return s;
}

inline std::string markdown(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
  std::string s = "| " + join(header, " | ") + " |\n|";
  for (std::size_t i = 0; i < header.size(); ++i) s += "---|";
  s += "\n";
  for (const auto& r : rows) s += "| " + join(r, " | ") + " |\n";
  return s;
}

}  // namespace frpath::bench
