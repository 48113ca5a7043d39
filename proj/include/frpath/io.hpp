#pragma once

#include <algorithm>
#include <fstream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "frpath/facered.hpp"
#include "frpath/gnpath.hpp"
#include "frpath/instgen.hpp"

namespace frpath::io {

using json = nlohmann::json;

// Problem files store each constraint matrix as upper-triangle triplets with
// 0-based indices and unscaled entries.

inline json problem_to_json(const Spectrahedron& p) {
  json j;
  j["n"] = p.n();
  j["m"] = p.m();
  j["b"] = std::vector<double>(p.b.data(), p.b.data() + p.b.size());
  json cons = json::array();
  for (Index k = 0; k < p.m(); ++k) {
    const SymMatrix s = p.map.constraint(k);
    std::vector<Index> is, js;
    std::vector<double> vs;
    for (Index i = 0; i < p.n(); ++i) {
      for (Index jj = i; jj < p.n(); ++jj) {
        if (s(i, jj) != 0.0) {
          is.push_back(i);
          js.push_back(jj);
          vs.push_back(s(i, jj));
        }
      }
    }
    cons.push_back({{"i", is}, {"j", js}, {"v", vs}});
  }
  j["constraints"] = std::move(cons);
  return j;
}

inline Spectrahedron problem_from_json(const json& j) {
  try {
    const Index n = j.at("n").get<Index>();
    const Index m = j.at("m").get<Index>();
    const auto b = j.at("b").get<std::vector<double>>();
    const auto& cons = j.at("constraints");
    if (n < 1) throw Error(ErrorKind::ParseError, "n must be positive");
    if (static_cast<Index>(b.size()) != m || static_cast<Index>(cons.size()) != m) {
      throw Error(ErrorKind::ParseError, "b and constraints must both have m entries");
    }
    Matrix rows = Matrix::Zero(m, tri(n));
    for (Index k = 0; k < m; ++k) {
      const auto& c = cons.at(static_cast<std::size_t>(k));
      const auto is = c.at("i").get<std::vector<Index>>();
      const auto js = c.at("j").get<std::vector<Index>>();
      const auto vs = c.at("v").get<std::vector<double>>();
      if (is.size() != js.size() || is.size() != vs.size()) {
        throw Error(ErrorKind::ParseError, "constraint " + std::to_string(k) + " has ragged triplets");
      }
      std::vector<bool> seen(static_cast<std::size_t>(tri(n)), false);
      for (std::size_t e = 0; e < is.size(); ++e) {
        Index a = is[e], bb = js[e];
        if (a < 0 || bb < 0 || a >= n || bb >= n) {
          throw Error(ErrorKind::ParseError, "constraint " + std::to_string(k) + " index out of range");
        }
        if (a > bb) std::swap(a, bb);
        const Index pos = svec_index(a, bb);
        if (seen[static_cast<std::size_t>(pos)]) {
          throw Error(ErrorKind::ParseError, "constraint " + std::to_string(k) + " repeats an entry");
        }
        seen[static_cast<std::size_t>(pos)] = true;
        rows(k, pos) = a == bb ? vs[e] : std::numbers::sqrt2 * vs[e];
      }
    }
    return Spectrahedron(ConstraintMap(n, std::move(rows)), Eigen::Map<const Vector>(b.data(), m));
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ParseError, e.what());
  }
}

inline json parse_text(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ParseError, e.what());
  }
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::ParseError, "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_text(ss.str());
}

inline Spectrahedron read_problem(const std::string& path) { return problem_from_json(read_json_file(path)); }

inline void write_json_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::InvalidArgument, "cannot write " + path);
  out << j.dump(2) << '\n';
}

/// Row-major nested arrays.
inline json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    std::vector<double> r(static_cast<std::size_t>(m.cols()));
    for (Index j = 0; j < m.cols(); ++j) r[static_cast<std::size_t>(j)] = m(i, j);
    rows.push_back(std::move(r));
  }
  return rows;
}

inline Matrix matrix_from_json(const json& j) {
  try {
    const auto rows = j.get<std::vector<std::vector<double>>>();
    const Index r = static_cast<Index>(rows.size());
    const Index c = r ? static_cast<Index>(rows[0].size()) : 0;
    Matrix m(r, c);
    for (Index i = 0; i < r; ++i) {
      if (static_cast<Index>(rows[static_cast<std::size_t>(i)].size()) != c) {
        throw Error(ErrorKind::ParseError, "ragged matrix rows");
      }
      for (Index k = 0; k < c; ++k) m(i, k) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
    }
    return m;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ParseError, e.what());
  }
}

inline json vector_to_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

inline json witness_to_json(const GeneratedInstance& gi) {
  return {{"Xstar", matrix_to_json(gi.Xstar.mat())},
          {"Zstar", matrix_to_json(gi.Zstar.mat())},
          {"ystar", vector_to_json(gi.ystar)},
          {"r", gi.spec.r},
          {"g", gi.spec.g}};
}

inline json record_to_json(const IterationRecord& h) {
  return {{"iter", h.iter},           {"alpha", h.alpha},       {"norm_rd", h.norm_rd},
          {"norm_rp", h.norm_rp},     {"norm_Rc", h.norm_Rc},   {"step_p", h.step_p},
          {"step_d", h.step_d},       {"min_eig_X", h.min_eig_X}, {"min_eig_Z", h.min_eig_Z}};
}

/// One JSON object per line.
inline void write_diagnostics(std::ostream& out, const std::vector<IterationRecord>& hist) {
  for (const auto& h : hist) out << record_to_json(h).dump() << '\n';
}

inline json check_to_json(const CheckItem& c) { return {{"pass", c.pass}, {"value", c.value}}; }

inline json reduction_report(const FaceDescriptor& f, const RegularizedProblem& reg, const ExposingReport& ex) {
  json checks = {{"adjoint_residual", check_to_json(ex.adjoint_residual)},
                 {"psd", check_to_json(ex.psd)},
                 {"rhs_orthogonal", check_to_json(ex.rhs_orthogonal)},
                 {"face_orthogonal", check_to_json(ex.face_orthogonal)},
                 {"verdict", ex.verdict()}};
  return {{"r", f.r},
          {"V", matrix_to_json(f.V)},
          {"dropped_rows", reg.dropped_rows},
          {"pruned_rows", reg.pruned_rows},
          {"exposing_checks", std::move(checks)},
          {"ambiguous_indices", f.classification.ambiguous}};
}

}  // namespace frpath::io
