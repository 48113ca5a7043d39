#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <tuple>
#include <vector>

#include "frpath/gnpath.hpp"

namespace frpath {

// Partial symmetric matrices and their completion spectrahedra.

struct PatternEntry {
  Index i;
  Index j;
  double value;
};

/// A partial symmetric matrix: the listed entries are fixed, the rest free.
struct PartialPattern {
  Index n = 0;
  std::vector<PatternEntry> entries;

  bool specified(Index i, Index j) const {
    return std::any_of(entries.begin(), entries.end(), [&](const PatternEntry& e) {
      return (e.i == i && e.j == j) || (e.i == j && e.j == i);
    });
  }
};

/// One row per specified entry; off-diagonal rows use (E_ij + E_ji)/2 so the
/// row reads off X_ij directly.
inline Spectrahedron pattern_spectrahedron(const PartialPattern& pat) {
  std::vector<SymMatrix> rows;
  Vector b(static_cast<Index>(pat.entries.size()));
  for (std::size_t k = 0; k < pat.entries.size(); ++k) {
    const auto& e = pat.entries[k];
    if (e.i < 0 || e.j < 0 || e.i >= pat.n || e.j >= pat.n) {
      throw Error(ErrorKind::InvalidArgument, "pattern entry outside the matrix");
    }
    SymMatrix s = SymMatrix::zero(pat.n);
    s.set(e.i, e.j, e.i == e.j ? 1.0 : 0.5);
    rows.push_back(s);
    b(static_cast<Index>(k)) = e.value;
  }
  return Spectrahedron(ConstraintMap::from_matrices(pat.n, rows), std::move(b));
}

enum class Completability { PD, PSD_only, Infeasible };

inline const char* to_string(Completability c) {
  switch (c) {
    case Completability::PD: return "PD";
    case Completability::PSD_only: return "PSD_only";
    case Completability::Infeasible: return "Infeasible";
  }
  return "?";
}

/**
 * A partial cycle with unit-free raw data: diagonal a, band b on the first
 * off-diagonal, corner c at (0, n−1). The angle form sets a = 1,
 * b = cos θ, c = cos φ.
 */
struct CyclePattern {
  Index n = 4;
  double diag = 1.0;
  double band = 0.0;
  double corner = 0.0;
  std::optional<std::pair<double, double>> angles;  ///< (θ, φ) when built from angles

  static CyclePattern from_angles(Index n, double theta, double phi) {
    if (n < 4) throw Error(ErrorKind::InvalidArgument, "cycle needs n >= 4");
    if (theta < 0.0 || theta > std::numbers::pi || phi < 0.0 || phi > std::numbers::pi) {
      throw Error(ErrorKind::InvalidArgument, "angles must lie in [0, pi]");
    }
    return {n, 1.0, std::cos(theta), std::cos(phi), std::pair{theta, phi}};
  }

  static CyclePattern raw(Index n, double a, double b, double c) {
    if (n < 4) throw Error(ErrorKind::InvalidArgument, "cycle needs n >= 4");
    if (!(a > 0.0)) throw Error(ErrorKind::InvalidArgument, "raw diagonal must be positive");
    return {n, a, b, c, std::nullopt};
  }

  PartialPattern pattern() const {
    PartialPattern p{n, {}};
    for (Index i = 0; i < n; ++i) p.entries.push_back({i, i, diag});
    for (Index i = 0; i + 1 < n; ++i) p.entries.push_back({i, i + 1, band});
    p.entries.push_back({0, n - 1, corner});
    return p;
  }
};

/// Angle-form feasibility test; boundary equalities are matched to 1e-12.
inline Completability completable(const CyclePattern& cp) {
  if (!cp.angles) throw Error(ErrorKind::InvalidArgument, "completable needs the angle form");
  const auto [theta, phi] = *cp.angles;
  const double n = static_cast<double>(cp.n);
  const double mid = (n - 1.0) * theta;
  const double lo = phi;
  const double hi = cp.n % 2 == 0 ? (n - 2.0) * std::numbers::pi + phi : (n - 1.0) * std::numbers::pi - phi;
  constexpr double eps = 1e-12;
  if (mid < lo - eps || mid > hi + eps) return Completability::Infeasible;
  if (std::abs(mid - lo) <= eps || std::abs(mid - hi) <= eps) return Completability::PSD_only;
  return Completability::PD;
}

/// m = 2n: n diagonal rows, n − 1 band rows and the corner row.
inline Spectrahedron cycle_spectrahedron(const CyclePattern& cp) {
  return pattern_spectrahedron(cp.pattern());
}

// ---------------------------------------------------------------------------
// Maximum-determinant completions.

/**
 * Unique determinant maximizer among the completions of a pattern.
 *
 * Newton from I is tried first. When it stalls (nearly singular
 * completions), the diagonal shift b + α𝒜(I) is walked down to α = 0,
 * warm-starting each solve from the previous one.
 */
inline SymMatrix max_det_completion(const PartialPattern& pat) {
  const Spectrahedron p = pattern_spectrahedron(pat);
  auto attempt = [&](double alpha, const SymMatrix& start) -> std::optional<SymMatrix> {
    try {
      return max_det_newton(p.map, perturb_rhs(p, alpha), start).X;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::OracleDivergence) throw;
      return std::nullopt;
    }
  };
  if (auto x = attempt(0.0, SymMatrix::identity(pat.n))) return *x;

  double alpha = 1.0 + static_cast<double>(pat.n) * (p.b.size() ? p.b.cwiseAbs().maxCoeff() : 0.0);
  auto x = attempt(alpha, SymMatrix::identity(pat.n));
  if (!x) throw Error(ErrorKind::NoPDCompletion, "continuation could not start");
  double shrink = 0.1;
  while (alpha > 0.0) {
    const double target = alpha < 1e-12 ? 0.0 : shrink * alpha;
    if (auto next = attempt(target, *x)) {
      x = next;
      alpha = target;
      shrink = std::max(0.1, shrink * shrink);
    } else {
      shrink = std::sqrt(shrink);
      if (shrink > 0.999) throw Error(ErrorKind::NoPDCompletion, "no positive definite completion found");
    }
  }
  return *x;
}

inline SymMatrix max_det_completion(const CyclePattern& cp) {
  if (cp.angles && completable(cp) != Completability::PD) {
    throw Error(ErrorKind::NoPDCompletion, std::string("pattern is ") + to_string(completable(cp)));
  }
  return max_det_completion(cp.pattern());
}

/// Symmetric Toeplitz matrix, entry (i, j) = first_row[|i − j|].
struct ToeplitzSym {
  Vector first_row;

  Index n() const { return first_row.size(); }

  SymMatrix dense() const {
    Matrix m(n(), n());
    for (Index i = 0; i < n(); ++i) {
      for (Index j = 0; j < n(); ++j) m(i, j) = first_row(std::abs(i - j));
    }
    return SymMatrix(m);
  }

  /// Averages each diagonal of x.
  static ToeplitzSym fit(const SymMatrix& x) {
    const Index n = x.dim();
    Vector r(n);
    for (Index k = 0; k < n; ++k) {
      double s = 0.0;
      for (Index i = 0; i + k < n; ++i) s += x(i, i + k);
      r(k) = s / static_cast<double>(n - k);
    }
    return {r};
  }
};

/// max |X_{i,j} − X_{i+1,j+1}|.
inline double toeplitz_deviation(const SymMatrix& x) {
  double d = 0.0;
  for (Index i = 0; i + 1 < x.dim(); ++i) {
    for (Index j = 0; j + 1 < x.dim(); ++j) d = std::max(d, std::abs(x(i, j) - x(i + 1, j + 1)));
  }
  return d;
}

/// ‖X − JXJ‖_F with J the exchange matrix.
inline double persymmetry_deviation(const SymMatrix& x) {
  const Matrix& m = x.mat();
  return (m - m.reverse()).norm();
}

/// Largest |(X⁻¹)_ij| over positions the pattern leaves free.
inline double inverse_sparsity_deviation(const SymMatrix& x, const PartialPattern& pat) {
  Eigen::LLT<Matrix> llt(x.mat());
  if (llt.info() != Eigen::Success) throw Error(ErrorKind::InvalidArgument, "matrix is not positive definite");
  const Matrix inv = llt.solve(Matrix::Identity(x.dim(), x.dim()));
  double d = 0.0;
  for (Index j = 0; j < x.dim(); ++j) {
    for (Index i = 0; i < j; ++i) {
      if (!pat.specified(i, j)) d = std::max(d, std::abs(inv(i, j)));
    }
  }
  return d;
}

// ---------------------------------------------------------------------------
// Inverse structure of Toeplitz matrices with cycle-sparse inverses.

struct ToeplitzInverseForm {
  Index n = 0;
  double end_diag = 0.0;   ///< a: entries (0,0) and (n−1,n−1)
  double inner_diag = 0.0; ///< (a² + c² − d²)/a
  double band = 0.0;       ///< c
  double corner = 0.0;     ///< d
  SymMatrix matrix;        ///< assembled (AAᵀ − BBᵀ)/a
};

/**
 * Builds T⁻¹ from its first column (a, c, 0, …, 0, d) by the
 * Gohberg–Semencul formula T⁻¹ = (AAᵀ − BBᵀ)/a, where A and B are lower
 * triangular Toeplitz with first columns (a, c, 0, …, 0, d) and
 * (0, d, 0, …, 0, c).
 */
inline ToeplitzInverseForm gohberg_semencul_inverse(double a, double c, double d, Index n) {
  if (n < 3) throw Error(ErrorKind::InvalidArgument, "need n >= 3");
  if (a == 0.0) throw Error(ErrorKind::SingularT, "leading entry of the inverse is zero");
  Vector ca = Vector::Zero(n), cb = Vector::Zero(n);
  ca(0) = a;
  ca(1) = c;
  ca(n - 1) += d;
  cb(1) = d;
  cb(n - 1) += c;
  auto lower = [n](const Vector& col) {
    Matrix l = Matrix::Zero(n, n);
    for (Index j = 0; j < n; ++j) l.col(j).tail(n - j) = col.head(n - j);
    return l;
  };
  const Matrix la = lower(ca), lb = lower(cb);
  ToeplitzInverseForm f;
  f.n = n;
  f.end_diag = a;
  f.inner_diag = (a * a + c * c - d * d) / a;
  f.band = c;
  f.corner = d;
  f.matrix = SymMatrix(Matrix((la * la.transpose() - lb * lb.transpose()) / a));
  return f;
}

/// ‖T · inv − I‖_F, the dense check of an inverse form against T.
inline double inverse_check(const SymMatrix& t, const ToeplitzInverseForm& f) {
  if (t.dim() != f.n) throw Error(ErrorKind::DimensionMismatch, "inverse form order differs");
  return (t.mat() * f.matrix.mat() - Matrix::Identity(f.n, f.n)).norm();
}

// ---------------------------------------------------------------------------
// Structured exposing vectors for degenerate cycles.

/// Coefficients of the cycle-sparse matrix with end diagonal a, inner
/// diagonal b, band c and corner d.
struct CycleForm {
  double a = 0.0, b = 0.0, c = 0.0, d = 0.0;

  SymMatrix dense(Index n) const {
    SymMatrix m = SymMatrix::zero(n);
    for (Index i = 0; i < n; ++i) m.set(i, i, (i == 0 || i == n - 1) ? a : b);
    for (Index i = 0; i + 1 < n; ++i) m.set(i, i + 1, c);
    if (n > 2) m.set(0, n - 1, m(0, n - 1) + d);
    return m;
  }
};

/// (2·cosθ·c + b, a + cosθ·c + cosφ·d): the diagonal of C_E·X for any
/// completion X, up to sign.
inline std::pair<double, double> relation_residuals(const CycleForm& f, double cos_theta, double cos_phi) {
  return {2.0 * cos_theta * f.c + f.b, f.a + cos_theta * f.c + cos_phi * f.d};
}

/// Least-squares fit of the four coefficients to the entries of z.
inline CycleForm fit_cycle_form(const SymMatrix& z) {
  const Index n = z.dim();
  if (n < 4) throw Error(ErrorKind::InvalidArgument, "cycle form needs n >= 4");
  CycleForm f;
  f.a = 0.5 * (z(0, 0) + z(n - 1, n - 1));
  double s = 0.0;
  for (Index i = 1; i + 1 < n; ++i) s += z(i, i);
  f.b = s / static_cast<double>(n - 2);
  s = 0.0;
  for (Index i = 0; i + 1 < n; ++i) s += z(i, i + 1);
  f.c = s / static_cast<double>(n - 1);
  f.d = z(0, n - 1);
  return f;
}

struct CycleExposing {
  SymMatrix CE;
  CycleForm form;     ///< after projection onto the two relations
  CycleForm fitted;   ///< straight from the solver's Z̄
  std::pair<double, double> fitted_residuals;
  std::pair<double, double> residuals;
  double offpattern = 0.0;  ///< largest |Z̄_ij| outside the cycle sparsity
  SolveResult path;
};

/**
 * Follows the path on the cycle spectrahedron, fits the cycle form to Z̄ and
 * projects the coefficients orthogonally (in coefficient space, with the
 * matrix-norm weights of each coefficient) onto the two linear relations.
 */
inline CycleExposing exposing_vector_cycle(const CyclePattern& cp, const SolverConfig& cfg = {}) {
  if (!cp.angles) throw Error(ErrorKind::InvalidArgument, "exposing vector needs the angle form");
  const auto status = completable(cp);
  if (status == Completability::PD) throw Error(ErrorKind::NotDegenerate, "a positive definite completion exists");
  if (status == Completability::Infeasible) throw Error(ErrorKind::InfeasiblePattern, "no PSD completion exists");
  const Index n = cp.n;
  const double ct = cp.band, cph = cp.corner;

  CycleExposing out;
  out.path = solve(cycle_spectrahedron(cp), cfg);
  const SymMatrix& z = out.path.Z;
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i + 1 < j; ++i) {
      if (!(i == 0 && j == n - 1)) out.offpattern = std::max(out.offpattern, std::abs(z(i, j)));
    }
  }
  out.fitted = fit_cycle_form(z);
  out.fitted_residuals = relation_residuals(out.fitted, ct, cph);

  // Weighted projection: coefficient k appears w_k times (with symmetry) in C_E.
  const double nn = static_cast<double>(n);
  Vector w(4);
  w << 2.0, nn - 2.0, 2.0 * (nn - 1.0), 2.0;
  Matrix g(2, 4);
  g << 0.0, 1.0, 2.0 * ct, 0.0,
       1.0, 0.0, ct, cph;
  Vector p(4);
  p << out.fitted.a, out.fitted.b, out.fitted.c, out.fitted.d;
  const Matrix winv = w.cwiseInverse().asDiagonal();
  const Matrix gwg = g * winv * g.transpose();
  const Vector lam = lstsq_min_norm(gwg, g * p);
  const Vector q = p - winv * g.transpose() * lam;
  out.form = {q(0), q(1), q(2), q(3)};
  out.residuals = relation_residuals(out.form, ct, cph);
  out.CE = out.form.dense(n);
  return out;
}

}  // namespace frpath
