#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "frpath/spectra.hpp"

namespace frpath {

/// Partition of a descending spectrum into kept, zero and gray-zone indices.
struct EigClassification {
  std::vector<Index> large;
  std::vector<Index> small;
  std::vector<Index> ambiguous;
  Index cut = 0;           ///< number of eigenvalues above the chosen cut
  double gap_ratio = 0.0;  ///< λ_r / λ_{r+1} with r = large.size()

  Index rank() const { return static_cast<Index>(large.size()); }
};

/**
 * Places the cut at the largest ratio λ_i/λ_{i+1} among positions where
 * λ_{i+1} < abs_tol + rel_tol·λ₁. Everything below the cut, and anything
 * under abs_tol, is small. Values in [abs_tol, √(abs_tol·λ₁)) above the cut
 * are ambiguous. Nonpositive values are clamped to a tiny positive floor
 * before taking ratios.
 */
inline EigClassification classify_spectrum(const Vector& lam, double rel_tol = 1e-12,
                                           double abs_tol = 1e-8) {
  const Index n = lam.size();
  for (Index i = 1; i < n; ++i) {
    if (lam(i) > lam(i - 1)) throw Error(ErrorKind::InvalidArgument, "spectrum must be descending");
  }
  if (n == 0 || lam(0) < abs_tol) throw Error(ErrorKind::AllZero, "largest eigenvalue below abs_tol");
  const double l1 = lam(0);
  const double floor = l1 * 1e-290;
  auto clamp = [&](double v) { return std::max(v, floor); };
  const double thresh = abs_tol + rel_tol * l1;

  EigClassification c;
  c.cut = n;
  double best = 0.0;
  for (Index i = 0; i + 1 < n; ++i) {
    if (lam(i + 1) < thresh) {
      const double ratio = clamp(lam(i)) / clamp(lam(i + 1));
      if (ratio > best) {
        best = ratio;
        c.cut = i + 1;
      }
    }
  }
  const double amb_hi = std::sqrt(abs_tol) * std::sqrt(l1);
  for (Index i = 0; i < n; ++i) {
    if (i >= c.cut || lam(i) < abs_tol) {
      c.small.push_back(i);
    } else if (lam(i) < amb_hi) {
      c.ambiguous.push_back(i);
    } else {
      c.large.push_back(i);
    }
  }
  const Index r = c.rank();
  c.gap_ratio = r >= n ? std::numeric_limits<double>::infinity() : clamp(lam(r - 1)) / clamp(lam(r));
  return c;
}

struct FaceDescriptor {
  Matrix V;  ///< n×r, orthonormal columns spanning the face
  Index r = 0;
  SymMatrix Zexp;
  std::vector<SymMatrix> reduced_constraints;  ///< VᵀS_iV
  EigClassification classification;
};

/**
 * Builds the face from the large eigenvalues of X̄. Ambiguous indices are
 * treated as zero unless strict is set, in which case they raise
 * AmbiguousRank.
 */
inline FaceDescriptor extract_face(const Spectrahedron& p, const SymMatrix& xbar,
                                   const SymMatrix& zbar, const EigClassification& cls,
                                   bool strict = false) {
  if (strict && !cls.ambiguous.empty()) {
    throw Error(ErrorKind::AmbiguousRank,
                std::to_string(cls.ambiguous.size()) + " eigenvalues fall in the gray zone");
  }
  const Index n = xbar.dim();
  if (p.n() != n || zbar.dim() != n) throw Error(ErrorKind::DimensionMismatch, "face data orders differ");
  auto es = eig_sym(xbar);
  FaceDescriptor f;
  f.r = cls.rank();
  f.V.resize(n, f.r);
  for (Index k = 0; k < f.r; ++k) f.V.col(k) = es.vectors.col(cls.large[static_cast<std::size_t>(k)]);
  f.Zexp = zbar;
  f.classification = cls;
  for (Index i = 0; i < p.m(); ++i) f.reduced_constraints.push_back(p.map.constraint(i).congruence(f.V));
  return f;
}

struct CheckItem {
  bool pass = false;
  double value = 0.0;
};

/// The four alternative-system checks for an exposing vector candidate.
struct ExposingReport {
  CheckItem adjoint_residual;  ///< ‖Zexp − 𝒜*(ȳ)‖_F
  CheckItem psd;               ///< λ_min(Zexp), plus Zexp ≠ 0
  CheckItem rhs_orthogonal;    ///< |bᵀȳ|
  CheckItem face_orthogonal;   ///< ‖Zexp·V‖_F
  bool nonzero = false;

  bool all_pass() const {
    return adjoint_residual.pass && psd.pass && rhs_orthogonal.pass && face_orthogonal.pass;
  }
  std::string verdict() const {
    if (!nonzero) return "no reduction certified";
    return all_pass() ? "certified" : "not certified";
  }
};

inline ExposingReport verify_exposing(const Spectrahedron& p, const SymMatrix& zexp, const Vector& ybar,
                                      const Matrix& v) {
  ExposingReport rep;
  const double zn = zexp.frob_norm();
  rep.nonzero = zn > 1e-10;
  rep.adjoint_residual.value = (zexp - p.map.adjoint(ybar)).frob_norm();
  rep.adjoint_residual.pass = rep.adjoint_residual.value <= 1e-8 * (1.0 + zn);
  rep.psd.value = min_eig(zexp);
  rep.psd.pass = rep.nonzero && rep.psd.value >= -1e-9;
  rep.rhs_orthogonal.value = std::abs(p.b.dot(ybar));
  rep.rhs_orthogonal.pass = rep.rhs_orthogonal.value <= 1e-8 * (1.0 + p.b.norm() * ybar.norm());
  rep.face_orthogonal.value = v.cols() == 0 ? 0.0 : (zexp.mat() * v).norm();
  rep.face_orthogonal.pass = rep.nonzero && rep.face_orthogonal.value <= 1e-6 * zn;
  return rep;
}

struct RegularizedProblem {
  Spectrahedron reduced;
  std::optional<SymMatrix> objective;  ///< VᵀCV when C was supplied
  std::vector<Index> kept_rows;        ///< original indices of surviving rows
  std::vector<Index> dropped_rows;     ///< rows that vanished on the face
  std::vector<Index> pruned_rows;      ///< consistent but linearly dependent rows
};

/// Restricts the constraints to the face V S₊ʳ Vᵀ and restores surjectivity.
inline RegularizedProblem regularized_problem(const Spectrahedron& p, const FaceDescriptor& f,
                                              const std::optional<SymMatrix>& c = std::nullopt) {
  const Index r = f.r;
  std::vector<Index> live, dropped;
  for (Index i = 0; i < p.m(); ++i) {
    const double rn = r == 0 ? 0.0 : f.reduced_constraints[static_cast<std::size_t>(i)].frob_norm();
    if (rn < 1e-10) {
      if (std::abs(p.b(i)) >= 1e-8) {
        throw Error(ErrorKind::InconsistentRow,
                    "row " + std::to_string(i) + " vanishes on the face but has nonzero rhs");
      }
      dropped.push_back(i);
    } else {
      live.push_back(i);
    }
  }
  if (r == 0) throw Error(ErrorKind::InvalidArgument, "face is {0}; nothing to regularize");

  const Index tr = tri(r);
  const auto nl = static_cast<Index>(live.size());
  Matrix rows(tr, nl);
  Vector bl(nl);
  for (Index k = 0; k < nl; ++k) {
    const Index i = live[static_cast<std::size_t>(k)];
    rows.col(k) = svec(f.reduced_constraints[static_cast<std::size_t>(i)]);
    bl(k) = p.b(i);
  }
  std::vector<Index> keep, pruned;
  if (nl > 0) {
    Eigen::ColPivHouseholderQR<Matrix> qr(rows);
    qr.setThreshold(1e-9);
    const Index rank = qr.rank();
    std::vector<Index> kcols;
    for (Index k = 0; k < rank; ++k) kcols.push_back(qr.colsPermutation().indices()(k));
    std::sort(kcols.begin(), kcols.end());
    Matrix kr(tr, rank);
    Vector kb(rank);
    for (Index k = 0; k < rank; ++k) {
      kr.col(k) = rows.col(kcols[static_cast<std::size_t>(k)]);
      kb(k) = bl(kcols[static_cast<std::size_t>(k)]);
    }
    for (Index k = 0; k < nl; ++k) {
      if (std::find(kcols.begin(), kcols.end(), k) != kcols.end()) {
        keep.push_back(live[static_cast<std::size_t>(k)]);
        continue;
      }
      Vector coef = lstsq_min_norm(kr, rows.col(k));
      const double implied = kb.dot(coef);
      if (std::abs(implied - bl(k)) > 1e-8 * (1.0 + std::abs(bl(k)))) {
        throw Error(ErrorKind::InconsistentRow,
                    "dependent row " + std::to_string(live[static_cast<std::size_t>(k)]) +
                        " contradicts the rows it depends on");
      }
      pruned.push_back(live[static_cast<std::size_t>(k)]);
    }
  }
  Matrix out_rows(static_cast<Index>(keep.size()), tr);
  Vector out_b(static_cast<Index>(keep.size()));
  for (std::size_t k = 0; k < keep.size(); ++k) {
    out_rows.row(static_cast<Index>(k)) = svec(f.reduced_constraints[static_cast<std::size_t>(keep[k])]).transpose();
    out_b(static_cast<Index>(k)) = p.b(keep[k]);
  }
  RegularizedProblem out{Spectrahedron(ConstraintMap(r, std::move(out_rows)), std::move(out_b)),
                         std::nullopt, keep, dropped, pruned};
  if (c) out.objective = c->congruence(f.V);
  return out;
}

}  // namespace frpath
