#pragma once

#include <utility>
#include <vector>

#include "frpath/symlin.hpp"

namespace frpath {

/**
 * The constraint map X ↦ (⟨S_1, X⟩, …, ⟨S_m, X⟩), stored as the m×t(n)
 * matrix whose k-th row is svec(S_k)ᵀ. The map must be surjective.
 */
class ConstraintMap {
 public:
  /// Relative singular-value cutoff for the surjectivity check.
  static constexpr double kRankTol = 1e-10;

  ConstraintMap(Index n, Matrix rows) : n_(n), rows_(std::move(rows)) {
    if (n < 1) throw Error(ErrorKind::InvalidArgument, "matrix order must be positive");
    if (rows_.cols() != tri(n)) {
      throw Error(ErrorKind::DimensionMismatch, "constraint rows must have length t(n)");
    }
    if (rows_.rows() > 0 && numerical_rank(rows_, kRankTol) < rows_.rows()) {
      throw Error(ErrorKind::NotSurjective,
                  "constraint matrices are linearly dependent (rank < m)");
    }
  }

  static ConstraintMap from_matrices(Index n, const std::vector<SymMatrix>& s) {
    Matrix rows(static_cast<Index>(s.size()), tri(n));
    for (std::size_t k = 0; k < s.size(); ++k) {
      if (s[k].dim() != n) {
        throw Error(ErrorKind::DimensionMismatch, "constraint matrix has wrong order");
      }
      rows.row(static_cast<Index>(k)) = svec(s[k]).transpose();
    }
    return ConstraintMap(n, std::move(rows));
  }

  Index n() const { return n_; }
  Index m() const { return rows_.rows(); }
  Index t() const { return rows_.cols(); }
  const Matrix& rows() const { return rows_; }

  SymMatrix constraint(Index k) const { return smat(rows_.row(k).transpose()); }

  Vector apply(const SymMatrix& x) const {
    if (x.dim() != n_) throw Error(ErrorKind::DimensionMismatch, "matrix order differs from map");
    return rows_ * svec(x);
  }

  SymMatrix adjoint(const Vector& y) const {
    if (y.size() != m()) throw Error(ErrorKind::DimensionMismatch, "multiplier length differs from m");
    return smat(rows_.transpose() * y);
  }

  /// Same map with one extra row appended (surjectivity re-checked).
  ConstraintMap with_row(const Vector& row) const {
    Matrix r(m() + 1, t());
    r.topRows(m()) = rows_;
    r.row(m()) = row.transpose();
    return ConstraintMap(n_, std::move(r));
  }

 private:
  Index n_;
  Matrix rows_;
};

/// {X ⪰ 0 : 𝒜(X) = b}. Recession directions removed by eliminate_recession
/// are kept so relative-interior points can be re-expanded.
struct Spectrahedron {
  ConstraintMap map;
  Vector b;
  std::vector<SymMatrix> recession;

  Spectrahedron(ConstraintMap map_, Vector b_) : map(std::move(map_)), b(std::move(b_)) {
    if (b.size() != map.m()) {
      throw Error(ErrorKind::DimensionMismatch, "rhs length differs from constraint count");
    }
  }

  Index n() const { return map.n(); }
  Index m() const { return map.m(); }
};

inline Vector apply_map(const Spectrahedron& p, const SymMatrix& x) { return p.map.apply(x); }

inline SymMatrix apply_adjoint(const Spectrahedron& p, const Vector& y) { return p.map.adjoint(y); }

/// b(α) = b + α·𝒜(I).
inline Vector perturb_rhs(const Spectrahedron& p, double alpha) {
  if (alpha < 0.0) throw Error(ErrorKind::NegativeAlpha, "perturbation must be nonnegative");
  return p.b + alpha * p.map.apply(SymMatrix::identity(p.n()));
}

/**
 * Cached factorization of Aᵀ giving the null-space basis N, the minimum-norm
 * particular solution x̂(α) of A x = b(α), and least-squares multipliers.
 */
class AffineParam {
 public:
  explicit AffineParam(const Spectrahedron& p)
      : b_(p.b), qr_(p.map.rows().transpose()) {
    const Index t = p.map.t();
    const Index m = p.m();
    aI_ = p.map.apply(SymMatrix::identity(p.n()));
    Matrix q = qr_.householderQ() * Matrix::Identity(t, t);
    range_ = q.leftCols(m);
    null_ = q.rightCols(t - m);
    r_ = qr_.matrixQR().topRows(m).template triangularView<Eigen::Upper>();
  }

  const Vector& aI() const { return aI_; }
  const Matrix& nullbasis() const { return null_; }
  /// Orthonormal basis of range(Aᵀ).
  const Matrix& rangebasis() const { return range_; }

  Vector xhat(double alpha) const {
    Vector rhs = b_ + alpha * aI_;
    Vector w = r_.transpose().template triangularView<Eigen::Lower>().solve(rhs);
    return range_ * w;
  }

  /// argmin_y ‖Aᵀy − z‖₂.
  Vector multipliers(const Vector& z) const {
    Vector w = range_.transpose() * z;
    return r_.template triangularView<Eigen::Upper>().solve(w);
  }

 private:
  Vector b_;
  Eigen::HouseholderQR<Matrix> qr_;
  Vector aI_;
  Matrix range_;
  Matrix null_;
  Matrix r_;
};

enum class BoundStatus { Bounded, Inconclusive };

struct BoundednessCertificate {
  BoundStatus status;
  SymMatrix projection;  ///< nearest point to I in range(𝒜*)
  Vector y;              ///< projection == 𝒜*(y)
};

/// Projects I onto range(𝒜*); a positive definite projection proves the set
/// is bounded.
inline BoundednessCertificate boundedness_certificate(const Spectrahedron& p) {
  Vector y = lstsq_min_norm(p.map.rows().transpose(), svec(SymMatrix::identity(p.n())));
  SymMatrix proj = p.map.adjoint(y);
  return {chol_test(proj) ? BoundStatus::Bounded : BoundStatus::Inconclusive, proj, y};
}

/// Adds the row trace(X) = trace(S) + t anchored at a feasible S.
inline Spectrahedron bound_by_trace(const Spectrahedron& p, const SymMatrix& s, double t) {
  if (t <= 0.0) throw Error(ErrorKind::InvalidArgument, "trace slack must be positive");
  if ((p.map.apply(s) - p.b).norm() > 1e-8) {
    throw Error(ErrorKind::InfeasibleAnchor, "anchor does not satisfy the constraints");
  }
  Vector b(p.m() + 1);
  b << p.b, s.trace() + t;
  Spectrahedron out(p.map.with_row(svec(SymMatrix::identity(p.n()))), std::move(b));
  out.recession = p.recession;
  return out;
}

/// Restricts to ⟨S, X⟩ = 0 for a PSD direction S in null(𝒜).
inline Spectrahedron eliminate_recession(const Spectrahedron& p, const SymMatrix& s) {
  const double norm = s.frob_norm();
  if (norm <= 1e-12) throw Error(ErrorKind::NotRecessionDirection, "direction is zero");
  if (min_eig(s) < -1e-8 * norm) {
    throw Error(ErrorKind::NotRecessionDirection, "direction is not positive semidefinite");
  }
  if (p.map.apply(s).norm() > 1e-8 * norm) {
    throw Error(ErrorKind::NotRecessionDirection, "direction is not in the null space");
  }
  Vector b(p.m() + 1);
  b << p.b, 0.0;
  Spectrahedron out(p.map.with_row(svec(s)), std::move(b));
  out.recession = p.recession;
  out.recession.push_back(s);
  return out;
}

/// Adds back every recorded recession direction.
inline SymMatrix reexpand(const Spectrahedron& p, const SymMatrix& x) {
  SymMatrix out = x;
  for (const auto& s : p.recession) out = out + s;
  return out;
}

}  // namespace frpath
