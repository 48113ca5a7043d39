#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <optional>

#include "frpath/error.hpp"

namespace frpath {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Length of svec for an n×n matrix.
constexpr Index tri(Index n) { return n * (n + 1) / 2; }

/// Position of entry (i, j), i ≤ j, in svec order (column-major upper
/// triangle: (0,0), (0,1), (1,1), (0,2), ...).
constexpr Index svec_index(Index i, Index j) {
  return i <= j ? j * (j + 1) / 2 + i : i * (i + 1) / 2 + j;
}

/// Recovers n from t = n(n+1)/2, or nothing if t is not triangular.
inline std::optional<Index> tri_root(Index t) {
  if (t < 0) return std::nullopt;
  auto n = static_cast<Index>(std::floor((std::sqrt(8.0 * t + 1.0) - 1.0) / 2.0));
  for (Index k = std::max<Index>(n - 1, 0); k <= n + 1; ++k) {
    if (tri(k) == t) return k;
  }
  return std::nullopt;
}

/**
 * Dense real symmetric matrix.
 *
 * Symmetry is exact: every constructor copies the upper triangle onto the
 * lower one, so entries(i, j) == entries(j, i) bit for bit.
 */
class SymMatrix {
 public:
  SymMatrix() = default;

  /// Takes the upper triangle of a square matrix.
  explicit SymMatrix(const Matrix& m) : m_(m) {
    if (m.rows() != m.cols()) {
      throw Error(ErrorKind::DimensionMismatch, "SymMatrix needs a square matrix");
    }
    m_.template triangularView<Eigen::StrictlyLower>() = m_.transpose();
  }

  static SymMatrix identity(Index n) { return SymMatrix(Matrix::Identity(n, n)); }
  static SymMatrix zero(Index n) { return SymMatrix(Matrix::Zero(n, n)); }
  static SymMatrix ones(Index n) { return SymMatrix(Matrix::Ones(n, n)); }

  /// Symmetric part (M + Mᵀ)/2 of an arbitrary square matrix.
  static SymMatrix symmetrize(const Matrix& m) {
    if (m.rows() != m.cols()) {
      throw Error(ErrorKind::DimensionMismatch, "symmetrize needs a square matrix");
    }
    return SymMatrix(Matrix(0.5 * (m + m.transpose())));
  }

  Index dim() const { return m_.rows(); }
  double operator()(Index i, Index j) const { return m_(i, j); }
  const Matrix& mat() const { return m_; }

  /// Sets entries (i, j) and (j, i) together.
  void set(Index i, Index j, double v) {
    m_(i, j) = v;
    m_(j, i) = v;
  }

  double frob_norm() const { return m_.norm(); }
  double trace() const { return m_.trace(); }

  SymMatrix operator+(const SymMatrix& o) const {
    check_same(o);
    return SymMatrix(Matrix(m_ + o.m_));
  }
  SymMatrix operator-(const SymMatrix& o) const {
    check_same(o);
    return SymMatrix(Matrix(m_ - o.m_));
  }
  SymMatrix operator-() const { return SymMatrix(Matrix(-m_)); }
  SymMatrix operator*(double s) const { return SymMatrix(Matrix(s * m_)); }
  friend SymMatrix operator*(double s, const SymMatrix& a) { return a * s; }

  /// Congruence VᵀXV.
  SymMatrix congruence(const Matrix& v) const {
    return SymMatrix(Matrix(v.transpose() * m_ * v));
  }

 private:
  void check_same(const SymMatrix& o) const {
    if (o.dim() != dim()) {
      throw Error(ErrorKind::DimensionMismatch, "SymMatrix dimensions differ");
    }
  }

  Matrix m_;
};

/// Symmetric vectorization; off-diagonal entries are scaled by √2 so that
/// svec(X)·svec(Y) equals the trace inner product.
inline Vector svec(const SymMatrix& x) {
  const Index n = x.dim();
  Vector v(tri(n));
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < j; ++i) v(svec_index(i, j)) = std::numbers::sqrt2 * x(i, j);
    v(svec_index(j, j)) = x(j, j);
  }
  return v;
}

/// Inverse of svec. Off-diagonal round trips agree to within one ulp; √2
/// scaling is not injective on doubles, so bitwise equality cannot hold.
inline SymMatrix smat(const Vector& v) {
  auto n = tri_root(v.size());
  if (!n || *n == 0) {
    throw Error(ErrorKind::NonTriangularLength,
                "length " + std::to_string(v.size()) + " is not triangular");
  }
  Matrix m(*n, *n);
  for (Index j = 0; j < *n; ++j) {
    for (Index i = 0; i < j; ++i) m(i, j) = v(svec_index(i, j)) / std::numbers::sqrt2;
    m(j, j) = v(svec_index(j, j));
  }
  return SymMatrix(m);
}

inline double trace_inner(const SymMatrix& x, const SymMatrix& y) {
  if (x.dim() != y.dim()) {
    throw Error(ErrorKind::DimensionMismatch, "trace_inner dimensions differ");
  }
  return x.mat().cwiseProduct(y.mat()).sum();
}

struct SymEigen {
  Vector values;   ///< descending
  Matrix vectors;  ///< orthonormal columns matching values
};

inline SymEigen eig_sym(const SymMatrix& x) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(x.mat());
  if (es.info() != Eigen::Success) {
    throw Error(ErrorKind::ConvergenceFailure, "symmetric eigensolver did not converge");
  }
  return {es.eigenvalues().reverse(), es.eigenvectors().rowwise().reverse()};
}

inline double min_eig(const SymMatrix& x) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(x.mat(), Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) {
    throw Error(ErrorKind::ConvergenceFailure, "symmetric eigensolver did not converge");
  }
  return es.eigenvalues()(0);
}

/// True iff a Cholesky factorization finishes with every pivot positive.
inline bool chol_test(const Matrix& x) {
  Eigen::LLT<Matrix> llt(x);
  return llt.info() == Eigen::Success;
}
inline bool chol_test(const SymMatrix& x) { return chol_test(x.mat()); }

/// Relative pivot cutoff used for every rank decision in least squares.
inline constexpr double kPivotCutoff = 1e-12;

/**
 * Minimum-norm minimizer of ‖M s − rhs‖₂.
 *
 * Tall systems are first compressed by an unpivoted Householder QR, after
 * which a complete orthogonal decomposition of the square factor decides the
 * rank (pivot cutoff 1e-12 relative to the largest pivot). Column pivoting is
 * invariant under the left orthogonal factor, so this is the same rank
 * decision as pivoting on M directly, at a fraction of the cost.
 */
inline Vector lstsq_min_norm(const Matrix& m, const Vector& rhs) {
  if (rhs.size() != m.rows()) {
    throw Error(ErrorKind::DimensionMismatch, "lstsq rhs length differs from row count");
  }
  if (m.cols() == 0) return Vector(0);
  if (m.rows() > m.cols()) {
    Eigen::HouseholderQR<Matrix> qr(m);
    const Index c = m.cols();
    Vector qtb = qr.householderQ().transpose() * rhs;
    Matrix r = qr.matrixQR().topRows(c).template triangularView<Eigen::Upper>();
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod;
    cod.setThreshold(kPivotCutoff);
    cod.compute(r);
    return cod.solve(qtb.head(c));
  }
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod;
  cod.setThreshold(kPivotCutoff);
  cod.compute(m);
  return cod.solve(rhs);
}

/// Number of singular values above rel_tol·σ_max.
inline Index numerical_rank(const Matrix& m, double rel_tol) {
  if (m.size() == 0) return 0;
  Eigen::BDCSVD<Matrix> svd(m);
  const Vector& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return 0;
  Index r = 0;
  for (Index i = 0; i < s.size(); ++i) {
    if (s(i) > rel_tol * s(0)) ++r;
  }
  return r;
}

/// Orthonormal basis of null(M), from a column-pivoted QR of Mᵀ.
inline Matrix nullspace_basis(const Matrix& m) {
  const Index t = m.cols();
  if (m.rows() == 0) return Matrix::Identity(t, t);
  Eigen::ColPivHouseholderQR<Matrix> qr(m.transpose());
  qr.setThreshold(kPivotCutoff);
  const Index k = qr.rank();
  Matrix q = qr.householderQ() * Matrix::Identity(t, t);
  return q.rightCols(t - k);
}

}  // namespace frpath
