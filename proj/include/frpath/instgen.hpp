#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "frpath/facered.hpp"
#include "frpath/gnpath.hpp"

namespace frpath {

struct GenSpec {
  Index n = 0, m = 0, r = 0, g = 0;
  std::uint64_t seed = 0;

  void validate() const {
    if (n < 1 || m < 1 || r < 1 || g < 0) {
      throw Error(ErrorKind::InvalidArgument, "need n, m, r >= 1 and g >= 0");
    }
    if (r + g > n) throw Error(ErrorKind::InvalidArgument, "need r + g <= n");
    if (m > tri(n) - 2) throw Error(ErrorKind::InvalidArgument, "need m <= t(n) - 2");
    if (g > 0 && m < 2) {
      throw Error(ErrorKind::InvalidArgument, "a gap instance needs m >= 2");
    }
  }
};

/**
 * SDP data (𝒜, b, C) with a primal–dual optimal pair (X*, y*, Z*), and the
 * spectrahedron of optimal solutions {X ⪰ 0 : 𝒜(X) = b, ⟨C, X⟩ = ⟨C, X*⟩}.
 */
struct GeneratedInstance {
  GenSpec spec;
  ConstraintMap A;
  Vector b;
  SymMatrix C;
  Spectrahedron spect;
  SymMatrix Xstar;
  SymMatrix Zstar;
  Vector ystar;
};

namespace detail {

inline Matrix random_orthogonal(Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  Matrix g(n, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) g(i, j) = nd(rng);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(n, n);
  for (Index j = 0; j < n; ++j) {
    if (qr.matrixQR()(j, j) < 0.0) q.col(j) = -q.col(j);
  }
  return q;
}

inline std::optional<GeneratedInstance> try_generate(const GenSpec& spec, std::uint64_t seed) {
  const Index n = spec.n, m = spec.m, r = spec.r, g = spec.g;
  const Index s = n - r - g;
  const Index t = tri(n);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> ud(0.5, 1.5);

  const Matrix u = random_orthogonal(n, rng);
  Vector d1(r), d3(s);
  for (Index i = 0; i < r; ++i) d1(i) = ud(rng);
  for (Index i = 0; i < s; ++i) d3(i) = ud(rng);
  const Matrix u1 = u.leftCols(r), u2 = u.middleCols(r, g), u3 = u.rightCols(s);
  SymMatrix xstar(Matrix(u1 * d1.asDiagonal() * u1.transpose()));
  SymMatrix zstar(Matrix(u3 * d3.asDiagonal() * u3.transpose()));

  // Fixed rows: the identity anchor and, for g ≥ 1, a row that vanishes on
  // X* and restricts to tr(X₂₂) on the face exposed by Z*. Its corner block
  // couples the first and last groups, so it cannot serve as a dual
  // improving direction and both optimal faces keep their ranks.
  std::vector<Vector> fixed{svec(SymMatrix::identity(n))};
  if (g > 0) {
    Matrix k(r, s);
    for (Index j = 0; j < s; ++j)
      for (Index i = 0; i < r; ++i) k(i, j) = nd(rng);
    Matrix gap = u2 * u2.transpose() + u1 * k * u3.transpose() + u3 * k.transpose() * u1.transpose();
    fixed.push_back(svec(SymMatrix(gap)));
  }
  const auto nf = static_cast<Index>(fixed.size());
  if (m < nf) return std::nullopt;

  Matrix cols(t, m);
  for (Index k = 0; k < nf; ++k) cols.col(k) = fixed[static_cast<std::size_t>(k)];
  for (Index k = nf; k < m; ++k) {
    Matrix e(n, n);
    for (Index j = 0; j < n; ++j)
      for (Index i = 0; i < n; ++i) e(i, j) = nd(rng);
    cols.col(k) = svec(SymMatrix::symmetrize(e));
  }
  // Orthonormalize the random rows against everything before them.
  Eigen::HouseholderQR<Matrix> qr(cols);
  Matrix q = qr.householderQ() * Matrix::Identity(t, m);
  Matrix rows(m, t);
  for (Index k = 0; k < m; ++k) rows.row(k) = (k < nf ? cols.col(k) : q.col(k)).transpose();

  try {
    ConstraintMap a(n, rows);
    Vector b = a.apply(xstar);
    Vector ystar(m);
    for (Index k = 0; k < m; ++k) ystar(k) = nd(rng);
    SymMatrix c = zstar + a.adjoint(ystar);
    const double pstar = trace_inner(c, xstar);
    // With Z* = 0 the objective row is a combination of the others.
    ConstraintMap ahat = s > 0 ? a.with_row(svec(c)) : a;
    Vector bhat(ahat.m());
    bhat.head(m) = b;
    if (s > 0) bhat(m) = pstar;
    Spectrahedron spect(ahat, bhat);
    return GeneratedInstance{spec, a, b, c, spect, xstar, zstar, ystar};
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::NotSurjective) return std::nullopt;
    throw;
  }
}

}  // namespace detail

/// Deterministic per seed; a rank-deficient draw is retried with seed + k.
inline GeneratedInstance generate(const GenSpec& spec) {
  spec.validate();
  for (std::uint64_t k = 0; k < 16; ++k) {
    if (auto gi = detail::try_generate(spec, spec.seed + k)) return *gi;
  }
  throw Error(ErrorKind::RankDeficientMap, "could not draw a surjective map");
}

struct InstanceReport {
  CheckItem feasibility;      ///< ‖𝒜(X*) − b‖
  CheckItem dual_slack;       ///< ‖Z* − (C − 𝒜*(y*))‖_F
  CheckItem complementarity;  ///< ‖X*Z*‖_F
  Index rank_X = 0;
  Index rank_Z = 0;
  bool rank_X_ok = false;
  bool rank_Z_ok = false;
  bool strictly_complementary = false;  ///< rank_X + rank_Z == n
  /// Alternative-system witness (1, −y*), checked when g = 0.
  std::optional<CheckItem> witness_psd;
  std::optional<CheckItem> witness_gap;

  bool all_pass() const {
    bool ok = feasibility.pass && dual_slack.pass && complementarity.pass && rank_X_ok && rank_Z_ok;
    if (witness_psd) ok = ok && witness_psd->pass;
    if (witness_gap) ok = ok && witness_gap->pass;
    return ok;
  }
};

namespace detail {

inline Index rank_of(const SymMatrix& x) {
  auto ev = eig_sym(x).values;
  if (ev(0) < 1e-8) return 0;
  return classify_spectrum(ev, 1e-12, 1e-8).rank();
}

}  // namespace detail

inline InstanceReport verify_instance(const GeneratedInstance& gi) {
  const Index n = gi.spec.n;
  InstanceReport rep;
  rep.feasibility.value = (gi.A.apply(gi.Xstar) - gi.b).norm();
  rep.feasibility.pass = rep.feasibility.value <= 1e-10 * (1.0 + gi.b.norm());
  rep.dual_slack.value = (gi.Zstar - (gi.C - gi.A.adjoint(gi.ystar))).frob_norm();
  rep.dual_slack.pass = rep.dual_slack.value <= 1e-10 * (1.0 + gi.C.frob_norm());
  rep.complementarity.value = (gi.Xstar.mat() * gi.Zstar.mat()).norm();
  rep.complementarity.pass = rep.complementarity.value <= 1e-9;
  rep.rank_X = detail::rank_of(gi.Xstar);
  rep.rank_Z = detail::rank_of(gi.Zstar);
  rep.rank_X_ok = rep.rank_X == gi.spec.r;
  rep.rank_Z_ok = rep.rank_Z == n - gi.spec.r - gi.spec.g;
  rep.strictly_complementary = rep.rank_X + rep.rank_Z == n;
  if (gi.spec.g == 0) {
    SymMatrix w = gi.C - gi.A.adjoint(gi.ystar);
    CheckItem psd{false, min_eig(w)};
    psd.pass = psd.value >= -1e-10 && (w.frob_norm() > 1e-10 || n == gi.spec.r);
    const double pstar = trace_inner(gi.C, gi.Xstar);
    CheckItem gap{false, std::abs(pstar - gi.ystar.dot(gi.b))};
    gap.pass = gap.value <= 1e-8;
    rep.witness_psd = psd;
    rep.witness_gap = gap;
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Classical facial reduction, used as an independent oracle in tests.

namespace detail {

/// Hessian of −log det at W⁻¹ = winv in svec coordinates.
inline Matrix logdet_hessian(const Matrix& winv) {
  const Index n = winv.rows(), t = tri(n);
  Matrix h(t, t);
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i <= j; ++i) {
      Matrix e = (i == j) ? Matrix(winv.col(i) * winv.col(i).transpose())
                          : Matrix((winv.col(i) * winv.col(j).transpose() +
                                    winv.col(j) * winv.col(i).transpose()) /
                                   std::numbers::sqrt2);
      h.col(svec_index(i, j)) = svec(SymMatrix(e));
    }
  }
  return h;
}

/**
 * Maximum-rank W ⪰ 0, W ≠ 0, in {𝒜*(y) : bᵀy = 0}, or nothing if none
 * exists. Solves max λ_min(W) over that subspace at trace 1 by a log-barrier
 * path; the central path limit is maximally complementary, so when the
 * optimum is 0 the final W has the largest available rank.
 */
inline std::optional<Matrix> max_rank_exposing(Index n, const Matrix& rows, const Vector& b) {
  const Index m = rows.rows(), t = tri(n);
  if (m == 0) return std::nullopt;
  Matrix ybasis = b.norm() > 0.0 ? nullspace_basis(Matrix(b.transpose())) : Matrix(Matrix::Identity(m, m));
  if (ybasis.cols() == 0) return std::nullopt;
  Matrix span = rows.transpose() * ybasis;
  Eigen::ColPivHouseholderQR<Matrix> sq(span);
  sq.setThreshold(1e-10);
  const Index k = sq.rank();
  if (k == 0) return std::nullopt;
  Matrix ub = sq.householderQ() * Matrix::Identity(t, k);
  const Vector id = svec(SymMatrix::identity(n));
  const Vector tau = ub.transpose() * id;
  if (tau.norm() < 1e-12) return std::nullopt;
  const Vector w0 = ub * tau / tau.squaredNorm();
  const Matrix bt = ub * nullspace_basis(Matrix(tau.transpose()));
  const Index q = bt.cols();

  Matrix gen(t, q + 1);  // ∂Y/∂(c, s)
  gen.leftCols(q) = bt;
  gen.col(q) = -id;
  Vector w = Vector::Zero(q + 1);
  w(q) = min_eig(smat(w0)) - 1.0;
  auto ymat = [&](const Vector& ww) { return smat(Vector(w0 + gen * ww)).mat(); };
  auto phi = [&](const Vector& ww, double mu, double& out) {
    Eigen::LLT<Matrix> llt(ymat(ww));
    if (llt.info() != Eigen::Success) return false;
    out = ww(q) + 2.0 * mu * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    return true;
  };

  for (double mu = 1.0; mu >= 1e-13; mu *= 0.1) {
    for (int iter = 0; iter < 100; ++iter) {
      Matrix y = ymat(w);
      Matrix yinv = y.llt().solve(Matrix::Identity(n, n));
      Vector grad = mu * gen.transpose() * svec(SymMatrix(yinv));
      grad(q) += 1.0;
      Matrix hess = -mu * gen.transpose() * logdet_hessian(yinv) * gen;
      Vector step = (-hess).ldlt().solve(grad);
      const double dec = grad.dot(step);
      if (dec <= 1e-22) break;
      double f0 = 0.0;
      phi(w, mu, f0);
      double s = 1.0, f1 = 0.0;
      while (!phi(w + s * step, mu, f1) || f1 < f0 + 0.01 * s * dec) {
        s *= 0.5;
        if (s < 1e-14) break;
      }
      if (s < 1e-14) break;
      w += s * step;
    }
  }
  Vector wv = w0 + bt * w.head(q);
  Matrix wm = smat(wv).mat();
  if (min_eig(SymMatrix(wm)) < -1e-7) return std::nullopt;
  return wm;
}

}  // namespace detail

/**
 * Repeats maximal-rank exposing-vector reductions S_i ← VᵀS_iV until no
 * exposing vector exists, returning the number of reductions performed.
 */
inline int classical_fr_oracle(const Spectrahedron& p, int max_steps) {
  if (p.n() > 15) throw Error(ErrorKind::InvalidArgument, "classical oracle is limited to n <= 15");
  Index n = p.n();
  Matrix rows = p.map.rows();
  Vector b = p.b;
  int steps = 0;
  while (n > 0) {
    auto w = detail::max_rank_exposing(n, rows, b);
    if (!w) return steps;
    if (++steps > max_steps) throw Error(ErrorKind::StepBudgetExceeded, "step budget exhausted");
    auto es = eig_sym(SymMatrix(*w));
    Index rank = 0;
    for (Index i = 0; i < n; ++i) {
      if (es.values(i) > 1e-4 * es.values(0)) ++rank;
    }
    const Index k = n - rank;
    if (k == 0) return steps;
    Matrix v = es.vectors.rightCols(k);
    Matrix nr(rows.rows(), tri(k));
    for (Index i = 0; i < rows.rows(); ++i) {
      nr.row(i) = svec(smat(rows.row(i).transpose()).congruence(v)).transpose();
    }
    // Keep an independent subset of rows.
    Eigen::ColPivHouseholderQR<Matrix> qr(nr.transpose());
    qr.setThreshold(1e-9);
    const Index rk = qr.rank();
    Matrix kept(rk, tri(k));
    Vector kb(rk);
    for (Index j = 0; j < rk; ++j) {
      const Index src = qr.colsPermutation().indices()(j);
      kept.row(j) = nr.row(src);
      kb(j) = b(src);
    }
    rows = std::move(kept);
    b = std::move(kb);
    n = k;
  }
  return steps;
}

}  // namespace frpath
