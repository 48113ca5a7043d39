#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <utility>
#include <vector>

#include "frpath/spectra.hpp"

namespace frpath {

/// Bands on the smaller step length s that drive the α update.
struct AlphaRules {
  double shrink_above = 0.8;  ///< s ≥ this: α ← σα
  double hold_above = 0.3;    ///< s in [hold_above, shrink_above): α unchanged
  double grow_above = 0.1;    ///< s in [grow_above, hold_above): α ← grow·α
  double grow = 1.2;
  double jump = 2.0;          ///< s < grow_above: α ← jump·α
};

enum class DirectionSolver {
  Auto,        ///< structured, falling back to dense on numerical rank loss
  Structured,  ///< eigenbasis-of-Z reduction only
  Dense,       ///< explicit n²×t(n) least squares
};

struct SolverConfig {
  double sigma = 0.6;
  double tol = 1e-12;
  int max_iter = 200;
  double step_init = 1.1;
  double backtrack_factor = 0.8;
  AlphaRules alpha_rules;
  /// Extra Gauss-Newton steps at the final α after convergence.
  int polish_iterations = 0;
  /// Throw UnboundedProblem when the boundedness certificate is inconclusive.
  bool require_certificate = false;
  DirectionSolver direction = DirectionSolver::Auto;
  double min_step = 1e-12;
  double unbounded_norm = 1e8;

  void validate() const {
    if (!(sigma > 0.0 && sigma < 1.0)) throw Error(ErrorKind::InvalidArgument, "sigma must lie in (0,1)");
    if (!(tol > 0.0)) throw Error(ErrorKind::InvalidArgument, "tol must be positive");
    if (max_iter < 1) throw Error(ErrorKind::InvalidArgument, "max_iter must be at least 1");
    if (!(step_init > 1.0)) throw Error(ErrorKind::InvalidArgument, "step_init must exceed 1");
    if (!(backtrack_factor > 0.0 && backtrack_factor < 1.0)) {
      throw Error(ErrorKind::InvalidArgument, "backtrack_factor must lie in (0,1)");
    }
    if (polish_iterations < 0) throw Error(ErrorKind::InvalidArgument, "polish_iterations must be nonnegative");
  }
};

struct PathIterate {
  Vector x;  ///< svec(X)
  Vector v;  ///< null-space coordinates
  Vector y;
  Vector z;  ///< svec(Z)
  double alpha = 1.0;
};

struct ResidualTriple {
  Vector rd;  ///< Aᵀy − z
  Vector rp;  ///< x − x̂(α) − Nv
  Matrix Rc;  ///< ZX − αI, not symmetric
};

struct Direction {
  Vector dx, dv, dy, dz;
};

struct StepLengths {
  double primal = 1.0;
  double dual = 1.0;
  double min() const { return std::min(primal, dual); }
};

struct IterationRecord {
  int iter = 0;
  double alpha = 0.0;
  double norm_rd = 0.0;
  double norm_rp = 0.0;
  double norm_Rc = 0.0;
  double step_p = 0.0;
  double step_d = 0.0;
  double min_eig_X = 0.0;
  double min_eig_Z = 0.0;
  double mean_ZX = 0.0;  ///< ⟨Z,X⟩/n
  bool dense_fallback = false;
};

struct SolveResult {
  SymMatrix X;
  Vector y;
  SymMatrix Z;
  double alpha = 0.0;
  int iterations = 0;
  std::vector<IterationRecord> history;
};

/// Problem data shared read-only by every iteration of a solve.
class PathProblem {
 public:
  explicit PathProblem(Spectrahedron p) : p_(std::move(p)), param_(p_) {
    s_.reserve(static_cast<std::size_t>(p_.m()));
    for (Index k = 0; k < p_.m(); ++k) s_.push_back(p_.map.constraint(k).mat());
  }

  const Spectrahedron& spect() const { return p_; }
  const AffineParam& param() const { return param_; }
  const std::vector<Matrix>& constraint_mats() const { return s_; }
  Index n() const { return p_.n(); }
  Index m() const { return p_.m(); }
  Index t() const { return p_.map.t(); }

 private:
  Spectrahedron p_;
  AffineParam param_;
  std::vector<Matrix> s_;
};

namespace detail {

/// Row-major vectorization of a square matrix.
inline Vector vec_rows(const Matrix& y) {
  Matrix yt = y.transpose();
  return Eigen::Map<const Vector>(yt.data(), yt.size());
}

inline Matrix unvec_rows(const Vector& v, Index n) {
  Matrix yt = Eigen::Map<const Matrix>(v.data(), n, n);
  return yt.transpose();
}

}  // namespace detail

inline PathIterate init_iterate(const PathProblem& prob, bool require_certificate = false) {
  const Index n = prob.n();
  auto cert = boundedness_certificate(prob.spect());
  if (require_certificate && cert.status != BoundStatus::Bounded) {
    throw Error(ErrorKind::UnboundedProblem, "boundedness could not be certified");
  }
  SymMatrix z0 = cert.status == BoundStatus::Bounded ? cert.projection : SymMatrix::identity(n);
  SymMatrix x0 = SymMatrix::identity(n);
  PathIterate it;
  it.x = svec(x0);
  it.z = svec(z0);
  it.y = prob.param().multipliers(it.z);
  it.alpha = 2.0 * trace_inner(z0, x0) / static_cast<double>(n);
  // x̂(α) is orthogonal to null(A), so Nᵀx recovers the null-space part.
  it.v = prob.param().nullbasis().transpose() * it.x;
  return it;
}

inline ResidualTriple residuals(const PathProblem& prob, const PathIterate& it) {
  const auto& par = prob.param();
  const Index n = prob.n();
  ResidualTriple r;
  r.rd = prob.spect().map.rows().transpose() * it.y - it.z;
  r.rp = it.x - par.xhat(it.alpha) - par.nullbasis() * it.v;
  r.Rc = smat(it.z).mat() * smat(it.x).mat() - it.alpha * Matrix::Identity(n, n);
  return r;
}

/// Right side −R_c + Z·smat(r_p) − smat(r_d)·X as an n×n matrix.
inline Matrix gn_rhs_matrix(const PathIterate& it, const ResidualTriple& r) {
  const Matrix x = smat(it.x).mat();
  const Matrix z = smat(it.z).mat();
  return -r.Rc + z * smat(r.rp).mat() - smat(r.rd).mat() * x;
}

struct ProjectedSystem {
  Matrix M;    ///< n² × t(n); first m columns multiply dy, the rest dv
  Vector rhs;  ///< n²
};

inline ProjectedSystem assemble_projected_system(const PathProblem& prob, const PathIterate& it,
                                                 const ResidualTriple& r) {
  const Index n = prob.n(), m = prob.m(), t = prob.t();
  const Matrix x = smat(it.x).mat();
  const Matrix z = smat(it.z).mat();
  const Matrix& nb = prob.param().nullbasis();
  ProjectedSystem sys;
  sys.M.resize(n * n, t);
  for (Index k = 0; k < m; ++k) {
    sys.M.col(k) = detail::vec_rows(prob.constraint_mats()[static_cast<std::size_t>(k)] * x);
  }
  for (Index j = 0; j < t - m; ++j) {
    sys.M.col(m + j) = detail::vec_rows(z * smat(nb.col(j)).mat());
  }
  sys.rhs = detail::vec_rows(gn_rhs_matrix(it, r));
  return sys;
}

inline ProjectedSystem assemble_projected_system(const PathProblem& prob, const PathIterate& it) {
  return assemble_projected_system(prob, it, residuals(prob, it));
}

namespace detail {

/**
 * Solves min ‖Σ dy_k S_k X + Z V − R‖_F over dy and V ∈ null(𝒜), which is
 * the projected system with dv = Nᵀsvec(V). N is orthonormal, so the two
 * parametrizations share the same minimum-norm solution.
 *
 * With Z = QΛQᵀ, the map V ↦ ΛQᵀVQ has mutually orthogonal columns in svec
 * coordinates. Splitting the n² rows into the span of those columns and its
 * complement leaves V determined by dy through a projection with m
 * constraints, and dy by an (m + n(n−1)/2) × m least-squares problem.
 * Returns nothing when that reduced problem is numerically rank deficient.
 */
inline std::optional<std::pair<Vector, Vector>> structured_solve(const PathProblem& prob,
                                                                  const Matrix& x, const Matrix& z,
                                                                  const Matrix& rhs) {
  const Index n = prob.n(), m = prob.m(), t = prob.t();
  const Index p = n * (n - 1) / 2;
  Eigen::SelfAdjointEigenSolver<Matrix> es(z);
  if (es.info() != Eigen::Success) return std::nullopt;
  const Vector& lam = es.eigenvalues();
  const Matrix& q = es.eigenvectors();
  if (lam.minCoeff() <= 0.0) return std::nullopt;

  const Matrix xr = q.transpose() * x * q;
  const Matrix rr = q.transpose() * rhs * q;

  // Column scales of the rotated Z-block and the 2×2 row rotations per pair.
  Vector d(t), cw(t), sw(t);
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i <= j; ++i) {
      const Index s = svec_index(i, j);
      if (i == j) {
        d(s) = lam(i);
        cw(s) = 1.0;
        sw(s) = 0.0;
      } else {
        const double h = std::hypot(lam(i), lam(j));
        d(s) = h / std::numbers::sqrt2;
        cw(s) = lam(i) / h;
        sw(s) = lam(j) / h;
      }
    }
  }
  auto split = [&](const Matrix& y, Eigen::Ref<Vector> wpart, Eigen::Ref<Vector> ppart) {
    Index pk = 0;
    for (Index j = 0; j < n; ++j) {
      for (Index i = 0; i <= j; ++i) {
        const Index s = svec_index(i, j);
        if (i == j) {
          wpart(s) = y(i, i);
        } else {
          wpart(s) = cw(s) * y(i, j) + sw(s) * y(j, i);
          ppart(pk++) = sw(s) * y(i, j) - cw(s) * y(j, i);
        }
      }
    }
  };

  Matrix at(t, m);  // rotated constraint rows, as columns
  Matrix bw(t, m), bp(p, m);
  for (Index k = 0; k < m; ++k) {
    const Matrix sk = q.transpose() * prob.constraint_mats()[static_cast<std::size_t>(k)] * q;
    at.col(k) = svec(SymMatrix(sk));
    split(sk * xr, bw.col(k), bp.col(k));
  }
  Vector rw(t), rp(p);
  split(rr, rw, rp);

  // Orthonormal basis of range(D⁻¹Ãᵀ); rows sorted by decreasing scale keep
  // the pivoted QR accurate when D spans many orders of magnitude.
  std::vector<Index> order(static_cast<std::size_t>(t));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return d(a) < d(b); });
  Matrix g(t, m);
  for (Index r = 0; r < t; ++r) {
    const Index s = order[static_cast<std::size_t>(r)];
    g.row(r) = at.row(s) / d(s);
  }
  Eigen::ColPivHouseholderQR<Matrix> gqr(g);
  Matrix hs = gqr.householderQ() * Matrix::Identity(t, m);
  Matrix h(t, m);
  for (Index r = 0; r < t; ++r) h.row(order[static_cast<std::size_t>(r)]) = hs.row(r);

  Matrix k(m + p, m);
  k.topRows(m) = h.transpose() * bw;
  k.bottomRows(p) = bp;
  Vector kr(m + p);
  kr.head(m) = h.transpose() * rw;
  kr.tail(p) = rp;

  Eigen::CompleteOrthogonalDecomposition<Matrix> cod;
  cod.setThreshold(kPivotCutoff);
  cod.compute(k);
  if (cod.rank() < m) return std::nullopt;
  Vector dy = cod.solve(kr);

  Vector c = rw - bw * dy;
  Vector u = c - h * (h.transpose() * c);
  Vector vr = u.cwiseQuotient(d);
  Matrix vfull = q * smat(vr).mat() * q.transpose();
  Vector dv = prob.param().nullbasis().transpose() * svec(SymMatrix(vfull));
  return std::make_pair(std::move(dy), std::move(dv));
}

}  // namespace detail

struct DirectionInfo {
  Direction d;
  bool dense_fallback = false;
};

inline DirectionInfo gn_direction_info(const PathProblem& prob, const PathIterate& it,
                                       const ResidualTriple& r,
                                       DirectionSolver method = DirectionSolver::Auto) {
  const Index m = prob.m();
  Vector dy, dv;
  bool dense = method == DirectionSolver::Dense;
  if (!dense) {
    auto sol = detail::structured_solve(prob, smat(it.x).mat(), smat(it.z).mat(),
                                        gn_rhs_matrix(it, r));
    if (sol) {
      dy = std::move(sol->first);
      dv = std::move(sol->second);
    } else if (method == DirectionSolver::Structured) {
      throw Error(ErrorKind::ConvergenceFailure, "structured direction is rank deficient");
    } else {
      dense = true;
    }
  }
  if (dense) {
    auto sys = assemble_projected_system(prob, it, r);
    Vector s = lstsq_min_norm(sys.M, sys.rhs);
    dy = s.head(m);
    dv = s.tail(s.size() - m);
  }
  DirectionInfo out;
  out.dense_fallback = dense && method != DirectionSolver::Dense;
  out.d.dz = prob.spect().map.rows().transpose() * dy + r.rd;
  out.d.dx = prob.param().nullbasis() * dv - r.rp;
  out.d.dy = std::move(dy);
  out.d.dv = std::move(dv);
  return out;
}

inline Direction gn_direction(const PathProblem& prob, const PathIterate& it,
                              DirectionSolver method = DirectionSolver::Auto) {
  return gn_direction_info(prob, it, residuals(prob, it), method).d;
}

/// Largest step_init·β^k keeping the block positive definite, capped at 1.
inline double max_step(const Matrix& base, const Matrix& dir, const SolverConfig& cfg) {
  double s = cfg.step_init;
  while (!chol_test(Matrix(base + s * dir))) {
    s *= cfg.backtrack_factor;
    if (s < cfg.min_step) throw Error(ErrorKind::StepCollapse, "step length fell below threshold");
  }
  return std::min(s, 1.0);
}

inline StepLengths step_lengths(const PathIterate& it, const Direction& d,
                                const SolverConfig& cfg = {}) {
  StepLengths st;
  st.primal = max_step(smat(it.x).mat(), smat(d.dx).mat(), cfg);
  st.dual = max_step(smat(it.z).mat(), smat(d.dz).mat(), cfg);
  return st;
}

inline PathIterate take_step(const PathProblem& prob, const PathIterate& it, const Direction& d,
                             const StepLengths& st) {
  PathIterate nx = it;
  if (st.min() == 1.0) {
    nx.v = it.v + d.dv;
    nx.y = it.y + d.dy;
    nx.x = prob.param().xhat(it.alpha) + prob.param().nullbasis() * nx.v;
    nx.z = prob.spect().map.rows().transpose() * nx.y;
  } else {
    nx.x = it.x + st.primal * d.dx;
    nx.v = it.v + st.primal * d.dv;
    nx.y = it.y + st.dual * d.dy;
    nx.z = it.z + st.dual * d.dz;
  }
  if (!chol_test(smat(nx.x)) || !chol_test(smat(nx.z))) {
    throw Error(ErrorKind::PositivityLost, "accepted iterate is not positive definite");
  }
  return nx;
}

inline double update_alpha(double alpha, const StepLengths& st, const SolverConfig& cfg = {}) {
  const double s = st.min();
  const auto& r = cfg.alpha_rules;
  if (s >= r.shrink_above) return cfg.sigma * alpha;
  if (s >= r.hold_above) return alpha;
  if (s >= r.grow_above) return r.grow * alpha;
  return r.jump * alpha;
}

namespace detail {

inline IterationRecord make_record(int iter, const PathIterate& it, const ResidualTriple& r,
                                   const StepLengths& st, bool fallback) {
  const SymMatrix x = smat(it.x), z = smat(it.z);
  IterationRecord rec;
  rec.iter = iter;
  rec.alpha = it.alpha;
  rec.norm_rd = r.rd.norm();
  rec.norm_rp = r.rp.norm();
  rec.norm_Rc = r.Rc.norm();
  rec.step_p = st.primal;
  rec.step_d = st.dual;
  rec.min_eig_X = min_eig(x);
  rec.min_eig_Z = min_eig(z);
  rec.mean_ZX = trace_inner(z, x) / static_cast<double>(x.dim());
  rec.dense_fallback = fallback;
  return rec;
}

}  // namespace detail

/**
 * Follows the path α ↓ 0 from the standard start until α ≤ tol,
 * ‖R_c‖_F ≤ n·tol and ‖r_p‖ ≤ tol hold after a step.
 */
inline SolveResult solve(const PathProblem& prob, const SolverConfig& cfg = {}) {
  cfg.validate();
  const double n = static_cast<double>(prob.n());
  PathIterate it = init_iterate(prob, cfg.require_certificate);
  SolveResult out;
  auto one_step = [&](int iter) {
    ResidualTriple r = residuals(prob, it);
    DirectionInfo di = gn_direction_info(prob, it, r, cfg.direction);
    StepLengths st = step_lengths(it, di.d, cfg);
    it = take_step(prob, it, di.d, st);
    ResidualTriple after = residuals(prob, it);
    out.history.push_back(detail::make_record(iter, it, after, st, di.dense_fallback));
    if (it.x.norm() > cfg.unbounded_norm) {
      throw Error(ErrorKind::UnboundedDetected, "primal iterate norm exceeded 1e8");
    }
    return std::make_pair(st, after);
  };

  for (int k = 1; k <= cfg.max_iter; ++k) {
    auto [st, r] = one_step(k);
    const bool done = it.alpha <= cfg.tol && r.Rc.norm() <= n * cfg.tol && r.rp.norm() <= cfg.tol;
    if (done) {
      for (int j = 1; j <= cfg.polish_iterations; ++j) one_step(k + j);
      out.X = smat(it.x);
      out.Z = smat(it.z);
      out.y = it.y;
      out.alpha = it.alpha;
      out.iterations = k;
      return out;
    }
    it.alpha = update_alpha(it.alpha, st, cfg);
  }
  throw Error(ErrorKind::MaxIterations,
              "no convergence within " + std::to_string(cfg.max_iter) + " iterations");
}

inline SolveResult solve(const Spectrahedron& p, const SolverConfig& cfg = {}) {
  return solve(PathProblem(p), cfg);
}

// ---------------------------------------------------------------------------
// Damped Newton reference for the unscaled optimality conditions.

struct MaxDetPoint {
  SymMatrix X;
  SymMatrix Xinv;
  Vector nu;  ///< Xinv == 𝒜*(nu)
  int iterations = 0;
};

/**
 * Maximizes log det X subject to 𝒜(X) = rhs by infeasible-start Newton on
 * the stationarity system X⁻¹ = 𝒜*(ν), 𝒜(X) = rhs. Backtracking keeps
 * X ≻ 0 and enforces sufficient decrease of the residual norm; a step below
 * 1e-8 raises OracleDivergence. Dense O(t³) per step: small problems only.
 */
inline MaxDetPoint max_det_newton(const ConstraintMap& map, const Vector& rhs,
                                  const SymMatrix& start, int max_iter = 200) {
  const Index n = map.n(), m = map.m(), t = map.t();
  if (start.dim() != n) throw Error(ErrorKind::DimensionMismatch, "start has wrong order");
  if (!chol_test(start)) throw Error(ErrorKind::InvalidArgument, "start must be positive definite");
  const Matrix& a = map.rows();
  Vector x = svec(start);
  Vector nu = Vector::Zero(m);

  auto inverse = [&](const Vector& xv) {
    Eigen::LLT<Matrix> llt(smat(xv).mat());
    return Matrix(llt.solve(Matrix::Identity(n, n)));
  };
  auto residual = [&](const Vector& xv, const Vector& nv, const Matrix& w) {
    Vector res(t + m);
    res.head(t) = -svec(SymMatrix(w)) + a.transpose() * nv;
    res.tail(m) = a * xv - rhs;
    return res;
  };

  Matrix w = inverse(x);
  Vector res = residual(x, nu, w);
  const double scale = 1.0 + rhs.norm();
  for (int iter = 0; iter < max_iter; ++iter) {
    const double pres = res.tail(m).norm();
    const double dres = res.head(t).norm();
    if (pres <= 1e-13 * scale && dres <= 1e-12 * (1.0 + w.norm())) {
      return {smat(x), SymMatrix(w), nu, iter};
    }
    // Hessian of −log det in svec coordinates: D ↦ X⁻¹ D X⁻¹.
    Matrix kkt = Matrix::Zero(t + m, t + m);
    for (Index j = 0; j < n; ++j) {
      for (Index i = 0; i <= j; ++i) {
        const Index col = svec_index(i, j);
        Matrix e = (i == j) ? Matrix(w.col(i) * w.col(i).transpose())
                            : Matrix((w.col(i) * w.col(j).transpose() +
                                      w.col(j) * w.col(i).transpose()) /
                                     std::numbers::sqrt2);
        kkt.block(0, col, t, 1) = svec(SymMatrix(e));
      }
    }
    kkt.block(0, t, t, m) = a.transpose();
    kkt.block(t, 0, m, t) = a;
    Vector step = kkt.partialPivLu().solve(-res);
    const Vector dx = step.head(t);
    const Vector dn = step.tail(m);
    const double r0 = res.norm();
    double s = 1.0;
    while (true) {
      Vector xt = x + s * dx;
      if (chol_test(smat(xt))) {
        Matrix wt = inverse(xt);
        Vector nt = nu + s * dn;
        Vector rt = residual(xt, nt, wt);
        if (rt.norm() <= (1.0 - 0.01 * s) * r0) {
          x = std::move(xt);
          nu = std::move(nt);
          w = std::move(wt);
          res = std::move(rt);
          break;
        }
      }
      s *= 0.5;
      if (s < 1e-8) {
        // Quadratic convergence can stall at round-off; accept if already tight.
        if (pres <= 1e-11 * scale && dres <= 1e-9 * (1.0 + w.norm())) {
          return {smat(x), SymMatrix(w), nu, iter};
        }
        throw Error(ErrorKind::OracleDivergence, "Newton damping fell below 1e-8");
      }
    }
  }
  throw Error(ErrorKind::OracleDivergence, "Newton did not converge");
}

struct PathPoint {
  SymMatrix X;
  Vector y;
  SymMatrix Z;
};

/**
 * Exact path point (X(α), y(α), Z(α)) with Z(α) = αX(α)⁻¹ = 𝒜*(y(α)).
 * Without a start, α < 1 is reached by warm-started solves at
 * 1, 0.2, 0.04, ...; a cold start from I slows down sharply as α shrinks.
 */
inline PathPoint path_point_oracle(const Spectrahedron& p, double alpha,
                                   std::optional<SymMatrix> start = std::nullopt) {
  if (!(alpha > 0.0)) throw Error(ErrorKind::InvalidArgument, "alpha must be positive");
  if (p.n() > 10) throw Error(ErrorKind::InvalidArgument, "oracle is limited to n <= 10");
  SymMatrix x0 = start.value_or(SymMatrix::identity(p.n()));
  if (!start) {
    for (double a = 1.0; a > alpha; a *= 0.2) x0 = max_det_newton(p.map, perturb_rhs(p, a), x0).X;
  }
  auto pt = max_det_newton(p.map, perturb_rhs(p, alpha), x0);
  return {pt.X, alpha * pt.nu, alpha * pt.Xinv};
}

}  // namespace frpath
