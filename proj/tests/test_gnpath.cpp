#include <gtest/gtest.h>

#include <random>

#include "frpath/facered.hpp"
#include "frpath/gnpath.hpp"
#include "support.hpp"

using namespace frpath;
namespace ft = frpath::testing;

namespace {

ErrorKind kind_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorKind::ParseError;
}

/// Iterate sitting exactly on the path point of p at alpha.
PathIterate exact_point(const PathProblem& prob, double alpha) {
  auto pt = path_point_oracle(prob.spect(), alpha);
  PathIterate it;
  it.alpha = alpha;
  it.x = svec(pt.X);
  it.z = svec(pt.Z);
  it.y = pt.y;
  it.v = prob.param().nullbasis().transpose() * it.x;
  return it;
}

/// Strictly feasible but off-path iterate with all residuals nonzero.
PathIterate random_iterate(const PathProblem& prob, std::mt19937_64& rng) {
  PathIterate it;
  it.alpha = 0.5;
  it.x = svec(ft::random_pd(prob.n(), rng));
  it.z = svec(ft::random_pd(prob.n(), rng));
  it.y = ft::random_vec(prob.m(), rng);
  it.v = ft::random_vec(prob.t() - prob.m(), rng);
  return it;
}

PathProblem random_problem(Index n, Index m, std::mt19937_64& rng) {
  std::vector<SymMatrix> s{SymMatrix::identity(n)};
  for (Index i = 1; i < m; ++i) s.push_back(ft::random_sym(n, rng));
  SymMatrix x0 = ft::random_pd(n, rng);
  ConstraintMap a = ConstraintMap::from_matrices(n, s);
  Vector b = a.apply(x0);
  return PathProblem(Spectrahedron(std::move(a), std::move(b)));
}

double merit(const PathProblem& prob, const PathIterate& it) {
  auto r = residuals(prob, it);
  return r.rd.squaredNorm() + r.rp.squaredNorm() + r.Rc.squaredNorm();
}

PathIterate advance(const PathIterate& it, const Direction& d, double h) {
  PathIterate o = it;
  o.x += h * d.dx;
  o.v += h * d.dv;
  o.y += h * d.dy;
  o.z += h * d.dz;
  return o;
}

}  // namespace

TEST(SolverConfig, Validation) {
  SolverConfig c;
  EXPECT_NO_THROW(c.validate());
  c.sigma = 1.0;
  EXPECT_EQ(kind_of([&] { c.validate(); }), ErrorKind::InvalidArgument);
  c = {};
  c.step_init = 1.0;
  EXPECT_EQ(kind_of([&] { c.validate(); }), ErrorKind::InvalidArgument);
  c = {};
  c.backtrack_factor = 1.0;
  EXPECT_EQ(kind_of([&] { c.validate(); }), ErrorKind::InvalidArgument);
}

TEST(InitIterate, DiagonalFixing) {
  PathProblem prob(ft::diagonal_fixing(4));
  auto it = init_iterate(prob);
  EXPECT_LT((smat(it.z).mat() - Matrix::Identity(4, 4)).norm(), 1e-12);
  EXPECT_LT((smat(it.x).mat() - Matrix::Identity(4, 4)).norm(), 0.0 + 1e-15);
  EXPECT_NEAR(it.alpha, 2.0, 1e-12);
}

TEST(InitIterate, ThreeCycleUsesProjectionWitness) {
  PathProblem prob(ft::three_cycle());
  auto it = init_iterate(prob);
  auto cert = boundedness_certificate(prob.spect());
  EXPECT_LT((smat(it.z).mat() - cert.projection.mat()).norm(), 1e-14);
  EXPECT_NEAR(it.alpha, 2.0 * cert.projection.trace() / 3.0, 1e-14);
  EXPECT_LT((prob.spect().map.adjoint(it.y) - smat(it.z)).frob_norm(), 1e-10);
}

TEST(InitIterate, RequireCertificate) {
  Spectrahedron p(ConstraintMap::from_matrices(2, {ft::entry_selector(2, 0, 1)}), Vector::Ones(1));
  PathProblem prob(p);
  EXPECT_EQ(kind_of([&] { init_iterate(prob, true); }), ErrorKind::UnboundedProblem);
  auto it = init_iterate(prob, false);
  EXPECT_LT((smat(it.z).mat() - Matrix::Identity(2, 2)).norm(), 1e-15);
}

TEST(Residuals, VanishAtClosedFormPathPoint) {
  PathProblem prob(ft::three_cycle());
  const double alpha = 1.0;
  const SymMatrix x(ft::three_cycle_x(alpha));
  const SymMatrix z(Matrix(alpha * x.mat().inverse()));
  PathIterate it;
  it.alpha = alpha;
  it.x = svec(x);
  it.z = svec(z);
  it.y = prob.param().multipliers(it.z);
  it.v = prob.param().nullbasis().transpose() * it.x;
  auto r = residuals(prob, it);
  EXPECT_LT(r.rd.norm(), 1e-10);
  EXPECT_LT(r.rp.norm(), 1e-10);
  EXPECT_LT(r.Rc.norm(), 1e-10);
}

TEST(Residuals, IdentityPairAtUnitAlpha) {
  PathProblem prob(ft::diagonal_fixing(3));
  PathIterate it;
  it.alpha = 1.0;
  it.x = svec(SymMatrix::identity(3));
  it.z = svec(SymMatrix::identity(3));
  it.y = Vector::Ones(3);
  it.v = prob.param().nullbasis().transpose() * it.x;
  auto r = residuals(prob, it);
  EXPECT_EQ(r.Rc.norm(), 0.0);
  EXPECT_LT(r.rd.norm(), 1e-15);
  // b(1) = 2·diag, X = I is off by I.
  EXPECT_NEAR(r.rp.norm(), std::sqrt(3.0), 1e-14);
}

TEST(ProjectedSystem, ShapeAndZeroResidualRhs) {
  std::mt19937_64 rng(31);
  PathProblem prob = random_problem(4, 5, rng);
  PathIterate it = random_iterate(prob, rng);
  // Make the linear residuals vanish.
  it.x = prob.param().xhat(it.alpha) + prob.param().nullbasis() * it.v;
  it.z = prob.spect().map.rows().transpose() * it.y;
  auto r = residuals(prob, it);
  auto sys = assemble_projected_system(prob, it, r);
  EXPECT_EQ(sys.M.rows(), 16);
  EXPECT_EQ(sys.M.cols(), tri(4));
  EXPECT_LT((sys.rhs - detail::vec_rows(-r.Rc)).norm(), 1e-12 * (1.0 + r.Rc.norm()));
}

TEST(ProjectedSystem, JacobianMatchesCentralDifferences) {
  std::mt19937_64 rng(32);
  const double h = 1e-6;
  for (int k = 0; k < 20; ++k) {
    PathProblem prob = random_problem(3 + k % 4, 3 + k % 3, rng);
    PathIterate it = random_iterate(prob, rng);
    auto sys = assemble_projected_system(prob, it);
    const Vector dy = ft::random_vec(prob.m(), rng);
    const Vector dv = ft::random_vec(prob.t() - prob.m(), rng);
    Vector s(prob.t());
    s << dy, dv;
    auto bilinear = [&](double t) {
      Matrix z = smat(Vector(it.z + t * prob.spect().map.rows().transpose() * dy)).mat();
      Matrix x = smat(Vector(it.x + t * prob.param().nullbasis() * dv)).mat();
      return detail::vec_rows(z * x);
    };
    const Vector fd = (bilinear(h) - bilinear(-h)) / (2 * h);
    const Vector jv = sys.M * s;
    EXPECT_LT((jv - fd).norm(), 1e-5 * jv.norm());
  }
}

TEST(Direction, VanishesAtExactPathPoint) {
  PathProblem prob(ft::three_cycle());
  for (double a : {1.0, 0.1}) {
    auto it = exact_point(prob, a);
    for (auto method : {DirectionSolver::Auto, DirectionSolver::Dense}) {
      Direction d = gn_direction(prob, it, method);
      EXPECT_LT(d.dx.norm() + d.dv.norm() + d.dy.norm() + d.dz.norm(), 1e-9) << a;
    }
  }
}

TEST(Direction, StructuredMatchesDense) {
  std::mt19937_64 rng(33);
  for (int k = 0; k < 20; ++k) {
    const Index n = 3 + k % 5;
    PathProblem prob = random_problem(n, std::min<Index>(2 + k % 6, tri(n) - 1), rng);
    PathIterate it = random_iterate(prob, rng);
    auto r = residuals(prob, it);
    auto s = gn_direction_info(prob, it, r, DirectionSolver::Structured);
    auto d = gn_direction_info(prob, it, r, DirectionSolver::Dense);
    EXPECT_FALSE(s.dense_fallback);
    const double scale = 1.0 + d.d.dy.norm() + d.d.dv.norm();
    EXPECT_LT((s.d.dy - d.d.dy).norm(), 1e-8 * scale);
    EXPECT_LT((s.d.dv - d.d.dv).norm(), 1e-8 * scale);
  }
}

TEST(Direction, DescentForMerit) {
  std::mt19937_64 rng(34);
  for (int k = 0; k < 20; ++k) {
    PathProblem prob = random_problem(3 + k % 4, 3 + k % 4, rng);
    PathIterate it = random_iterate(prob, rng);
    Direction d = gn_direction(prob, it);
    const double h = 1e-7;
    const double slope = (merit(prob, advance(it, d, h)) - merit(prob, advance(it, d, -h))) / (2 * h);
    EXPECT_LT(slope, 0.0);
  }
}

TEST(Direction, DualConsistency) {
  std::mt19937_64 rng(35);
  PathProblem prob = random_problem(5, 6, rng);
  PathIterate it = random_iterate(prob, rng);
  auto r = residuals(prob, it);
  Direction d = gn_direction_info(prob, it, r).d;
  const SymMatrix lhs = smat(d.dz);
  const SymMatrix rhs = prob.spect().map.adjoint(d.dy) + smat(r.rd);
  EXPECT_LT((lhs - rhs).frob_norm(), 1e-14 * (1.0 + lhs.frob_norm()));
  EXPECT_LT((d.dx - (prob.param().nullbasis() * d.dv - r.rp)).norm(), 1e-14 * (1.0 + d.dx.norm()));
}

TEST(StepLengths, Examples) {
  PathIterate it;
  it.x = svec(SymMatrix::identity(3));
  it.z = svec(SymMatrix::identity(3));
  Direction d;
  d.dx = Vector::Zero(6);
  d.dz = Vector::Zero(6);
  auto st = step_lengths(it, d);
  EXPECT_EQ(st.primal, 1.0);
  EXPECT_EQ(st.dual, 1.0);

  d.dx = svec(SymMatrix::identity(3) * -2.0);
  st = step_lengths(it, d);
  EXPECT_LT(st.primal, 0.5);
  // The first accepted value of the 1.1·0.8^k ladder below 0.5.
  double s = 1.1;
  while (s >= 0.5) s *= 0.8;
  EXPECT_DOUBLE_EQ(st.primal, s);
  EXPECT_EQ(st.dual, 1.0);

  d.dx = svec(SymMatrix::identity(3));
  EXPECT_EQ(step_lengths(it, d).primal, 1.0);
}

TEST(StepLengths, Collapse) {
  PathIterate it;
  it.x = svec(SymMatrix::identity(2));
  it.z = svec(SymMatrix::identity(2));
  Direction d;
  d.dx = svec(SymMatrix::identity(2) * -1e20);
  d.dz = Vector::Zero(3);
  EXPECT_EQ(kind_of([&] { step_lengths(it, d); }), ErrorKind::StepCollapse);
}

TEST(TakeStep, FullStepRestoresLinearFeasibility) {
  std::mt19937_64 rng(36);
  PathProblem prob(ft::three_cycle());
  // Small perturbation of a path point: both linear residuals nonzero, and
  // the full step stays inside the cone.
  PathIterate it = exact_point(prob, 1.0);
  it.x += 1e-3 * ft::random_vec(prob.t(), rng);
  it.z += 1e-3 * ft::random_vec(prob.t(), rng);
  ASSERT_GT(residuals(prob, it).rp.norm(), 1e-5);
  ASSERT_GT(residuals(prob, it).rd.norm(), 1e-5);
  Direction d = gn_direction(prob, it);
  PathIterate nx = take_step(prob, it, d, StepLengths{1.0, 1.0});
  auto r = residuals(prob, nx);
  EXPECT_LT(r.rp.norm(), 1e-13 * (1.0 + nx.x.norm()));
  EXPECT_LT(r.rd.norm(), 1e-13 * (1.0 + nx.z.norm()));
}

TEST(TakeStep, ZeroDirectionAndPartialStep) {
  std::mt19937_64 rng(37);
  PathProblem prob = random_problem(4, 5, rng);
  PathIterate it = random_iterate(prob, rng);
  Direction zero{Vector::Zero(prob.t()), Vector::Zero(prob.t() - prob.m()), Vector::Zero(prob.m()),
                 Vector::Zero(prob.t())};
  PathIterate same = take_step(prob, it, zero, {0.5, 0.5});
  EXPECT_EQ(same.x, it.x);
  EXPECT_EQ(same.z, it.z);
  EXPECT_EQ(same.y, it.y);
  EXPECT_EQ(same.v, it.v);

  Direction d = gn_direction(prob, it);
  auto st = step_lengths(it, d);
  if (st.min() < 1.0) {
    PathIterate nx = take_step(prob, it, d, st);
    EXPECT_TRUE(chol_test(smat(nx.x)));
    EXPECT_TRUE(chol_test(smat(nx.z)));
  }
}

TEST(UpdateAlpha, Bands) {
  EXPECT_DOUBLE_EQ(update_alpha(1.0, {1.0, 1.0}), 0.6);
  EXPECT_DOUBLE_EQ(update_alpha(1.0, {0.5, 1.0}), 1.0);
  EXPECT_DOUBLE_EQ(update_alpha(1.0, {1.0, 0.2}), 1.2);
  EXPECT_DOUBLE_EQ(update_alpha(1.0, {0.05, 0.9}), 2.0);
  SolverConfig c;
  c.sigma = 0.3;
  EXPECT_DOUBLE_EQ(update_alpha(2.0, {0.85, 0.9}, c), 0.6);
}

TEST(Solve, ThreeCycleBoundedLimit) {
  SolverConfig cfg;
  cfg.tol = 1e-9;
  auto res = solve(ft::three_cycle(), cfg);
  EXPECT_LT((res.X.mat() - Matrix::Ones(3, 3)).norm(), 1e-6);
  EXPECT_LT((res.Z.mat() - ft::three_cycle_zbar()).norm(), 1e-6);
  const auto p = ft::three_cycle();
  EXPECT_LT((p.map.adjoint(res.y) - res.Z).frob_norm(), 1e-10);
  EXPECT_LE(trace_inner(res.Z, res.X), 10 * 3 * cfg.tol);
  const Index rx = classify_spectrum(eig_sym(res.X).values).rank();
  const Index rz = classify_spectrum(eig_sym(res.Z).values).rank();
  EXPECT_EQ(rx, 1);
  EXPECT_EQ(rz, 2);
}

TEST(Solve, DenseAndAutoReachTheSameLimit) {
  SolverConfig a, d;
  a.tol = d.tol = 1e-9;
  d.direction = DirectionSolver::Dense;
  auto ra = solve(ft::three_cycle(), a);
  auto rd = solve(ft::three_cycle(), d);
  EXPECT_LT((ra.X.mat() - rd.X.mat()).norm(), 1e-7);
  EXPECT_LT((ra.Z.mat() - rd.Z.mat()).norm(), 1e-6);
}

TEST(Solve, DetourLimit) {
  auto res = solve(ft::detour_instance());
  EXPECT_NEAR(res.X(1, 1), 0.6, 1e-4);
  EXPECT_NEAR(res.X(0, 1), 0.0, 1e-6);
  EXPECT_LT(res.X(2, 2), 1e-6);
}

TEST(Solve, SlaterInstanceStaysInterior) {
  SolverConfig cfg;
  auto res = solve(ft::diagonal_fixing(5), cfg);
  EXPECT_GT(min_eig(res.X), 10 * cfg.tol);
  // Max-det oracle for the diagonal-fixing set is I.
  EXPECT_LT((res.X.mat() - Matrix::Identity(5, 5)).norm(), 1e-8);
}

TEST(Solve, MaxIterations) {
  SolverConfig cfg;
  cfg.max_iter = 1;
  EXPECT_EQ(kind_of([&] { solve(ft::three_cycle(), cfg); }), ErrorKind::MaxIterations);
}

TEST(Solve, PolishKeepsTheLimit) {
  SolverConfig cfg;
  cfg.tol = 1e-9;
  cfg.polish_iterations = 2;
  auto res = solve(ft::three_cycle(), cfg);
  EXPECT_EQ(static_cast<int>(res.history.size()), res.iterations + 2);
  EXPECT_LT((res.X.mat() - Matrix::Ones(3, 3)).norm(), 1e-6);
}

TEST(Solve, FullStepsKeepExactLinearFeasibility) {
  for (const auto& p : {ft::three_cycle(), ft::detour_instance(), ft::block_instance()}) {
    auto res = solve(p);
    int full = 0;
    for (const auto& h : res.history) {
      if (std::min(h.step_p, h.step_d) == 1.0) {
        ++full;
        EXPECT_LE(h.norm_rp, 1e-13) << h.iter;
        EXPECT_LE(h.norm_rd, 1e-13) << h.iter;
      }
    }
    EXPECT_GT(full, 0);
  }
}

TEST(Solve, ComplementarityTracksAlphaAfterFreeze) {
  for (const auto& p : {ft::three_cycle(), ft::detour_instance(), ft::block_instance()}) {
    auto res = solve(p);
    const auto& h = res.history;
    for (std::size_t k = 0; k + 1 < h.size(); ++k) {
      if (h[k + 1].alpha != h[k].alpha) continue;
      bool tracked = false;
      for (std::size_t j = k + 1; j < std::min(h.size(), k + 6); ++j) {
        if (std::abs(h[j].mean_ZX - h[j].alpha) < 0.1 * h[j].alpha) tracked = true;
      }
      EXPECT_TRUE(tracked) << "freeze at iteration " << h[k].iter;
    }
  }
}

TEST(Oracle, ThreeCycleClosedForm) {
  const auto p = ft::three_cycle();
  for (double a : {1.0, 0.3, 0.01}) {
    auto pt = path_point_oracle(p, a);
    EXPECT_LT((pt.X.mat() - ft::three_cycle_x(a)).norm(), 1e-9) << a;
    EXPECT_LT((pt.Z.mat() * pt.X.mat() - a * Matrix::Identity(3, 3)).norm(), 1e-9);
    EXPECT_LT((p.map.adjoint(pt.y) - pt.Z).frob_norm(), 1e-9);
  }
  Matrix x1(3, 3);
  x1 << 2, 1, 0.5, 1, 2, 1, 0.5, 1, 2;
  EXPECT_LT((path_point_oracle(p, 1.0).X.mat() - x1).norm(), 1e-9);
}

TEST(Oracle, DetourClosedForms) {
  const auto p = ft::detour_instance();
  for (double a : {1.0, 0.1, 0.01}) {
    auto pt = path_point_oracle(p, a);
    EXPECT_NEAR(pt.X(2, 2), ft::detour_x33(a), 1e-8) << a;
    EXPECT_NEAR(pt.X(1, 1), ft::detour_x22(a), 1e-8) << a;
  }
}

TEST(Oracle, UniqueFromRandomStarts) {
  std::mt19937_64 rng(38);
  const auto p = ft::detour_instance();
  for (int k = 0; k < 5; ++k) {
    auto a = path_point_oracle(p, 0.2, ft::random_pd(4, rng, 0.3));
    auto b = path_point_oracle(p, 0.2, ft::random_pd(4, rng, 2.0));
    EXPECT_LT((a.X - b.X).frob_norm(), 1e-9);
  }
}

TEST(Oracle, Guards) {
  EXPECT_EQ(kind_of([] { path_point_oracle(ft::three_cycle(), 0.0); }), ErrorKind::InvalidArgument);
  EXPECT_EQ(kind_of([] { path_point_oracle(ft::diagonal_fixing(11), 1.0); }), ErrorKind::InvalidArgument);
}

TEST(Oracle, LowerBlockScalesWithAlpha) {
  const auto p = ft::decoupled_block_instance();
  const Matrix q1 = path_point_oracle(p, 1.0).X.mat().bottomRightCorner(2, 2);
  Matrix q(2, 2);
  q << 0.75, 0, 0, 1.5;
  EXPECT_LT((q1 - q).norm(), 1e-9);
  for (double a : {0.5, 0.1, 0.01}) {
    const Matrix low = path_point_oracle(p, a).X.mat().bottomRightCorner(2, 2);
    EXPECT_LT((low - a * q1).norm(), 1e-8) << a;
  }
}

TEST(Solve, LimitIsTheAnalyticCenterOfTheFace) {
  // Face-restricted set: [[2, x], [x, 1]] with x free; its max-det point is
  // x = 0 by an independent one-variable argument, so the center is diag(2, 1).
  Matrix center = Matrix::Zero(4, 4);
  center(0, 0) = 2.0;
  center(1, 1) = 1.0;
  for (const auto& p : {ft::block_instance(), ft::decoupled_block_instance()}) {
    auto res = solve(p);
    EXPECT_LT((res.X.mat().topLeftCorner(2, 2) - center.topLeftCorner(2, 2)).norm(), 1e-6);
    EXPECT_LT(res.X.mat().bottomRightCorner(2, 2).norm(), 1e-6);
  }
}

TEST(Solve, UnboundedSetIsDetected) {
  // Only X₁₁ is fixed, so X₂₂ is free to grow without bound.
  Spectrahedron p(ConstraintMap::from_matrices(2, {ft::entry_selector(2, 0, 0)}), Vector::Ones(1));
  const ErrorKind k = kind_of([&] { solve(p); });
  EXPECT_TRUE(k == ErrorKind::UnboundedDetected || k == ErrorKind::MaxIterations) << to_string(k);
}
