#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "frpath/spectra.hpp"

namespace frpath::testing {

inline Matrix gaussian(Index r, Index c, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  Matrix m(r, c);
  for (Index j = 0; j < c; ++j)
    for (Index i = 0; i < r; ++i) m(i, j) = nd(rng);
  return m;
}

inline SymMatrix random_sym(Index n, std::mt19937_64& rng) {
  return SymMatrix::symmetrize(gaussian(n, n, rng));
}

/// GGᵀ/n + shift·I.
inline SymMatrix random_pd(Index n, std::mt19937_64& rng, double shift = 0.5) {
  Matrix g = gaussian(n, n, rng);
  return SymMatrix(Matrix(g * g.transpose() / static_cast<double>(n) + shift * Matrix::Identity(n, n)));
}

inline Vector random_vec(Index n, std::mt19937_64& rng) { return gaussian(n, 1, rng).col(0); }

/// Entry (i, j) selector with ⟨S, X⟩ = X_ij.
inline SymMatrix entry_selector(Index n, Index i, Index j) {
  SymMatrix s = SymMatrix::zero(n);
  s.set(i, j, i == j ? 1.0 : 0.5);
  return s;
}

/// The 3×3 completion with X₁₃ free and every other entry fixed to 1.
inline Spectrahedron three_cycle() {
  std::vector<SymMatrix> s{entry_selector(3, 0, 0), entry_selector(3, 0, 1), entry_selector(3, 1, 1),
                           entry_selector(3, 1, 2), entry_selector(3, 2, 2)};
  return Spectrahedron(ConstraintMap::from_matrices(3, s), Vector::Ones(5));
}

inline Matrix three_cycle_zbar() {
  Matrix z(3, 3);
  z << 0.5, -0.5, 0.0, -0.5, 1.0, -0.5, 0.0, -0.5, 0.5;
  return z;
}

/// Closed-form path point of the 3×3 completion.
inline Matrix three_cycle_x(double alpha) {
  Matrix x(3, 3);
  x << 1 + alpha, 1, 1 / (1 + alpha), 1, 1 + alpha, 1, 1 / (1 + alpha), 1, 1 + alpha;
  return x;
}

/// Four-by-four instance whose path limit has x₂₂ = 0.6 although the
/// analytic center has x₂₂ = 0.5.
inline Spectrahedron detour_instance() {
  auto mk = [](std::initializer_list<std::pair<int, int>> ones) {
    SymMatrix m = SymMatrix::zero(4);
    for (auto [i, j] : ones) m.set(i, j, 1.0);
    return m;
  };
  std::vector<SymMatrix> s{mk({{0, 0}, {1, 1}}), mk({{1, 3}, {2, 2}}), mk({{1, 2}, {3, 3}}), mk({{2, 3}}),
                           mk({{3, 3}})};
  Vector b(5);
  b << 1, 0, 0, 0, 0;
  return Spectrahedron(ConstraintMap::from_matrices(4, s), b);
}

inline double detour_x33(double a) { return (3 * a + 2 * std::sqrt(a) * std::sqrt(11 * a + 5)) / 5; }

inline double detour_x22(double a) {
  const double x33 = detour_x33(a);
  return (a - x33) * (a - x33) / (8 * a) + a + 0.5;
}

/// Diagonal fixed to 1, nothing else: Slater holds, the identity is optimal.
inline Spectrahedron diagonal_fixing(Index n) {
  std::vector<SymMatrix> s;
  for (Index i = 0; i < n; ++i) s.push_back(entry_selector(n, i, i));
  return Spectrahedron(ConstraintMap::from_matrices(n, s), Vector::Ones(n));
}

/// The spectrahedron (A₀ + span{A_i}) ∩ S₊ for a given null-space basis.
inline Spectrahedron from_null_space(const SymMatrix& a0, const std::vector<SymMatrix>& dirs) {
  const Index n = a0.dim();
  Matrix d(static_cast<Index>(dirs.size()), tri(n));
  for (std::size_t k = 0; k < dirs.size(); ++k) d.row(static_cast<Index>(k)) = svec(dirs[k]).transpose();
  Matrix rows = nullspace_basis(d).transpose();
  ConstraintMap map(n, rows);
  Vector b = map.apply(a0);
  return Spectrahedron(std::move(map), std::move(b));
}

/**
 * Block instance with face [S₊², 0; 0, 0]: the lower-right blocks of the
 * null-space directions span only indefinite matrices, so the analytic
 * center of the face is diag(2, 1) ⊕ 0 and the lower block of the path is
 * αQ with Q = I₂.
 */
inline Spectrahedron block_instance() {
  SymMatrix a0 = SymMatrix::zero(4);
  a0.set(0, 0, 2.0);
  a0.set(1, 1, 1.0);
  a0.set(0, 1, 0.3);
  SymMatrix a1 = SymMatrix::zero(4);
  a1.set(0, 1, 1.0);
  SymMatrix a2 = SymMatrix::zero(4);
  a2.set(0, 0, 1.0);
  a2.set(0, 1, 0.5);
  a2.set(2, 2, 1.0);
  a2.set(3, 3, -1.0);
  SymMatrix a3 = SymMatrix::zero(4);
  a3.set(0, 2, 1.0);
  a3.set(2, 3, 1.0);
  return from_null_space(a0, {a1, a2, a3});
}

/// Same face, but the null-space directions touch either the upper or the
/// lower block, never both. The lower block of X(α) is then exactly αQ with
/// Q = diag(0.75, 1.5), the maximizer of log det(I + x·diag(1, −2)).
inline Spectrahedron decoupled_block_instance() {
  SymMatrix a0 = SymMatrix::zero(4);
  a0.set(0, 0, 2.0);
  a0.set(1, 1, 1.0);
  a0.set(0, 1, 0.3);
  SymMatrix a1 = SymMatrix::zero(4);
  a1.set(0, 1, 1.0);
  SymMatrix a2 = SymMatrix::zero(4);
  a2.set(2, 2, 1.0);
  a2.set(3, 3, -2.0);
  SymMatrix a3 = SymMatrix::zero(4);
  a3.set(2, 3, 1.0);
  return from_null_space(a0, {a1, a2, a3});
}

}  // namespace frpath::testing
