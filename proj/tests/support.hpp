#pragma once

// Random instance generators and brute-force oracles shared by the test suites.

#include "lpinfer/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace lpinfer::testing {

inline Vector normal_vector(std::mt19937_64& rng, Index n) {
  std::normal_distribution<double> z(0.0, 1.0);
  Vector v(n);
  for (Index i = 0; i < n; ++i) v[i] = z(rng);
  return v;
}

inline Matrix normal_matrix(std::mt19937_64& rng, Index r, Index c) {
  std::normal_distribution<double> z(0.0, 1.0);
  Matrix m(r, c);
  for (Index i = 0; i < r; ++i)
    for (Index j = 0; j < c; ++j) m(i, j) = z(rng);
  return m;
}

/// Bounded, feasible LP with d <= 5 and at most 8 constraints. Boundedness
/// comes from d+1 rows that positively span R^d; feasibility from a known
/// interior point x0.
struct PointedLp {
  LinearProgram lp;
  Vector x0;
};

inline PointedLp random_bounded_lp_with_point(std::mt19937_64& rng, Index max_d = 5, Index max_m = 8,
                                              bool allow_eq = true) {
  std::uniform_int_distribution<int> dd(1, static_cast<int>(max_d));
  const Index d = dd(rng);
  const Index base = d + 1;
  std::uniform_int_distribution<int> extra_d(0, static_cast<int>(max_m - base));
  const Index extra = extra_d(rng);
  Index me = 0;
  if (allow_eq && d >= 2 && extra > 0) {
    std::uniform_int_distribution<int> e(0, static_cast<int>(std::min<Index>(extra, d - 1)));
    me = e(rng);
  }
  const Index mi = base + extra - me;
  std::uniform_real_distribution<double> u(0.1, 2.0);
  const Vector x0 = normal_vector(rng, d);

  Matrix ai(mi, d);
  Matrix gen = normal_matrix(rng, d, d);
  Vector last = Vector::Zero(d);
  for (Index i = 0; i < d; ++i) {
    ai.row(i) = gen.row(i);
    last -= u(rng) * gen.row(i).transpose();
  }
  ai.row(d) = last.transpose();
  for (Index i = base; i < mi; ++i) ai.row(i) = normal_vector(rng, d).transpose();
  Vector bi = ai * x0;
  for (Index i = 0; i < mi; ++i) bi[i] += u(rng);

  Matrix ae = normal_matrix(rng, me, d);
  Vector be = ae * x0;
  return {LinearProgram(normal_vector(rng, d), ae, be, ai, bi), x0};
}

inline LinearProgram random_bounded_lp(std::mt19937_64& rng, Index max_d = 5, Index max_m = 8,
                                       bool allow_eq = true) {
  return random_bounded_lp_with_point(rng, max_d, max_m, allow_eq).lp;
}

enum class RegularityKind { Generic, DuplicatedEquality, OpposingInequalities };

/// Feasible finite-value LP. Generic instances satisfy MFCQ almost surely; the
/// other two kinds break it by a duplicated equality row or by a pair
/// a'x <= b, -a'x <= -b pinning a hyperplane.
inline LinearProgram random_regularity_lp(std::mt19937_64& rng, RegularityKind kind) {
  auto [lp, x0] = random_bounded_lp_with_point(rng, 4, 7, kind == RegularityKind::Generic);
  const Index d = lp.dim();
  if (kind == RegularityKind::Generic) return lp;
  const Vector row = normal_vector(rng, d);
  const double rhs = row.dot(x0);
  Polytope p = lp.feasible_set();
  if (kind == RegularityKind::DuplicatedEquality) {
    p.add_equality(row, rhs);
    p.add_equality(row, rhs);
  } else {
    p.add_inequality(row, rhs);
    p.add_inequality(-row, -rhs);
  }
  return LinearProgram(lp.c, p);
}

/// Possibly unbounded nonempty polyhedron in R^d, d <= 4, with a feasible point.
inline Polytope random_polyhedron(std::mt19937_64& rng, Vector* feasible = nullptr) {
  std::uniform_int_distribution<int> dd(1, 4), mm(1, 6);
  const Index d = dd(rng);
  const Index mi = mm(rng);
  std::uniform_int_distribution<int> ee(0, static_cast<int>(d - 1));
  const Index me = ee(rng);
  std::uniform_real_distribution<double> u(0.0, 1.5);
  const Vector x0 = normal_vector(rng, d);
  Matrix ai = normal_matrix(rng, mi, d);
  if (mi >= 2 && u(rng) < 0.3) ai.row(1) = 2.0 * ai.row(0);
  Vector bi = ai * x0;
  for (Index i = 0; i < mi; ++i) bi[i] += u(rng) < 0.4 ? 0.0 : u(rng);
  Matrix ae = normal_matrix(rng, me, d);
  if (feasible) *feasible = x0;
  return Polytope(ae, ae * x0, ai, bi);
}

/// min c'x over the vertex set (bounded nonempty polytopes only).
inline double vertex_min(const LinearProgram& lp) {
  const auto verts = enumerate_vertices(lp.feasible_set());
  double best = std::numeric_limits<double>::infinity();
  for (const auto& v : verts) best = std::min(best, lp.c.dot(v));
  return best;
}

}  // namespace lpinfer::testing
