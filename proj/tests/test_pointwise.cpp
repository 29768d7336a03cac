#include "support.hpp"

#include "lpinfer/errors.hpp"
#include "lpinfer/pointwise.hpp"
#include "lpinfer/rng.hpp"
#include "lpinfer/stats.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace lpinfer;

namespace {

LinearProgram one_d() {
  Matrix ai(2, 1);
  ai << 1, -1;
  Vector bi(2);
  bi << 1, 1;
  return LinearProgram(Vector::Constant(1, -1.0), Matrix(0, 1), Vector(0), ai, bi);
}

// min -t1 - t2 over t1 <= 1, t2 <= 1, t1 + t2 <= 2, t >= 0: degenerate vertex,
// segment of dual solutions.
LinearProgram degenerate_box() {
  Matrix ai(5, 2);
  ai << 1, 0, 0, 1, 1, 1, -1, 0, 0, -1;
  Vector bi(5);
  bi << 1, 1, 2, 0, 0;
  return LinearProgram(-Vector::Ones(2), Matrix(0, 2), Vector(0), ai, bi);
}

LpPerturbation random_perturbation(std::mt19937_64& rng, const LinearProgram& lp) {
  return unpack_perturbation(lp, lpinfer::testing::normal_vector(rng, lp_slot_count(lp)));
}

// Vertex value of the inner maximum; outer minimum by an epigraph LP over the
// enumerated dual vertices, and by grid search when d <= 2.
double minmax_oracle(const Polytope& s, const Polytope& delta, const LpPerturbation& z, double* grid_value) {
  const auto verts = enumerate_vertices(delta);
  const Index d = z.c.size();
  Matrix za(z.a_eq.rows() + z.a_ineq.rows(), d);
  za << z.a_eq, z.a_ineq;
  Vector zb(za.rows());
  zb << z.b_eq, z.b_ineq;
  // min zc'theta + t  s.t.  t >= v'(zb - za theta) for every vertex v
  Polytope epi(Matrix(s.rows_eq(), d + 1), s.b_eq, Matrix(s.rows_ineq(), d + 1), s.b_ineq);
  epi.a_eq.setZero();
  epi.a_ineq.setZero();
  if (s.rows_eq() > 0) epi.a_eq.leftCols(d) = s.a_eq;
  if (s.rows_ineq() > 0) epi.a_ineq.leftCols(d) = s.a_ineq;
  for (const auto& v : verts) {
    Vector row(d + 1);
    row << -(za.transpose() * v), -1.0;
    epi.add_inequality(row, -v.dot(zb));
  }
  Vector c(d + 1);
  c << z.c, 1.0;
  const auto sol = solve(LinearProgram(c, epi));
  REQUIRE(sol.optimal());
  if (grid_value && d <= 2) {
    double best = std::numeric_limits<double>::infinity();
    const auto sv = enumerate_vertices(s);
    Vector lo = sv.front(), hi = sv.front();
    for (const auto& v : sv) {
      lo = lo.cwiseMin(v);
      hi = hi.cwiseMax(v);
    }
    const int steps = d == 1 ? 20000 : 400;
    for (int i = 0; i <= steps; ++i) {
      for (int j = 0; j <= (d == 2 ? steps : 0); ++j) {
        Vector th(d);
        th[0] = lo[0] + (hi[0] - lo[0]) * i / steps;
        if (d == 2) th[1] = lo[1] + (hi[1] - lo[1]) * j / steps;
        if (s.violation(th) > 1e-12) continue;
        double inner = -std::numeric_limits<double>::infinity();
        for (const auto& v : verts) inner = std::max(inner, v.dot(zb - za * th));
        best = std::min(best, z.c.dot(th) + inner);
      }
    }
    *grid_value = best;
  }
  return sol.value;
}

}  // namespace

TEST_CASE("lp slot layout round-trips") {
  std::mt19937_64 rng(1);
  const auto lp = lpinfer::testing::random_bounded_lp(rng);
  const Vector v = lp_to_vector(lp);
  CHECK(v.size() == lp_slot_count(lp));
  CHECK(lp_slot_names(lp).size() == static_cast<std::size_t>(v.size()));
  CHECK(lp_to_vector(lp_from_vector(lp, v)) == v);
  CHECK(lp_slot_names(one_d()) == std::vector<std::string>{"c_0", "AI_0_0", "AI_1_0", "bI_0", "bI_1"});
}

TEST_CASE("minmax_statistic") {
  const auto lp = one_d();
  const auto sol = solve(lp);
  SUBCASE("zero perturbation") {
    CHECK(minmax_statistic(near_optimal_primal(lp, sol, 0.3), near_optimal_dual(lp, sol, 0.3),
                           LpPerturbation::zero(lp)) == 0.0);
  }
  SUBCASE("singleton sets") {
    std::mt19937_64 rng(2);
    const auto s = near_optimal_primal(lp, sol, 0.0);
    const auto d = near_optimal_dual(lp, sol, 0.0);
    for (int t = 0; t < 20; ++t) {
      const auto z = random_perturbation(rng, lp);
      // theta* = 1, lambda* = (-1, 0)
      const double expect = z.c[0] - (z.b_ineq[0] - z.a_ineq(0, 0));
      CHECK(minmax_statistic(s, d, z) == doctest::Approx(expect).epsilon(1e-10));
    }
  }
  SUBCASE("vertex and grid oracles on random instances") {
    std::mt19937_64 rng(3);
    int checked = 0;
    for (int t = 0; t < 80; ++t) {
      const auto r = lpinfer::testing::random_bounded_lp(rng, 2, 5, true);
      const auto rs = solve(r);
      REQUIRE(rs.optimal());
      const auto s = near_optimal_primal(r, rs, 0.4);
      const auto d = near_optimal_dual(r, rs, 0.4);
      bool bounded_dual = true;
      for (Index k = 0; k < d.dim() && bounded_dual; ++k)
        for (double sg : {1.0, -1.0})
          if (!support_max(d, sg * Vector::Unit(d.dim(), k)).finite()) bounded_dual = false;
      if (!bounded_dual || enumerate_vertices(d).size() + enumerate_vertices(s).size() > 12) continue;
      const auto z = random_perturbation(rng, r);
      double grid = 0.0;
      const double oracle = minmax_oracle(s, d, z, &grid);
      const double v = minmax_statistic(s, d, z);
      CHECK(v == doctest::Approx(oracle).epsilon(1e-8));
      CHECK(v <= grid + 1e-9);
      CHECK(grid - v < 0.05);
      ++checked;
    }
    CHECK(checked >= 30);
  }
  SUBCASE("unbounded dual face is reported") {
    Matrix ae(2, 1);
    ae << 1, 1;
    Vector be(2);
    be << 0.5, 0.5;
    const LinearProgram bad(Vector::Constant(1, -1.0), ae, be, one_d().a_ineq, one_d().b_ineq);
    const auto bs = solve(bad);
    LpPerturbation z = LpPerturbation::zero(bad);
    z.b_eq << 1.0, -1.0;
    CHECK_THROWS_AS(minmax_statistic(near_optimal_primal(bad, bs, 0.1), near_optimal_dual(bad, bs, 0.1), z),
                    UnboundedInner);
  }
}

TEST_CASE("pointwise_distribution") {
  const auto lp = one_d();
  SUBCASE("zero-noise draws") {
    BootstrapDraws zero;
    zero.full_dim = lp_slot_count(lp);
    zero.slots = {3, 4};
    zero.draws = Matrix::Zero(50, 2);
    const auto res = pointwise_distribution(lp, 100, zero, 2.0);
    CHECK(res.v_hat == doctest::Approx(-1.0));
    for (double v : res.draws) CHECK(v == 0.0);
    const auto ci = ci_for_value(res, 0.05);
    CHECK(ci.first == res.v_hat);
    CHECK(ci.second == res.v_hat);
  }
  SUBCASE("symmetric draws give a symmetric interval") {
    BootstrapDraws d;
    d.full_dim = lp_slot_count(lp);
    d.slots = {3};
    d.draws.resize(200, 1);
    for (Index r = 0; r < 100; ++r) {
      d.draws(r, 0) = 0.01 * (r + 1);
      d.draws(199 - r, 0) = -0.01 * (r + 1);
    }
    const auto res = pointwise_distribution(lp, 400, d, 2.0);
    const auto ci = ci_for_value(res, 0.1);
    CHECK((ci.second - res.v_hat) == doctest::Approx(res.v_hat - ci.first).epsilon(0.02));
    CHECK(ci.first <= ci.second);
  }
  SUBCASE("MFCQ failure is refused") {
    Matrix ae(2, 1);
    ae << 1, 1;
    Vector be(2);
    be << 0.5, 0.5;
    const LinearProgram bad(Vector::Constant(1, -1.0), ae, be, lp.a_ineq, lp.b_ineq);
    BootstrapDraws d;
    d.full_dim = lp_slot_count(bad);
    d.draws = Matrix::Zero(5, 0);
    CHECK_THROWS_AS(pointwise_distribution(bad, 100, d, 1.0), RegularityFailure);
  }
  SUBCASE("enlarging kappa enlarges both sets") {
    std::mt19937_64 rng(6);
    for (int t = 0; t < 20; ++t) {
      const auto r = lpinfer::testing::random_bounded_lp(rng);
      const auto rs = solve(r);
      const auto s1 = near_optimal_primal(r, rs, 0.1), s2 = near_optimal_primal(r, rs, 0.5);
      const auto d1 = near_optimal_dual(r, rs, 0.1), d2 = near_optimal_dual(r, rs, 0.5);
      for (int k = 0; k < 5; ++k) {
        const Vector u = lpinfer::testing::normal_vector(rng, r.dim());
        CHECK(support_max(s1, u).as_double() <= support_max(s2, u).as_double() + 1e-9);
        const Vector w = lpinfer::testing::normal_vector(rng, d1.dim());
        CHECK(support_max(d1, w).as_double() <= support_max(d2, w).as_double() + 1e-9);
      }
    }
  }
  SUBCASE("scale equivariance") {
    std::mt19937_64 rng(7);
    const auto r = degenerate_box();
    BootstrapDraws d;
    d.full_dim = lp_slot_count(r);
    for (Index k = 0; k < d.full_dim; ++k) d.slots.push_back(k);
    d.draws = lpinfer::testing::normal_matrix(rng, 30, d.full_dim);
    const auto base = pointwise_distribution(r, 100, d, 2.0, Execution::Serial);
    BootstrapDraws ds = d;
    ds.draws *= 3.0;
    const auto sc = pointwise_distribution(r, 100, ds, 2.0, Execution::Parallel);
    for (std::size_t i = 0; i < base.draws.size(); ++i)
      CHECK(sc.draws[i] == doctest::Approx(3.0 * base.draws[i]).epsilon(1e-9));

    // (c, b, zeta_c, zeta_b) scaled by s with zeta_A = 0: theta* and lambda* both
    // scale by s, so draws scale by s^2 once the slack scales by s^2 as well.
    BootstrapDraws cb = d;
    for (Index k = r.dim(); k < r.dim() + r.rows_ineq() * r.dim(); ++k) cb.draws.col(k).setZero();
    const auto b1 = pointwise_distribution(r, 100, cb, 0.5, Execution::Serial);
    LinearProgram scaled = r;
    scaled.c *= 3.0;
    scaled.b_ineq *= 3.0;
    BootstrapDraws cbs = cb;
    cbs.draws *= 3.0;
    const auto b2 = pointwise_distribution(scaled, 100, cbs, 4.5, Execution::Serial);
    for (std::size_t i = 0; i < b1.draws.size(); ++i)
      CHECK(b2.draws[i] == doctest::Approx(9.0 * b1.draws[i]).epsilon(1e-9));
  }
  SUBCASE("degenerate box: bootstrap law matches the limit at N = 1e4") {
    const auto r = degenerate_box();
    const Index n = 10000;
    Matrix obs(n, 3);
    Stream s(11, 0);
    for (Index i = 0; i < n; ++i) {
      obs(i, 0) = 1.0 + s.normal();
      obs(i, 1) = 1.0 + s.normal();
      obs(i, 2) = 2.0 + s.normal();
    }
    // slots of bI_0, bI_1, bI_2
    const Index first_b = r.dim() + r.rows_ineq() * r.dim();
    const std::vector<Index> slots = {first_b, first_b + 1, first_b + 2};
    LinearProgram est = r;
    est.b_ineq.head(3) = obs.colwise().mean().transpose();
    const auto draws = bootstrap_lp_columns(obs, slots, r, 2000, 12);
    const auto res = pointwise_distribution(est, n, draws, std::sqrt(std::log(double(n))));
    // limit: max over the dual face of lambda'zeta_b = max(-z1 - z2, -z3)
    std::vector<double> lim(20000);
    Stream t(13, 0);
    for (auto& v : lim) {
      const double z1 = t.normal(), z2 = t.normal(), z3 = t.normal();
      v = std::max(-z1 - z2, -z3);
    }
    CHECK(kolmogorov_distance(res.draws, lim) < 0.05);
    const auto ci = ci_for_value(res, 0.05);
    CHECK(ci.first < -2.0 + 0.05);
    CHECK(ci.second > -2.0 - 0.05);
  }
}
