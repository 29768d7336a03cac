#include "lpinfer/regularity.hpp"

#include "lpinfer/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#ifdef LPINFER_HAVE_OPENMP
#include <omp.h>
#endif

namespace lpinfer {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// k-th r-subset of {0..m-1} in lexicographic order.
std::vector<Index> unrank_combination(std::size_t k, Index m, Index r) {
  std::vector<Index> out;
  out.reserve(static_cast<std::size_t>(r));
  Index next = 0;
  for (Index left = r; left > 0; --left) {
    while (true) {
      const std::size_t with_next = binomial(static_cast<std::size_t>(m - next - 1),
                                             static_cast<std::size_t>(left - 1));
      if (k < with_next) break;
      k -= with_next;
      ++next;
    }
    out.push_back(next++);
  }
  return out;
}

// lambda_min(A_F A_F') if A_F has full row rank r, +inf otherwise.
double subset_eigen(const Matrix& a, const std::vector<Index>& rows, Index rank, double tol_scale) {
  Matrix sub(rank, a.cols());
  for (Index i = 0; i < rank; ++i) sub.row(i) = a.row(rows[static_cast<std::size_t>(i)]);
  Eigen::ColPivHouseholderQR<Matrix> qr(sub.transpose());
  const Matrix& rr = qr.matrixQR();
  for (Index i = 0; i < rank; ++i) {
    if (std::abs(rr(i, i)) <= 1e-10 * tol_scale) return kInf;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(sub * sub.transpose(), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

struct LambdaSetup {
  Index rank;
  std::size_t subsets;
  double scale;
};

LambdaSetup lambda_setup(const Matrix& a, const LambdaOptions& opts) {
  const double scale = a.norm();
  if (a.size() == 0 || scale == 0.0) {
    throw std::invalid_argument("lambda_condition: matrix must be nonzero");
  }
  const Index r = numerical_rank(a);
  const std::size_t subsets =
      binomial(static_cast<std::size_t>(a.rows()), static_cast<std::size_t>(r));
  if (subsets > opts.max_subsets) {
    throw CapExceeded("lambda_condition: " + std::to_string(subsets) +
                      " row subsets exceed the cap of " + std::to_string(opts.max_subsets));
  }
  return {r, subsets, scale};
}

}  // namespace

Index numerical_rank(const Matrix& a) {
  if (a.size() == 0) return 0;
  const double scale = a.norm();
  if (scale == 0.0) return 0;
  Eigen::ColPivHouseholderQR<Matrix> qr(a);
  const Matrix& r = qr.matrixQR();
  const Index k = std::min(a.rows(), a.cols());
  Index rank = 0;
  for (Index i = 0; i < k; ++i) rank += std::abs(r(i, i)) > 1e-10 * scale;
  return rank;
}

double lambda_condition_serial(const Matrix& a, const LambdaOptions& opts) {
  const LambdaSetup s = lambda_setup(a, opts);
  double best = kInf;
  for (std::size_t k = 0; k < s.subsets; ++k) {
    best = std::min(best, subset_eigen(a, unrank_combination(k, a.rows(), s.rank), s.rank, s.scale));
  }
  return 1.0 / best;
}

double lambda_condition(const Matrix& a, const LambdaOptions& opts) {
  const LambdaSetup s = lambda_setup(a, opts);
  double best = kInf;
  const auto total = static_cast<long long>(s.subsets);
#ifdef LPINFER_HAVE_OPENMP
#pragma omp parallel for reduction(min : best) schedule(static)
#endif
  for (long long k = 0; k < total; ++k) {
    const double v = subset_eigen(a, unrank_combination(static_cast<std::size_t>(k), a.rows(), s.rank),
                                  s.rank, s.scale);
    best = std::min(best, v);
  }
  return 1.0 / best;
}

double hoffman_bound(const Polytope& poly, const Vector& x) {
  poly.validate();
  const Index me = poly.rows_eq();
  const Index mi = poly.rows_ineq();
  Matrix a(me + mi, x.size());
  if (me > 0) a.topRows(me) = poly.a_eq;
  if (mi > 0) a.bottomRows(mi) = poly.a_ineq;
  double resid = 0.0;
  if (me > 0) resid += (poly.a_eq * x - poly.b_eq).norm();
  if (mi > 0) resid += (poly.a_ineq * x - poly.b_ineq).cwiseMax(0.0).norm();
  if (resid == 0.0) return 0.0;
  return std::sqrt(lambda_condition(a)) * resid;
}

RegularityReport mfcq_check(const LinearProgram& lp) {
  lp.validate();
  RegularityReport rep;
  std::ostringstream notes;
  const Index d = lp.dim();
  const Index me = lp.rows_eq();
  const Index mi = lp.rows_ineq();

  rep.a_e_full_row_rank = me == 0 || numerical_rank(lp.a_eq) == me;
  if (!rep.a_e_full_row_rank) notes << "A_E is row-rank deficient; ";

  // max s  s.t. A_E t = b_E, A_I t + s 1 <= b_I, s <= 1
  Vector c = Vector::Zero(d + 1);
  c[d] = -1.0;
  Matrix ae = Matrix::Zero(me, d + 1);
  if (me > 0) ae.leftCols(d) = lp.a_eq;
  Matrix ai = Matrix::Zero(mi + 1, d + 1);
  Vector bi(mi + 1);
  if (mi > 0) {
    ai.topLeftCorner(mi, d) = lp.a_ineq;
    ai.block(0, d, mi, 1).setOnes();
    bi.head(mi) = lp.b_ineq;
  }
  ai(mi, d) = 1.0;
  bi[mi] = 1.0;
  const LPSolution aux = solve(LinearProgram(c, ae, lp.b_eq, ai, bi));
  if (!aux.optimal()) {
    rep.slater_margin = -kInf;
    notes << "equality system A_E theta = b_E is infeasible; ";
  } else {
    rep.slater_margin = -aux.value;
    if (rep.slater_margin > kSlaterMargin) {
      rep.slater_witness = aux.primal->head(d);
    } else {
      notes << "no strictly feasible point (margin " << rep.slater_margin << "); ";
    }
  }
  rep.mfcq_holds = rep.a_e_full_row_rank && rep.slater_witness.has_value();

  const LPSolution sol = solve(lp);
  if (sol.optimal()) {
    rep.dual_solution_set_bounded = dual_boundedness_check(lp);
  } else {
    notes << "primal " << to_string(sol.status) << ", dual optimal set not assessed; ";
  }
  std::string n = notes.str();
  if (n.size() >= 2) n.resize(n.size() - 2);
  rep.notes = n.empty() ? "MFCQ holds" : n;
  return rep;
}

bool dual_boundedness_check(const LinearProgram& lp) {
  const LPSolution sol = solve(lp);
  if (sol.status == LpStatus::Unbounded) throw InfiniteValue("dual_boundedness_check: primal unbounded");
  if (sol.status == LpStatus::Infeasible) throw EmptyPolyhedron("dual_boundedness_check: primal infeasible");
  // A positive slack keeps the face numerically nonempty; boundedness of the
  // slackened set is equivalent since every dual recession direction r has b'r <= 0.
  const double slack = 1e-7 * (1.0 + std::abs(sol.value));
  const Polytope face = near_optimal_dual(lp, sol, slack);
  const Index p = face.dim();
  for (Index k = 0; k < p; ++k) {
    for (double sign : {1.0, -1.0}) {
      Vector dir = Vector::Zero(p);
      dir[k] = sign;
      if (support_max(face, dir).kind == Support::Kind::PlusInfinity) return false;
    }
  }
  return true;
}

LinearProgram penalty_reformulate(const LinearProgram& lp, double m) {
  if (!(m > 0.0)) throw std::invalid_argument("penalty_reformulate: M must be positive");
  lp.validate();
  const Index d = lp.dim();
  const Index me = lp.rows_eq();
  const Index mi = lp.rows_ineq();
  // variable layout: theta (d) | x (mi) | y (me) | z (me)
  const Index n = d + mi + 2 * me;
  Vector c = Vector::Zero(n);
  c.head(d) = lp.c;
  c.segment(d, mi).setConstant(m);
  c.tail(2 * me).setConstant(m);

  Matrix ae = Matrix::Zero(me, n);
  if (me > 0) {
    ae.leftCols(d) = lp.a_eq;
    ae.block(0, d + mi, me, me) = Matrix::Identity(me, me);
    ae.block(0, d + mi + me, me, me) = -Matrix::Identity(me, me);
  }
  const Index nonneg = mi + 2 * me;
  Matrix ai = Matrix::Zero(mi + nonneg, n);
  Vector bi = Vector::Zero(mi + nonneg);
  if (mi > 0) {
    ai.topLeftCorner(mi, d) = lp.a_ineq;
    ai.block(0, d, mi, mi) = -Matrix::Identity(mi, mi);
    bi.head(mi) = lp.b_ineq;
  }
  ai.block(mi, d, nonneg, nonneg) = -Matrix::Identity(nonneg, nonneg);
  return LinearProgram(c, ae, lp.b_eq, ai, bi);
}

}  // namespace lpinfer
