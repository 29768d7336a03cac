#include "lpinfer/qp.hpp"

#include "lpinfer/errors.hpp"
#include "lpinfer/regularity.hpp"

#include <algorithm>
#include <cmath>

namespace lpinfer {

namespace {

// Row indices of a maximal linearly independent subset of the rows of e.
std::vector<Index> independent_rows(const Matrix& e) {
  std::vector<Index> keep;
  if (e.rows() == 0) return keep;
  Eigen::ColPivHouseholderQR<Matrix> qr(e.transpose());
  const double scale = std::max(e.norm(), 1.0);
  const Index k = std::min(e.rows(), e.cols());
  const Matrix& r = qr.matrixQR();
  for (Index i = 0; i < k; ++i) {
    if (std::abs(r(i, i)) > 1e-10 * scale) keep.push_back(qr.colsPermutation().indices()[i]);
  }
  std::sort(keep.begin(), keep.end());
  return keep;
}

}  // namespace

Projection project_onto(const Polytope& poly, const Vector& target, const QpOptions& opts) {
  poly.validate();
  const Index d = target.size();
  if (poly.dim() != d && (poly.rows_eq() + poly.rows_ineq()) > 0) {
    throw std::invalid_argument("project_onto: dimension mismatch");
  }
  const Index me = poly.rows_eq();
  const Index mi = poly.rows_ineq();

  Projection out;
  Vector x;
  if (me + mi == 0) {
    x = target;
  } else {
    const LPSolution start = solve(LinearProgram(Vector::Zero(d), poly));
    if (!start.optimal()) throw EmptyPolyhedron("project_onto: polytope is empty");
    x = *start.primal;
  }

  const std::vector<Index> eq_rows = independent_rows(poly.a_eq);
  std::vector<Index> work;  // inequality rows treated as equalities
  std::vector<bool> in_work(static_cast<std::size_t>(mi), false);

  auto constraint_matrix = [&]() {
    Matrix c(static_cast<Index>(eq_rows.size() + work.size()), d);
    Index r = 0;
    for (Index i : eq_rows) c.row(r++) = poly.a_eq.row(i);
    for (Index i : work) c.row(r++) = poly.a_ineq.row(i);
    return c;
  };

  Vector mu;  // multipliers on rows of the current constraint matrix
  std::size_t it = 0;
  for (; it < opts.max_iterations; ++it) {
    const Vector grad = x - target;
    const Matrix c = constraint_matrix();
    Vector p;
    if (c.rows() == 0) {
      p = -grad;
      mu.resize(0);
    } else {
      Eigen::ColPivHouseholderQR<Matrix> qr(c.transpose());
      mu = qr.solve(-grad);
      p = -(grad + c.transpose() * mu);
    }
    const double scale = 1.0 + x.norm() + target.norm();
    if (p.norm() <= opts.tol * scale) {
      Index worst = -1;
      double most_negative = -opts.tol * scale;
      for (std::size_t k = 0; k < work.size(); ++k) {
        const double m = mu[static_cast<Index>(eq_rows.size() + k)];
        if (m < most_negative) {
          most_negative = m;
          worst = static_cast<Index>(k);
        }
      }
      if (worst < 0) break;
      in_work[work[worst]] = false;
      work.erase(work.begin() + worst);
      continue;
    }
    double step = 1.0;
    Index block = -1;
    for (Index i = 0; i < mi; ++i) {
      if (in_work[i]) continue;
      const double gp = poly.a_ineq.row(i).dot(p);
      if (gp <= 1e-14 * poly.a_ineq.row(i).norm() * p.norm()) continue;
      const double s = std::max((poly.b_ineq[i] - poly.a_ineq.row(i).dot(x)) / gp, 0.0);
      if (s < step) {
        step = s;
        block = i;
      }
    }
    x += step * p;
    if (block >= 0) {
      work.push_back(block);
      in_work[block] = true;
    }
  }
  if (it == opts.max_iterations) throw NumericalFailure("project_onto: iteration cap exceeded");

  out.iterations = it;
  out.point = x;
  out.mult_eq = Vector::Zero(me);
  out.mult_ineq = Vector::Zero(mi);
  for (std::size_t k = 0; k < eq_rows.size(); ++k) out.mult_eq[eq_rows[k]] = mu[static_cast<Index>(k)];
  for (std::size_t k = 0; k < work.size(); ++k) {
    out.mult_ineq[work[k]] = mu[static_cast<Index>(eq_rows.size() + k)];
  }
  out.active = work;
  std::sort(out.active.begin(), out.active.end());

  Vector stat = x - target;
  if (me > 0) stat += poly.a_eq.transpose() * out.mult_eq;
  if (mi > 0) stat += poly.a_ineq.transpose() * out.mult_ineq;
  double res = stat.lpNorm<Eigen::Infinity>();
  res = std::max(res, poly.violation(x));
  if (mi > 0) res = std::max(res, -out.mult_ineq.minCoeff());
  out.kkt_residual = res;
  return out;
}

double distance_to_polyhedron(const Vector& x, const Polytope& poly) {
  const Projection p = project_onto(poly, x);
  return (x - p.point).norm();
}

}  // namespace lpinfer
