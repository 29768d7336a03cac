#include "lpinfer/lp.hpp"

#include "lpinfer/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace lpinfer {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_block(const Matrix& a, const Vector& b, Index dim, const char* name) {
  if (a.rows() != b.size()) {
    throw std::invalid_argument(std::string(name) + ": row count does not match rhs length");
  }
  if (a.rows() > 0 && a.cols() != dim) {
    throw std::invalid_argument(std::string(name) + ": column count does not match dimension");
  }
}

Matrix empty_rows(Index dim) { return Matrix(0, dim); }

// Dense two-phase tableau over the standard form  A x = b, x >= 0, b >= 0.
//
// Free variables are split into (x+, x-); a row of A_ineq of the form
// a * theta_j <= 0 with a < 0 is absorbed as the sign constraint theta_j >= 0
// instead of becoming a tableau row.
class Tableau {
 public:
  Tableau(const LinearProgram& lp, const SolverOptions& opts) : lp_(lp), opts_(opts) { build(); }

  LPSolution run();

 private:
  void build();
  void price(const std::vector<double>& cost);
  void pivot(std::size_t row, std::size_t col);
  // Returns false when the entering column has no positive entry (unbounded ray).
  enum class StepResult { Optimal, Pivoted, Unbounded };
  StepResult step();
  double& at(std::size_t r, std::size_t c) { return t_[r * width_ + c]; }
  double at(std::size_t r, std::size_t c) const { return t_[r * width_ + c]; }
  double rhs(std::size_t r) const { return t_[r * width_ + cols_]; }

  const LinearProgram& lp_;
  const SolverOptions& opts_;

  Index d_ = 0;
  std::vector<bool> nonneg_;
  std::vector<int> pos_col_, neg_col_;
  std::vector<int> bound_var_;   // per inequality row: absorbed variable or -1
  std::vector<double> bound_coef_;
  std::vector<int> ineq_row_;    // per inequality row: tableau row or -1
  std::vector<bool> flipped_;    // per tableau row
  std::vector<std::size_t> init_col_;  // identity column of each tableau row
  std::vector<bool> artificial_;       // per column
  std::vector<double> cost2_;          // phase-2 cost per column

  std::size_t rows_ = 0, cols_ = 0, width_ = 0;
  std::vector<double> t_;
  std::vector<std::size_t> basis_;
  std::vector<double> rc_;
  std::vector<double> cost_;
  std::size_t pivots_ = 0;
  double rhs_scale_ = 1.0;
};

void Tableau::build() {
  d_ = lp_.dim();
  const Index me = lp_.rows_eq();
  const Index mi = lp_.rows_ineq();

  nonneg_.assign(d_, false);
  bound_var_.assign(mi, -1);
  bound_coef_.assign(mi, 0.0);
  for (Index i = 0; i < mi; ++i) {
    if (lp_.b_ineq[i] != 0.0) continue;
    int nz = -1;
    int count = 0;
    for (Index j = 0; j < d_; ++j) {
      if (lp_.a_ineq(i, j) != 0.0) {
        nz = static_cast<int>(j);
        ++count;
      }
    }
    if (count == 1 && lp_.a_ineq(i, nz) < 0.0 && !nonneg_[nz]) {
      nonneg_[nz] = true;
      bound_var_[i] = nz;
      bound_coef_[i] = lp_.a_ineq(i, nz);
    }
  }

  std::size_t next = 0;
  pos_col_.assign(d_, -1);
  neg_col_.assign(d_, -1);
  for (Index j = 0; j < d_; ++j) {
    pos_col_[j] = static_cast<int>(next++);
    if (!nonneg_[j]) neg_col_[j] = static_cast<int>(next++);
  }
  ineq_row_.assign(mi, -1);
  rows_ = static_cast<std::size_t>(me);
  for (Index i = 0; i < mi; ++i) {
    if (bound_var_[i] < 0) ineq_row_[i] = static_cast<int>(rows_++);
  }
  std::vector<int> slack_col(rows_, -1);
  for (Index i = 0; i < mi; ++i) {
    if (ineq_row_[i] >= 0) slack_col[ineq_row_[i]] = static_cast<int>(next++);
  }

  // Row signs: flip so that rhs >= 0.
  std::vector<double> b(rows_);
  for (Index i = 0; i < me; ++i) b[i] = lp_.b_eq[i];
  for (Index i = 0; i < mi; ++i) {
    if (ineq_row_[i] >= 0) b[ineq_row_[i]] = lp_.b_ineq[i];
  }
  flipped_.assign(rows_, false);
  for (std::size_t r = 0; r < rows_; ++r) flipped_[r] = b[r] < 0.0;

  init_col_.assign(rows_, 0);
  std::vector<int> art_col(rows_, -1);
  for (std::size_t r = 0; r < rows_; ++r) {
    const bool slack_basic = slack_col[r] >= 0 && !flipped_[r];
    if (slack_basic) {
      init_col_[r] = static_cast<std::size_t>(slack_col[r]);
    } else {
      art_col[r] = static_cast<int>(next++);
      init_col_[r] = static_cast<std::size_t>(art_col[r]);
    }
  }
  cols_ = next;
  width_ = cols_ + 1;
  artificial_.assign(cols_, false);
  for (std::size_t r = 0; r < rows_; ++r) {
    if (art_col[r] >= 0) artificial_[art_col[r]] = true;
  }

  t_.assign(rows_ * width_, 0.0);
  auto put_row = [&](std::size_t r, auto&& coef) {
    const double s = flipped_[r] ? -1.0 : 1.0;
    for (Index j = 0; j < d_; ++j) {
      const double a = coef(j);
      if (a == 0.0) continue;
      at(r, pos_col_[j]) = s * a;
      if (neg_col_[j] >= 0) at(r, neg_col_[j]) = -s * a;
    }
    if (slack_col[r] >= 0) at(r, slack_col[r]) = s;
    if (art_col[r] >= 0) at(r, art_col[r]) = 1.0;
    at(r, cols_) = s * b[r];
  };
  for (Index i = 0; i < me; ++i) {
    put_row(static_cast<std::size_t>(i), [&](Index j) { return lp_.a_eq(i, j); });
  }
  for (Index i = 0; i < mi; ++i) {
    if (ineq_row_[i] >= 0) {
      put_row(static_cast<std::size_t>(ineq_row_[i]), [&](Index j) { return lp_.a_ineq(i, j); });
    }
  }

  cost2_.assign(cols_, 0.0);
  for (Index j = 0; j < d_; ++j) {
    cost2_[pos_col_[j]] = lp_.c[j];
    if (neg_col_[j] >= 0) cost2_[neg_col_[j]] = -lp_.c[j];
  }
  basis_ = init_col_;

  rhs_scale_ = 1.0;
  for (double v : b) rhs_scale_ = std::max(rhs_scale_, std::abs(v));
}

void Tableau::price(const std::vector<double>& cost) {
  cost_ = cost;
  rc_.assign(width_, 0.0);
  for (std::size_t j = 0; j < cols_; ++j) rc_[j] = cost[j];
  for (std::size_t r = 0; r < rows_; ++r) {
    const double cb = cost[basis_[r]];
    if (cb == 0.0) continue;
    const double* row = &t_[r * width_];
    for (std::size_t j = 0; j <= cols_; ++j) rc_[j] -= cb * row[j];
  }
}

void Tableau::pivot(std::size_t prow, std::size_t pcol) {
  double* pr = &t_[prow * width_];
  const double inv = 1.0 / pr[pcol];
  for (std::size_t j = 0; j <= cols_; ++j) pr[j] *= inv;
  pr[pcol] = 1.0;
  for (std::size_t r = 0; r < rows_; ++r) {
    if (r == prow) continue;
    double* row = &t_[r * width_];
    const double f = row[pcol];
    if (f == 0.0) continue;
    for (std::size_t j = 0; j <= cols_; ++j) row[j] -= f * pr[j];
    row[pcol] = 0.0;
  }
  const double f = rc_[pcol];
  if (f != 0.0) {
    for (std::size_t j = 0; j <= cols_; ++j) rc_[j] -= f * pr[j];
    rc_[pcol] = 0.0;
  }
  basis_[prow] = pcol;
  ++pivots_;
}

Tableau::StepResult Tableau::step() {
  if (pivots_ >= opts_.max_iterations) {
    throw NumericalFailure("simplex: iteration cap exceeded");
  }
  const bool bland = pivots_ >= opts_.dantzig_pivots;
  std::size_t enter = cols_;
  double best = -opts_.optimality_tol;
  for (std::size_t j = 0; j < cols_; ++j) {
    if (artificial_[j]) continue;
    if (rc_[j] < best) {
      enter = j;
      if (bland) break;
      best = rc_[j];
    }
  }
  if (enter == cols_) return StepResult::Optimal;

  std::size_t leave = rows_;
  double best_ratio = kInf;
  double best_piv = 0.0;
  for (std::size_t r = 0; r < rows_; ++r) {
    const double a = at(r, enter);
    if (a <= opts_.pivot_tol) continue;
    const double ratio = std::max(rhs(r), 0.0) / a;
    if (leave == rows_ || ratio < best_ratio - 1e-12 * (1.0 + best_ratio)) {
      leave = r;
      best_ratio = ratio;
      best_piv = a;
    } else if (ratio <= best_ratio + 1e-12 * (1.0 + best_ratio)) {
      const bool take = bland ? basis_[r] < basis_[leave] : a > best_piv;
      if (take) {
        leave = r;
        best_ratio = std::min(best_ratio, ratio);
        best_piv = a;
      }
    }
  }
  if (leave == rows_) return StepResult::Unbounded;
  pivot(leave, enter);
  return StepResult::Pivoted;
}

LPSolution Tableau::run() {
  LPSolution sol;

  bool any_art = false;
  for (bool a : artificial_) any_art = any_art || a;
  if (any_art) {
    std::vector<double> c1(cols_, 0.0);
    for (std::size_t j = 0; j < cols_; ++j) c1[j] = artificial_[j] ? 1.0 : 0.0;
    price(c1);
    while (step() == StepResult::Pivoted) {
    }
    double infeas = 0.0;
    for (std::size_t r = 0; r < rows_; ++r) {
      if (artificial_[basis_[r]]) infeas += std::max(rhs(r), 0.0);
    }
    if (infeas > opts_.phase1_tol * rhs_scale_) {
      sol.status = LpStatus::Infeasible;
      sol.value = kInf;
      sol.iterations = pivots_;
      return sol;
    }
    // Drive remaining artificials out of the basis; rows with no usable
    // pivot are redundant and keep a zero artificial.
    for (std::size_t r = 0; r < rows_; ++r) {
      if (!artificial_[basis_[r]]) continue;
      std::size_t col = cols_;
      double mag = opts_.pivot_tol;
      for (std::size_t j = 0; j < cols_; ++j) {
        if (artificial_[j]) continue;
        if (std::abs(at(r, j)) > mag) {
          mag = std::abs(at(r, j));
          col = j;
        }
      }
      if (col != cols_) {
        pivot(r, col);
      } else {
        at(r, cols_) = 0.0;
      }
    }
  }

  price(cost2_);
  StepResult res;
  while ((res = step()) == StepResult::Pivoted) {
  }
  sol.iterations = pivots_;
  if (res == StepResult::Unbounded) {
    sol.status = LpStatus::Unbounded;
    sol.value = -kInf;
    return sol;
  }

  std::vector<double> x(cols_, 0.0);
  for (std::size_t r = 0; r < rows_; ++r) x[basis_[r]] = std::max(rhs(r), 0.0);
  Vector theta(d_);
  for (Index j = 0; j < d_; ++j) {
    theta[j] = x[pos_col_[j]] - (neg_col_[j] >= 0 ? x[neg_col_[j]] : 0.0);
  }
  sol.status = LpStatus::Optimal;
  sol.value = d_ > 0 ? lp_.c.dot(theta) : 0.0;
  if (!opts_.certificates) return sol;

  // Multipliers from the reduced costs of the initial identity columns
  // (phase-2 cost zero): y_r = -rc[init_col_r].
  const Index me = lp_.rows_eq();
  const Index mi = lp_.rows_ineq();
  DualPoint dual{Vector::Zero(me), Vector::Zero(mi)};
  auto row_dual = [&](std::size_t r) {
    const double y = -rc_[init_col_[r]];
    return flipped_[r] ? -y : y;
  };
  for (Index i = 0; i < me; ++i) dual.eq[i] = row_dual(static_cast<std::size_t>(i));
  for (Index i = 0; i < mi; ++i) {
    if (ineq_row_[i] >= 0) dual.ineq[i] = std::min(row_dual(ineq_row_[i]), 0.0);
  }
  for (Index i = 0; i < mi; ++i) {
    const int j = bound_var_[i];
    if (j < 0) continue;
    double reduced = lp_.c[j];
    if (me > 0) reduced -= lp_.a_eq.col(j).dot(dual.eq);
    for (Index k = 0; k < mi; ++k) {
      if (ineq_row_[k] >= 0) reduced -= lp_.a_ineq(k, j) * dual.ineq[k];
    }
    dual.ineq[i] = std::min(reduced / bound_coef_[i], 0.0);
  }
  sol.primal = std::move(theta);
  sol.dual = std::move(dual);
  return sol;
}

}  // namespace

Polytope::Polytope(Matrix ae, Vector be, Matrix ai, Vector bi)
    : a_eq(std::move(ae)), b_eq(std::move(be)), a_ineq(std::move(ai)), b_ineq(std::move(bi)) {}

Polytope Polytope::whole_space(Index dim) {
  return Polytope(empty_rows(dim), Vector(0), empty_rows(dim), Vector(0));
}

Index Polytope::dim() const { return std::max(a_eq.cols(), a_ineq.cols()); }

void Polytope::validate() const {
  const Index d = dim();
  check_block(a_eq, b_eq, d, "equality block");
  check_block(a_ineq, b_ineq, d, "inequality block");
}

void Polytope::add_inequality(const Vector& row, double rhs) {
  const Index m = a_ineq.rows();
  Matrix a(m + 1, row.size());
  if (m > 0) a.topRows(m) = a_ineq;
  a.row(m) = row.transpose();
  Vector b(m + 1);
  b.head(m) = b_ineq;
  b[m] = rhs;
  a_ineq = std::move(a);
  b_ineq = std::move(b);
}

void Polytope::add_equality(const Vector& row, double rhs) {
  const Index m = a_eq.rows();
  Matrix a(m + 1, row.size());
  if (m > 0) a.topRows(m) = a_eq;
  a.row(m) = row.transpose();
  Vector b(m + 1);
  b.head(m) = b_eq;
  b[m] = rhs;
  a_eq = std::move(a);
  b_eq = std::move(b);
}

double Polytope::violation(const Vector& x) const {
  double v = 0.0;
  if (a_eq.rows() > 0) v = std::max(v, (a_eq * x - b_eq).cwiseAbs().maxCoeff());
  if (a_ineq.rows() > 0) v = std::max(v, (a_ineq * x - b_ineq).maxCoeff());
  return v;
}

LinearProgram::LinearProgram(Vector c_, Matrix ae, Vector be, Matrix ai, Vector bi)
    : c(std::move(c_)), a_eq(std::move(ae)), b_eq(std::move(be)), a_ineq(std::move(ai)),
      b_ineq(std::move(bi)) {
  if (a_eq.rows() == 0) a_eq.resize(0, c.size());
  if (a_ineq.rows() == 0) a_ineq.resize(0, c.size());
}

LinearProgram::LinearProgram(Vector c_, const Polytope& feasible)
    : LinearProgram(std::move(c_), feasible.a_eq, feasible.b_eq, feasible.a_ineq,
                    feasible.b_ineq) {}

Polytope LinearProgram::feasible_set() const { return Polytope(a_eq, b_eq, a_ineq, b_ineq); }

void LinearProgram::validate() const {
  check_block(a_eq, b_eq, dim(), "equality block");
  check_block(a_ineq, b_ineq, dim(), "inequality block");
}

std::string to_string(LpStatus s) {
  switch (s) {
    case LpStatus::Optimal:
      return "optimal";
    case LpStatus::Infeasible:
      return "infeasible";
    case LpStatus::Unbounded:
      return "unbounded";
  }
  return "unknown";
}

const SolverOptions& default_solver_options() {
  static const SolverOptions opts{};
  return opts;
}

LPSolution solve(const LinearProgram& lp, const SolverOptions& opts) {
  lp.validate();
  Tableau tab(lp, opts);
  return tab.run();
}

LinearProgram dual_of(const LinearProgram& lp) {
  lp.validate();
  const Index me = lp.rows_eq();
  const Index mi = lp.rows_ineq();
  const Index d = lp.dim();
  const Index p = me + mi;
  Vector c(p);
  c.head(me) = -lp.b_eq;
  c.tail(mi) = -lp.b_ineq;
  Matrix ae(d, p);
  if (me > 0) ae.leftCols(me) = lp.a_eq.transpose();
  if (mi > 0) ae.rightCols(mi) = lp.a_ineq.transpose();
  Matrix ai = Matrix::Zero(mi, p);
  for (Index i = 0; i < mi; ++i) ai(i, me + i) = 1.0;
  return LinearProgram(c, ae, lp.c, ai, Vector::Zero(mi));
}

double Support::as_double() const {
  switch (kind) {
    case Kind::Finite:
      return value;
    case Kind::PlusInfinity:
      return kInf;
    case Kind::MinusInfinity:
      return -kInf;
  }
  return value;
}

Support support_max(const Polytope& poly, const Vector& direction, const SolverOptions& opts) {
  LinearProgram lp(-direction, poly);
  const LPSolution sol = solve(lp, opts);
  Support s;
  switch (sol.status) {
    case LpStatus::Infeasible:
      s.kind = Support::Kind::MinusInfinity;
      break;
    case LpStatus::Unbounded:
      s.kind = Support::Kind::PlusInfinity;
      break;
    case LpStatus::Optimal:
      s.kind = Support::Kind::Finite;
      s.value = -sol.value;
      s.argmax = sol.primal;
      break;
  }
  return s;
}

Polytope near_optimal_primal(const LinearProgram& lp, const LPSolution& sol, double slack) {
  if (!sol.optimal()) throw std::invalid_argument("near_optimal_primal: solution not optimal");
  if (slack < 0.0) throw std::invalid_argument("near_optimal_primal: negative slack");
  Polytope poly = lp.feasible_set();
  poly.add_inequality(lp.c, sol.value + slack);
  return poly;
}

Polytope near_optimal_dual(const LinearProgram& lp, const LPSolution& sol, double slack) {
  if (!sol.optimal()) throw std::invalid_argument("near_optimal_dual: solution not optimal");
  if (slack < 0.0) throw std::invalid_argument("near_optimal_dual: negative slack");
  const LinearProgram dual = dual_of(lp);
  Polytope poly = dual.feasible_set();
  // dual objective in min-form is -b'l, so b'l >= v - slack reads -b'l <= -(v - slack).
  poly.add_inequality(dual.c, -(sol.value - slack));
  return poly;
}

std::size_t binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  std::size_t r = 1;
  for (std::size_t i = 1; i <= k; ++i) {
    const std::size_t num = n - k + i;
    if (r > std::numeric_limits<std::size_t>::max() / num) {
      return std::numeric_limits<std::size_t>::max();
    }
    r = r * num / i;
  }
  return r;
}

std::vector<Vector> enumerate_vertices(const Polytope& poly, const VertexOptions& opts) {
  poly.validate();
  const Index d = poly.dim();
  const Index me = poly.rows_eq();
  const Index m = me + poly.rows_ineq();
  std::vector<Vector> out;
  if (d == 0) {
    if (poly.violation(Vector(0)) <= opts.tol) out.emplace_back(Vector(0));
    return out;
  }
  if (m < d) return out;
  const std::size_t subsets = binomial(static_cast<std::size_t>(m), static_cast<std::size_t>(d));
  if (subsets > opts.max_subsets) {
    throw CapExceeded("enumerate_vertices: " + std::to_string(subsets) +
                      " subsets exceed the cap of " + std::to_string(opts.max_subsets));
  }
  Matrix all(m, d);
  Vector rhs(m);
  if (me > 0) {
    all.topRows(me) = poly.a_eq;
    rhs.head(me) = poly.b_eq;
  }
  if (poly.rows_ineq() > 0) {
    all.bottomRows(poly.rows_ineq()) = poly.a_ineq;
    rhs.tail(poly.rows_ineq()) = poly.b_ineq;
  }
  const double scale = 1.0 + (m > 0 ? rhs.cwiseAbs().maxCoeff() : 0.0);

  std::vector<Index> pick(static_cast<std::size_t>(d));
  for (Index i = 0; i < d; ++i) pick[i] = i;
  Matrix sq(d, d);
  Vector sr(d);
  while (true) {
    for (Index i = 0; i < d; ++i) {
      sq.row(i) = all.row(pick[i]);
      sr[i] = rhs[pick[i]];
    }
    Eigen::FullPivLU<Matrix> lu(sq);
    lu.setThreshold(1e-10);
    if (lu.isInvertible()) {
      Vector x = lu.solve(sr);
      if (poly.violation(x) <= opts.tol * scale * (1.0 + x.lpNorm<Eigen::Infinity>())) {
        bool dup = false;
        for (const auto& v : out) {
          if ((v - x).lpNorm<Eigen::Infinity>() <= 1e-7 * (1.0 + v.lpNorm<Eigen::Infinity>())) {
            dup = true;
            break;
          }
        }
        if (!dup) out.push_back(std::move(x));
      }
    }
    // next combination
    Index i = d - 1;
    while (i >= 0 && pick[i] == m - d + i) --i;
    if (i < 0) break;
    ++pick[i];
    for (Index k = i + 1; k < d; ++k) pick[k] = pick[k - 1] + 1;
  }
  std::sort(out.begin(), out.end(), [](const Vector& a, const Vector& b) {
    return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(),
                                        b.data() + b.size());
  });
  return out;
}

}  // namespace lpinfer
