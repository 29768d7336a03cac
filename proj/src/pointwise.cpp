#include "lpinfer/pointwise.hpp"

#include "lpinfer/errors.hpp"
#include "lpinfer/kernels.hpp"
#include "lpinfer/regularity.hpp"
#include "lpinfer/stats.hpp"

#include <cmath>

namespace lpinfer {

namespace {

void copy_rowmajor(const Matrix& m, Vector& v, Index& k) {
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) v[k++] = m(i, j);
}

void read_rowmajor(Matrix& m, const Vector& v, Index& k) {
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) m(i, j) = v[k++];
}

bool bounded(const Polytope& p) {
  for (Index k = 0; k < p.dim(); ++k) {
    for (double s : {1.0, -1.0}) {
      if (support_max(p, s * Vector::Unit(p.dim(), k)).kind == Support::Kind::PlusInfinity) return false;
    }
  }
  return true;
}

}  // namespace

LpPerturbation LpPerturbation::zero(const LinearProgram& shape) {
  const Index d = shape.dim();
  return {Vector::Zero(d), Matrix::Zero(shape.rows_eq(), d), Matrix::Zero(shape.rows_ineq(), d),
          Vector::Zero(shape.rows_eq()), Vector::Zero(shape.rows_ineq())};
}

Index lp_slot_count(const LinearProgram& shape) {
  const Index d = shape.dim();
  return d + (shape.rows_eq() + shape.rows_ineq()) * (d + 1);
}

std::vector<std::string> lp_slot_names(const LinearProgram& shape) {
  std::vector<std::string> out;
  const Index d = shape.dim();
  for (Index j = 0; j < d; ++j) out.push_back("c_" + std::to_string(j));
  for (Index i = 0; i < shape.rows_eq(); ++i)
    for (Index j = 0; j < d; ++j) out.push_back("AE_" + std::to_string(i) + "_" + std::to_string(j));
  for (Index i = 0; i < shape.rows_ineq(); ++i)
    for (Index j = 0; j < d; ++j) out.push_back("AI_" + std::to_string(i) + "_" + std::to_string(j));
  for (Index i = 0; i < shape.rows_eq(); ++i) out.push_back("bE_" + std::to_string(i));
  for (Index i = 0; i < shape.rows_ineq(); ++i) out.push_back("bI_" + std::to_string(i));
  return out;
}

Vector lp_to_vector(const LinearProgram& lp) {
  Vector v(lp_slot_count(lp));
  Index k = 0;
  for (Index j = 0; j < lp.dim(); ++j) v[k++] = lp.c[j];
  copy_rowmajor(lp.a_eq, v, k);
  copy_rowmajor(lp.a_ineq, v, k);
  for (Index i = 0; i < lp.rows_eq(); ++i) v[k++] = lp.b_eq[i];
  for (Index i = 0; i < lp.rows_ineq(); ++i) v[k++] = lp.b_ineq[i];
  return v;
}

LpPerturbation unpack_perturbation(const LinearProgram& shape, const Vector& v) {
  if (v.size() != lp_slot_count(shape)) throw std::invalid_argument("unpack_perturbation: length mismatch");
  LpPerturbation z = LpPerturbation::zero(shape);
  Index k = 0;
  for (Index j = 0; j < shape.dim(); ++j) z.c[j] = v[k++];
  read_rowmajor(z.a_eq, v, k);
  read_rowmajor(z.a_ineq, v, k);
  for (Index i = 0; i < shape.rows_eq(); ++i) z.b_eq[i] = v[k++];
  for (Index i = 0; i < shape.rows_ineq(); ++i) z.b_ineq[i] = v[k++];
  return z;
}

LinearProgram lp_from_vector(const LinearProgram& shape, const Vector& v) {
  const LpPerturbation z = unpack_perturbation(shape, v);
  return LinearProgram(z.c, z.a_eq, z.b_eq, z.a_ineq, z.b_ineq);
}

BootstrapDraws bootstrap_lp_columns(const Matrix& obs, const std::vector<Index>& slots, const LinearProgram& shape,
                                    Index B, std::uint64_t seed, Execution exec) {
  if (obs.cols() != static_cast<Index>(slots.size())) {
    throw std::invalid_argument("bootstrap_lp_columns: one column per slot expected");
  }
  BootstrapDraws d = bootstrap_root(obs, B, seed, exec);
  d.full_dim = lp_slot_count(shape);
  d.slots = slots;
  for (Index s : slots)
    if (s < 0 || s >= d.full_dim) throw std::invalid_argument("bootstrap_lp_columns: slot out of range");
  return d;
}

double minmax_statistic(const Polytope& s_hat, const Polytope& delta_hat, const LpPerturbation& zeta,
                        const SolverOptions& opts) {
  const Index d = zeta.c.size();
  const Index m = zeta.b_eq.size() + zeta.b_ineq.size();
  if (s_hat.dim() != d || delta_hat.dim() != m) throw std::invalid_argument("minmax_statistic: dimension mismatch");
  Matrix za(m, d);
  za << zeta.a_eq, zeta.a_ineq;
  Vector zb(m);
  zb << zeta.b_eq, zeta.b_ineq;

  const Index ge = delta_hat.rows_eq();
  const Index gi = delta_hat.rows_ineq();
  const Index nv = d + ge + gi;  // theta | mu | nu
  Vector c(nv);
  c << zeta.c, delta_hat.b_eq, delta_hat.b_ineq;

  const Index se = s_hat.rows_eq();
  const Index si = s_hat.rows_ineq();
  Matrix ae = Matrix::Zero(se + m, nv);
  Vector be(se + m);
  if (se > 0) ae.topLeftCorner(se, d) = s_hat.a_eq;
  be.head(se) = s_hat.b_eq;
  ae.block(se, 0, m, d) = za;
  if (ge > 0) ae.block(se, d, m, ge) = delta_hat.a_eq.transpose();
  if (gi > 0) ae.block(se, d + ge, m, gi) = delta_hat.a_ineq.transpose();
  be.tail(m) = zb;

  Matrix ai = Matrix::Zero(si + gi, nv);
  Vector bi = Vector::Zero(si + gi);
  if (si > 0) ai.topLeftCorner(si, d) = s_hat.a_ineq;
  bi.head(si) = s_hat.b_ineq;
  ai.block(si, d + ge, gi, gi) = -Matrix::Identity(gi, gi);

  const LPSolution sol = solve(LinearProgram(c, ae, be, ai, bi), opts);
  switch (sol.status) {
    case LpStatus::Optimal:
      return sol.value;
    case LpStatus::Infeasible:
      if (support_max(s_hat, Vector::Zero(d), opts).kind == Support::Kind::MinusInfinity) {
        throw EmptySet("minmax_statistic: S-hat is empty");
      }
      throw UnboundedInner(
          "minmax_statistic: inner maximum over Delta-hat is +inf (Delta-hat unbounded; MFCQ fails - regularize "
          "with penalty_reformulate)");
    case LpStatus::Unbounded:
      throw EmptySet("minmax_statistic: Delta-hat is empty or S-hat is unbounded");
  }
  return sol.value;
}

PointwiseResult pointwise_distribution(const LinearProgram& lp_hat, Index n, const BootstrapDraws& draws,
                                       double kappa, Execution exec) {
  if (n < 1) throw std::invalid_argument("pointwise_distribution: n must be positive");
  if (draws.full_dim != lp_slot_count(lp_hat)) {
    throw std::invalid_argument("pointwise_distribution: draws do not match the LP layout");
  }
  const LPSolution sol = solve(lp_hat);
  if (sol.status == LpStatus::Infeasible) throw EmptySet("pointwise_distribution: estimated LP is infeasible");
  if (sol.status == LpStatus::Unbounded) throw InfiniteValue("pointwise_distribution: estimated LP is unbounded");
  const RegularityReport rep = mfcq_check(lp_hat);
  if (!rep.mfcq_holds) {
    throw RegularityFailure("pointwise_distribution: MFCQ fails (" + rep.notes +
                            "); apply penalty_reformulate (lp regularize --penalty M) first");
  }
  const double slack = kappa / std::sqrt(static_cast<double>(n));
  const Polytope s_hat = near_optimal_primal(lp_hat, sol, slack);
  if (!bounded(s_hat)) throw RegularityFailure("pointwise_distribution: the near-optimal primal set is unbounded");
  const Polytope delta_hat = near_optimal_dual(lp_hat, sol, slack);

  PointwiseResult out;
  out.v_hat = sol.value;
  out.kappa = kappa;
  out.n = n;
  out.draws.resize(static_cast<std::size_t>(draws.count()));
  const SolverOptions opts = draw_solver_options();
  for_each_index(draws.count(), exec, [&](Index r) {
    out.draws[static_cast<std::size_t>(r)] =
        minmax_statistic(s_hat, delta_hat, unpack_perturbation(lp_hat, draws.full(r)), opts);
  });
  return out;
}

std::pair<double, double> ci_for_value(const PointwiseResult& result, double alpha) {
  if (result.draws.empty()) throw std::invalid_argument("ci_for_value: no draws");
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("ci_for_value: alpha must lie in (0, 1)");
  const double root_n = std::sqrt(static_cast<double>(result.n));
  const double hi_q = inf_quantile(result.draws, 1.0 - alpha / 2.0);
  const double lo_q = inf_quantile(result.draws, alpha / 2.0);
  return {result.v_hat - hi_q / root_n, result.v_hat - lo_q / root_n};
}

}  // namespace lpinfer
