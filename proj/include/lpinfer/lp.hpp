#pragma once

#include "lpinfer/types.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace lpinfer {

/// Constraint set {x | A_eq x = b_eq, A_ineq x <= b_ineq}. Either block may have zero rows.
struct Polytope {
  Matrix a_eq;
  Vector b_eq;
  Matrix a_ineq;
  Vector b_ineq;

  Polytope() = default;
  Polytope(Matrix ae, Vector be, Matrix ai, Vector bi);

  /// Unconstrained set in R^dim.
  static Polytope whole_space(Index dim);

  Index dim() const;
  Index rows_eq() const { return a_eq.rows(); }
  Index rows_ineq() const { return a_ineq.rows(); }

  /// Throws std::invalid_argument on inconsistent block shapes.
  void validate() const;

  void add_inequality(const Vector& row, double rhs);
  void add_equality(const Vector& row, double rhs);

  /// Max violation of the constraints at x (0 when feasible).
  double violation(const Vector& x) const;
};

/// minimize c'x subject to A_eq x = b_eq, A_ineq x <= b_ineq.
struct LinearProgram {
  Vector c;
  Matrix a_eq;
  Vector b_eq;
  Matrix a_ineq;
  Vector b_ineq;

  LinearProgram() = default;
  LinearProgram(Vector c, Matrix ae, Vector be, Matrix ai, Vector bi);
  LinearProgram(Vector c, const Polytope& feasible);

  Index dim() const { return c.size(); }
  Index rows_eq() const { return a_eq.rows(); }
  Index rows_ineq() const { return a_ineq.rows(); }

  Polytope feasible_set() const;
  void validate() const;
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

std::string to_string(LpStatus s);

/// Dual multipliers with the sign convention lambda_ineq <= 0, so that
/// A_eq' lambda_eq + A_ineq' lambda_ineq = c at optimality.
struct DualPoint {
  Vector eq;
  Vector ineq;
};

struct LPSolution {
  LpStatus status = LpStatus::Infeasible;
  double value = 0.0;  ///< finite iff Optimal
  std::optional<Vector> primal;
  std::optional<DualPoint> dual;
  std::size_t iterations = 0;

  bool optimal() const { return status == LpStatus::Optimal; }
};

struct SolverOptions {
  double feasibility_tol = 1e-9;
  double optimality_tol = 1e-9;
  double pivot_tol = 1e-9;
  double phase1_tol = 1e-9;
  /// Dantzig pricing for this many pivots, then Bland's rule until termination.
  std::size_t dantzig_pivots = 200;
  /// Hard cap; exceeding it raises NumericalFailure.
  std::size_t max_iterations = 50000;
  /// When false only status and value are filled (used by bootstrap kernels).
  bool certificates = true;
};

const SolverOptions& default_solver_options();

/// Two-phase dense simplex. Deterministic for fixed input.
LPSolution solve(const LinearProgram& lp, const SolverOptions& opts = default_solver_options());

/// Dual in min-form: minimize -(b_eq'l_eq + b_ineq'l_ineq) subject to
/// A_eq' l_eq + A_ineq' l_ineq = c, l_ineq <= 0. Variables are (l_eq, l_ineq).
LinearProgram dual_of(const LinearProgram& lp);

/// Result of maximizing a linear functional over a polytope.
struct Support {
  enum class Kind { Finite, PlusInfinity, MinusInfinity };
  Kind kind = Kind::MinusInfinity;
  double value = 0.0;
  std::optional<Vector> argmax;

  bool finite() const { return kind == Kind::Finite; }
  /// +inf / -inf mapped to the IEEE infinities.
  double as_double() const;
};

Support support_max(const Polytope& poly, const Vector& direction,
                    const SolverOptions& opts = default_solver_options());

/// Feasible set intersected with {c'x <= value + slack}.
Polytope near_optimal_primal(const LinearProgram& lp, const LPSolution& sol, double slack);

/// Dual feasible set intersected with {b'l >= value - slack}; variables (l_eq, l_ineq).
Polytope near_optimal_dual(const LinearProgram& lp, const LPSolution& sol, double slack);

struct VertexOptions {
  std::size_t max_subsets = 200000;
  double tol = 1e-9;
};

/// Brute-force extreme points: every d-subset of constraint rows with a unique
/// solution that is feasible. Deduplicated within tolerance, sorted lexicographically.
std::vector<Vector> enumerate_vertices(const Polytope& poly, const VertexOptions& opts = {});

/// n choose k, saturating at SIZE_MAX.
std::size_t binomial(std::size_t n, std::size_t k);

}  // namespace lpinfer
