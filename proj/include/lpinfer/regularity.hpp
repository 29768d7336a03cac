#pragma once

#include "lpinfer/lp.hpp"

#include <optional>
#include <string>

namespace lpinfer {

struct RegularityReport {
  bool mfcq_holds = false;
  std::optional<Vector> slater_witness;
  bool a_e_full_row_rank = false;
  bool dual_solution_set_bounded = false;
  /// Optimal s of  max s  s.t. A_E t = b_E, A_I t + s 1 <= b_I, s <= 1  (-inf if infeasible).
  double slater_margin = 0.0;
  std::string notes;
};

/// Strictness required of the Slater point: A_I theta_0 + margin <= b_I.
inline constexpr double kSlaterMargin = 1e-7;

/// Numerical rank from column-pivoted QR, cut off at 1e-10 * ||A||_F.
Index numerical_rank(const Matrix& a);

RegularityReport mfcq_check(const LinearProgram& lp);

/// True iff the optimal dual face has finite support in every +-coordinate direction.
/// Throws InfiniteValue when the primal is unbounded, EmptyPolyhedron when infeasible.
bool dual_boundedness_check(const LinearProgram& lp);

struct LambdaOptions {
  std::size_t max_subsets = 100000;
};

/// Lambda(A): inverse of the smallest lambda_min(A_F A_F') over row bases F of A.
double lambda_condition(const Matrix& a, const LambdaOptions& opts = {});
/// Single-threaded reference for lambda_condition.
double lambda_condition_serial(const Matrix& a, const LambdaOptions& opts = {});

/// sqrt(Lambda(A)) * (||A_E x - b_E|| + ||(A_I x - b_I)_+||), A stacked from both blocks.
double hoffman_bound(const Polytope& poly, const Vector& x);

/// Penalized LP in variables (theta, x, y, z):
///   min c'theta + M 1'x + M 1'(y + z)
///   s.t. A_E theta + y - z = b_E,  A_I theta - x <= b_I,  x, y, z >= 0.
LinearProgram penalty_reformulate(const LinearProgram& lp, double m);

}  // namespace lpinfer
