#pragma once

#include "lpinfer/lp.hpp"
#include "lpinfer/moments.hpp"
#include "lpinfer/parallel.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace lpinfer {

/// Perturbation (zeta_c, zeta_A, zeta_b) of the data of an LP.
struct LpPerturbation {
  Vector c;
  Matrix a_eq;
  Matrix a_ineq;
  Vector b_eq;
  Vector b_ineq;

  static LpPerturbation zero(const LinearProgram& shape);
};

/// Vectorization of LP data: c | A_eq (row-major) | A_ineq (row-major) | b_eq | b_ineq.
Index lp_slot_count(const LinearProgram& shape);
/// Names "c_j", "AE_i_j", "AI_i_j", "bE_i", "bI_i" in slot order.
std::vector<std::string> lp_slot_names(const LinearProgram& shape);
Vector lp_to_vector(const LinearProgram& lp);
LinearProgram lp_from_vector(const LinearProgram& shape, const Vector& v);
LpPerturbation unpack_perturbation(const LinearProgram& shape, const Vector& v);

/// Pairs bootstrap of column means: column k of obs measures LP slot slots[k].
BootstrapDraws bootstrap_lp_columns(const Matrix& obs, const std::vector<Index>& slots, const LinearProgram& shape,
                                    Index B, std::uint64_t seed, Execution exec = Execution::Parallel);

/// min_{theta in S} max_{lambda in Delta} zeta_c'theta + lambda'(zeta_b - zeta_A theta),
/// lambda = (lambda_eq, lambda_ineq), solved as one LP after dualizing the inner
/// maximum. Throws EmptySet when either set is empty and UnboundedInner when the
/// inner maximum is +inf for every theta.
double minmax_statistic(const Polytope& s_hat, const Polytope& delta_hat, const LpPerturbation& zeta,
                        const SolverOptions& opts = default_solver_options());

struct PointwiseResult {
  double v_hat = 0.0;
  double kappa = 0.0;
  Index n = 0;
  std::vector<double> draws;
  std::optional<std::pair<double, double>> ci;
};

/// One minmax_statistic per bootstrap draw, with S-hat and Delta-hat the
/// kappa/sqrt(n)-optimal primal and dual sets of lp_hat. Refuses (RegularityFailure)
/// when MFCQ fails or S-hat is unbounded.
PointwiseResult pointwise_distribution(const LinearProgram& lp_hat, Index n, const BootstrapDraws& draws,
                                       double kappa, Execution exec = Execution::Parallel);

/// [v - q_{1-alpha/2} / sqrt(n), v - q_{alpha/2} / sqrt(n)].
std::pair<double, double> ci_for_value(const PointwiseResult& result, double alpha);

}  // namespace lpinfer
