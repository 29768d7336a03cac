#pragma once

#include "lpinfer/lp.hpp"
#include "lpinfer/parallel.hpp"

#include <functional>
#include <vector>

namespace lpinfer {

/// Solver settings for per-draw LPs: status and value only.
SolverOptions draw_solver_options();

/// v_r = max_{x in poly} objective(r)'x for r in [0, B). An empty polytope gives
/// -inf for every draw; an unbounded draw throws UnboundedInner.
std::vector<double> max_over_polytope(const Polytope& poly, Index B,
                                      const std::function<Vector(Index)>& objective,
                                      Execution exec = Execution::Parallel);

}  // namespace lpinfer
