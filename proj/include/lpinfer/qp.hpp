#pragma once

#include "lpinfer/lp.hpp"

#include <vector>

namespace lpinfer {

struct QpOptions {
  double tol = 1e-11;
  std::size_t max_iterations = 10000;
};

/// Euclidean projection of `target` onto a polytope, by a primal active-set
/// method started from a simplex-feasible point.
struct Projection {
  Vector point;
  std::vector<Index> active;  ///< inequality rows in the final working set
  Vector mult_eq;             ///< multipliers of the equality rows
  Vector mult_ineq;           ///< multipliers of all inequality rows (>= 0, zero off the working set)
  double kkt_residual = 0.0;  ///< max of stationarity, feasibility and sign residuals
  std::size_t iterations = 0;
};

/// Throws EmptyPolyhedron when poly has no feasible point.
Projection project_onto(const Polytope& poly, const Vector& target, const QpOptions& opts = {});

/// min ||x - z|| over z in poly.
double distance_to_polyhedron(const Vector& x, const Polytope& poly);

}  // namespace lpinfer
