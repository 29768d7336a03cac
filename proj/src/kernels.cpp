#include "lpinfer/kernels.hpp"

#include "lpinfer/errors.hpp"

#include <limits>

namespace lpinfer {

SolverOptions draw_solver_options() {
  SolverOptions o;
  o.certificates = false;
  return o;
}

std::vector<double> max_over_polytope(const Polytope& poly, Index B,
                                      const std::function<Vector(Index)>& objective, Execution exec) {
  std::vector<double> out(static_cast<std::size_t>(B), -std::numeric_limits<double>::infinity());
  const SolverOptions opts = draw_solver_options();
  if (support_max(poly, Vector::Zero(poly.dim()), opts).kind == Support::Kind::MinusInfinity) return out;
  for_each_index(B, exec, [&](Index r) {
    const Support s = support_max(poly, objective(r), opts);
    if (s.kind == Support::Kind::PlusInfinity) {
      throw UnboundedInner("max_over_polytope: draw " + std::to_string(r) + " is unbounded over the polytope");
    }
    out[static_cast<std::size_t>(r)] = s.as_double();
  });
  return out;
}

}  // namespace lpinfer
