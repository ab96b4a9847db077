#ifndef MONOGUARD_SRC_REGION_SOLVER_HPP_
#define MONOGUARD_SRC_REGION_SOLVER_HPP_

#include <optional>
#include <vector>

#include "bound_engine.hpp"
#include "flat_net.hpp"

namespace monoguard::detail {

// Exact maximum of a network over a small box on which all but a few hidden
// neurons have a known state. Every on/off assignment of the undecided
// neurons makes the network affine on a polytope (the box cut by one
// half-space per undecided neuron); its maximum sits on a vertex, and with at
// most three free coordinates the vertices are enumerated directly.
class RegionSolver {
 public:
  explicit RegionSolver(const FlatNet& net);

  // Rough cost of Solve for `unstable` undecided neurons; callers compare it
  // against a budget before calling.
  double Cost(int unstable) const;

  // status: one entry per hidden neuron in layer order, +1 active, 0
  // inactive, -1 undecided. Returns the maximum and writes a maximizer.
  double Solve(const double* lo, const double* hi,
               const std::optional<OrderConstraint>& order,
               const std::vector<signed char>& status, double* argmax);

 private:
  const FlatNet& net_;
  int dim_;
};

}  // namespace monoguard::detail

#endif  // MONOGUARD_SRC_REGION_SOLVER_HPP_
