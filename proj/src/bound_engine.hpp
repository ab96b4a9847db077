#ifndef MONOGUARD_SRC_BOUND_ENGINE_HPP_
#define MONOGUARD_SRC_BOUND_ENGINE_HPP_

#include <optional>
#include <vector>

#include "flat_net.hpp"

namespace monoguard::detail {

// x[first] <= x[second] inside the box.
struct OrderConstraint {
  int first = 0;
  int second = 0;
};

// Maximizes coef . x + constant over the box [lo, hi] intersected with the
// optional order constraint; writes a maximizer to `argmax`.
double MaximizeLinear(const double* coef, double constant, const double* lo,
                      const double* hi, int dim,
                      const std::optional<OrderConstraint>& order,
                      double* argmax);

// Shrinks the box to the feasible part of the order constraint. Returns false
// when nothing feasible remains.
bool TightenForOrder(double* lo, double* hi,
                     const std::optional<OrderConstraint>& order);

// Projects a point of the box onto the order constraint.
void ProjectForOrder(double* x, const std::optional<OrderConstraint>& order);

// Symbolic interval propagation: every neuron carries a lower and an upper
// affine function of the inputs, relaxed at unstable ReLUs (chord above,
// identity or zero below). Concrete preactivation intervals are the
// intersection of the symbolic and plain interval enclosures.
class BoundEngine {
 public:
  BoundEngine(const FlatNet& net, double stability_slack);

  struct Bounds {
    double upper = 0.0;
    // Every hidden neuron is stable: the net is affine on the box and
    // `upper` is attained at `argmax`.
    bool exact = false;
    // Exact, or only neurons with preactivation width below the stability
    // slack straddle zero.
    bool resolved = false;
  };

  Bounds Compute(const double* lo, const double* hi,
                 const std::optional<OrderConstraint>& order);

  // Maximizer of the output's upper affine bound from the last Compute().
  const std::vector<double>& argmax() const { return argmax_; }

  // Per hidden neuron from the last Compute(): +1 active, 0 inactive, -1
  // straddling zero.
  const std::vector<signed char>& status() const { return status_; }
  int unstable() const { return unstable_; }

 private:
  const FlatNet& net_;
  double slack_;
  int dim_;
  std::vector<double> lo_form_a_, up_form_a_, lo_form_b_, up_form_b_;
  std::vector<double> ilo_a_, ihi_a_, ilo_b_, ihi_b_;
  std::vector<double> argmax_;
  std::vector<signed char> status_;
  int unstable_ = 0;
};

}  // namespace monoguard::detail

#endif  // MONOGUARD_SRC_BOUND_ENGINE_HPP_
