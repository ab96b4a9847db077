#ifndef MONOGUARD_SOLVER_HPP_
#define MONOGUARD_SOLVER_HPP_

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "monoguard/network.hpp"

namespace monoguard {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double width() const { return hi - lo; }
  bool Contains(double v, double tol = 0.0) const {
    return v >= lo - tol && v <= hi + tol;
  }
  bool operator==(const Interval&) const = default;
};

// A sub-box of the input space: every feature is either pinned to a value or
// ranges over a closed interval.
struct BoxQuery {
  std::map<std::size_t, double> fixed;
  std::map<std::size_t, Interval> free;

  // All coordinates fixed at x.
  static BoxQuery AtPoint(std::span<const double> x);
  // Releases coordinate i to [lo, hi].
  BoxQuery& Free(std::size_t i, double lo, double hi);

  // Throws InvalidInputError when the index sets overlap, miss a feature, or
  // leave the network's input box.
  void Validate(const Network& net) const;

  std::vector<double> Lower(std::size_t dim) const;
  std::vector<double> Upper(std::size_t dim) const;
};

struct SolverConfig {
  double epsilon = 1e-6;   // target optimality gap
  double delta = 1e-9;     // margin that realizes strict inequalities
  std::int64_t max_nodes = 1'000'000;
  double neuron_stability_slack = 1e-12;

  void Validate() const;
};

struct ExtremumResult {
  FeatureVector witness;
  double witness_value = 0.0;
  // Sound bound on the true extremum: an upper bound when maximizing, a
  // lower bound when minimizing.
  double certified_bound = 0.0;
  double gap = 0.0;
  std::int64_t nodes_explored = 0;
  double wall_time = 0.0;
  // False when the node budget ran out before the gap closed.
  bool complete = true;
};

enum class Sense { kMaximize, kMinimize };

struct IntervalBounds {
  // Per hidden layer, per neuron preactivation enclosures.
  std::vector<std::vector<Interval>> preactivations;
  Interval output;
};

// Plain interval propagation through the network over the query box.
IntervalBounds ComputeIntervalBounds(const Network& net, const BoxQuery& query);

// Certified branch-and-bound extremum search over the query box.
ExtremumResult Maximize(const Network& net, const BoxQuery& query,
                        const SolverConfig& cfg = {});
ExtremumResult Minimize(const Network& net, const BoxQuery& query,
                        const SolverConfig& cfg = {});

// Exact extremum along a single free coordinate, found by walking the
// activation-pattern breakpoints of the segment.
ExtremumResult LineExtremumExact(const Network& net, const BoxQuery& query,
                                 Sense sense);

// Points of the closed query segment at which the activation pattern
// changes, in increasing order. An endpoint is included when a neuron
// switches exactly there.
std::vector<double> LineBreakpoints(const Network& net, const BoxQuery& query);

struct PairCounterexample {
  FeatureVector x;
  FeatureVector x_prime;
  std::size_t feature = 0;
  double violation = 0.0;  // f(x) - f(x_prime)
};

enum class PairSearchMode { kAny, kMaximal };
enum class VerifyStatus { kMonotone, kCounterexample, kInconclusive };

struct PairSearchResult {
  VerifyStatus status = VerifyStatus::kInconclusive;
  std::optional<PairCounterexample> pair;
  // Upper bound on the violation sup f(x) - f(x') over valid pairs.
  double certified_bound = 0.0;
  std::int64_t nodes_explored = 0;
  double wall_time = 0.0;
};

// Searches for x, x' equal off `feature` with x[feature] <= x'[feature] and
// f(x) > f(x') + delta. kMonotone is a certificate that no such pair exists.
PairSearchResult FindPairCounterexample(const Network& net, std::size_t feature,
                                        const SolverConfig& cfg,
                                        PairSearchMode mode);

std::string ToString(VerifyStatus status);

}  // namespace monoguard

#endif  // MONOGUARD_SOLVER_HPP_
