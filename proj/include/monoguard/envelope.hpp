#ifndef MONOGUARD_ENVELOPE_HPP_
#define MONOGUARD_ENVELOPE_HPP_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "monoguard/network.hpp"
#include "monoguard/solver.hpp"

namespace monoguard {

enum class EnvelopeKind { kUpper, kLower };

enum class PredictionSource {
  kOriginal,        // f(x) itself
  kCounterexample,  // f at a dominated (upper) or dominating (lower) point
  kBound,           // solver budget ran out; value is the certified bound
};

struct EnvelopePrediction {
  double value = 0.0;
  PredictionSource source = PredictionSource::kOriginal;
  std::optional<FeatureVector> witness;
  double f_x = 0.0;
  double solver_gap = 0.0;
  double query_time = 0.0;
  std::int64_t nodes_explored = 0;
  bool complete = true;
  // sigmoid(value) for binary-logit networks.
  std::optional<double> probability;
};

// The search box for an envelope query at x: features in S range over
// [L_i, x_i] (upper) or [x_i, U_i] (lower); all others stay at x.
BoxQuery EnvelopeQuery(const Network& net, const MonotoneSpec& spec,
                       std::span<const double> x, EnvelopeKind kind);

// Upper: the maximizer of f over the dominated box, returned only when its
// value exceeds f(x) + delta. Lower: the minimizer over the dominating box,
// returned only when below f(x) - delta. The spec must be canonical and
// non-empty. An incomplete search is returned with complete = false when its
// certified bound leaves the question open.
std::optional<ExtremumResult> FindEnvelopeCounterexample(
    const Network& net, const MonotoneSpec& spec, std::span<const double> x,
    EnvelopeKind kind, const SolverConfig& cfg);

// Envelope value at x. Decreasing features in `spec` are handled by
// canonicalizing first; witnesses are reported in the caller's coordinates.
EnvelopePrediction PredictEnvelope(const Network& net, const MonotoneSpec& spec,
                                   std::span<const double> x, EnvelopeKind kind,
                                   const SolverConfig& cfg);

// One prediction per point, computed in parallel (threads = 0 uses all
// hardware threads); the output order and values do not depend on threading.
std::vector<EnvelopePrediction> PredictEnvelopeBatch(
    const Network& net, const MonotoneSpec& spec,
    const std::vector<FeatureVector>& points, EnvelopeKind kind,
    const SolverConfig& cfg, unsigned threads = 0);

struct CounterexampleCount {
  std::size_t count = 0;
  double fraction = 0.0;
  std::vector<bool> flags;       // upper or lower counterexample exists
  std::vector<bool> upper;
  std::vector<bool> lower;
  std::size_t incomplete = 0;    // queries that ran out of budget
};

// Flags every point that has an upper or a lower envelope counterexample.
CounterexampleCount CountCounterexamples(const Network& net,
                                         const MonotoneSpec& spec,
                                         const std::vector<FeatureVector>& points,
                                         const SolverConfig& cfg,
                                         unsigned threads = 0);

// Sampled monotonicity check of the envelope itself. For each point and
// each feature in S, the envelope is evaluated at `steps` evenly spaced
// values of that feature (others held) plus the point itself; a point is
// flagged when some ordered pair decreases (upper and lower envelopes
// separately) by more than `slack`. Returns the number of flagged points.
std::size_t SampledEnvelopeViolations(const Network& net,
                                      const MonotoneSpec& spec,
                                      const std::vector<FeatureVector>& points,
                                      const SolverConfig& cfg, int steps,
                                      double slack, unsigned threads = 0);

// CSV with columns point_id, f_x, envelope_value, source, witness_json,
// gap, time_s.
void WriteEnvelopeCsv(std::ostream& out,
                      const std::vector<EnvelopePrediction>& predictions);

std::string ToString(EnvelopeKind kind);
EnvelopeKind ParseEnvelopeKind(const std::string& text);
std::string ToString(PredictionSource source);

}  // namespace monoguard

#endif  // MONOGUARD_ENVELOPE_HPP_
