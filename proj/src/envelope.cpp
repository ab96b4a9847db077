#include "monoguard/envelope.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <ostream>

#include "monoguard/csv.hpp"
#include "monoguard/detail/search.hpp"
#include "monoguard/errors.hpp"
#include "monoguard/parallel.hpp"

namespace monoguard {

namespace {

struct Outcome {
  ExtremumResult search;
  double f_x = 0.0;
  bool found = false;  // witness passes the threshold
  bool open = false;   // budget ran out and the bound still passes it
};

Outcome Run(const Network& net, const MonotoneSpec& spec,
            std::span<const double> x, EnvelopeKind kind,
            const SolverConfig& cfg, bool existence_only) {
  if (!spec.IsCanonical()) {
    throw InvalidInputError("envelope queries need a canonical (all increasing) spec");
  }
  if (spec.empty()) throw InvalidInputError("envelope queries need a non-empty spec");
  cfg.Validate();
  Outcome out;
  out.f_x = Forward(net, x);
  const BoxQuery query = EnvelopeQuery(net, spec, x, kind);
  const bool upper = kind == EnvelopeKind::kUpper;
  const Sense sense = upper ? Sense::kMaximize : Sense::kMinimize;
  const double threshold = upper ? out.f_x + cfg.delta : out.f_x - cfg.delta;
  auto passes = [&](double v) { return upper ? v > threshold : v < threshold; };

  if (query.free.size() == 1) {
    out.search = LineExtremumExact(net, query, sense);
  } else {
    detail::SearchOptions options;
    options.threshold = threshold;
    options.stop_at_first = existence_only;
    options.hints.emplace_back(x.begin(), x.end());
    out.search = detail::Search(net, query, cfg, sense, options);
  }
  out.found = passes(out.search.witness_value);
  out.open = !out.found && !out.search.complete &&
             passes(out.search.certified_bound);
  return out;
}

std::string WitnessJson(const std::optional<FeatureVector>& w) {
  if (!w) return "";
  std::string s = "[";
  for (std::size_t i = 0; i < w->size(); ++i) {
    if (i) s += ",";
    s += FormatNumber((*w)[i]);
  }
  return s + "]";
}

EnvelopePrediction PredictCanonical(const Network& net, const MonotoneSpec& spec,
                                    std::span<const double> x, EnvelopeKind kind,
                                    const SolverConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  EnvelopePrediction p;
  if (spec.empty()) {
    p.f_x = Forward(net, x);
    p.value = p.f_x;
  } else {
    const Outcome o = Run(net, spec, x, kind, cfg, false);
    const bool upper = kind == EnvelopeKind::kUpper;
    p.f_x = o.f_x;
    p.value = o.f_x;
    p.solver_gap = o.search.gap;
    p.nodes_explored = o.search.nodes_explored;
    p.complete = o.search.complete;
    if (o.found) {
      p.source = PredictionSource::kCounterexample;
      p.value = o.search.witness_value;
      p.witness = o.search.witness;
    }
    if (o.open || (o.found && !o.search.complete)) {
      // Never under-report the envelope: fall back to the sound bound.
      p.source = PredictionSource::kBound;
      p.value = upper ? std::max(p.value, o.search.certified_bound)
                      : std::min(p.value, o.search.certified_bound);
      p.witness = o.search.witness;
    }
  }
  if (net.output_kind() == OutputKind::kBinaryLogit) {
    p.probability = 1.0 / (1.0 + std::exp(-p.value));
  }
  p.query_time = std::chrono::duration<double>(
                     std::chrono::steady_clock::now() - start)
                     .count();
  return p;
}

}  // namespace

BoxQuery EnvelopeQuery(const Network& net, const MonotoneSpec& spec,
                       std::span<const double> x, EnvelopeKind kind) {
  const InputBox& box = net.input_box();
  if (x.size() != box.dim()) {
    throw InvalidInputError("point has dimension " + std::to_string(x.size()) +
                            ", network expects " + std::to_string(box.dim()));
  }
  BoxQuery q = BoxQuery::AtPoint(x);
  for (const MonotoneFeature& f : spec.entries()) {
    const std::size_t i = f.index;
    const double xi = std::clamp(x[i], box.lower[i], box.upper[i]);
    const bool dominated = (kind == EnvelopeKind::kUpper) ==
                           (f.direction == Direction::kIncreasing);
    if (dominated) {
      q.Free(i, box.lower[i], xi);
    } else {
      q.Free(i, xi, box.upper[i]);
    }
  }
  return q;
}

std::optional<ExtremumResult> FindEnvelopeCounterexample(
    const Network& net, const MonotoneSpec& spec, std::span<const double> x,
    EnvelopeKind kind, const SolverConfig& cfg) {
  Outcome o = Run(net, spec, x, kind, cfg, false);
  if (o.found || o.open) return std::move(o.search);
  return std::nullopt;
}

EnvelopePrediction PredictEnvelope(const Network& net, const MonotoneSpec& spec,
                                   std::span<const double> x, EnvelopeKind kind,
                                   const SolverConfig& cfg) {
  if (spec.IsCanonical()) return PredictCanonical(net, spec, x, kind, cfg);
  const CanonicalModel c = Canonicalize(net, spec);
  const FeatureVector rx = ReflectPoint(x, spec);
  EnvelopePrediction p = PredictCanonical(c.net, c.spec, rx, kind, cfg);
  if (p.witness) p.witness = ReflectPoint(*p.witness, spec);
  return p;
}

std::vector<EnvelopePrediction> PredictEnvelopeBatch(
    const Network& net, const MonotoneSpec& spec,
    const std::vector<FeatureVector>& points, EnvelopeKind kind,
    const SolverConfig& cfg, unsigned threads) {
  spec.Validate(net.input_dim());
  const CanonicalModel c = Canonicalize(net, spec);
  std::vector<EnvelopePrediction> out(points.size());
  ParallelFor(
      points.size(),
      [&](std::size_t i) {
        const FeatureVector rx = ReflectPoint(points[i], spec);
        out[i] = PredictCanonical(c.net, c.spec, rx, kind, cfg);
        if (out[i].witness) out[i].witness = ReflectPoint(*out[i].witness, spec);
      },
      threads);
  return out;
}

CounterexampleCount CountCounterexamples(const Network& net,
                                         const MonotoneSpec& spec,
                                         const std::vector<FeatureVector>& points,
                                         const SolverConfig& cfg,
                                         unsigned threads) {
  spec.Validate(net.input_dim());
  CounterexampleCount result;
  const std::size_t n = points.size();
  result.flags.assign(n, false);
  result.upper.assign(n, false);
  result.lower.assign(n, false);
  if (spec.empty() || n == 0) return result;
  const CanonicalModel c = Canonicalize(net, spec);
  std::vector<char> up(n, 0), low(n, 0), open(n, 0);
  ParallelFor(
      n,
      [&](std::size_t i) {
        const FeatureVector rx = ReflectPoint(points[i], spec);
        const Outcome u = Run(c.net, c.spec, rx, EnvelopeKind::kUpper, cfg, true);
        const Outcome l = Run(c.net, c.spec, rx, EnvelopeKind::kLower, cfg, true);
        up[i] = u.found;
        low[i] = l.found;
        open[i] = (!u.found && u.open) || (!l.found && l.open);
      },
      threads);
  for (std::size_t i = 0; i < n; ++i) {
    result.upper[i] = up[i];
    result.lower[i] = low[i];
    result.flags[i] = up[i] || low[i];
    if (result.flags[i]) ++result.count;
    if (!result.flags[i] && open[i]) ++result.incomplete;
  }
  result.fraction = static_cast<double>(result.count) / static_cast<double>(n);
  return result;
}

std::size_t SampledEnvelopeViolations(const Network& net,
                                      const MonotoneSpec& spec,
                                      const std::vector<FeatureVector>& points,
                                      const SolverConfig& cfg, int steps,
                                      double slack, unsigned threads) {
  spec.Validate(net.input_dim());
  if (steps < 2) throw InvalidInputError("need at least two sample steps");
  const CanonicalModel c = Canonicalize(net, spec);
  const InputBox& box = c.net.input_box();
  std::vector<char> flagged(points.size(), 0);
  ParallelFor(
      points.size(),
      [&](std::size_t p) {
        const FeatureVector rx = ReflectPoint(points[p], spec);
        for (const MonotoneFeature& f : c.spec.entries()) {
          const std::size_t i = f.index;
          std::vector<double> ts;
          for (int s = 0; s < steps; ++s) {
            ts.push_back(box.lower[i] +
                         (box.upper[i] - box.lower[i]) * s / (steps - 1));
          }
          ts.push_back(std::clamp(rx[i], box.lower[i], box.upper[i]));
          std::sort(ts.begin(), ts.end());
          for (EnvelopeKind kind : {EnvelopeKind::kUpper, EnvelopeKind::kLower}) {
            double running = -std::numeric_limits<double>::infinity();
            FeatureVector y = rx;
            for (double t : ts) {
              y[i] = t;
              const double v = PredictCanonical(c.net, c.spec, y, kind, cfg).value;
              if (v < running - slack) flagged[p] = 1;
              running = std::max(running, v);
            }
          }
        }
      },
      threads);
  return static_cast<std::size_t>(
      std::count(flagged.begin(), flagged.end(), 1));
}

void WriteEnvelopeCsv(std::ostream& out,
                      const std::vector<EnvelopePrediction>& predictions) {
  CsvWriter w(out);
  w.Row({"point_id", "f_x", "envelope_value", "source", "witness_json", "gap",
         "time_s"});
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const EnvelopePrediction& p = predictions[i];
    w.Row({std::to_string(i), FormatNumber(p.f_x), FormatNumber(p.value),
           ToString(p.source), WitnessJson(p.witness), FormatNumber(p.solver_gap),
           FormatNumber(p.query_time)});
  }
}

std::string ToString(EnvelopeKind kind) {
  return kind == EnvelopeKind::kUpper ? "upper" : "lower";
}

EnvelopeKind ParseEnvelopeKind(const std::string& text) {
  if (text == "upper") return EnvelopeKind::kUpper;
  if (text == "lower") return EnvelopeKind::kLower;
  throw InvalidInputError("envelope mode must be 'upper' or 'lower', got '" +
                          text + "'");
}

std::string ToString(PredictionSource source) {
  switch (source) {
    case PredictionSource::kOriginal:
      return "original";
    case PredictionSource::kCounterexample:
      return "counterexample";
    case PredictionSource::kBound:
      return "bound";
  }
  return "unknown";
}

}  // namespace monoguard
