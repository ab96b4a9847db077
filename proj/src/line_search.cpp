#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "flat_net.hpp"
#include "monoguard/errors.hpp"
#include "monoguard/solver.hpp"

namespace monoguard {

namespace {

struct SegmentWalk {
  std::vector<double> points;  // a, interior breakpoints..., b
  std::vector<double> values;  // f at each point
  std::int64_t segments = 0;
};

// Walks t from lo to hi. Between breakpoints every neuron keeps its state, so
// preactivations are affine in t; the next breakpoint is the nearest zero of
// a preactivation heading towards zero.
SegmentWalk Walk(const detail::RestrictedNet& rn) {
  const detail::FlatNet& net = rn.net;
  const double lo = rn.lo[0];
  const double hi = rn.hi[0];
  const auto width = static_cast<std::size_t>(net.max_width);
  std::vector<double> val_a(width), val_b(width), slope_a(width),
      slope_b(width);
  std::vector<double> buf_a(width), buf_b(width);

  SegmentWalk walk;
  auto record = [&](double t) {
    walk.points.push_back(t);
    walk.values.push_back(net.Evaluate(&t, buf_a.data(), buf_b.data()));
  };

  double t = lo;
  record(t);
  constexpr std::int64_t kMaxSteps = 50'000'000;
  while (t < hi && walk.segments < kMaxSteps) {
    ++walk.segments;
    double* in_val = val_a.data();
    double* in_slope = slope_a.data();
    double* out_val = val_b.data();
    double* out_slope = slope_b.data();
    in_val[0] = t;
    in_slope[0] = 1.0;
    double step = std::numeric_limits<double>::infinity();
    for (const detail::FlatLayer& layer : net.layers) {
      const double* w = layer.w.data();
      for (int r = 0; r < layer.out; ++r, w += layer.in) {
        double z = layer.b[r];
        double dz = 0.0;
        double scale = std::abs(layer.b[r]);
        for (int c = 0; c < layer.in; ++c) {
          z += w[c] * in_val[c];
          dz += w[c] * in_slope[c];
          scale += std::abs(w[c] * in_val[c]);
        }
        if (!layer.relu) {
          out_val[r] = z;
          out_slope[r] = dz;
          continue;
        }
        const double tol = 1e-12 * (1.0 + scale);
        const bool active = z > tol || (std::abs(z) <= tol && dz > 0.0);
        if (active && dz < 0.0) {
          step = std::min(step, z / -dz);
        } else if (!active && dz > 0.0 && z < -tol) {
          step = std::min(step, -z / dz);
        }
        out_val[r] = active ? z : 0.0;
        out_slope[r] = active ? dz : 0.0;
      }
      std::swap(in_val, out_val);
      std::swap(in_slope, out_slope);
    }
    double next = t + step;
    if (!(next > t)) next = std::nextafter(t, hi);
    if (next >= hi) break;
    record(next);
    t = next;
  }
  record(hi);
  return walk;
}

// On/off state (preactivation > 0) of every hidden neuron at t.
std::vector<bool> Pattern(const detail::FlatNet& net, double t) {
  std::vector<bool> bits;
  std::vector<double> a(static_cast<std::size_t>(net.max_width));
  std::vector<double> b(a.size());
  const double* in = &t;
  double* out = a.data();
  for (const detail::FlatLayer& layer : net.layers) {
    const double* w = layer.w.data();
    for (int r = 0; r < layer.out; ++r, w += layer.in) {
      double z = layer.b[r];
      for (int c = 0; c < layer.in; ++c) z += w[c] * in[c];
      if (layer.relu) {
        bits.push_back(z > 0.0);
        z = std::max(z, 0.0);
      }
      out[r] = z;
    }
    in = out;
    out = out == a.data() ? b.data() : a.data();
  }
  return bits;
}

const Interval& SingleFree(const BoxQuery& query) {
  if (query.free.size() != 1) {
    throw InvalidInputError("line search needs exactly one free coordinate");
  }
  return query.free.begin()->second;
}

}  // namespace

std::vector<double> LineBreakpoints(const Network& net, const BoxQuery& query) {
  SingleFree(query);
  const detail::RestrictedNet rn = detail::Restrict(net, query, 1.0);
  const SegmentWalk walk = Walk(rn);
  std::vector<double> out;
  const double lo = rn.lo[0];
  const double hi = rn.hi[0];
  if (!(hi > lo)) return out;
  const double merge = 1e-9 * (1.0 + std::abs(hi - lo));
  // An endpoint counts when the pattern there differs from the pattern just
  // inside the segment (a neuron switching exactly at the end of the box).
  const std::vector<double>& pts = walk.points;
  if (Pattern(rn.net, lo) != Pattern(rn.net, 0.5 * (pts[0] + pts[1]))) {
    out.push_back(lo);
  }
  for (std::size_t i = 1; i + 1 < pts.size(); ++i) {
    const double t = pts[i];
    if (t - lo <= merge || hi - t <= merge) continue;
    if (!out.empty() && t - out.back() <= merge) continue;
    out.push_back(t);
  }
  const std::size_t n = pts.size();
  if (Pattern(rn.net, hi) != Pattern(rn.net, 0.5 * (pts[n - 2] + pts[n - 1]))) {
    out.push_back(hi);
  }
  return out;
}

ExtremumResult LineExtremumExact(const Network& net, const BoxQuery& query,
                                 Sense sense) {
  const auto start = std::chrono::steady_clock::now();
  SingleFree(query);
  const detail::RestrictedNet rn = detail::Restrict(net, query, 1.0);
  const SegmentWalk walk = Walk(rn);

  std::size_t best = 0;
  for (std::size_t i = 1; i < walk.values.size(); ++i) {
    const bool better = sense == Sense::kMaximize
                            ? walk.values[i] > walk.values[best]
                            : walk.values[i] < walk.values[best];
    if (better) best = i;
  }
  ExtremumResult result;
  result.witness = rn.Lift(&walk.points[best]);
  result.witness_value = net.EvaluateUnchecked(result.witness);
  result.certified_bound = result.witness_value;
  result.gap = 0.0;
  result.nodes_explored = walk.segments;
  result.complete = true;
  result.wall_time = std::chrono::duration<double>(
                         std::chrono::steady_clock::now() - start)
                         .count();
  return result;
}

}  // namespace monoguard
