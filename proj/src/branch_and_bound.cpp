#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <queue>

#include "bound_engine.hpp"
#include "region_solver.hpp"
#include "flat_net.hpp"
#include "monoguard/detail/search.hpp"
#include "monoguard/errors.hpp"
#include "monoguard/solver.hpp"

namespace monoguard {

BoxQuery BoxQuery::AtPoint(std::span<const double> x) {
  BoxQuery q;
  for (std::size_t i = 0; i < x.size(); ++i) q.fixed[i] = x[i];
  return q;
}

BoxQuery& BoxQuery::Free(std::size_t i, double lo, double hi) {
  fixed.erase(i);
  free[i] = Interval{lo, hi};
  return *this;
}

void BoxQuery::Validate(const Network& net) const {
  const std::size_t d = net.input_dim();
  const InputBox& box = net.input_box();
  if (fixed.size() + free.size() != d) {
    throw InvalidInputError("query must assign every one of the " +
                            std::to_string(d) + " features exactly once");
  }
  for (const auto& [i, value] : fixed) {
    if (i >= d || free.count(i)) {
      throw InvalidInputError("query feature " + std::to_string(i) +
                              " is out of range or both fixed and free");
    }
    if (!std::isfinite(value) || value < box.lower[i] - kBoxTolerance ||
        value > box.upper[i] + kBoxTolerance) {
      throw InvalidInputError("fixed value for feature " + std::to_string(i) +
                              " lies outside the input box");
    }
  }
  for (const auto& [i, iv] : free) {
    if (i >= d) {
      throw InvalidInputError("query feature " + std::to_string(i) +
                              " is out of range");
    }
    if (!std::isfinite(iv.lo) || !std::isfinite(iv.hi) || iv.lo > iv.hi) {
      throw InvalidInputError("free interval for feature " +
                              std::to_string(i) + " is empty or not finite");
    }
    if (iv.lo < box.lower[i] - kBoxTolerance ||
        iv.hi > box.upper[i] + kBoxTolerance) {
      throw InvalidInputError("free interval for feature " +
                              std::to_string(i) + " leaves the input box");
    }
  }
}

std::vector<double> BoxQuery::Lower(std::size_t dim) const {
  std::vector<double> v(dim, 0.0);
  for (const auto& [i, value] : fixed) {
    if (i < dim) v[i] = value;
  }
  for (const auto& [i, iv] : free) {
    if (i < dim) v[i] = iv.lo;
  }
  return v;
}

std::vector<double> BoxQuery::Upper(std::size_t dim) const {
  std::vector<double> v(dim, 0.0);
  for (const auto& [i, value] : fixed) {
    if (i < dim) v[i] = value;
  }
  for (const auto& [i, iv] : free) {
    if (i < dim) v[i] = iv.hi;
  }
  return v;
}

void SolverConfig::Validate() const {
  if (!(epsilon > 0.0)) throw InvalidInputError("solver epsilon must be > 0");
  if (!(delta >= 0.0)) throw InvalidInputError("solver delta must be >= 0");
  if (max_nodes < 1) throw InvalidInputError("solver max_nodes must be >= 1");
  if (!(neuron_stability_slack >= 0.0)) {
    throw InvalidInputError("solver stability slack must be >= 0");
  }
}

IntervalBounds ComputeIntervalBounds(const Network& net,
                                     const BoxQuery& query) {
  query.Validate(net);
  const std::size_t d = net.input_dim();
  std::vector<double> lo = query.Lower(d);
  std::vector<double> hi = query.Upper(d);
  IntervalBounds result;
  for (const Layer& layer : net.layers()) {
    std::vector<double> next_lo(static_cast<std::size_t>(layer.out_dim()));
    std::vector<double> next_hi(next_lo.size());
    std::vector<Interval> pre(next_lo.size());
    for (Eigen::Index r = 0; r < layer.out_dim(); ++r) {
      double l = layer.biases[r];
      double u = layer.biases[r];
      for (Eigen::Index c = 0; c < layer.in_dim(); ++c) {
        const double w = layer.weights(r, c);
        if (w >= 0.0) {
          l += w * lo[c];
          u += w * hi[c];
        } else {
          l += w * hi[c];
          u += w * lo[c];
        }
      }
      pre[r] = {l, u};
      if (layer.activation == Activation::kRelu) {
        next_lo[r] = std::max(l, 0.0);
        next_hi[r] = std::max(u, 0.0);
      } else {
        next_lo[r] = l;
        next_hi[r] = u;
      }
    }
    if (layer.activation == Activation::kRelu) {
      result.preactivations.push_back(std::move(pre));
    } else {
      result.output = pre.front();
    }
    lo = std::move(next_lo);
    hi = std::move(next_hi);
  }
  return result;
}

namespace detail {

namespace {

struct Node {
  double ub = 0.0;
  std::uint64_t seq = 0;
  std::vector<double> box;  // lo[0..k) then hi[0..k)
};

struct NodeOrder {
  bool operator()(const Node& a, const Node& b) const {
    if (a.ub != b.ub) return a.ub < b.ub;
    return a.seq > b.seq;
  }
};

}  // namespace

ExtremumResult Search(const Network& net, const BoxQuery& query,
                      const SolverConfig& cfg, Sense sense,
                      const SearchOptions& options) {
  cfg.Validate();
  const auto start = std::chrono::steady_clock::now();
  const double sign = sense == Sense::kMaximize ? 1.0 : -1.0;
  const RestrictedNet rn = Restrict(net, query, sign);
  const int k = rn.net.input_dim;
  const auto ku = static_cast<std::size_t>(k);

  std::optional<OrderConstraint> order;
  if (options.ordered) {
    auto position = [&](std::size_t feature) {
      auto it = std::find(rn.free_index.begin(), rn.free_index.end(), feature);
      if (it == rn.free_index.end()) {
        throw InvalidInputError("ordered features must be free coordinates");
      }
      return static_cast<int>(it - rn.free_index.begin());
    };
    order = OrderConstraint{position(options.ordered->first),
                            position(options.ordered->second)};
  }
  const double threshold = options.threshold
                               ? sign * *options.threshold
                               : -std::numeric_limits<double>::infinity();

  BoundEngine engine(rn.net, cfg.neuron_stability_slack);
  RegionSolver region(rn.net);
  constexpr double kRegionBudget = 4096.0;
  const bool use_region = k <= 3;
  std::vector<double> buf_a(static_cast<std::size_t>(rn.net.max_width));
  std::vector<double> buf_b(buf_a.size());
  std::vector<double> scratch(ku);

  double best_value = -std::numeric_limits<double>::infinity();
  std::vector<double> best_point(ku);
  auto consider = [&](const double* z) {
    std::copy(z, z + k, scratch.begin());
    ProjectForOrder(scratch.data(), order);
    const double v = rn.net.Evaluate(scratch.data(), buf_a.data(), buf_b.data());
    if (v > best_value) {
      best_value = v;
      best_point = scratch;
    }
  };
  auto prune_level = [&] {
    return std::max(best_value + cfg.epsilon, threshold);
  };

  std::priority_queue<Node, std::vector<Node>, NodeOrder> heap;
  std::uint64_t seq = 0;
  double closed_max = -std::numeric_limits<double>::infinity();
  std::vector<double> center(ku);

  auto process = [&](std::vector<double>&& box) {
    const double* lo = box.data();
    const double* hi = box.data() + k;
    BoundEngine::Bounds b = engine.Compute(lo, hi, order);
    if (!b.exact && options.certify_nonpositive &&
        options.certify_nonpositive(lo, hi)) {
      b.upper = std::min(b.upper, 0.0);
    }
    consider(engine.argmax().data());
    if (!b.exact) {
      for (int i = 0; i < k; ++i) center[i] = 0.5 * (lo[i] + hi[i]);
      consider(center.data());
    }
    if (use_region && !b.resolved && b.upper > prune_level() &&
        region.Cost(engine.unstable()) <= kRegionBudget) {
      const double exact =
          region.Solve(lo, hi, order, engine.status(), center.data());
      if (std::isfinite(exact)) {
        b.upper = std::min(b.upper, exact);
        b.resolved = true;
        consider(center.data());
      }
    }
    if (b.resolved || b.upper <= prune_level()) {
      closed_max = std::max(closed_max, b.upper);
      return;
    }
    heap.push(Node{b.upper, seq++, std::move(box)});
  };

  std::vector<double> root(2 * ku);
  std::copy(rn.lo.begin(), rn.lo.end(), root.begin());
  std::copy(rn.hi.begin(), rn.hi.end(), root.begin() + k);
  if (!TightenForOrder(root.data(), root.data() + k, order)) {
    throw InvalidInputError("ordered coordinates admit no feasible point");
  }
  for (const FeatureVector& hint : options.hints) {
    if (hint.size() != net.input_dim()) {
      throw InvalidInputError("search hint has the wrong dimension");
    }
    for (int i = 0; i < k; ++i) {
      center[i] = std::clamp(hint[rn.free_index[i]], root[i], root[k + i]);
    }
    consider(center.data());
  }
  process(std::move(root));

  std::int64_t nodes = 0;
  bool complete = true;
  while (!heap.empty()) {
    if (options.stop_at_first && best_value > threshold) break;
    if (heap.top().ub <= prune_level()) break;
    if (nodes >= cfg.max_nodes) {
      complete = false;
      break;
    }
    Node node = heap.top();
    heap.pop();
    ++nodes;

    const double* lo = node.box.data();
    const double* hi = node.box.data() + k;
    int split = -1;
    double widest = 0.0;
    for (int i = 0; i < k; ++i) {
      const double w = hi[i] - lo[i];
      if (w > widest) {
        widest = w;
        split = i;
      }
    }
    if (split < 0 ||
        widest <= 4.0 * std::numeric_limits<double>::epsilon() *
                      std::max({1.0, std::abs(lo[split]), std::abs(hi[split])})) {
      closed_max = std::max(closed_max, node.ub);
      continue;
    }
    const double mid = 0.5 * (lo[split] + hi[split]);
    std::vector<double> left = node.box;
    std::vector<double> right = std::move(node.box);
    left[k + split] = mid;
    right[split] = mid;
    if (TightenForOrder(left.data(), left.data() + k, order)) {
      process(std::move(left));
    }
    if (TightenForOrder(right.data(), right.data() + k, order)) {
      process(std::move(right));
    }
  }
  const double open_max = heap.empty()
                              ? -std::numeric_limits<double>::infinity()
                              : heap.top().ub;
  const double certified = std::max({best_value, closed_max, open_max});

  ExtremumResult result;
  result.witness = rn.Lift(best_point.data());
  result.witness_value = net.EvaluateUnchecked(result.witness);
  result.certified_bound = sign * certified;
  result.gap = std::max(0.0, certified - best_value);
  result.nodes_explored = nodes;
  result.complete = complete;
  result.wall_time = std::chrono::duration<double>(
                         std::chrono::steady_clock::now() - start)
                         .count();
  return result;
}

}  // namespace detail

ExtremumResult Maximize(const Network& net, const BoxQuery& query,
                        const SolverConfig& cfg) {
  return detail::Search(net, query, cfg, Sense::kMaximize, {});
}

ExtremumResult Minimize(const Network& net, const BoxQuery& query,
                        const SolverConfig& cfg) {
  return detail::Search(net, query, cfg, Sense::kMinimize, {});
}

}  // namespace monoguard
