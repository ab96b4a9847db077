#include <algorithm>
#include <chrono>

#include "flat_net.hpp"
#include "monoguard/detail/search.hpp"
#include "monoguard/errors.hpp"
#include "monoguard/solver.hpp"

namespace monoguard {

namespace {

// g(s, t, t') = f(s with x[feature]=t) - f(s with x[feature]=t'), as one
// network over d + 1 inputs; input d carries t'.
Network TwinNetwork(const Network& net, std::size_t feature) {
  const std::vector<Layer>& layers = net.layers();
  const auto d = static_cast<Eigen::Index>(net.input_dim());
  const auto f = static_cast<Eigen::Index>(feature);
  std::vector<Layer> twin;

  for (std::size_t l = 0; l < layers.size(); ++l) {
    const Layer& src = layers[l];
    const Eigen::Index out = src.out_dim();
    const Eigen::Index in = src.in_dim();
    const bool last = l + 1 == layers.size();
    Layer dst;
    dst.activation = src.activation;
    if (l == 0) {
      Eigen::MatrixXd copy_b = src.weights;
      copy_b.col(f).setZero();
      Eigen::MatrixXd lifted_b(out, d + 1);
      lifted_b << copy_b, src.weights.col(f);
      Eigen::MatrixXd lifted_a(out, d + 1);
      lifted_a << src.weights, Eigen::VectorXd::Zero(out);
      if (last) {
        dst.weights = lifted_a - lifted_b;
        dst.biases = Eigen::VectorXd::Zero(1);
      } else {
        dst.weights.resize(2 * out, d + 1);
        dst.weights << lifted_a, lifted_b;
        dst.biases.resize(2 * out);
        dst.biases << src.biases, src.biases;
      }
    } else if (last) {
      dst.weights.resize(1, 2 * in);
      dst.weights << src.weights, -src.weights;
      dst.biases = Eigen::VectorXd::Zero(1);
    } else {
      dst.weights = Eigen::MatrixXd::Zero(2 * out, 2 * in);
      dst.weights.topLeftCorner(out, in) = src.weights;
      dst.weights.bottomRightCorner(out, in) = src.weights;
      dst.biases.resize(2 * out);
      dst.biases << src.biases, src.biases;
    }
    twin.push_back(std::move(dst));
  }

  InputBox box = net.input_box();
  box.lower.push_back(box.lower[feature]);
  box.upper.push_back(box.upper[feature]);
  return Network(std::move(twin), std::move(box), OutputKind::kRegression);
}

// Interval enclosure of the partial derivative of f along `feature` over a
// box. Neurons whose preactivation interval straddles zero contribute a
// derivative factor in [0, 1].
class SlopeBound {
 public:
  SlopeBound(const Network& net, std::size_t feature)
      : net_(detail::Flatten(net, 1.0)), feature_(static_cast<int>(feature)) {
    const auto w = static_cast<std::size_t>(net_.max_width);
    for (auto* v : {&lo_a_, &hi_a_, &lo_b_, &hi_b_, &dlo_a_, &dhi_a_, &dlo_b_,
                    &dhi_b_}) {
      v->resize(w);
    }
  }

  // Lower end of the derivative enclosure over [lo, hi].
  double MinSlope(const double* lo, const double* hi) {
    double* vlo = lo_a_.data();
    double* vhi = hi_a_.data();
    double* dlo = dlo_a_.data();
    double* dhi = dhi_a_.data();
    double* nlo = lo_b_.data();
    double* nhi = hi_b_.data();
    double* ndlo = dlo_b_.data();
    double* ndhi = dhi_b_.data();
    std::copy(lo, lo + net_.input_dim, vlo);
    std::copy(hi, hi + net_.input_dim, vhi);
    std::fill(dlo, dlo + net_.input_dim, 0.0);
    std::fill(dhi, dhi + net_.input_dim, 0.0);
    dlo[feature_] = dhi[feature_] = 1.0;
    for (const detail::FlatLayer& layer : net_.layers) {
      const double* w = layer.w.data();
      for (int r = 0; r < layer.out; ++r, w += layer.in) {
        double zl = layer.b[r], zh = layer.b[r], gl = 0.0, gh = 0.0;
        for (int c = 0; c < layer.in; ++c) {
          if (w[c] >= 0.0) {
            zl += w[c] * vlo[c];
            zh += w[c] * vhi[c];
            gl += w[c] * dlo[c];
            gh += w[c] * dhi[c];
          } else {
            zl += w[c] * vhi[c];
            zh += w[c] * vlo[c];
            gl += w[c] * dhi[c];
            gh += w[c] * dlo[c];
          }
        }
        if (layer.relu) {
          if (zh <= 0.0) {
            gl = gh = 0.0;
          } else if (zl < 0.0) {
            gl = std::min(gl, 0.0);
            gh = std::max(gh, 0.0);
          }
          zl = std::max(zl, 0.0);
          zh = std::max(zh, 0.0);
        }
        nlo[r] = zl;
        nhi[r] = zh;
        ndlo[r] = gl;
        ndhi[r] = gh;
      }
      std::swap(vlo, nlo);
      std::swap(vhi, nhi);
      std::swap(dlo, ndlo);
      std::swap(dhi, ndhi);
    }
    return dlo[0];
  }

 private:
  detail::FlatNet net_;
  int feature_;
  std::vector<double> lo_a_, hi_a_, lo_b_, hi_b_;
  std::vector<double> dlo_a_, dhi_a_, dlo_b_, dhi_b_;
};

}  // namespace

PairSearchResult FindPairCounterexample(const Network& net, std::size_t feature,
                                        const SolverConfig& cfg,
                                        PairSearchMode mode) {
  cfg.Validate();
  const std::size_t d = net.input_dim();
  if (feature >= d) {
    throw InvalidInputError("feature index " + std::to_string(feature) +
                            " out of range");
  }
  const auto start = std::chrono::steady_clock::now();
  const Network twin = TwinNetwork(net, feature);

  BoxQuery query;
  for (std::size_t i = 0; i <= d; ++i) {
    query.Free(i, twin.input_box().lower[i], twin.input_box().upper[i]);
  }
  detail::SearchOptions options;
  options.threshold = cfg.delta;
  options.stop_at_first = mode == PairSearchMode::kAny;
  options.ordered = std::make_pair(feature, d);
  // Where f is nondecreasing along the feature over the hull of the t and t'
  // ranges, no pair in the sub-box can violate monotonicity.
  SlopeBound slope(net, feature);
  std::vector<double> hull_lo(d), hull_hi(d);
  options.certify_nonpositive = [&](const double* lo, const double* hi) {
    std::copy(lo, lo + d, hull_lo.begin());
    std::copy(hi, hi + d, hull_hi.begin());
    hull_lo[feature] = std::min(lo[feature], lo[d]);
    hull_hi[feature] = std::max(hi[feature], hi[d]);
    return slope.MinSlope(hull_lo.data(), hull_hi.data()) >= 0.0;
  };
  const ExtremumResult r =
      detail::Search(twin, query, cfg, Sense::kMaximize, options);

  PairSearchResult result;
  result.nodes_explored = r.nodes_explored;
  result.certified_bound = r.certified_bound;
  if (r.witness_value > cfg.delta) {
    PairCounterexample pair;
    pair.feature = feature;
    pair.x.assign(r.witness.begin(), r.witness.begin() + static_cast<long>(d));
    pair.x_prime = pair.x;
    pair.x_prime[feature] = r.witness[d];
    pair.violation =
        net.EvaluateUnchecked(pair.x) - net.EvaluateUnchecked(pair.x_prime);
    result.status = VerifyStatus::kCounterexample;
    result.pair = std::move(pair);
  } else if (r.complete) {
    result.status = VerifyStatus::kMonotone;
  } else {
    result.status = VerifyStatus::kInconclusive;
  }
  result.wall_time = std::chrono::duration<double>(
                         std::chrono::steady_clock::now() - start)
                         .count();
  return result;
}

std::string ToString(VerifyStatus status) {
  switch (status) {
    case VerifyStatus::kMonotone:
      return "monotone";
    case VerifyStatus::kCounterexample:
      return "counterexample";
    case VerifyStatus::kInconclusive:
      return "inconclusive";
  }
  return "unknown";
}

}  // namespace monoguard
