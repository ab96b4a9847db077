#include "flat_net.hpp"

#include <algorithm>

namespace monoguard::detail {

double FlatNet::Evaluate(const double* x, double* buf_a, double* buf_b) const {
  const double* in = x;
  double* out = buf_a;
  for (const FlatLayer& layer : layers) {
    const double* w = layer.w.data();
    for (int r = 0; r < layer.out; ++r) {
      double z = layer.b[r];
      for (int c = 0; c < layer.in; ++c) z += w[c] * in[c];
      w += layer.in;
      out[r] = layer.relu && z < 0.0 ? 0.0 : z;
    }
    in = out;
    out = out == buf_a ? buf_b : buf_a;
  }
  return in[0];
}

FeatureVector RestrictedNet::Lift(const double* z) const {
  FeatureVector x = base_point;
  for (std::size_t k = 0; k < free_index.size(); ++k) x[free_index[k]] = z[k];
  return x;
}

FlatNet Flatten(const Network& net, double sign) {
  FlatNet flat;
  flat.input_dim = static_cast<int>(net.input_dim());
  flat.max_width = flat.input_dim;
  const auto& layers = net.layers();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const Layer& src = layers[l];
    FlatLayer dst;
    dst.in = static_cast<int>(src.in_dim());
    dst.out = static_cast<int>(src.out_dim());
    dst.relu = src.activation == Activation::kRelu;
    const double s = l + 1 == layers.size() ? sign : 1.0;
    dst.w.resize(static_cast<std::size_t>(dst.in) * dst.out);
    dst.b.resize(static_cast<std::size_t>(dst.out));
    for (int r = 0; r < dst.out; ++r) {
      for (int c = 0; c < dst.in; ++c) {
        dst.w[static_cast<std::size_t>(r) * dst.in + c] = s * src.weights(r, c);
      }
      dst.b[r] = s * src.biases[r];
    }
    flat.max_width = std::max(flat.max_width, dst.out);
    flat.layers.push_back(std::move(dst));
  }
  return flat;
}

RestrictedNet Restrict(const Network& net, const BoxQuery& query, double sign) {
  query.Validate(net);
  const std::size_t d = net.input_dim();
  RestrictedNet r;
  r.base_point = query.Lower(d);
  for (const auto& [index, interval] : query.free) {
    r.free_index.push_back(index);
    r.lo.push_back(interval.lo);
    r.hi.push_back(interval.hi);
  }
  FlatNet full = Flatten(net, sign);
  FlatLayer& first = full.layers.front();
  FlatLayer reduced;
  reduced.in = static_cast<int>(r.free_index.size());
  reduced.out = first.out;
  reduced.relu = first.relu;
  reduced.b = first.b;
  reduced.w.resize(static_cast<std::size_t>(reduced.in) * reduced.out);
  for (int row = 0; row < first.out; ++row) {
    const double* w = first.w.data() + static_cast<std::size_t>(row) * first.in;
    for (const auto& [index, value] : query.fixed) {
      reduced.b[row] += w[index] * value;
    }
    for (int k = 0; k < reduced.in; ++k) {
      reduced.w[static_cast<std::size_t>(row) * reduced.in + k] =
          w[r.free_index[k]];
    }
  }
  first = std::move(reduced);
  full.input_dim = static_cast<int>(r.free_index.size());
  full.max_width = full.input_dim;
  for (const FlatLayer& layer : full.layers) {
    full.max_width = std::max(full.max_width, layer.out);
  }
  r.net = std::move(full);
  return r;
}

}  // namespace monoguard::detail
