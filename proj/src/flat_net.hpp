#ifndef MONOGUARD_SRC_FLAT_NET_HPP_
#define MONOGUARD_SRC_FLAT_NET_HPP_

#include <cstddef>
#include <vector>

#include "monoguard/network.hpp"
#include "monoguard/solver.hpp"

namespace monoguard::detail {

// Row-major copy of a network tuned for the hot loops of the solvers.
struct FlatLayer {
  int in = 0;
  int out = 0;
  bool relu = false;
  std::vector<double> w;  // out x in, row-major
  std::vector<double> b;
};

struct FlatNet {
  int input_dim = 0;
  int max_width = 0;
  std::vector<FlatLayer> layers;

  // Scratch buffers must hold max_width doubles each.
  double Evaluate(const double* x, double* buf_a, double* buf_b) const;
};

// The network restricted to the free coordinates of a query. Fixed
// coordinates are folded into the first-layer biases and the output is
// multiplied by `sign`, so maximizing the flat net maximizes sign * f.
struct RestrictedNet {
  FlatNet net;
  std::vector<std::size_t> free_index;  // restricted coord -> feature index
  std::vector<double> base_point;       // full point carrying fixed values
  std::vector<double> lo;
  std::vector<double> hi;

  FeatureVector Lift(const double* z) const;
};

FlatNet Flatten(const Network& net, double sign);
RestrictedNet Restrict(const Network& net, const BoxQuery& query, double sign);

}  // namespace monoguard::detail

#endif  // MONOGUARD_SRC_FLAT_NET_HPP_
