// Hand-built networks with known shapes, plus a random network generator.
#ifndef MONOGUARD_TESTS_FIXTURES_HPP_
#define MONOGUARD_TESTS_FIXTURES_HPP_

#include <cstdint>
#include <random>
#include <vector>

#include "monoguard/network.hpp"

namespace monoguard::testing {

inline Layer MakeLayer(std::vector<std::vector<double>> rows,
                       std::vector<double> biases, Activation act) {
  Layer layer;
  layer.weights.resize(static_cast<Eigen::Index>(rows.size()),
                       static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < rows[r].size(); ++c) {
      layer.weights(static_cast<Eigen::Index>(r),
                    static_cast<Eigen::Index>(c)) = rows[r][c];
    }
  }
  layer.biases = Eigen::Map<Eigen::VectorXd>(
      biases.data(), static_cast<Eigen::Index>(biases.size()));
  layer.activation = act;
  return layer;
}

// f(x) = ReLU(x) on [-10, 10].
inline Network Ramp() {
  return Network({MakeLayer({{1.0}}, {0.0}, Activation::kRelu),
                  MakeLayer({{1.0}}, {0.0}, Activation::kLinear)},
                 InputBox::Uniform(1, -10.0, 10.0));
}

// f(x) = ReLU(x) - 2 ReLU(x - 1) on [0, 2].
inline Network Tent1D() {
  return Network({MakeLayer({{1.0}, {1.0}}, {0.0, -1.0}, Activation::kRelu),
                  MakeLayer({{1.0, -2.0}}, {0.0}, Activation::kLinear)},
                 InputBox::Uniform(1, 0.0, 2.0));
}

// f(x1, x2) = tent(x1) + tent(x2) on [0, 2]^2.
inline Network Tent2D() {
  return Network(
      {MakeLayer({{1.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}, {0.0, 1.0}},
                 {0.0, -1.0, 0.0, -1.0}, Activation::kRelu),
       MakeLayer({{1.0, -2.0, 1.0, -2.0}}, {0.0}, Activation::kLinear)},
      InputBox::Uniform(2, 0.0, 2.0));
}

// f(x) = ReLU(1 - x) on [-3, 3]; decreasing in feature 0.
inline Network Neg() {
  return Network({MakeLayer({{-1.0}}, {1.0}, Activation::kRelu),
                  MakeLayer({{1.0}}, {0.0}, Activation::kLinear)},
                 InputBox::Uniform(1, -3.0, 3.0));
}

// Exact piecewise-linear interpolant of
// (1,7) (2,13) (3,11) (4,9) (5,10) (6,18) (7,20) on [1, 7]:
// f(x) = 7 + sum_k c_k ReLU(x - k), k = 1..6, with c_k the slope changes.
inline Network House1D() {
  return Network(
      {MakeLayer({{1.0}, {1.0}, {1.0}, {1.0}, {1.0}, {1.0}},
                 {-1.0, -2.0, -3.0, -4.0, -5.0, -6.0}, Activation::kRelu),
       MakeLayer({{6.0, -8.0, 0.0, 3.0, 7.0, -6.0}}, {7.0},
                 Activation::kLinear)},
      InputBox::Uniform(1, 1.0, 7.0));
}

inline const std::vector<double>& HouseValues() {
  static const std::vector<double> values = {7, 13, 11, 9, 10, 18, 20};
  return values;
}

// Three L1 pyramids of radius 1 on [0, 8]^2: height 3 at (3,3), 2 at (1,5),
// 1 at (7,2); zero elsewhere. Per-dimension envelope maxima at (3,5) and (7,5)
// reproduce the ordering f(3,3) > f(1,5) > f(7,2).
inline Network ThreeBumps() {
  struct Bump {
    double cx, cy, height;
  };
  const std::vector<Bump> bumps = {{3, 3, 3}, {1, 5, 2}, {7, 2, 1}};
  std::vector<std::vector<double>> first;
  std::vector<double> first_b;
  std::vector<std::vector<double>> second;
  std::vector<double> second_b;
  std::vector<double> out;
  for (std::size_t k = 0; k < bumps.size(); ++k) {
    const Bump& b = bumps[k];
    // |x - cx| = ReLU(x - cx) + ReLU(cx - x), same for y.
    first.push_back({1, 0});
    first_b.push_back(-b.cx);
    first.push_back({-1, 0});
    first_b.push_back(b.cx);
    first.push_back({0, 1});
    first_b.push_back(-b.cy);
    first.push_back({0, -1});
    first_b.push_back(b.cy);
  }
  for (std::size_t k = 0; k < bumps.size(); ++k) {
    std::vector<double> row(first.size(), 0.0);
    for (std::size_t j = 0; j < 4; ++j) row[4 * k + j] = -1.0;
    second.push_back(row);
    second_b.push_back(1.0);
    out.push_back(bumps[k].height);
  }
  return Network({MakeLayer(first, first_b, Activation::kRelu),
                  MakeLayer(second, second_b, Activation::kRelu),
                  MakeLayer({out}, {0.0}, Activation::kLinear)},
                 InputBox::Uniform(2, 0.0, 8.0));
}

// Random ReLU network with the given hidden widths, standard-normal weights
// and biases, box [lo, hi]^d.
inline Network RandomNetwork(std::mt19937_64& rng, std::size_t dim,
                             const std::vector<int>& hidden, double lo = 0.0,
                             double hi = 1.0) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<Layer> layers;
  Eigen::Index in = static_cast<Eigen::Index>(dim);
  std::vector<int> widths = hidden;
  widths.push_back(1);
  for (std::size_t l = 0; l < widths.size(); ++l) {
    Layer layer;
    layer.weights.resize(widths[l], in);
    layer.biases.resize(widths[l]);
    for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) {
      for (Eigen::Index c = 0; c < in; ++c) layer.weights(r, c) = normal(rng);
      layer.biases[r] = 0.5 * normal(rng);
    }
    layer.activation =
        l + 1 == widths.size() ? Activation::kLinear : Activation::kRelu;
    layers.push_back(std::move(layer));
    in = widths[l];
  }
  return Network(std::move(layers), InputBox::Uniform(dim, lo, hi));
}

inline std::vector<double> RandomPoint(std::mt19937_64& rng,
                                       const InputBox& box) {
  std::vector<double> x(box.dim());
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = std::uniform_real_distribution<double>(box.lower[i],
                                                  box.upper[i])(rng);
  }
  return x;
}

}  // namespace monoguard::testing

#endif  // MONOGUARD_TESTS_FIXTURES_HPP_
