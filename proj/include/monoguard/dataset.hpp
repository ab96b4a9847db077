#ifndef MONOGUARD_DATASET_HPP_
#define MONOGUARD_DATASET_HPP_

#include <cstddef>
#include <vector>

#include "monoguard/network.hpp"

namespace monoguard {

struct LabeledDataset {
  std::vector<FeatureVector> inputs;
  std::vector<double> targets;
  // Empty means every example has weight 1.
  std::vector<double> weights;

  std::size_t size() const { return inputs.size(); }
  bool empty() const { return inputs.empty(); }
  double weight(std::size_t i) const { return weights.empty() ? 1.0 : weights[i]; }

  // Equal lengths, a common input dimension (dim, when nonzero), finite
  // targets and non-negative finite weights.
  void Validate(std::size_t dim = 0) const;

  LabeledDataset Subset(const std::vector<std::size_t>& indices) const;
  void Append(const FeatureVector& x, double y, double w = 1.0);
};

struct Fold {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
  bool operator==(const Fold&) const = default;
};

// y_normalized = (y - mean) / scale.
struct TargetTransform {
  double mean = 0.0;
  double scale = 1.0;

  double Normalize(double y) const { return (y - mean) / scale; }
  double Denormalize(double v) const { return v * scale + mean; }
  bool operator==(const TargetTransform&) const = default;
};

}  // namespace monoguard

#endif  // MONOGUARD_DATASET_HPP_
