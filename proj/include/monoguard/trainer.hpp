#ifndef MONOGUARD_TRAINER_HPP_
#define MONOGUARD_TRAINER_HPP_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "monoguard/dataset.hpp"
#include "monoguard/network.hpp"

namespace monoguard {

enum class Loss { kMse, kBinaryCrossEntropy };
enum class Metric { kMse, kAccuracy };

struct TrainConfig {
  int batch_size = 32;
  int epochs = 100;
  double learning_rate = 0.01;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  std::uint64_t seed = 0;
  Loss loss = Loss::kMse;

  void Validate() const;
  bool operator==(const TrainConfig&) const = default;
};

struct Architecture {
  int hidden_layers = 1;
  int width = 16;
  bool operator==(const Architecture&) const = default;
};

// Hidden ReLU layers of the given width and one linear output. Hidden
// weights are uniform in +-sqrt(6 / fan_in) and first-layer biases put every
// hyperplane through the center of the input box; other biases and the
// output weights start at zero. With no hidden layer the output weights are
// drawn like hidden ones.
Network InitializeNetwork(const Architecture& arch, const InputBox& box,
                          OutputKind kind, std::uint64_t seed);

// Parameters layer by layer: weights (column-major), then biases.
std::vector<double> FlattenParameters(const Network& net);
Network WithParameters(const Network& net, std::span<const double> params);

// Weighted mean loss over the dataset: sum w_i l_i / sum w_i. MSE is
// (f - y)^2; binary cross-entropy takes f as a logit.
double DatasetLoss(const Network& net, const LabeledDataset& data, Loss loss);

// Gradient of DatasetLoss with respect to FlattenParameters(net). ReLU has
// derivative 0 at 0.
std::vector<double> LossGradient(const Network& net, const LabeledDataset& data,
                                 Loss loss);

class Adam {
 public:
  Adam(std::size_t size, const TrainConfig& cfg);
  void Step(std::span<double> params, std::span<const double> grads);

 private:
  double lr_, beta1_, beta2_, eps_;
  std::vector<double> m_, v_;
  long t_ = 0;
};

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double wall_time = 0.0;
};

struct TrainResult {
  Network net;
  std::vector<EpochRecord> log;
};

// Minibatch Adam. Each epoch visits the examples in a fresh seeded shuffle;
// the loss over the whole dataset is logged after every epoch. Throws
// TrainingDivergedError when that loss is non-finite or above 1e12.
TrainResult Train(const Network& net, const LabeledDataset& data,
                  const TrainConfig& cfg);

// kMse: mean squared error after mapping predictions and targets through
// transform.Denormalize. kAccuracy: fraction with (f >= 0) == (y == 1).
double Evaluate(const Network& net, const LabeledDataset& data, Metric metric,
                const TargetTransform& transform = {});

struct GridSpec {
  std::vector<Architecture> architectures;
  std::vector<TrainConfig> configs;

  std::size_t size() const { return architectures.size() * configs.size(); }
};

struct GridEntry {
  Architecture arch;
  TrainConfig cfg;
  std::vector<double> fold_errors;
  double mean_error = 0.0;  // infinity when any fold diverged
};

struct GridResult {
  std::vector<GridEntry> entries;  // architecture-major grid order
  std::size_t best = 0;
  std::vector<Network> models;  // the best entry's model for each fold
};

struct GridContext {
  InputBox box;
  OutputKind output_kind = OutputKind::kRegression;
  TargetTransform transform;
};

// Trains every (architecture, config) pair on every fold's training part;
// fold f initializes and shuffles with cfg.seed + f. The error of a run is
// its training MSE (regression, denormalized) or training error rate
// (classification). Picks the lowest mean error, ties to the earliest entry.
GridResult GridSearch(const GridSpec& grid, const LabeledDataset& data,
                      const std::vector<Fold>& folds,
                      const GridContext& context, unsigned threads = 0);

struct GradientCheckResult {
  double max_relative = 0.0;
  std::size_t checked = 0;
  std::size_t skipped = 0;  // perturbation flipped a ReLU
};

// Central differences with h = 1e-5 against LossGradient. The relative
// discrepancy is |a - n| / max(|a|, |n|, 1e-3). Parameters whose +-h
// perturbation changes any activation on the dataset are skipped.
GradientCheckResult GradientCheck(const Network& net, const LabeledDataset& data,
                                  const TrainConfig& cfg);

void WriteTrainingLog(std::ostream& out, const std::vector<EpochRecord>& log);

std::string ToString(Loss loss);
Loss ParseLoss(const std::string& text);

}  // namespace monoguard

#endif  // MONOGUARD_TRAINER_HPP_
