#ifndef MONOGUARD_CGL_HPP_
#define MONOGUARD_CGL_HPP_

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "monoguard/dataset.hpp"
#include "monoguard/network.hpp"
#include "monoguard/solver.hpp"
#include "monoguard/trainer.hpp"

namespace monoguard {

enum class Labeling { kRegressionAverage, kClassificationCopy };
enum class Selection { kMinTrainError, kMinCounterexamples };
enum class PointOrigin { kOriginal, kUpperCounterexample, kLowerCounterexample };

struct CglConfig {
  int iterations = 5;  // outer rounds T
  Labeling labeling = Labeling::kRegressionAverage;
  Selection selection = Selection::kMinTrainError;
  SolverConfig solver;
  TrainConfig retrain;  // fine-tuning budget per round
  unsigned threads = 0;

  void Validate() const;
};

struct AugmentedPoint {
  FeatureVector input;
  double label = 0.0;
  PointOrigin origin = PointOrigin::kOriginal;
  std::size_t parent_index = 0;
  double weight = 1.0;
};

struct Augmentation {
  // Every original point (possibly relabeled) followed by the
  // counterexamples, in parent order.
  std::vector<AugmentedPoint> points;
  std::size_t upper = 0;
  std::size_t lower = 0;
  std::size_t incomplete = 0;  // queries skipped because the search ran out

  std::size_t counterexamples() const { return upper + lower; }
  LabeledDataset ToDataset() const;
};

// Finds the upper and lower envelope counterexample of every training point.
// Regression: the average of f over the point and its existing
// counterexamples labels each of them, replacing the point's own label.
// Classification: counterexamples copy the point's label. Decreasing
// features in `spec` are handled by canonicalization.
Augmentation GenerateAugmentation(const Network& net, const MonotoneSpec& spec,
                                  const LabeledDataset& data, const CglConfig& cfg);

struct CglIteration {
  int iteration = 0;
  double train_error = 0.0;  // infinity for a diverged round
  std::size_t train_ce_count = 0;
  std::optional<std::size_t> test_ce_count;
  std::size_t counterexamples_added = 0;
  bool diverged = false;
  double wall_time = 0.0;
};

struct CglResult {
  Network selected;
  int selected_iteration = 0;
  std::vector<CglIteration> history;  // iteration 0 is the input network
};

// Rounds 1..T: augment with fresh counterexamples of the current model,
// fine-tune it on the augmented set (round t seeds with retrain.seed + t).
// A round whose training diverges keeps the previous weights and is not
// eligible for selection. Selection picks among rounds 0..T, ties to the
// earliest. train_error is the training MSE on the transform's scale
// (regression) or error rate (classification).
CglResult CglTrain(const Network& net, const MonotoneSpec& spec,
                   const LabeledDataset& train, const CglConfig& cfg,
                   const LabeledDataset* test = nullptr,
                   const TargetTransform& transform = {});

struct CeReduction {
  std::size_t train_before = 0;
  std::size_t train_after = 0;
  std::size_t test_before = 0;
  std::size_t test_after = 0;
  double train_percent = 0.0;  // 100 (before - after) / before, 0 if before = 0
  double test_percent = 0.0;
};

CeReduction CeReductionReport(const Network& before, const Network& after,
                              const MonotoneSpec& spec,
                              const std::vector<FeatureVector>& train_points,
                              const std::vector<FeatureVector>& test_points,
                              const SolverConfig& cfg, unsigned threads = 0);

// Columns iteration, train_error, train_ce_count, test_ce_count, wall_time.
void WriteCglHistory(std::ostream& out, const std::vector<CglIteration>& history);
// Columns parent_index, origin, label, weight, input_json.
void WriteAugmentationCsv(std::ostream& out, const Augmentation& aug);

std::string ToString(Labeling labeling);
std::string ToString(Selection selection);
std::string ToString(PointOrigin origin);
Labeling ParseLabeling(const std::string& text);
Selection ParseSelection(const std::string& text);

}  // namespace monoguard

#endif  // MONOGUARD_CGL_HPP_
