#include "monoguard/cgl.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <ostream>

#include "monoguard/csv.hpp"
#include "monoguard/envelope.hpp"
#include "monoguard/errors.hpp"
#include "monoguard/parallel.hpp"

namespace monoguard {

namespace {

struct PointCounterexamples {
  std::optional<FeatureVector> upper;
  std::optional<FeatureVector> lower;
  double upper_value = 0.0;
  double lower_value = 0.0;
  int incomplete = 0;
};

double TrainError(const Network& net, const LabeledDataset& data,
                  const TargetTransform& transform) {
  if (net.output_kind() == OutputKind::kBinaryLogit) {
    return 1.0 - Evaluate(net, data, Metric::kAccuracy);
  }
  return Evaluate(net, data, Metric::kMse, transform);
}

std::size_t CountFlagged(const Network& net, const MonotoneSpec& spec,
                         const std::vector<FeatureVector>& points,
                         const CglConfig& cfg) {
  if (points.empty()) return 0;
  return CountCounterexamples(net, spec, points, cfg.solver, cfg.threads).count;
}

}  // namespace

void CglConfig::Validate() const {
  if (iterations < 0) throw InvalidInputError("CGL iterations must be non-negative");
  solver.Validate();
  retrain.Validate();
}

LabeledDataset Augmentation::ToDataset() const {
  LabeledDataset d;
  bool weighted = false;
  for (const AugmentedPoint& p : points) weighted = weighted || p.weight != 1.0;
  for (const AugmentedPoint& p : points) {
    d.inputs.push_back(p.input);
    d.targets.push_back(p.label);
    if (weighted) d.weights.push_back(p.weight);
  }
  return d;
}

Augmentation GenerateAugmentation(const Network& net, const MonotoneSpec& spec,
                                  const LabeledDataset& data, const CglConfig& cfg) {
  cfg.Validate();
  data.Validate(net.input_dim());
  spec.Validate(net.input_dim());
  const CanonicalModel c = Canonicalize(net, spec);
  const std::size_t n = data.size();

  std::vector<PointCounterexamples> found(n);
  if (!spec.empty()) {
    ParallelFor(
        n,
        [&](std::size_t i) {
          const FeatureVector rx = ReflectPoint(data.inputs[i], spec);
          for (EnvelopeKind kind : {EnvelopeKind::kUpper, EnvelopeKind::kLower}) {
            auto r = FindEnvelopeCounterexample(c.net, c.spec, rx, kind, cfg.solver);
            if (!r) continue;
            if (!r->complete) {
              ++found[i].incomplete;
              continue;
            }
            FeatureVector w = ReflectPoint(r->witness, spec);
            if (kind == EnvelopeKind::kUpper) {
              found[i].upper = std::move(w);
              found[i].upper_value = r->witness_value;
            } else {
              found[i].lower = std::move(w);
              found[i].lower_value = r->witness_value;
            }
          }
        },
        cfg.threads);
  }

  Augmentation aug;
  std::vector<AugmentedPoint> extra;
  for (std::size_t i = 0; i < n; ++i) {
    const PointCounterexamples& f = found[i];
    aug.incomplete += static_cast<std::size_t>(f.incomplete);
    double label = data.targets[i];
    double ce_label = data.targets[i];
    if (cfg.labeling == Labeling::kRegressionAverage && (f.upper || f.lower)) {
      double sum = Forward(net, data.inputs[i]);
      int count = 1;
      if (f.upper) {
        sum += f.upper_value;
        ++count;
      }
      if (f.lower) {
        sum += f.lower_value;
        ++count;
      }
      label = sum / count;
      ce_label = label;
    }
    aug.points.push_back({data.inputs[i], label, PointOrigin::kOriginal, i, data.weight(i)});
    if (f.upper) {
      ++aug.upper;
      extra.push_back({*f.upper, ce_label, PointOrigin::kUpperCounterexample, i,
                       data.weight(i)});
    }
    if (f.lower) {
      ++aug.lower;
      extra.push_back({*f.lower, ce_label, PointOrigin::kLowerCounterexample, i,
                       data.weight(i)});
    }
  }
  aug.points.insert(aug.points.end(), std::make_move_iterator(extra.begin()),
                    std::make_move_iterator(extra.end()));
  return aug;
}

CglResult CglTrain(const Network& net, const MonotoneSpec& spec,
                   const LabeledDataset& train, const CglConfig& cfg,
                   const LabeledDataset* test, const TargetTransform& transform) {
  cfg.Validate();
  train.Validate(net.input_dim());
  const auto start = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
        .count();
  };

  auto measure = [&](const Network& model, CglIteration& row) {
    row.train_error = TrainError(model, train, transform);
    row.train_ce_count = CountFlagged(model, spec, train.inputs, cfg);
    if (test) row.test_ce_count = CountFlagged(model, spec, test->inputs, cfg);
  };

  CglResult result{net, 0, {}};
  CglIteration base;
  measure(net, base);
  base.wall_time = elapsed();
  result.history.push_back(base);

  std::vector<Network> models{net};
  Network current = net;
  for (int t = 1; t <= cfg.iterations; ++t) {
    CglIteration row;
    row.iteration = t;
    const Augmentation aug = GenerateAugmentation(current, spec, train, cfg);
    row.counterexamples_added = aug.counterexamples();
    TrainConfig tc = cfg.retrain;
    tc.seed += static_cast<std::uint64_t>(t);
    try {
      current = Train(current, aug.ToDataset(), tc).net;
      measure(current, row);
    } catch (const TrainingDivergedError&) {
      row.diverged = true;
      row.train_error = std::numeric_limits<double>::infinity();
      row.train_ce_count = result.history.back().train_ce_count;
      row.test_ce_count = result.history.back().test_ce_count;
    }
    row.wall_time = elapsed();
    result.history.push_back(row);
    models.push_back(current);
  }

  auto score = [&](const CglIteration& row) {
    return cfg.selection == Selection::kMinTrainError
               ? row.train_error
               : static_cast<double>(row.train_ce_count);
  };
  for (std::size_t i = 1; i < result.history.size(); ++i) {
    const CglIteration& row = result.history[i];
    if (row.diverged) continue;
    if (score(row) < score(result.history[result.selected_iteration])) {
      result.selected_iteration = static_cast<int>(i);
    }
  }
  result.selected = models[result.selected_iteration];
  return result;
}

CeReduction CeReductionReport(const Network& before, const Network& after,
                              const MonotoneSpec& spec,
                              const std::vector<FeatureVector>& train_points,
                              const std::vector<FeatureVector>& test_points,
                              const SolverConfig& cfg, unsigned threads) {
  auto count = [&](const Network& net, const std::vector<FeatureVector>& pts) {
    return pts.empty() ? std::size_t{0}
                       : CountCounterexamples(net, spec, pts, cfg, threads).count;
  };
  auto percent = [](std::size_t b, std::size_t a) {
    if (b == 0) return 0.0;
    return 100.0 * (static_cast<double>(b) - static_cast<double>(a)) /
           static_cast<double>(b);
  };
  CeReduction r;
  r.train_before = count(before, train_points);
  r.train_after = count(after, train_points);
  r.test_before = count(before, test_points);
  r.test_after = count(after, test_points);
  r.train_percent = percent(r.train_before, r.train_after);
  r.test_percent = percent(r.test_before, r.test_after);
  return r;
}

void WriteCglHistory(std::ostream& out, const std::vector<CglIteration>& history) {
  CsvWriter w(out);
  w.Row({"iteration", "train_error", "train_ce_count", "test_ce_count", "wall_time"});
  for (const CglIteration& r : history) {
    w.Row({std::to_string(r.iteration), FormatNumber(r.train_error),
           std::to_string(r.train_ce_count),
           r.test_ce_count ? std::to_string(*r.test_ce_count) : "",
           FormatNumber(r.wall_time)});
  }
}

void WriteAugmentationCsv(std::ostream& out, const Augmentation& aug) {
  CsvWriter w(out);
  w.Row({"parent_index", "origin", "label", "weight", "input_json"});
  for (const AugmentedPoint& p : aug.points) {
    std::string input = "[";
    for (std::size_t i = 0; i < p.input.size(); ++i) {
      if (i) input += ",";
      input += FormatNumber(p.input[i]);
    }
    input += "]";
    w.Row({std::to_string(p.parent_index), ToString(p.origin), FormatNumber(p.label),
           FormatNumber(p.weight), input});
  }
}

std::string ToString(Labeling labeling) {
  return labeling == Labeling::kRegressionAverage ? "regression-average"
                                                  : "classification-copy";
}

std::string ToString(Selection selection) {
  return selection == Selection::kMinTrainError ? "min-train-error"
                                                : "min-counterexamples";
}

std::string ToString(PointOrigin origin) {
  switch (origin) {
    case PointOrigin::kOriginal:
      return "original";
    case PointOrigin::kUpperCounterexample:
      return "upper-ce";
    case PointOrigin::kLowerCounterexample:
      return "lower-ce";
  }
  return "unknown";
}

Labeling ParseLabeling(const std::string& text) {
  if (text == "regression-average") return Labeling::kRegressionAverage;
  if (text == "classification-copy") return Labeling::kClassificationCopy;
  throw InvalidInputError("unknown labeling '" + text + "'");
}

Selection ParseSelection(const std::string& text) {
  if (text == "min-train-error") return Selection::kMinTrainError;
  if (text == "min-counterexamples") return Selection::kMinCounterexamples;
  throw InvalidInputError("unknown selection '" + text + "'");
}

}  // namespace monoguard
