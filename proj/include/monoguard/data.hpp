#ifndef MONOGUARD_DATA_HPP_
#define MONOGUARD_DATA_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "monoguard/dataset.hpp"
#include "monoguard/network.hpp"

namespace monoguard {

enum class ColumnKind { kNumeric, kCategorical, kTarget };
enum class TaskKind { kRegression, kClassification };

struct ColumnSchema {
  std::string name;
  ColumnKind kind = ColumnKind::kNumeric;
  std::optional<Direction> monotone;
};

struct DatasetSchema {
  std::vector<ColumnSchema> columns;
  std::string target;
  TaskKind task = TaskKind::kRegression;

  // Exactly one target column, named `target`; monotone directions only on
  // numeric columns; unique names.
  void Validate() const;
};

// {"columns": [{"name", "kind", "monotone"}], "target": name, "task"?}.
// "task" is "regression" (default) or "classification".
DatasetSchema SchemaFromJson(const std::string& text);
DatasetSchema LoadSchema(const std::filesystem::path& path);

struct FeatureRange {
  std::string column;
  double min = 0.0;
  double max = 0.0;
};

struct NormalizationParams {
  // One entry per numeric column, in schema order.
  std::vector<FeatureRange> numeric;
  // Regression: standardization of the target. Classification: identity.
  TargetTransform target;
  TaskKind task = TaskKind::kRegression;
  // Classification: the raw label mapped to 0 and to 1.
  std::vector<std::string> class_labels;
};

struct LoadedData {
  LabeledDataset data;
  NormalizationParams params;
  InputBox box;
  // Monotone features in the encoded feature space, as declared.
  MonotoneSpec spec;
  std::vector<std::string> feature_names;
  std::size_t dropped_rows = 0;
};

// Numeric features are min-max scaled to [0, 1] over the whole file;
// categorical columns expand to one 0/1 column per distinct value (sorted),
// appended after the numeric features. Rows with a missing cell ("", "?" or
// "NA") are dropped and counted. Classification targets must take exactly
// two distinct values; the smaller one (as numbers if both parse, otherwise
// as strings) maps to 0.
LoadedData LoadCsv(std::string_view text, const DatasetSchema& schema);
LoadedData LoadCsvFile(const std::filesystem::path& path,
                       const DatasetSchema& schema);

// n_folds independent shuffles of [0, n), shuffle f seeded with seed + f.
// Each keeps floor(n * train_fraction) indices for training, the rest for
// testing; both lists are sorted.
std::vector<Fold> MakeFolds(std::size_t n, int n_folds, double train_fraction,
                            std::uint64_t seed);

double DenormalizePrediction(double value, const NormalizationParams& params);

std::string ToString(ColumnKind kind);
std::string ToString(TaskKind kind);

}  // namespace monoguard

#endif  // MONOGUARD_DATA_HPP_
