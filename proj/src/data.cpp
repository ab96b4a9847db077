#include "monoguard/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <set>

#include "json_util.hpp"
#include "monoguard/csv.hpp"
#include "monoguard/errors.hpp"
#include "monoguard/random.hpp"

namespace monoguard {

using detail::json;

void LabeledDataset::Validate(std::size_t dim) const {
  if (targets.size() != inputs.size()) {
    throw InvalidInputError("dataset has " + std::to_string(inputs.size()) +
                            " inputs but " + std::to_string(targets.size()) +
                            " targets");
  }
  if (!weights.empty() && weights.size() != inputs.size()) {
    throw InvalidInputError("dataset weights do not match its size");
  }
  if (dim == 0 && !inputs.empty()) dim = inputs.front().size();
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    if (inputs[i].size() != dim) {
      throw InvalidInputError("example " + std::to_string(i) + " has dimension " +
                              std::to_string(inputs[i].size()) + ", expected " +
                              std::to_string(dim));
    }
    if (!std::isfinite(targets[i])) {
      throw NumericError("example " + std::to_string(i) + " has a non-finite target");
    }
    if (!weights.empty() && !(weights[i] >= 0.0 && std::isfinite(weights[i]))) {
      throw InvalidInputError("example " + std::to_string(i) +
                              " has a negative or non-finite weight");
    }
  }
}

LabeledDataset LabeledDataset::Subset(const std::vector<std::size_t>& indices) const {
  LabeledDataset out;
  for (std::size_t i : indices) {
    if (i >= size()) throw InvalidInputError("subset index out of range");
    out.inputs.push_back(inputs[i]);
    out.targets.push_back(targets[i]);
    if (!weights.empty()) out.weights.push_back(weights[i]);
  }
  return out;
}

void LabeledDataset::Append(const FeatureVector& x, double y, double w) {
  if (weights.empty() && w != 1.0) {
    weights.assign(size(), 1.0);
    weights.push_back(w);
  } else if (!weights.empty()) {
    weights.push_back(w);
  }
  inputs.push_back(x);
  targets.push_back(y);
}

// --- schema ---------------------------------------------------------------

void DatasetSchema::Validate() const {
  std::set<std::string> names;
  int targets = 0;
  for (std::size_t i = 0; i < columns.size(); ++i) {
    const ColumnSchema& c = columns[i];
    const std::string where = "columns[" + std::to_string(i) + "]";
    if (c.name.empty()) throw ParseError(where + ".name", "empty column name");
    if (!names.insert(c.name).second) {
      throw ParseError(where + ".name", "duplicate column '" + c.name + "'");
    }
    if (c.kind == ColumnKind::kTarget) {
      ++targets;
      if (c.name != target) {
        throw ParseError(where, "target column '" + c.name +
                                    "' does not match target '" + target + "'");
      }
    }
    if (c.monotone && c.kind != ColumnKind::kNumeric) {
      throw ParseError(where + ".monotone",
                       "only numeric columns can be monotone");
    }
  }
  if (targets != 1) {
    throw ParseError("columns", "expected exactly one target column, found " +
                                    std::to_string(targets));
  }
}

DatasetSchema SchemaFromJson(const std::string& text) {
  const json doc = detail::ParseDocument(text);
  if (!doc.is_object()) throw ParseError("", "expected an object");
  DatasetSchema schema;
  schema.target = detail::AsString(detail::Require(doc, "target", ""), "target");
  if (auto it = doc.find("task"); it != doc.end()) {
    const std::string task = detail::AsString(*it, "task");
    if (task == "regression") {
      schema.task = TaskKind::kRegression;
    } else if (task == "classification") {
      schema.task = TaskKind::kClassification;
    } else {
      throw ParseError("task", "unknown task '" + task + "'");
    }
  }
  const json& cols = detail::Require(doc, "columns", "");
  if (!cols.is_array()) throw ParseError("columns", "expected an array");
  for (std::size_t i = 0; i < cols.size(); ++i) {
    const std::string where = "columns[" + std::to_string(i) + "]";
    ColumnSchema c;
    c.name = detail::AsString(detail::Require(cols[i], "name", where), where + ".name");
    const std::string kind =
        detail::AsString(detail::Require(cols[i], "kind", where), where + ".kind");
    if (kind == "numeric") {
      c.kind = ColumnKind::kNumeric;
    } else if (kind == "categorical") {
      c.kind = ColumnKind::kCategorical;
    } else if (kind == "target") {
      c.kind = ColumnKind::kTarget;
    } else {
      throw ParseError(where + ".kind", "unknown column kind '" + kind + "'");
    }
    if (auto it = cols[i].find("monotone"); it != cols[i].end() && !it->is_null()) {
      const std::string dir = detail::AsString(*it, where + ".monotone");
      if (dir == "increasing") {
        c.monotone = Direction::kIncreasing;
      } else if (dir == "decreasing") {
        c.monotone = Direction::kDecreasing;
      } else {
        throw ParseError(where + ".monotone", "unknown direction '" + dir + "'");
      }
    }
    schema.columns.push_back(std::move(c));
  }
  schema.Validate();
  return schema;
}

DatasetSchema LoadSchema(const std::filesystem::path& path) {
  const std::string text = detail::ReadFile(path);
  try {
    return SchemaFromJson(text);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + (e.path().empty() ? "" : ":" + e.path()),
                     e.what());
  }
}

// --- csv loading ----------------------------------------------------------

namespace {

bool IsMissing(const std::string& cell) {
  return cell.empty() || cell == "?" || cell == "NA";
}

std::string Trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

std::optional<double> ParseNumber(const std::string& s) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || !std::isfinite(v)) return std::nullopt;
  return v;
}

// Orders labels numerically when both parse, otherwise lexicographically.
bool LabelLess(const std::string& a, const std::string& b) {
  const auto na = ParseNumber(a);
  const auto nb = ParseNumber(b);
  if (na && nb) return *na < *nb;
  return a < b;
}

}  // namespace

LoadedData LoadCsv(std::string_view text, const DatasetSchema& schema) {
  schema.Validate();
  const std::vector<CsvRow> rows = ParseCsv(text);
  if (rows.empty()) throw ParseError("header", "CSV has no header row");

  std::map<std::string, std::size_t> header;
  for (std::size_t j = 0; j < rows[0].size(); ++j) {
    const std::string name = Trim(rows[0][j]);
    if (!header.emplace(name, j).second) {
      throw ParseError("header", "duplicate column '" + name + "'");
    }
  }
  std::set<std::string> declared;
  for (const ColumnSchema& c : schema.columns) {
    declared.insert(c.name);
    if (!header.count(c.name)) {
      throw ParseError("header", "missing column '" + c.name + "'");
    }
  }
  for (const auto& [name, j] : header) {
    if (!declared.count(name)) {
      throw ParseError("header", "column '" + name + "' is not in the schema");
    }
  }

  // Pass 1: keep complete rows, parse numbers.
  LoadedData out;
  std::vector<std::vector<std::string>> kept;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const CsvRow& row = rows[r];
    if (row.size() != rows[0].size()) {
      throw ParseError("row " + std::to_string(r),
                       "expected " + std::to_string(rows[0].size()) +
                           " fields, found " + std::to_string(row.size()));
    }
    std::vector<std::string> cells;
    bool missing = false;
    for (const ColumnSchema& c : schema.columns) {
      cells.push_back(Trim(row[header.at(c.name)]));
      if (IsMissing(cells.back())) missing = true;
    }
    if (missing) {
      ++out.dropped_rows;
      continue;
    }
    for (std::size_t j = 0; j < schema.columns.size(); ++j) {
      const ColumnSchema& c = schema.columns[j];
      const bool numeric = c.kind == ColumnKind::kNumeric ||
                           (c.kind == ColumnKind::kTarget &&
                            schema.task == TaskKind::kRegression);
      if (numeric && !ParseNumber(cells[j])) {
        throw ParseError("row " + std::to_string(r) + ", column '" + c.name + "'",
                         "cannot parse '" + cells[j] + "' as a number");
      }
    }
    kept.push_back(std::move(cells));
  }
  if (kept.empty()) throw InvalidInputError("CSV has no complete data rows");

  const std::size_t n = kept.size();
  std::vector<std::vector<double>> columns;  // encoded features, column-major
  std::vector<std::pair<std::size_t, Direction>> monotone;
  std::vector<double> targets(n);

  for (std::size_t j = 0; j < schema.columns.size(); ++j) {
    const ColumnSchema& c = schema.columns[j];
    if (c.kind != ColumnKind::kNumeric) continue;
    std::vector<double> v(n);
    for (std::size_t r = 0; r < n; ++r) v[r] = *ParseNumber(kept[r][j]);
    const auto [mn, mx] = std::minmax_element(v.begin(), v.end());
    FeatureRange range{c.name, *mn, *mx};
    const double width = range.max - range.min;
    for (double& x : v) x = width > 0.0 ? (x - range.min) / width : 0.0;
    if (c.monotone) monotone.emplace_back(columns.size(), *c.monotone);
    out.params.numeric.push_back(range);
    out.feature_names.push_back(c.name);
    columns.push_back(std::move(v));
  }
  for (std::size_t j = 0; j < schema.columns.size(); ++j) {
    const ColumnSchema& c = schema.columns[j];
    if (c.kind != ColumnKind::kCategorical) continue;
    std::set<std::string> values;
    for (const auto& cells : kept) values.insert(cells[j]);
    for (const std::string& value : values) {
      std::vector<double> v(n);
      for (std::size_t r = 0; r < n; ++r) v[r] = kept[r][j] == value ? 1.0 : 0.0;
      out.feature_names.push_back(c.name + "=" + value);
      columns.push_back(std::move(v));
    }
  }
  if (columns.empty()) throw InvalidInputError("schema declares no feature columns");

  std::size_t tj = 0;
  while (schema.columns[tj].kind != ColumnKind::kTarget) ++tj;
  out.params.task = schema.task;
  if (schema.task == TaskKind::kRegression) {
    double sum = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      targets[r] = *ParseNumber(kept[r][tj]);
      sum += targets[r];
    }
    const double mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (double y : targets) ss += (y - mean) * (y - mean);
    const double sd = std::sqrt(ss / static_cast<double>(n));
    out.params.target = TargetTransform{mean, sd > 0.0 ? sd : 1.0};
    for (double& y : targets) y = out.params.target.Normalize(y);
  } else {
    std::vector<std::string> labels;
    for (const auto& cells : kept) {
      if (std::find(labels.begin(), labels.end(), cells[tj]) == labels.end()) {
        labels.push_back(cells[tj]);
      }
    }
    if (labels.size() != 2) {
      throw InvalidInputError("classification target '" + schema.target +
                              "' must take exactly two values, found " +
                              std::to_string(labels.size()));
    }
    std::sort(labels.begin(), labels.end(), LabelLess);
    for (std::size_t r = 0; r < n; ++r) targets[r] = kept[r][tj] == labels[1] ? 1.0 : 0.0;
    out.params.class_labels = labels;
  }

  const std::size_t d = columns.size();
  out.data.inputs.assign(n, FeatureVector(d));
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t k = 0; k < d; ++k) out.data.inputs[r][k] = columns[k][r];
  }
  out.data.targets = std::move(targets);
  out.box = InputBox::Uniform(d, 0.0, 1.0);
  std::vector<MonotoneFeature> entries;
  for (const auto& [index, dir] : monotone) entries.push_back({index, dir});
  out.spec = MonotoneSpec(std::move(entries));
  return out;
}

LoadedData LoadCsvFile(const std::filesystem::path& path,
                       const DatasetSchema& schema) {
  const std::string text = detail::ReadFile(path);
  try {
    return LoadCsv(text, schema);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + (e.path().empty() ? "" : ":" + e.path()),
                     e.what());
  }
}

// --- folds ----------------------------------------------------------------

std::vector<Fold> MakeFolds(std::size_t n, int n_folds, double train_fraction,
                            std::uint64_t seed) {
  if (n_folds < 1) throw InvalidInputError("need at least one fold");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw InvalidInputError("train fraction must lie strictly between 0 and 1");
  }
  const auto n_train = static_cast<std::size_t>(
      std::floor(static_cast<double>(n) * train_fraction));
  std::vector<Fold> folds;
  for (int f = 0; f < n_folds; ++f) {
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    Rng rng(seed + static_cast<std::uint64_t>(f));
    Shuffle(order, rng);
    Fold fold;
    fold.train.assign(order.begin(), order.begin() + static_cast<long>(n_train));
    fold.test.assign(order.begin() + static_cast<long>(n_train), order.end());
    std::sort(fold.train.begin(), fold.train.end());
    std::sort(fold.test.begin(), fold.test.end());
    folds.push_back(std::move(fold));
  }
  return folds;
}

double DenormalizePrediction(double value, const NormalizationParams& params) {
  if (params.task == TaskKind::kClassification) return value;
  return params.target.Denormalize(value);
}

std::string ToString(ColumnKind kind) {
  switch (kind) {
    case ColumnKind::kNumeric:
      return "numeric";
    case ColumnKind::kCategorical:
      return "categorical";
    case ColumnKind::kTarget:
      return "target";
  }
  return "unknown";
}

std::string ToString(TaskKind kind) {
  return kind == TaskKind::kRegression ? "regression" : "classification";
}

}  // namespace monoguard
