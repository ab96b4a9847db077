#include "monoguard/commands.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>

#include "json_util.hpp"
#include "monoguard/csv.hpp"
#include "monoguard/errors.hpp"

namespace monoguard {

namespace fs = std::filesystem;
using detail::json;

namespace {

// --- config parsing helpers -------------------------------------------------

std::string Join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

const json* Find(const json& obj, const std::string& key) {
  auto it = obj.find(key);
  return it == obj.end() || it->is_null() ? nullptr : &*it;
}

std::int64_t GetInt(const json& obj, const std::string& key, const std::string& path,
                    std::int64_t fallback) {
  const json* v = Find(obj, key);
  if (!v) return fallback;
  if (!v->is_number_integer()) throw ParseError(Join(path, key), "expected an integer");
  return v->get<std::int64_t>();
}

double GetDouble(const json& obj, const std::string& key, const std::string& path,
                 double fallback) {
  const json* v = Find(obj, key);
  return v ? detail::AsNumber(*v, Join(path, key)) : fallback;
}

std::string GetString(const json& obj, const std::string& key, const std::string& path,
                      const std::string& fallback) {
  const json* v = Find(obj, key);
  return v ? detail::AsString(*v, Join(path, key)) : fallback;
}

const json& Object(const json& obj, const std::string& key, const std::string& path) {
  static const json empty = json::object();
  const json* v = Find(obj, key);
  if (!v) return empty;
  if (!v->is_object()) throw ParseError(Join(path, key), "expected an object");
  return *v;
}

std::vector<std::string> StringList(const json& v, const std::string& path) {
  if (!v.is_array()) throw ParseError(path, "expected an array");
  std::vector<std::string> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.push_back(detail::AsString(v[i], path + "[" + std::to_string(i) + "]"));
  }
  return out;
}

Architecture ParseArchitecture(const json& v, const std::string& path) {
  if (!v.is_object()) throw ParseError(path, "expected an object");
  Architecture a;
  a.hidden_layers = static_cast<int>(GetInt(v, "hidden_layers", path, 1));
  a.width = static_cast<int>(GetInt(v, "width", path, 16));
  if (a.hidden_layers < 0 || a.width < 1) {
    throw ParseError(path, "needs hidden_layers >= 0 and width >= 1");
  }
  return a;
}

std::vector<Architecture> ArchitectureList(const json& v, const std::string& path) {
  if (!v.is_array() || v.empty()) throw ParseError(path, "expected a non-empty array");
  std::vector<Architecture> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.push_back(ParseArchitecture(v[i], path + "[" + std::to_string(i) + "]"));
  }
  return out;
}

TrainConfig ParseTrainConfig(const json& v, const std::string& path) {
  if (!v.is_object()) throw ParseError(path, "expected an object");
  TrainConfig c;
  c.batch_size = static_cast<int>(GetInt(v, "batch_size", path, c.batch_size));
  c.epochs = static_cast<int>(GetInt(v, "epochs", path, c.epochs));
  c.learning_rate = GetDouble(v, "learning_rate", path, c.learning_rate);
  c.adam_beta1 = GetDouble(v, "adam_beta1", path, c.adam_beta1);
  c.adam_beta2 = GetDouble(v, "adam_beta2", path, c.adam_beta2);
  c.adam_eps = GetDouble(v, "adam_eps", path, c.adam_eps);
  try {
    c.Validate();
  } catch (const InvalidInputError& e) {
    throw ParseError(path, e.what());
  }
  return c;
}

fs::path Resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

// --- output helpers -----------------------------------------------------------

void WriteText(const fs::path& path, const std::string& text) {
  detail::WriteFile(path, text);
}

std::string PointJson(const FeatureVector& x) {
  std::string s = "[";
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (i) s += ",";
    s += FormatNumber(x[i]);
  }
  return s + "]";
}

std::string MeanStd(const std::vector<double>& v) {
  const double n = static_cast<double>(v.size());
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f±%.2f", mean, std::sqrt(ss / n));
  return buf;
}

double Mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

std::string Fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

OutputKind KindFor(TaskKind task) {
  return task == TaskKind::kClassification ? OutputKind::kBinaryLogit
                                           : OutputKind::kRegression;
}

Loss LossFor(TaskKind task) {
  return task == TaskKind::kClassification ? Loss::kBinaryCrossEntropy : Loss::kMse;
}

// Test quality: MSE on the original target scale, or accuracy.
double Quality(const std::vector<double>& predictions, const LabeledDataset& data,
               const NormalizationParams& params) {
  double total = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (params.task == TaskKind::kClassification) {
      total += (predictions[i] >= 0.0) == (data.targets[i] == 1.0) ? 1.0 : 0.0;
    } else {
      const double e = params.target.Denormalize(predictions[i]) -
                       params.target.Denormalize(data.targets[i]);
      total += e * e;
    }
  }
  return total / static_cast<double>(data.size());
}

std::vector<double> PlainPredictions(const Network& net, const LabeledDataset& data) {
  std::vector<double> p;
  for (const FeatureVector& x : data.inputs) p.push_back(Forward(net, x));
  return p;
}

std::vector<double> EnvelopePredictions(const Network& net, const MonotoneSpec& spec,
                                        const LabeledDataset& data, EnvelopeKind kind,
                                        const SolverConfig& solver, unsigned threads) {
  std::vector<double> p;
  for (const EnvelopePrediction& e :
       PredictEnvelopeBatch(net, spec, data.inputs, kind, solver, threads)) {
    p.push_back(e.value);
  }
  return p;
}

// Reduction tables read the round with the fewest training counterexamples
// from the same history, whatever the selection rule.
const CglIteration& FewestCounterexamples(const std::vector<CglIteration>& history) {
  const CglIteration* best = &history.front();
  for (const CglIteration& it : history) {
    if (!it.diverged && it.train_ce_count < best->train_ce_count) best = &it;
  }
  return *best;
}


MonotoneSpec SpecFromOptions(const std::optional<fs::path>& spec_path,
                             const std::vector<std::size_t>& features) {
  if (spec_path) return LoadMonotoneSpec(*spec_path);
  if (features.empty()) {
    throw InvalidInputError("give a monotone spec file or at least one --feature");
  }
  return MonotoneSpec::AllIncreasing(features);
}

SolverConfig SolverFromOptions(const std::optional<fs::path>& config, unsigned* threads) {
  if (!config) return {};
  const RunConfig cfg = LoadRunConfig(*config);
  if (threads) *threads = cfg.threads;
  return cfg.solver;
}

template <typename F>
int Guard(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

fs::path OutputDir(const RunConfig& cfg, const std::optional<fs::path>& out) {
  const fs::path dir = out ? *out : cfg.output_dir;
  fs::create_directories(dir);
  return dir;
}

std::string FoldFile(const std::string& stem, int fold, const std::string& ext) {
  return stem + "_fold" + std::to_string(fold) + ext;
}

}  // namespace

// --- config ---------------------------------------------------------------

CglConfig CglConfigForFold(const RunConfig& cfg, TaskKind task, int fold) {
  CglConfig c;
  c.iterations = cfg.cgl.iterations;
  c.selection = cfg.cgl.selection;
  c.labeling = cfg.cgl.labeling.value_or(task == TaskKind::kClassification
                                             ? Labeling::kClassificationCopy
                                             : Labeling::kRegressionAverage);
  c.solver = cfg.solver;
  c.threads = cfg.threads;
  const TrainConfig& first = cfg.grid.configs.front();
  c.retrain = first;
  c.retrain.epochs = cfg.cgl.retrain_epochs;
  c.retrain.batch_size = cfg.cgl.batch_size.value_or(first.batch_size);
  c.retrain.learning_rate = cfg.cgl.learning_rate.value_or(first.learning_rate);
  c.retrain.seed = cfg.seed + static_cast<std::uint64_t>(fold);
  c.retrain.loss = LossFor(task);
  return c;
}


RunConfig RunConfigFromJson(const std::string& text, const fs::path& base_dir) {
  const json doc = detail::ParseDocument(text);
  if (!doc.is_object()) throw ParseError("", "expected an object");
  RunConfig cfg;
  const json& seed = detail::Require(doc, "seed", "");
  if (!seed.is_number_unsigned() && !(seed.is_number_integer() && seed.get<std::int64_t>() >= 0)) {
    throw ParseError("seed", "expected a non-negative integer");
  }
  cfg.seed = seed.get<std::uint64_t>();

  const json& data = detail::Require(doc, "data", "");
  if (!data.is_object()) throw ParseError("data", "expected an object");
  cfg.data.csv = Resolve(base_dir, detail::AsString(detail::Require(data, "csv", "data"), "data.csv"));
  cfg.data.schema =
      Resolve(base_dir, detail::AsString(detail::Require(data, "schema", "data"), "data.schema"));
  cfg.data.name = GetString(data, "name", "data", cfg.data.csv.stem().string());
  cfg.data.folds = static_cast<int>(GetInt(data, "folds", "data", cfg.data.folds));
  cfg.data.train_fraction = GetDouble(data, "train_fraction", "data", cfg.data.train_fraction);
  if (const json* m = Find(data, "monotone")) cfg.data.monotone = StringList(*m, "data.monotone");
  if (cfg.data.folds < 1) throw ParseError("data.folds", "expected at least 1");
  if (!(cfg.data.train_fraction > 0.0 && cfg.data.train_fraction < 1.0)) {
    throw ParseError("data.train_fraction", "expected a value in (0, 1)");
  }

  const json& grid = Object(doc, "grid", "");
  if (const json* a = Find(grid, "architectures")) {
    cfg.grid.architectures = ArchitectureList(*a, "grid.architectures");
  } else {
    cfg.grid.architectures = {Architecture{}};
  }
  if (const json* c = Find(grid, "configs")) {
    if (!c->is_array() || c->empty()) throw ParseError("grid.configs", "expected a non-empty array");
    for (std::size_t i = 0; i < c->size(); ++i) {
      cfg.grid.configs.push_back(
          ParseTrainConfig((*c)[i], "grid.configs[" + std::to_string(i) + "]"));
    }
  } else {
    cfg.grid.configs = {TrainConfig{}};
  }
  for (TrainConfig& c : cfg.grid.configs) c.seed = cfg.seed;

  const json& solver = Object(doc, "solver", "");
  cfg.solver.epsilon = GetDouble(solver, "epsilon", "solver", cfg.solver.epsilon);
  cfg.solver.delta = GetDouble(solver, "delta", "solver", cfg.solver.delta);
  cfg.solver.max_nodes = GetInt(solver, "max_nodes", "solver", cfg.solver.max_nodes);
  cfg.solver.neuron_stability_slack =
      GetDouble(solver, "stability_slack", "solver", cfg.solver.neuron_stability_slack);
  try {
    cfg.solver.Validate();
  } catch (const InvalidInputError& e) {
    throw ParseError("solver", e.what());
  }

  const json& cgl = Object(doc, "cgl", "");
  cfg.cgl.iterations = static_cast<int>(GetInt(cgl, "iterations", "cgl", cfg.cgl.iterations));
  cfg.cgl.retrain_epochs =
      static_cast<int>(GetInt(cgl, "retrain_epochs", "cgl", cfg.cgl.retrain_epochs));
  if (Find(cgl, "batch_size")) {
    cfg.cgl.batch_size = static_cast<int>(GetInt(cgl, "batch_size", "cgl", 0));
  }
  if (Find(cgl, "learning_rate")) {
    cfg.cgl.learning_rate = GetDouble(cgl, "learning_rate", "cgl", 0.0);
  }
  try {
    if (Find(cgl, "labeling")) cfg.cgl.labeling = ParseLabeling(GetString(cgl, "labeling", "cgl", ""));
    cfg.cgl.selection = ParseSelection(GetString(cgl, "selection", "cgl", "min-train-error"));
  } catch (const InvalidInputError& e) {
    throw ParseError("cgl", e.what());
  }
  if (cfg.cgl.iterations < 0 || cfg.cgl.retrain_epochs < 0) {
    throw ParseError("cgl", "iterations and retrain_epochs must be non-negative");
  }

  cfg.output_dir = Resolve(base_dir, GetString(doc, "output_dir", "", "out"));
  const std::int64_t threads = GetInt(doc, "threads", "", 0);
  if (threads < 0) throw ParseError("threads", "expected a non-negative integer");
  cfg.threads = static_cast<unsigned>(threads);
  try {
    cfg.envelope_mode = ParseEnvelopeKind(GetString(doc, "envelope_mode", "", "upper"));
  } catch (const InvalidInputError& e) {
    throw ParseError("envelope_mode", e.what());
  }

  const json& bench = Object(doc, "benchmark", "");
  if (const json* f = Find(bench, "feature_sets")) {
    if (!f->is_array()) throw ParseError("benchmark.feature_sets", "expected an array");
    for (std::size_t i = 0; i < f->size(); ++i) {
      cfg.benchmark.feature_sets.push_back(
          StringList((*f)[i], "benchmark.feature_sets[" + std::to_string(i) + "]"));
    }
  }
  const json& timing = Object(bench, "timing", "benchmark");
  if (const json* a = Find(timing, "architectures")) {
    cfg.benchmark.timing_architectures = ArchitectureList(*a, "benchmark.timing.architectures");
  }
  cfg.benchmark.timing_epochs =
      static_cast<int>(GetInt(timing, "epochs", "benchmark.timing", cfg.benchmark.timing_epochs));
  cfg.benchmark.timing_points =
      static_cast<int>(GetInt(timing, "points", "benchmark.timing", cfg.benchmark.timing_points));
  return cfg;
}

RunConfig LoadRunConfig(const fs::path& path) {
  const std::string text = detail::ReadFile(path);
  try {
    return RunConfigFromJson(text, path.parent_path());
  } catch (const ParseError& e) {
    throw ParseError(path.string() + (e.path().empty() ? "" : ":" + e.path()), e.what());
  }
}

MonotoneSpec ResolveSpec(const LoadedData& data, const DatasetSchema& schema,
                         const std::vector<std::string>& names) {
  std::vector<MonotoneFeature> entries;
  for (const std::string& name : names) {
    std::optional<Direction> dir;
    for (const ColumnSchema& c : schema.columns) {
      if (c.name == name) dir = c.monotone;
    }
    if (!dir) {
      throw InvalidInputError("feature '" + name +
                              "' is not declared monotone in the schema");
    }
    std::size_t index = data.feature_names.size();
    for (std::size_t i = 0; i < data.feature_names.size(); ++i) {
      if (data.feature_names[i] == name) index = i;
    }
    if (index == data.feature_names.size()) {
      throw InvalidInputError("unknown feature '" + name + "'");
    }
    entries.push_back({index, *dir});
  }
  return MonotoneSpec(std::move(entries));
}

PreparedData PrepareData(const RunConfig& cfg) {
  const DatasetSchema schema = LoadSchema(cfg.data.schema);
  PreparedData p;
  p.loaded = LoadCsvFile(cfg.data.csv, schema);
  p.spec = cfg.data.monotone.empty() ? p.loaded.spec
                                     : ResolveSpec(p.loaded, schema, cfg.data.monotone);
  p.folds = MakeFolds(p.loaded.data.size(), cfg.data.folds, cfg.data.train_fraction,
                      cfg.seed);
  return p;
}

std::vector<FeatureVector> ReadPointsCsv(const fs::path& path) {
  const std::vector<CsvRow> rows = ReadCsvFile(path);
  if (rows.empty()) throw ParseError(path.string(), "points file has no header row");
  std::vector<FeatureVector> points;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    FeatureVector x;
    for (std::size_t c = 0; c < rows[r].size(); ++c) {
      const std::string& cell = rows[r][c];
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(cell, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != cell.size() || !std::isfinite(v)) {
        throw ParseError(path.string() + ":row " + std::to_string(r) + ", column " +
                             std::to_string(c + 1),
                         "cannot parse '" + cell + "' as a number");
      }
      x.push_back(v);
    }
    points.push_back(std::move(x));
  }
  return points;
}

// --- commands -------------------------------------------------------------

int CmdTrain(const TrainOptions& opt, std::ostream& out, std::ostream& err) {
  return Guard(err, [&] {
    const RunConfig cfg = LoadRunConfig(opt.config);
    const PreparedData pd = PrepareData(cfg);
    const fs::path dir = OutputDir(cfg, opt.out);
    const LoadedData& ld = pd.loaded;
    const TaskKind task = ld.params.task;

    GridSpec grid = cfg.grid;
    for (TrainConfig& c : grid.configs) c.loss = LossFor(task);
    const GridContext ctx{ld.box, KindFor(task), ld.params.target};
    const std::string metric = task == TaskKind::kClassification ? "error_rate" : "mse";

    std::ostringstream report;
    CsvWriter rw(report);
    rw.Row({"fold", "hidden_layers", "width", "batch_size", "epochs", "learning_rate",
            "metric", "train_error", "test_error"});
    for (int k = 0; k < static_cast<int>(pd.folds.size()); ++k) {
      GridSpec g = grid;
      for (TrainConfig& c : g.configs) c.seed = cfg.seed + static_cast<std::uint64_t>(k);
      const GridResult r = GridSearch(g, ld.data, {pd.folds[k]}, ctx, cfg.threads);
      const Network& model = r.models.front();
      SaveNetwork(model, dir / FoldFile("model", k, ".json"));

      std::ostringstream gcsv;
      CsvWriter gw(gcsv);
      gw.Row({"hidden_layers", "width", "batch_size", "epochs", "learning_rate",
              "mean_train_error"});
      for (const GridEntry& e : r.entries) {
        gw.Row({std::to_string(e.arch.hidden_layers), std::to_string(e.arch.width),
                std::to_string(e.cfg.batch_size), std::to_string(e.cfg.epochs),
                FormatNumber(e.cfg.learning_rate), FormatNumber(e.mean_error)});
      }
      WriteText(dir / FoldFile("grid", k, ".csv"), gcsv.str());

      const GridEntry& best = r.entries[r.best];
      const LabeledDataset test = ld.data.Subset(pd.folds[k].test);
      const double test_error =
          task == TaskKind::kClassification
              ? 1.0 - Evaluate(model, test, Metric::kAccuracy)
              : Evaluate(model, test, Metric::kMse, ld.params.target);
      rw.Row({std::to_string(k), std::to_string(best.arch.hidden_layers),
              std::to_string(best.arch.width), std::to_string(best.cfg.batch_size),
              std::to_string(best.cfg.epochs), FormatNumber(best.cfg.learning_rate), metric,
              FormatNumber(best.mean_error), FormatNumber(test_error)});
      out << "fold " << k << ": train " << metric << " " << FormatNumber(best.mean_error)
          << ", test " << metric << " " << FormatNumber(test_error) << "\n";
    }
    WriteText(dir / "train_report.csv", report.str());

    json features;
    features["feature_names"] = ld.feature_names;
    features["monotone"] = json::parse(MonotoneSpecToJson(pd.spec));
    features["task"] = ToString(task);
    features["target"] = {{"mean", ld.params.target.mean}, {"scale", ld.params.target.scale}};
    json ranges = json::array();
    for (const FeatureRange& f : ld.params.numeric) {
      ranges.push_back({{"column", f.column}, {"min", f.min}, {"max", f.max}});
    }
    features["numeric_ranges"] = ranges;
    features["dropped_rows"] = ld.dropped_rows;
    WriteText(dir / "features.json", features.dump(1) + "\n");
    WriteText(dir / "monotone_spec.json", MonotoneSpecToJson(pd.spec) + "\n");
    return 0;
  });
}

int CmdEnvelope(const EnvelopeOptions& opt, std::ostream& out, std::ostream& err) {
  return Guard(err, [&] {
    unsigned threads = 0;
    const SolverConfig solver = SolverFromOptions(opt.config, &threads);
    const Network net = LoadNetwork(opt.model);
    const MonotoneSpec spec = SpecFromOptions(opt.spec, opt.features);
    const std::vector<FeatureVector> points = ReadPointsCsv(opt.points);
    const auto preds = PredictEnvelopeBatch(net, spec, points, opt.mode, solver, threads);
    if (opt.out) {
      if (opt.out->has_parent_path()) fs::create_directories(opt.out->parent_path());
      std::ofstream f(*opt.out, std::ios::binary | std::ios::trunc);
      if (!f) throw InvalidInputError("cannot write " + opt.out->string());
      WriteEnvelopeCsv(f, preds);
      if (!f) throw InvalidInputError("failed writing " + opt.out->string());
    } else {
      WriteEnvelopeCsv(out, preds);
    }
    return 0;
  });
}

int CmdVerify(const VerifyOptions& opt, std::ostream& out, std::ostream& err) {
  return Guard(err, [&] {
    unsigned threads = 0;
    const SolverConfig solver = SolverFromOptions(opt.config, &threads);
    const Network net = LoadNetwork(opt.model);
    if (opt.feature >= net.input_dim()) {
      throw InvalidInputError("feature " + std::to_string(opt.feature) +
                              " is outside the network's " +
                              std::to_string(net.input_dim()) + " inputs");
    }
    Direction dir = Direction::kIncreasing;
    if (opt.spec) {
      const MonotoneSpec declared = LoadMonotoneSpec(*opt.spec);
      for (const MonotoneFeature& f : declared.entries()) {
        if (f.index == opt.feature) dir = f.direction;
      }
    }
    const MonotoneSpec one({{opt.feature, dir}});
    const CanonicalModel c = Canonicalize(net, one);
    PairSearchResult r = FindPairCounterexample(
        c.net, opt.feature, solver,
        opt.maximal ? PairSearchMode::kMaximal : PairSearchMode::kAny);
    if (r.pair) {
      r.pair->x = ReflectPoint(r.pair->x, one);
      r.pair->x_prime = ReflectPoint(r.pair->x_prime, one);
    }
    out << ToString(r.status);
    if (r.pair) {
      out << " x=" << PointJson(r.pair->x) << " x'=" << PointJson(r.pair->x_prime)
          << " violation=" << FormatNumber(r.pair->violation);
    }
    out << " bound=" << FormatNumber(r.certified_bound) << "\n";
    if (opt.out) {
      json doc;
      doc["status"] = ToString(r.status);
      doc["feature"] = opt.feature;
      doc["direction"] = ToString(dir);
      doc["maximal"] = opt.maximal;
      doc["certified_bound"] = r.certified_bound;
      doc["nodes_explored"] = r.nodes_explored;
      doc["wall_time"] = r.wall_time;
      if (r.pair) {
        doc["x"] = r.pair->x;
        doc["x_prime"] = r.pair->x_prime;
        doc["violation"] = r.pair->violation;
      }
      if (opt.out->has_parent_path()) fs::create_directories(opt.out->parent_path());
      WriteText(*opt.out, doc.dump(1) + "\n");
    }
    return 0;
  });
}

int CmdCountCe(const CountOptions& opt, std::ostream& out, std::ostream& err) {
  return Guard(err, [&] {
    unsigned threads = 0;
    const SolverConfig solver = SolverFromOptions(opt.config, &threads);
    const Network net = LoadNetwork(opt.model);
    const MonotoneSpec spec = SpecFromOptions(opt.spec, opt.features);
    const std::vector<FeatureVector> points = ReadPointsCsv(opt.points);
    const CounterexampleCount c = CountCounterexamples(net, spec, points, solver, threads);
    out << "flagged " << c.count << " of " << points.size() << " points ("
        << Fixed(100.0 * c.fraction, 2) << "%)";
    if (c.incomplete) out << ", " << c.incomplete << " undecided";
    out << "\n";
    if (opt.out) {
      std::ostringstream csv;
      CsvWriter w(csv);
      w.Row({"point_id", "upper", "lower", "flagged"});
      for (std::size_t i = 0; i < points.size(); ++i) {
        w.Row({std::to_string(i), c.upper[i] ? "1" : "0", c.lower[i] ? "1" : "0",
               c.flags[i] ? "1" : "0"});
      }
      if (opt.out->has_parent_path()) fs::create_directories(opt.out->parent_path());
      WriteText(*opt.out, csv.str());
    }
    return 0;
  });
}

int CmdCgl(const CglOptions& opt, std::ostream& out, std::ostream& err) {
  return Guard(err, [&] {
    const RunConfig cfg = LoadRunConfig(opt.config);
    const PreparedData pd = PrepareData(cfg);
    if (opt.fold < 0 || opt.fold >= static_cast<int>(pd.folds.size())) {
      throw InvalidInputError("fold " + std::to_string(opt.fold) + " does not exist");
    }
    if (pd.spec.empty()) throw InvalidInputError("no monotone features configured");
    const fs::path dir = OutputDir(cfg, opt.out);
    const Network net = LoadNetwork(opt.model);
    const LoadedData& ld = pd.loaded;
    const LabeledDataset train = ld.data.Subset(pd.folds[opt.fold].train);
    const LabeledDataset test = ld.data.Subset(pd.folds[opt.fold].test);
    const CglConfig cc = CglConfigForFold(cfg, ld.params.task, opt.fold);
    const CglResult r = CglTrain(net, pd.spec, train, cc, &test, ld.params.target);

    SaveNetwork(r.selected, dir / FoldFile("cgl_model", opt.fold, ".json"));
    std::ostringstream csv;
    WriteCglHistory(csv, r.history);
    WriteText(dir / FoldFile("cgl_history", opt.fold, ".csv"), csv.str());
    const CglIteration& base = r.history.front();
    const CglIteration& sel = r.history[r.selected_iteration];
    out << "selected iteration " << r.selected_iteration << ": train counterexamples "
        << base.train_ce_count << " -> " << sel.train_ce_count << ", test "
        << base.test_ce_count.value_or(0) << " -> " << sel.test_ce_count.value_or(0)
        << "\n";
    return 0;
  });
}

int CmdBenchmark(const BenchmarkOptions& opt, std::ostream& out, std::ostream& err) {
  return Guard(err, [&] {
    const RunConfig cfg = LoadRunConfig(opt.config);
    const PreparedData pd = PrepareData(cfg);
    const fs::path dir = OutputDir(cfg, opt.out);
    const LoadedData& ld = pd.loaded;
    const TaskKind task = ld.params.task;
    const DatasetSchema schema = LoadSchema(cfg.data.schema);
    const int n_folds = static_cast<int>(pd.folds.size());

    std::vector<std::vector<std::string>> feature_sets = cfg.benchmark.feature_sets;
    if (feature_sets.empty()) {
      std::vector<std::string> names;
      for (const MonotoneFeature& f : pd.spec.entries()) {
        names.push_back(ld.feature_names[f.index]);
      }
      feature_sets.push_back(names);
    }

    // Baselines, one per fold.
    GridSpec grid = cfg.grid;
    for (TrainConfig& c : grid.configs) c.loss = LossFor(task);
    const GridContext ctx{ld.box, KindFor(task), ld.params.target};
    std::vector<Network> baselines;
    std::vector<LabeledDataset> trains, tests;
    for (int k = 0; k < n_folds; ++k) {
      GridSpec g = grid;
      for (TrainConfig& c : g.configs) c.seed = cfg.seed + static_cast<std::uint64_t>(k);
      baselines.push_back(GridSearch(g, ld.data, {pd.folds[k]}, ctx, cfg.threads).models.front());
      trains.push_back(ld.data.Subset(pd.folds[k].train));
      tests.push_back(ld.data.Subset(pd.folds[k].test));
      out << "fold " << k << ": baseline trained\n";
    }

    std::ostringstream results, percent, reduction;
    CsvWriter rw(results), pw(percent), dw(reduction);
    rw.Row({"dataset", "features", "nn_b", "envelope", "cgl", "cgl_envelope"});
    pw.Row({"dataset", "features", "train_percent_ce", "test_percent_ce"});
    dw.Row({"dataset", "features", "train_nn_b", "train_cgl", "test_nn_b", "test_cgl"});
    for (const std::vector<std::string>& names : feature_sets) {
      const MonotoneSpec spec = ResolveSpec(ld, schema, names);
      std::string label;
      for (const std::string& n : names) label += (label.empty() ? "" : "+") + n;
      std::vector<double> q_base, q_env, q_cgl, q_cenv, pct_train, pct_test;
      std::vector<double> c_train_b, c_train_c, c_test_b, c_test_c;
      for (int k = 0; k < n_folds; ++k) {
        const Network& base = baselines[k];
        q_base.push_back(Quality(PlainPredictions(base, tests[k]), tests[k], ld.params));
        q_env.push_back(Quality(EnvelopePredictions(base, spec, tests[k], cfg.envelope_mode,
                                                    cfg.solver, cfg.threads),
                                tests[k], ld.params));
        const CglConfig cc = CglConfigForFold(cfg, task, k);
        const CglResult r = CglTrain(base, spec, trains[k], cc, &tests[k], ld.params.target);
        q_cgl.push_back(Quality(PlainPredictions(r.selected, tests[k]), tests[k], ld.params));
        q_cenv.push_back(Quality(EnvelopePredictions(r.selected, spec, tests[k],
                                                     cfg.envelope_mode, cfg.solver,
                                                     cfg.threads),
                                 tests[k], ld.params));
        const CglIteration& b = r.history.front();
        const CglIteration& s = FewestCounterexamples(r.history);
        pct_train.push_back(100.0 * b.train_ce_count / trains[k].size());
        pct_test.push_back(100.0 * b.test_ce_count.value_or(0) / tests[k].size());
        c_train_b.push_back(static_cast<double>(b.train_ce_count));
        c_train_c.push_back(static_cast<double>(s.train_ce_count));
        c_test_b.push_back(static_cast<double>(b.test_ce_count.value_or(0)));
        c_test_c.push_back(static_cast<double>(s.test_ce_count.value_or(0)));
      }
      rw.Row({cfg.data.name, label, MeanStd(q_base), MeanStd(q_env), MeanStd(q_cgl),
              MeanStd(q_cenv)});
      pw.Row({cfg.data.name, label, Fixed(Mean(pct_train), 2), Fixed(Mean(pct_test), 2)});
      dw.Row({cfg.data.name, label, Fixed(Mean(c_train_b), 2), Fixed(Mean(c_train_c), 2),
              Fixed(Mean(c_test_b), 2), Fixed(Mean(c_test_c), 2)});
      out << label << ": done\n";
    }
    WriteText(dir / "results.csv", results.str());
    WriteText(dir / "ce_percent.csv", percent.str());
    WriteText(dir / "ce_reduction.csv", reduction.str());

    // Runtime by model size and by number of monotone features.
    std::ostringstream timing, by_size, by_count;
    CsvWriter tw(timing), sw(by_size), cw(by_count);
    tw.Row({"model_size", "n_monotone_features", "baseline_time_s", "envelope_time_s"});
    sw.Row({"series", "x", "y"});
    cw.Row({"series", "x", "y"});
    const std::vector<MonotoneFeature>& declared = ld.spec.entries();
    const LabeledDataset& probe = tests.front();
    const std::size_t n_points =
        std::min<std::size_t>(probe.size(), static_cast<std::size_t>(cfg.benchmark.timing_points));
    for (const Architecture& arch : cfg.benchmark.timing_architectures) {
      TrainConfig tc = grid.configs.front();
      tc.epochs = cfg.benchmark.timing_epochs;
      const Network net = Train(InitializeNetwork(arch, ld.box, KindFor(task), cfg.seed),
                                trains.front(), tc)
                              .net;
      const std::size_t size = net.hidden_neuron_count();
      for (std::size_t m = 1; m <= declared.size(); ++m) {
        const MonotoneSpec spec(
            std::vector<MonotoneFeature>(declared.begin(), declared.begin() + static_cast<long>(m)));
        auto t0 = std::chrono::steady_clock::now();
        double sink = 0.0;
        for (std::size_t i = 0; i < n_points; ++i) sink += Forward(net, probe.inputs[i]);
        const double base_t =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() /
            static_cast<double>(n_points);
        double env_t = 0.0;
        for (std::size_t i = 0; i < n_points; ++i) {
          const EnvelopePrediction p =
              PredictEnvelope(net, spec, probe.inputs[i], cfg.envelope_mode, cfg.solver);
          env_t += p.query_time;
          sink += p.value;
        }
        env_t /= static_cast<double>(n_points);
        if (!std::isfinite(sink)) throw NumericError("non-finite prediction while timing");
        tw.Row({std::to_string(size), std::to_string(m), FormatNumber(base_t),
                FormatNumber(env_t)});
        const std::string features = "features=" + std::to_string(m);
        const std::string model = "model_size=" + std::to_string(size);
        sw.Row({features, std::to_string(size), FormatNumber(env_t)});
        cw.Row({model, std::to_string(m), FormatNumber(env_t)});
      }
    }
    WriteText(dir / "timing.csv", timing.str());
    WriteText(dir / "runtime_by_model_size.csv", by_size.str());
    WriteText(dir / "runtime_by_feature_count.csv", by_count.str());
    return 0;
  });
}

}  // namespace monoguard
