#ifndef MONOGUARD_COMMANDS_HPP_
#define MONOGUARD_COMMANDS_HPP_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "monoguard/cgl.hpp"
#include "monoguard/data.hpp"
#include "monoguard/envelope.hpp"
#include "monoguard/solver.hpp"
#include "monoguard/trainer.hpp"

namespace monoguard {

struct DataSection {
  std::string name;  // dataset label in reports; defaults to the CSV stem
  std::filesystem::path csv;
  std::filesystem::path schema;
  int folds = 3;
  double train_fraction = 0.8;
  // Monotone feature names (directions from the schema). Empty: every
  // feature the schema declares monotone.
  std::vector<std::string> monotone;
};

struct CglSection {
  int iterations = 5;
  int retrain_epochs = 40;
  std::optional<int> batch_size;         // default: the baseline's
  std::optional<double> learning_rate;   // default: the baseline's
  std::optional<Labeling> labeling;      // default: from the task
  Selection selection = Selection::kMinTrainError;
};

struct BenchmarkSection {
  // Each entry is one row of the quality tables.
  std::vector<std::vector<std::string>> feature_sets;
  std::vector<Architecture> timing_architectures;
  int timing_epochs = 100;
  int timing_points = 20;
};

// One JSON document: {"seed", "data", "grid", "solver", "cgl", "output_dir",
// "threads", "envelope_mode", "benchmark"}. Relative paths resolve against
// the document's directory.
struct RunConfig {
  std::uint64_t seed = 0;
  DataSection data;
  GridSpec grid;
  SolverConfig solver;
  CglSection cgl;
  std::filesystem::path output_dir = "out";
  unsigned threads = 0;
  EnvelopeKind envelope_mode = EnvelopeKind::kUpper;
  BenchmarkSection benchmark;
};

RunConfig RunConfigFromJson(const std::string& text,
                            const std::filesystem::path& base_dir);
RunConfig LoadRunConfig(const std::filesystem::path& path);

// Dataset loaded per the config, with the spec resolved from feature names.
struct PreparedData {
  LoadedData loaded;
  MonotoneSpec spec;
  std::vector<Fold> folds;
};
PreparedData PrepareData(const RunConfig& cfg);
MonotoneSpec ResolveSpec(const LoadedData& data, const DatasetSchema& schema,
                         const std::vector<std::string>& names);

// CGL settings for one fold: retraining inherits batch size and learning
// rate from the first grid config unless the cgl section overrides them.
CglConfig CglConfigForFold(const RunConfig& cfg, TaskKind task, int fold);

// Each command returns a process exit code and writes diagnostics to `err`.
// Exit code 0 means every requested artifact was written.

struct TrainOptions {
  std::filesystem::path config;
  std::optional<std::filesystem::path> out;
};
// Per fold: grid search on the fold's training part, then
// model_fold<k>.json and grid_fold<k>.csv; train_report.csv summarizes the
// selected configs and features.json records the feature encoding.
int CmdTrain(const TrainOptions& opt, std::ostream& out, std::ostream& err);

struct EnvelopeOptions {
  std::optional<std::filesystem::path> config;  // solver and threads only
  std::filesystem::path model;
  std::filesystem::path points;
  std::optional<std::filesystem::path> spec;
  std::vector<std::size_t> features;  // increasing features, if no spec
  EnvelopeKind mode = EnvelopeKind::kUpper;
  std::optional<std::filesystem::path> out;  // CSV; stdout when absent
};
int CmdEnvelope(const EnvelopeOptions& opt, std::ostream& out, std::ostream& err);

struct VerifyOptions {
  std::optional<std::filesystem::path> config;
  std::filesystem::path model;
  std::size_t feature = 0;
  std::optional<std::filesystem::path> spec;  // for the feature's direction
  bool maximal = false;
  std::optional<std::filesystem::path> out;  // JSON verdict
};
int CmdVerify(const VerifyOptions& opt, std::ostream& out, std::ostream& err);

struct CountOptions {
  std::optional<std::filesystem::path> config;
  std::filesystem::path model;
  std::filesystem::path points;
  std::optional<std::filesystem::path> spec;
  std::vector<std::size_t> features;
  std::optional<std::filesystem::path> out;  // per-point flags CSV
};
int CmdCountCe(const CountOptions& opt, std::ostream& out, std::ostream& err);

struct CglOptions {
  std::filesystem::path config;
  std::filesystem::path model;
  int fold = 0;
  std::optional<std::filesystem::path> out;
};
// Writes cgl_model_fold<k>.json and cgl_history_fold<k>.csv.
int CmdCgl(const CglOptions& opt, std::ostream& out, std::ostream& err);

struct BenchmarkOptions {
  std::filesystem::path config;
  std::optional<std::filesystem::path> out;
};
// results.csv (test quality per feature set: nn_b, envelope, cgl,
// cgl_envelope as mean±std over folds), ce_percent.csv, ce_reduction.csv,
// timing.csv and two runtime plot-data files.
int CmdBenchmark(const BenchmarkOptions& opt, std::ostream& out, std::ostream& err);

// Points file: CSV with a header row; every cell numeric.
std::vector<FeatureVector> ReadPointsCsv(const std::filesystem::path& path);

}  // namespace monoguard

#endif  // MONOGUARD_COMMANDS_HPP_
