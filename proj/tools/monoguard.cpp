#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "monoguard/commands.hpp"

using namespace monoguard;

int main(int argc, char** argv) {
  CLI::App app{"Monotonicity checks, envelope prediction and counterexample-guided training"};
  app.require_subcommand(1);

  TrainOptions train;
  CLI::App* train_cmd = app.add_subcommand("train", "grid-search a baseline per fold");
  train_cmd->add_option("--config", train.config, "run config JSON")->required();
  train_cmd->add_option("--out", train.out, "output directory (overrides config)");

  EnvelopeOptions env;
  std::string env_mode = "upper";
  CLI::App* env_cmd = app.add_subcommand("envelope", "monotone envelope predictions");
  env_cmd->add_option("--model", env.model, "network JSON")->required();
  env_cmd->add_option("--points", env.points, "points CSV")->required();
  env_cmd->add_option("--spec", env.spec, "monotone spec JSON");
  env_cmd->add_option("--feature", env.features, "increasing feature index (repeatable)");
  env_cmd->add_option("--mode", env_mode, "upper or lower")
      ->check(CLI::IsMember({"upper", "lower"}));
  env_cmd->add_option("--config", env.config, "run config for solver settings");
  env_cmd->add_option("--out", env.out, "output CSV");

  VerifyOptions verify;
  CLI::App* verify_cmd = app.add_subcommand("verify", "search for a monotonicity violation");
  verify_cmd->add_option("--model", verify.model, "network JSON")->required();
  verify_cmd->add_option("--feature", verify.feature, "feature index")->required();
  verify_cmd->add_option("--spec", verify.spec, "monotone spec JSON (direction)");
  verify_cmd->add_flag("--maximal", verify.maximal, "find the largest violation");
  verify_cmd->add_option("--config", verify.config, "run config for solver settings");
  verify_cmd->add_option("--out", verify.out, "verdict JSON");

  CountOptions count;
  CLI::App* count_cmd = app.add_subcommand("count-ce", "count points with counterexamples");
  count_cmd->add_option("--model", count.model, "network JSON")->required();
  count_cmd->add_option("--points", count.points, "points CSV")->required();
  count_cmd->add_option("--spec", count.spec, "monotone spec JSON");
  count_cmd->add_option("--feature", count.features, "increasing feature index (repeatable)");
  count_cmd->add_option("--config", count.config, "run config for solver settings");
  count_cmd->add_option("--out", count.out, "per-point CSV");

  CglOptions cgl;
  CLI::App* cgl_cmd = app.add_subcommand("cgl", "counterexample-guided retraining");
  cgl_cmd->add_option("--config", cgl.config, "run config JSON")->required();
  cgl_cmd->add_option("--model", cgl.model, "baseline network JSON")->required();
  cgl_cmd->add_option("--fold", cgl.fold, "fold index");
  cgl_cmd->add_option("--out", cgl.out, "output directory (overrides config)");

  BenchmarkOptions bench;
  CLI::App* bench_cmd = app.add_subcommand("benchmark", "full quality and runtime tables");
  bench_cmd->add_option("--config", bench.config, "run config JSON")->required();
  bench_cmd->add_option("--out", bench.out, "output directory (overrides config)");

  CLI11_PARSE(app, argc, argv);

  if (*train_cmd) return CmdTrain(train, std::cout, std::cerr);
  if (*env_cmd) {
    env.mode = ParseEnvelopeKind(env_mode);
    return CmdEnvelope(env, std::cout, std::cerr);
  }
  if (*verify_cmd) return CmdVerify(verify, std::cout, std::cerr);
  if (*count_cmd) return CmdCountCe(count, std::cout, std::cerr);
  if (*cgl_cmd) return CmdCgl(cgl, std::cout, std::cerr);
  return CmdBenchmark(bench, std::cout, std::cerr);
}
