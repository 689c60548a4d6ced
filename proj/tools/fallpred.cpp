#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "fallpred/cli/commands.hpp"
#include "fallpred/error.hpp"

using namespace fallpred;

int main(int argc, char** argv) {
  CLI::App app{"Fall prediction toolkit for a simulated standing biped"};
  app.require_subcommand(1);

  std::string config_path, out_dir, data_dir, bundle_path, trajectory_path, fault_type = "all";
  std::optional<std::uint64_t> seed;
  std::optional<double> trim_height;

  auto common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "INI run configuration")->check(CLI::ExistingFile);
    cmd->add_option("--out", out_dir, "output directory (defaults to run.output)");
    cmd->add_option("--seed", seed, "override run.seed");
  };

  auto* generate = app.add_subcommand("generate", "calibrate force ranges and simulate trajectories");
  common(generate);

  auto* trainer = app.add_subcommand("train", "train the three models and calibrate the threshold");
  common(trainer);
  trainer->add_option("--data", data_dir, "trajectory directory written by generate")->required();

  auto* evaluate = app.add_subcommand("eval", "evaluate a bundle on held-out trajectories");
  common(evaluate);
  evaluate->add_option("--data", data_dir, "trajectory directory")->required();
  evaluate->add_option("--bundle", bundle_path, "bundle written by train")->required();
  evaluate->add_option("--fault-type", fault_type, "abrupt, incipient, intermittent or all")
      ->check(CLI::IsMember({"abrupt", "incipient", "intermittent", "all"}));
  evaluate->add_option("--trim-height", trim_height, "truncate trajectories at this CoM height (m)");

  auto* predict = app.add_subcommand("predict", "stream one trajectory through a bundle");
  common(predict);
  predict->add_option("--bundle", bundle_path, "bundle written by train")->required();
  predict->add_option("--trajectory", trajectory_path, "trajectory CSV")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? cli::kExitOk : cli::kExitConfig;
  }

  try {
    cli::RunConfig config = config_path.empty() ? cli::RunConfig{} : cli::load_config(config_path);
    if (seed) config.seed = *seed;
    if (!out_dir.empty()) config.output = out_dir;
    config.validate();

    if (generate->parsed()) {
      cli::cmd_generate(config, config.output, std::cout);
    } else if (trainer->parsed()) {
      cli::cmd_train(config, data_dir, config.output, std::cout);
    } else if (evaluate->parsed()) {
      std::optional<forces::FaultKind> kind;
      if (fault_type != "all") kind = forces::parse_fault_kind(fault_type);
      cli::cmd_eval(config, bundle_path, data_dir, config.output, kind, trim_height, std::cout);
    } else if (predict->parsed()) {
      return cli::cmd_predict(config, bundle_path, trajectory_path, config.output, std::cout);
    }
    return cli::kExitOk;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return cli::kExitConfig;
  } catch (const ModelError& e) {
    std::cerr << "model error: " << e.what() << '\n';
    return cli::kExitModel;
  } catch (const Error& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return cli::kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cli::kExitInternal;
  }
}
