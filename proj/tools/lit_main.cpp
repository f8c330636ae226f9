// SPDX-License-Identifier: Apache-2.0
#include <CLI11.hpp>
#include <iostream>
#include <optional>

#include "lit/error.hpp"
#include "lit/harness.hpp"

namespace {

// 0 success, 1 runtime failure, 2 configuration error
int exit_code_for(lit::ErrorKind kind) {
  switch (kind) {
    case lit::ErrorKind::Config:
    case lit::ErrorKind::Pairing:
    case lit::ErrorKind::Copy:
    case lit::ErrorKind::Format:
      return 2;
    default:
      return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LIT distillation toolkit"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "out";
  int jobs = 1;
  std::optional<uint64_t> seed;
  std::vector<std::string> compare_dirs;

  auto add_common = [&](CLI::App* cmd, bool needs_config) {
    if (needs_config) cmd->add_option("--config", config_path, "config file path")->required();
    cmd->add_option("--out", out_dir, "output directory");
    return cmd;
  };

  auto* train = add_common(app.add_subcommand("train", "run one training configuration"), true);
  train->add_option("--seed", seed, "override train.seed");
  auto* sweep = add_common(app.add_subcommand("sweep", "grid sweep over one parameter"), true);
  sweep->add_option("--jobs", jobs, "parallel runs");
  sweep->add_option("--seed", seed, "override train.seed");
  auto* sel = add_common(
      app.add_subcommand("select-hparams", "sequential tau, alpha, beta selection"), true);
  sel->add_option("--jobs", jobs, "parallel runs");
  auto* prune = add_common(app.add_subcommand("prune", "magnitude-prune a checkpoint"), true);
  prune->add_option("--seed", seed, "override train.seed");
  add_common(app.add_subcommand("eval", "evaluate a checkpoint"), true);
  auto* compare = app.add_subcommand("compare", "merge run summaries into a table");
  compare->add_option("dirs", compare_dirs, "artifact directories")->required();
  compare->add_option("--out", out_dir, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand("train")) lit::harness::cmd_train(config_path, out_dir, seed);
    else if (app.got_subcommand("sweep")) lit::harness::cmd_sweep(config_path, out_dir, jobs, seed);
    else if (app.got_subcommand("select-hparams"))
      lit::harness::cmd_select_hparams(config_path, out_dir, jobs);
    else if (app.got_subcommand("prune")) lit::harness::cmd_prune(config_path, out_dir, seed);
    else if (app.got_subcommand("eval")) lit::harness::cmd_eval(config_path, out_dir);
    else if (app.got_subcommand("compare")) lit::harness::cmd_compare(compare_dirs, out_dir);
  } catch (const lit::Error& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 1;
  }
  return 0;
}
