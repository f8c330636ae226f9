// SPDX-License-Identifier: Apache-2.0
#pragma once

// Run orchestration behind the CLI subcommands. Every command is idempotent
// with respect to its output directory for identical inputs, and never
// mutates its input config or checkpoints.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lit/data.hpp"
#include "lit/io/config.hpp"
#include "lit/net/spec.hpp"
#include "lit/train.hpp"

namespace lit::harness {

// Resolved pieces of an experiment config.
data::Splits make_data(const io::Config& cfg);
NetworkSpec net_spec_from(const io::Config& cfg, const std::string& prefix,
                          const data::Dataset& sample);
TrainConfig train_config_from(const io::Config& cfg);

struct TrainArtifacts {
  std::string out_dir;
  double final_val = 0;
  double final_test = 0;
};

// train: writes metrics.csv, model.litm, config_echo.txt, summary.txt.
TrainArtifacts run_train(const io::Config& cfg, const std::string& out_dir);

void cmd_train(const std::string& config_path, const std::string& out_dir,
               std::optional<uint64_t> seed_override);
void cmd_sweep(const std::string& config_path, const std::string& out_dir, int jobs,
               std::optional<uint64_t> seed_override);
void cmd_select_hparams(const std::string& config_path, const std::string& out_dir, int jobs);
void cmd_prune(const std::string& config_path, const std::string& out_dir,
               std::optional<uint64_t> seed_override);
void cmd_eval(const std::string& config_path, const std::string& out_dir);
void cmd_compare(const std::vector<std::string>& artifact_dirs, const std::string& out_dir);

// metrics.csv content for a report (schema: epoch,phase,lr,train_loss,val_acc).
std::string metrics_csv(const RunReport& report);

}  // namespace lit::harness
