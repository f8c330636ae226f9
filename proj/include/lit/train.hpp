// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "lit/data.hpp"
#include "lit/losses.hpp"
#include "lit/net/network.hpp"

namespace lit {

enum class Variant {
  Scratch,
  Kd,
  Lit,
  HintSingleNoInput,
  HintSingleWithInput,
  MultiIrNoInput,
};

const char* variant_name(Variant v);
Variant variant_from(const std::string& s);

struct TrainConfig {
  Variant variant = Variant::Scratch;
  int epochs = 10;
  int fine_tune_epochs = 0;
  int batch_size = 32;
  double lr0 = 0.1;
  std::vector<int> milestones;
  double lr_decay = 10.0;
  double ft_lr0 = 0.01;
  std::vector<int> ft_milestones;
  double momentum = 0.9;
  double weight_decay = 1e-4;
  DistillConfig distill;
  uint64_t seed = 1;

  void validate() const;
};

// Appendix-style schedules: the paper's epoch counts as the "paper" preset,
// scaled down by `scale` (default 1/10) for the desk preset.
struct Schedule {
  int epochs;
  std::vector<int> milestones;
  double lr0;
  int fine_tune_epochs;
  std::vector<int> ft_milestones;
  double ft_lr0;
};
Schedule preset_schedule(Variant v, double scale);

struct EpochRow {
  int epoch;
  std::string phase;  // "train" or "fine_tune"
  double lr;
  double train_loss;
  double val_metric;  // accuracy (classifier) or per-pixel error (generator)
};

struct RunReport {
  std::vector<EpochRow> rows;
  double final_val = 0;
  double final_test = 0;
  double wall_seconds = 0;
  std::vector<std::string> notes;
};

struct TrainOutput {
  SegmentedNetworkF model;
  RunReport report;
};

// lr0 scaled down once per milestone already reached: lr0 / decay^|{m <= epoch}|
double lr_at(double lr0, const std::vector<int>& milestones, double decay, int epoch);
double lr_at_epoch(const TrainConfig& cfg, int epoch);

// buffer <- momentum*buffer + grad + wd*value; value <- value - lr*buffer;
// prune mask re-applied after the update. Every listed parameter must carry a
// gradient.
void sgd_step(const std::vector<Parameter<float>*>& params, double lr, double momentum, double wd);

// Runs backward on loss, then returns name -> gradient for every parameter of
// the network; unreachable parameters get zeros. Consumes the active tape.
template <typename T>
std::map<std::string, std::vector<T>> backward_gradients(Tensor<T>& loss,
                                                         SegmentedNetwork<T>& net) {
  backward(loss);
  std::map<std::string, std::vector<T>> out;
  net.for_each_parameter([&](Parameter<T>& p) {
    if (p.value.has_grad())
      out[p.name] = std::vector<T>(p.value.grad().begin(), p.value.grad().end());
    else
      out[p.name] = std::vector<T>(static_cast<std::size_t>(p.value.numel()), T(0));
  });
  return out;
}

struct PruneSpec {
  double sparsity = 0.5;        // fraction in [0, 1)
  bool global_scope = false;    // false: per-tensor
  int fine_tune_epochs = 0;
};

// Masks the smallest-magnitude conv/linear weights to zero (per scope) and
// returns the achieved zero fraction over the eligible weights. Masks persist
// through later optimizer steps.
double magnitude_prune(SegmentedNetworkF& net, const PruneSpec& spec);

// Classification accuracy, or mean per-pixel absolute error for generators.
// Deterministic, eval-mode normalization.
double evaluate(SegmentedNetworkF& net, const data::Dataset& dataset);

// Per-sample teacher outputs for the training set, computed once in eval mode
// (per-sample outputs are batch-independent there, so caching is exact).
struct TeacherCache {
  std::vector<Shape> ir_shapes;
  std::vector<std::vector<float>> irs;  // [split][n * numel]
  std::vector<float> logits;            // n * classes
  int64_t n = 0;
  int64_t classes = 0;
};
TeacherCache build_teacher_cache(SegmentedNetworkF& teacher, const data::Dataset& train,
                                 bool want_irs, bool want_logits, int batch_size);

// The full training procedure for one variant. teacher is required (and left
// byte-identical) for every variant except Scratch.
TrainOutput train(const TrainConfig& cfg, SegmentedNetworkF* teacher,
                  const NetworkSpec& student_spec, const data::Splits& data);

// Plain-loss fine-tuning of an existing network (the pruning pipeline):
// cross-entropy for classifiers, L2 regression for generators. Prune masks
// persist through every update.
RunReport fine_tune_inplace(SegmentedNetworkF& net, const TrainConfig& cfg,
                            const data::Splits& data);

}  // namespace lit
