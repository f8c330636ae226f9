// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lit/tensor.hpp"

namespace lit::data {

enum class Task { Classification, Translation };

// In-memory dataset. Inputs are normalized to per-channel mean 0 / stddev 1
// under the recorded statistics (translation targets carry their own stats).
struct Dataset {
  Task task = Task::Classification;
  Shape input_shape;                 // {C, H, W}
  std::vector<float> inputs;         // N * C*H*W, normalized
  std::vector<int32_t> labels;       // classification
  std::vector<float> targets;        // translation, N * C*H*W, normalized
  std::string split = "train";
  int class_count = 0;
  std::vector<float> norm_mean, norm_std;      // per input channel
  std::vector<float> target_mean, target_std;  // per target channel (translation)

  int64_t size() const {
    const int64_t per = shape_numel(input_shape);
    return per ? static_cast<int64_t>(inputs.size()) / per : 0;
  }
  int64_t sample_numel() const { return shape_numel(input_shape); }
};

struct Splits {
  Dataset train, val, test;
};

// Balanced classes * per_class pool of textured-pattern images. Classes are
// oriented gratings crossed with a quadrant sign-parity bit, so the task is
// Bayes-separable but not linearly separable. Deterministic in seed;
// unnormalized (normalization happens at partition time).
Dataset gen_synthetic_classification(uint64_t seed, int classes, int size, int per_class,
                                     double noise = 0.45);

// n pairs (x, f(x)) with f a fixed seeded smooth transformation: a per-pixel
// color remap followed by a 3x3 blur. Deterministic and non-idempotent.
Dataset gen_synthetic_translation(uint64_t seed, int size, int n);

// The transformation f behind gen_synthetic_translation(seed, ...), applied
// to a batch of 3-channel size x size images.
std::vector<float> translation_transform(uint64_t seed, const std::vector<float>& images,
                                         int size);

// Optional reader for the standard small-image binary format: records of one
// label byte followed by 3072 channel-major pixel bytes. Reads at most
// `limit` records (limit < 0 means all). Rejects truncated files naming the
// byte offset.
Dataset load_small_image_binary(const std::string& path, int64_t limit);

// Seeded-permutation partition into train/val/test. Normalization statistics
// come from the train split and are applied to (and recorded in) all three.
Splits partition(const Dataset& pool, int64_t train_n, int64_t val_n, int64_t test_n,
                 uint64_t seed);

// Undo / redo normalization (used by the round-trip invariant and reporting).
std::vector<float> denormalize(const Dataset& d, const std::vector<float>& values, bool targets);
std::vector<float> normalize(const Dataset& d, const std::vector<float>& values, bool targets);

// Assemble a batch input tensor (and targets) for the sample indices given.
TensorF gather_inputs(const Dataset& d, const std::vector<uint32_t>& idx, std::size_t off,
                      std::size_t count);
TensorF gather_targets(const Dataset& d, const std::vector<uint32_t>& idx, std::size_t off,
                       std::size_t count);
std::vector<int32_t> gather_labels(const Dataset& d, const std::vector<uint32_t>& idx,
                                   std::size_t off, std::size_t count);

}  // namespace lit::data
