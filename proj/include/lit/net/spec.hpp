// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lit/tensor.hpp"

namespace lit {

enum class NetKind { Classifier, Generator };

// One run of residual blocks at fixed width. downsample is the stride applied
// at section entry (first block's first conv + projection shortcut).
struct SectionSpec {
  int blocks = 1;
  int channels = 16;
  int downsample = 1;
  int cardinality = 1;  // group count of the block convolutions, 1 = plain
};

// Declarative block-structured architecture.
//
// Classifier: stem conv (3x3, stride 1, stem_channels) -> sections ->
// global average pool + linear head. With section blocks [n,n,n] the weighted
// layer count is the standard 6n+2.
//
// Generator: stem of two convs (3x3 stride 1 to stem_channels, then 3x3
// stride 2 to the residual width) -> one residual section -> decoder head
// (nearest-neighbor 2x upsample + conv, then a final 3x3 conv to the input
// channel count).
struct NetworkSpec {
  NetKind kind = NetKind::Classifier;
  int input_channels = 3;
  int input_size = 16;  // square inputs
  int stem_channels = 16;
  std::vector<SectionSpec> sections;
  int class_count = 10;  // classifier only

  void validate() const;  // throws ErrorKind::Config
  int weighted_layers() const;
  std::string encode() const;
  static NetworkSpec decode(const std::string& text);

  static NetworkSpec resnet(const std::vector<int>& blocks, const std::vector<int>& channels,
                            int cardinality, int classes, int input_channels = 3,
                            int input_size = 16);
  static NetworkSpec generator(int blocks, int width, int stem_channels, int input_channels = 3,
                               int input_size = 16);
};

// The k teacher<->student split points with their IR shapes, plus the layers
// copied directly. Splits sit at the section boundaries.
struct SplitSpec {
  int k = 0;
  std::vector<Shape> ir_shapes;  // per split: {C, H, W}
};

struct PairingPlan {
  SplitSpec split;
  std::vector<std::string> copy_list;  // layer-name prefixes, e.g. "stem", "head"
};

// IR shapes of a network's own section boundaries (no batch extent).
std::vector<Shape> section_output_shapes(const NetworkSpec& spec);

// Succeeds iff kind, input, section count, channel widths and strides agree
// (block counts and cardinality may differ). Throws ErrorKind::Pairing naming
// the first offending split.
SplitSpec validate_pairing(const NetworkSpec& teacher, const NetworkSpec& student);

// Stem and head by default.
std::vector<std::string> default_copy_list();

// Every layer prefix: stem, sec0..sec{k-1}, head.
std::vector<std::string> full_copy_list(const NetworkSpec& spec);

}  // namespace lit
