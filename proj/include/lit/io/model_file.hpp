// SPDX-License-Identifier: Apache-2.0
#pragma once

// Binary tensor container ("LITM"): magic, format version, the canonical
// spec text, then named tensors as shape + little-endian raw data. Used for
// model checkpoints and cached datasets.
//
//   bytes 0-3   "LITM"
//   u32         version (1)
//   u32         spec text length, then that many bytes
//   u64         entry count
//   per entry:  u32 name length, name bytes, u8 dtype (0=f32, 1=i32),
//               u32 rank, u64 dims..., raw values

#include <cstdint>
#include <string>
#include <vector>

#include "lit/net/network.hpp"
#include "lit/tensor.hpp"

namespace lit::io {

struct TensorEntry {
  std::string name;
  uint8_t dtype = 0;  // 0 = f32, 1 = i32
  Shape shape;
  std::vector<float> f32;
  std::vector<int32_t> i32;
};

struct Container {
  std::string spec_text;
  std::vector<TensorEntry> entries;
};

void write_container(const std::string& path, const Container& c);
Container read_container(const std::string& path);

// Checkpoints: every parameter, batch-norm running stats, and prune masks
// (as "<name>#mask"). Loading rebuilds from the embedded spec and requires
// the entry set to match the architecture exactly.
void save_network(SegmentedNetworkF& net, const std::string& path);
SegmentedNetworkF load_network(const std::string& path);

}  // namespace lit::io
