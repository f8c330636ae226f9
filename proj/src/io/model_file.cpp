// SPDX-License-Identifier: Apache-2.0
#include "lit/io/model_file.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <map>

#include "lit/error.hpp"

static_assert(std::endian::native == std::endian::little,
              "container I/O assumes a little-endian host");

namespace lit::io {

namespace {

constexpr char kMagic[4] = {'L', 'I', 'T', 'M'};
constexpr uint32_t kVersion = 1;

template <typename T>
void put(std::ofstream& f, T v) {
  f.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T take(std::ifstream& f, const std::string& path) {
  T v{};
  f.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!f) fail(ErrorKind::Format, "truncated container '" + path + "'");
  return v;
}

}  // namespace

void write_container(const std::string& path, const Container& c) {
  std::ofstream f(path, std::ios::binary);
  if (!f) fail(ErrorKind::Format, "cannot write '" + path + "'");
  f.write(kMagic, 4);
  put<uint32_t>(f, kVersion);
  put<uint32_t>(f, static_cast<uint32_t>(c.spec_text.size()));
  f.write(c.spec_text.data(), static_cast<std::streamsize>(c.spec_text.size()));
  put<uint64_t>(f, c.entries.size());
  for (const auto& e : c.entries) {
    put<uint32_t>(f, static_cast<uint32_t>(e.name.size()));
    f.write(e.name.data(), static_cast<std::streamsize>(e.name.size()));
    put<uint8_t>(f, e.dtype);
    put<uint32_t>(f, static_cast<uint32_t>(e.shape.size()));
    for (auto d : e.shape) put<uint64_t>(f, static_cast<uint64_t>(d));
    if (e.dtype == 0)
      f.write(reinterpret_cast<const char*>(e.f32.data()),
              static_cast<std::streamsize>(e.f32.size() * sizeof(float)));
    else
      f.write(reinterpret_cast<const char*>(e.i32.data()),
              static_cast<std::streamsize>(e.i32.size() * sizeof(int32_t)));
  }
  if (!f) fail(ErrorKind::Format, "write failed for '" + path + "'");
}

Container read_container(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail(ErrorKind::Format, "cannot read '" + path + "'");
  char magic[4];
  f.read(magic, 4);
  if (!f || std::memcmp(magic, kMagic, 4) != 0)
    fail(ErrorKind::Format, "'" + path + "' is not a LITM container");
  const auto version = take<uint32_t>(f, path);
  if (version != kVersion)
    fail(ErrorKind::Format, "unsupported container version " + std::to_string(version));
  Container c;
  const auto spec_len = take<uint32_t>(f, path);
  c.spec_text.resize(spec_len);
  f.read(c.spec_text.data(), spec_len);
  if (!f) fail(ErrorKind::Format, "truncated container '" + path + "'");
  const auto count = take<uint64_t>(f, path);
  for (uint64_t i = 0; i < count; ++i) {
    TensorEntry e;
    const auto name_len = take<uint32_t>(f, path);
    e.name.resize(name_len);
    f.read(e.name.data(), name_len);
    e.dtype = take<uint8_t>(f, path);
    if (e.dtype > 1) fail(ErrorKind::Format, "bad dtype in '" + path + "'");
    const auto rank = take<uint32_t>(f, path);
    int64_t numel = 1;
    for (uint32_t r = 0; r < rank; ++r) {
      const auto d = static_cast<int64_t>(take<uint64_t>(f, path));
      if (d <= 0) fail(ErrorKind::Format, "bad extent in '" + path + "'");
      e.shape.push_back(d);
      numel *= d;
    }
    if (e.dtype == 0) {
      e.f32.resize(static_cast<std::size_t>(numel));
      f.read(reinterpret_cast<char*>(e.f32.data()),
             static_cast<std::streamsize>(e.f32.size() * sizeof(float)));
    } else {
      e.i32.resize(static_cast<std::size_t>(numel));
      f.read(reinterpret_cast<char*>(e.i32.data()),
             static_cast<std::streamsize>(e.i32.size() * sizeof(int32_t)));
    }
    if (!f) fail(ErrorKind::Format, "truncated container '" + path + "'");
    c.entries.push_back(std::move(e));
  }
  return c;
}

void save_network(SegmentedNetworkF& net, const std::string& path) {
  Container c;
  c.spec_text = net.spec().encode();
  net.for_each_parameter([&](Parameter<float>& p) {
    TensorEntry e;
    e.name = p.name;
    e.shape = p.value.shape();
    e.f32.assign(p.value.values().begin(), p.value.values().end());
    c.entries.push_back(std::move(e));
    if (!p.prune_mask.empty()) {
      TensorEntry m;
      m.name = p.name + "#mask";
      m.shape = p.value.shape();
      m.f32 = p.prune_mask;
      c.entries.push_back(std::move(m));
    }
  });
  net.for_each_aux([&](const std::string& name, std::vector<float>& v) {
    TensorEntry e;
    e.name = name;
    e.shape = {static_cast<int64_t>(v.size())};
    e.f32 = v;
    c.entries.push_back(std::move(e));
  });
  write_container(path, c);
}

SegmentedNetworkF load_network(const std::string& path) {
  Container c = read_container(path);
  NetworkSpec spec = NetworkSpec::decode(c.spec_text);
  SegmentedNetworkF net = build_network<float>(spec, /*seed=*/0);

  std::map<std::string, const TensorEntry*> by_name;
  for (const auto& e : c.entries) {
    if (!by_name.emplace(e.name, &e).second)
      fail(ErrorKind::Format, "duplicate entry '" + e.name + "' in '" + path + "'");
  }
  std::size_t used = 0;
  net.for_each_parameter([&](Parameter<float>& p) {
    const auto it = by_name.find(p.name);
    if (it == by_name.end())
      fail(ErrorKind::Format, "checkpoint '" + path + "' is missing parameter '" + p.name + "'");
    const TensorEntry& e = *it->second;
    if (e.shape != p.value.shape() || e.dtype != 0)
      fail(ErrorKind::Format, "checkpoint entry '" + p.name + "' has wrong shape or dtype");
    std::copy(e.f32.begin(), e.f32.end(), p.value.data());
    ++used;
    const auto mit = by_name.find(p.name + "#mask");
    if (mit != by_name.end()) {
      p.prune_mask = mit->second->f32;
      ++used;
    }
  });
  net.for_each_aux([&](const std::string& name, std::vector<float>& v) {
    const auto it = by_name.find(name);
    if (it == by_name.end())
      fail(ErrorKind::Format, "checkpoint '" + path + "' is missing '" + name + "'");
    if (it->second->f32.size() != v.size())
      fail(ErrorKind::Format, "checkpoint entry '" + name + "' has wrong size");
    v = it->second->f32;
    ++used;
  });
  if (used != by_name.size())
    fail(ErrorKind::Format, "checkpoint '" + path + "' carries entries unknown to the architecture");
  return net;
}

}  // namespace lit::io
