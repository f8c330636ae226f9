// SPDX-License-Identifier: Apache-2.0
#include "lit/io/dataset_file.hpp"

#include <map>
#include <sstream>

#include "lit/error.hpp"
#include "lit/io/model_file.hpp"

namespace lit::io {

namespace {

TensorEntry f32_entry(const std::string& name, Shape shape, const std::vector<float>& v) {
  TensorEntry e;
  e.name = name;
  e.dtype = 0;
  e.shape = std::move(shape);
  e.f32 = v;
  return e;
}

}  // namespace

void save_dataset(const data::Dataset& d, const std::string& path) {
  if (d.size() == 0) fail(ErrorKind::Usage, "refusing to cache an empty dataset");
  Container c;
  std::ostringstream head;
  head << "dataset\n";
  head << "task=" << (d.task == data::Task::Classification ? "classification" : "translation")
       << '\n';
  head << "split=" << d.split << '\n';
  head << "classes=" << d.class_count << '\n';
  c.spec_text = head.str();

  const Shape full{d.size(), d.input_shape[0], d.input_shape[1], d.input_shape[2]};
  c.entries.push_back(f32_entry("inputs", full, d.inputs));
  if (d.task == data::Task::Classification) {
    TensorEntry labels;
    labels.name = "labels";
    labels.dtype = 1;
    labels.shape = {d.size()};
    labels.i32 = d.labels;
    c.entries.push_back(std::move(labels));
  } else {
    c.entries.push_back(f32_entry("targets", full, d.targets));
  }
  if (!d.norm_mean.empty()) {
    c.entries.push_back(f32_entry("norm_mean", {int64_t(d.norm_mean.size())}, d.norm_mean));
    c.entries.push_back(f32_entry("norm_std", {int64_t(d.norm_std.size())}, d.norm_std));
  }
  if (!d.target_mean.empty()) {
    c.entries.push_back(f32_entry("target_mean", {int64_t(d.target_mean.size())}, d.target_mean));
    c.entries.push_back(f32_entry("target_std", {int64_t(d.target_std.size())}, d.target_std));
  }
  write_container(path, c);
}

data::Dataset load_dataset(const std::string& path) {
  Container c = read_container(path);
  std::istringstream head(c.spec_text);
  std::string line;
  std::getline(head, line);
  if (line != "dataset") fail(ErrorKind::Format, "'" + path + "' is not a cached dataset");
  data::Dataset d;
  while (std::getline(head, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    const std::string key = line.substr(0, eq), value = line.substr(eq + 1);
    if (key == "task")
      d.task = value == "classification" ? data::Task::Classification : data::Task::Translation;
    else if (key == "split")
      d.split = value;
    else if (key == "classes")
      d.class_count = std::stoi(value);
  }

  std::map<std::string, const TensorEntry*> by_name;
  for (const auto& e : c.entries) by_name[e.name] = &e;
  const auto need = [&](const std::string& name) -> const TensorEntry& {
    const auto it = by_name.find(name);
    if (it == by_name.end())
      fail(ErrorKind::Format, "cached dataset '" + path + "' is missing '" + name + "'");
    return *it->second;
  };

  const TensorEntry& inputs = need("inputs");
  if (inputs.shape.size() != 4) fail(ErrorKind::Format, "cached inputs must be [N,C,H,W]");
  d.input_shape = {inputs.shape[1], inputs.shape[2], inputs.shape[3]};
  d.inputs = inputs.f32;
  if (d.task == data::Task::Classification) {
    d.labels = need("labels").i32;
    if (static_cast<int64_t>(d.labels.size()) != inputs.shape[0])
      fail(ErrorKind::Format, "cached label count does not match inputs");
  } else {
    d.targets = need("targets").f32;
    if (d.targets.size() != d.inputs.size())
      fail(ErrorKind::Format, "cached target size does not match inputs");
  }
  if (by_name.count("norm_mean")) {
    d.norm_mean = need("norm_mean").f32;
    d.norm_std = need("norm_std").f32;
  }
  if (by_name.count("target_mean")) {
    d.target_mean = need("target_mean").f32;
    d.target_std = need("target_std").f32;
  }
  return d;
}

}  // namespace lit::io
