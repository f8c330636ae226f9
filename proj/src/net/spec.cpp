// SPDX-License-Identifier: Apache-2.0
#include "lit/net/spec.hpp"

#include <sstream>

#include "lit/error.hpp"

namespace lit {

namespace {

int section_input_channels(const NetworkSpec& s, std::size_t i) {
  if (i == 0) return s.kind == NetKind::Classifier ? s.stem_channels : s.sections[0].channels;
  return s.sections[i - 1].channels;
}

std::vector<std::string> split_str(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

int parse_int(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    const int v = std::stoi(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    fail(ErrorKind::Format, "bad integer '" + s + "' in " + what);
  }
}

}  // namespace

void NetworkSpec::validate() const {
  if (sections.empty()) fail(ErrorKind::Config, "network spec needs at least one section");
  if (input_channels < 1 || input_size < 8)
    fail(ErrorKind::Config, "input must be at least 1 channel and 8x8, got " +
                                std::to_string(input_channels) + "x" + std::to_string(input_size));
  if (stem_channels < 1) fail(ErrorKind::Config, "stem_channels must be positive");
  if (kind == NetKind::Classifier && class_count < 2)
    fail(ErrorKind::Config, "classifier needs class_count >= 2");
  if (kind == NetKind::Generator && sections.size() != 1)
    fail(ErrorKind::Config, "generator spec uses exactly one residual section");
  int size = input_size;
  if (kind == NetKind::Generator) size /= 2;  // stem downsamples once
  for (std::size_t i = 0; i < sections.size(); ++i) {
    const auto& sec = sections[i];
    if (sec.blocks < 1) fail(ErrorKind::Config, "section " + std::to_string(i) + ": blocks must be >= 1");
    if (sec.channels < 1) fail(ErrorKind::Config, "section " + std::to_string(i) + ": channels must be >= 1");
    if (sec.downsample != 1 && sec.downsample != 2)
      fail(ErrorKind::Config, "section " + std::to_string(i) + ": downsample must be 1 or 2");
    if (kind == NetKind::Generator && sec.downsample != 1)
      fail(ErrorKind::Config, "generator residual section does not downsample");
    const int in_ch = section_input_channels(*this, i);
    if (sec.cardinality < 1 || sec.channels % sec.cardinality != 0 || in_ch % sec.cardinality != 0)
      fail(ErrorKind::Config, "section " + std::to_string(i) + ": cardinality " +
                                  std::to_string(sec.cardinality) + " must divide channels " +
                                  std::to_string(sec.channels) + " and input channels " +
                                  std::to_string(in_ch));
    size /= sec.downsample;
    if (size < 1) fail(ErrorKind::Config, "input size too small for the downsampling chain");
  }
}

int NetworkSpec::weighted_layers() const {
  int n = 0;
  for (const auto& sec : sections) n += 2 * sec.blocks;
  // classifier: stem conv + fc; generator: two stem convs + two head convs
  return n + (kind == NetKind::Classifier ? 2 : 4);
}

std::string NetworkSpec::encode() const {
  std::ostringstream os;
  os << "kind=" << (kind == NetKind::Classifier ? "resnet" : "generator") << '\n';
  os << "input=" << input_channels << 'x' << input_size << 'x' << input_size << '\n';
  if (kind == NetKind::Classifier) os << "classes=" << class_count << '\n';
  os << "stem=" << stem_channels << '\n';
  os << "sections=";
  for (std::size_t i = 0; i < sections.size(); ++i) {
    const auto& s = sections[i];
    os << (i ? "," : "") << s.blocks << 'x' << s.channels << 's' << s.downsample << 'g'
       << s.cardinality;
  }
  os << '\n';
  return os.str();
}

NetworkSpec NetworkSpec::decode(const std::string& text) {
  NetworkSpec spec;
  spec.sections.clear();
  bool saw_kind = false, saw_sections = false;
  for (const auto& raw : split_str(text, '\n')) {
    if (raw.empty()) continue;
    const auto eq = raw.find('=');
    if (eq == std::string::npos) fail(ErrorKind::Format, "bad spec line '" + raw + "'");
    const std::string key = raw.substr(0, eq), val = raw.substr(eq + 1);
    if (key == "kind") {
      if (val == "resnet") spec.kind = NetKind::Classifier;
      else if (val == "generator") spec.kind = NetKind::Generator;
      else fail(ErrorKind::Format, "unknown network kind '" + val + "'");
      saw_kind = true;
    } else if (key == "input") {
      const auto parts = split_str(val, 'x');
      if (parts.size() != 3 || parts[1] != parts[2])
        fail(ErrorKind::Format, "input must be CxSxS, got '" + val + "'");
      spec.input_channels = parse_int(parts[0], "input");
      spec.input_size = parse_int(parts[1], "input");
    } else if (key == "classes") {
      spec.class_count = parse_int(val, "classes");
    } else if (key == "stem") {
      spec.stem_channels = parse_int(val, "stem");
    } else if (key == "sections") {
      for (const auto& tok : split_str(val, ',')) {
        SectionSpec s;
        const auto xp = tok.find('x'), sp = tok.find('s'), gp = tok.find('g');
        if (xp == std::string::npos || sp == std::string::npos || gp == std::string::npos ||
            !(xp < sp && sp < gp))
          fail(ErrorKind::Format, "bad section token '" + tok + "' (want BxCsDgG)");
        s.blocks = parse_int(tok.substr(0, xp), "section blocks");
        s.channels = parse_int(tok.substr(xp + 1, sp - xp - 1), "section channels");
        s.downsample = parse_int(tok.substr(sp + 1, gp - sp - 1), "section downsample");
        s.cardinality = parse_int(tok.substr(gp + 1), "section cardinality");
        spec.sections.push_back(s);
      }
      saw_sections = true;
    } else {
      fail(ErrorKind::Format, "unknown spec key '" + key + "'");
    }
  }
  if (!saw_kind || !saw_sections) fail(ErrorKind::Format, "spec is missing kind or sections");
  spec.validate();
  return spec;
}

NetworkSpec NetworkSpec::resnet(const std::vector<int>& blocks, const std::vector<int>& channels,
                                int cardinality, int classes, int input_channels, int input_size) {
  if (blocks.size() != channels.size() || blocks.empty())
    fail(ErrorKind::Config, "resnet spec needs matching, non-empty blocks and channels lists");
  NetworkSpec spec;
  spec.kind = NetKind::Classifier;
  spec.input_channels = input_channels;
  spec.input_size = input_size;
  spec.class_count = classes;
  spec.stem_channels = channels[0];
  for (std::size_t i = 0; i < blocks.size(); ++i)
    spec.sections.push_back({blocks[i], channels[i], i == 0 ? 1 : 2, cardinality});
  spec.validate();
  return spec;
}

NetworkSpec NetworkSpec::generator(int blocks, int width, int stem_channels, int input_channels,
                                   int input_size) {
  NetworkSpec spec;
  spec.kind = NetKind::Generator;
  spec.input_channels = input_channels;
  spec.input_size = input_size;
  spec.stem_channels = stem_channels;
  spec.class_count = 0;
  spec.sections.push_back({blocks, width, 1, 1});
  spec.validate();
  return spec;
}

std::vector<Shape> section_output_shapes(const NetworkSpec& spec) {
  std::vector<Shape> out;
  int64_t size = spec.input_size;
  if (spec.kind == NetKind::Generator) size /= 2;
  for (const auto& sec : spec.sections) {
    size /= sec.downsample;
    out.push_back({sec.channels, size, size});
  }
  return out;
}

SplitSpec validate_pairing(const NetworkSpec& teacher, const NetworkSpec& student) {
  teacher.validate();
  student.validate();
  if (teacher.kind != student.kind)
    fail(ErrorKind::Pairing, "teacher and student have different network kinds");
  if (teacher.input_channels != student.input_channels || teacher.input_size != student.input_size)
    fail(ErrorKind::Pairing, "teacher and student input shapes differ");
  if (teacher.kind == NetKind::Classifier && teacher.class_count != student.class_count)
    fail(ErrorKind::Pairing, "teacher and student class counts differ");
  if (teacher.kind == NetKind::Generator && teacher.stem_channels != student.stem_channels)
    fail(ErrorKind::Pairing, "generator stem widths differ (stem and head must be copyable)");
  if (teacher.sections.size() != student.sections.size())
    fail(ErrorKind::Pairing, "section counts differ: teacher " +
                                 std::to_string(teacher.sections.size()) + " vs student " +
                                 std::to_string(student.sections.size()));
  const auto t_shapes = section_output_shapes(teacher);
  const auto s_shapes = section_output_shapes(student);
  for (std::size_t i = 0; i < t_shapes.size(); ++i) {
    if (t_shapes[i] != s_shapes[i])
      fail(ErrorKind::Pairing, "IR shapes differ at split " + std::to_string(i + 1) + ": teacher " +
                                   shape_str(t_shapes[i]) + " vs student " + shape_str(s_shapes[i]));
  }
  SplitSpec split;
  split.k = static_cast<int>(t_shapes.size());
  split.ir_shapes = t_shapes;
  return split;
}

std::vector<std::string> default_copy_list() { return {"stem", "head"}; }

std::vector<std::string> full_copy_list(const NetworkSpec& spec) {
  std::vector<std::string> out{"stem"};
  for (std::size_t i = 0; i < spec.sections.size(); ++i) out.push_back("sec" + std::to_string(i));
  out.push_back("head");
  return out;
}

}  // namespace lit
