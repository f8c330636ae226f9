// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstring>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lit/net/spec.hpp"
#include "lit/ops.hpp"
#include "lit/rng.hpp"

namespace lit {

// Trainable tensor with its optimizer state. Where prune_mask is 0 the value
// is pinned to exactly 0 by every optimizer step.
template <typename T>
struct Parameter {
  std::string name;
  Tensor<T> value;
  std::vector<T> momentum;
  std::vector<T> prune_mask;  // empty = unmasked

  Parameter() = default;
  Parameter(std::string n, Tensor<T> v) : name(std::move(n)), value(std::move(v)) {
    value.set_requires_grad(true);
    momentum.assign(static_cast<std::size_t>(value.numel()), T(0));
  }
};

namespace net {

template <typename T>
struct Conv2dLayer {
  Parameter<T> w;                      // [F, C/g, k, k]
  std::optional<Parameter<T>> b;
  ops::Conv2dAttrs attrs;

  Tensor<T> forward(const Tensor<T>& x) const {
    return ops::conv2d(x, w.value, b ? b->value : Tensor<T>{}, attrs);
  }
};

template <typename T>
struct BatchNormLayer {
  Parameter<T> gamma, beta;
  std::vector<T> running_mean, running_var;

  Tensor<T> forward(const Tensor<T>& x, bool training) {
    return ops::batch_norm(x, gamma.value, beta.value, running_mean, running_var, training);
  }
};

template <typename T>
struct ConvBn {
  Conv2dLayer<T> conv;
  BatchNormLayer<T> bn;
  bool relu = true;

  Tensor<T> forward(const Tensor<T>& x, bool training) {
    auto y = bn.forward(conv.forward(x), training);
    return relu ? ops::relu(y) : y;
  }
};

// Two 3x3 convolutions (grouped when cardinality > 1) with identity shortcut,
// or a 1x1 strided projection at section entry / width change.
template <typename T>
struct ResidualBlock {
  ConvBn<T> c1;                      // relu inside
  Conv2dLayer<T> conv2;
  BatchNormLayer<T> bn2;
  std::optional<ConvBn<T>> proj;     // relu = false

  Tensor<T> forward(const Tensor<T>& x, bool training) {
    auto y = bn2.forward(conv2.forward(c1.forward(x, training)), training);
    auto shortcut = proj ? proj->forward(x, training) : x;
    return ops::relu(ops::add(y, shortcut));
  }
};

template <typename T>
struct LinearLayer {
  Parameter<T> w, b;
  Tensor<T> forward(const Tensor<T>& x) const { return ops::linear(x, w.value, b.value); }
};

}  // namespace net

// A block-structured network split at its downsampling boundaries:
// stem | section_1 | ... | section_k | head. Segment 0 is stem + section 1;
// segment i >= 1 is section i+1; composing all segments and the head equals
// the full forward pass exactly.
template <typename T>
class SegmentedNetwork {
 public:
  SegmentedNetwork() = default;
  SegmentedNetwork(const SegmentedNetwork&) = delete;
  SegmentedNetwork& operator=(const SegmentedNetwork&) = delete;
  SegmentedNetwork(SegmentedNetwork&&) = default;
  SegmentedNetwork& operator=(SegmentedNetwork&&) = default;

  const NetworkSpec& spec() const { return spec_; }
  int split_count() const { return static_cast<int>(sections_.size()); }

  Tensor<T> forward_segment(int i, const Tensor<T>& x, bool training) {
    if (i < 0 || i >= split_count())
      fail(ErrorKind::Usage, "segment index " + std::to_string(i) + " out of range");
    Tensor<T> y = x;
    if (i == 0)
      for (auto& s : stem_) y = s.forward(y, training);
    for (auto& block : sections_[static_cast<std::size_t>(i)]) y = block.forward(y, training);
    return y;
  }

  Tensor<T> forward_head(const Tensor<T>& x, bool training) {
    if (spec_.kind == NetKind::Classifier) return fc_->forward(ops::global_avg_pool(x));
    auto y = head_up_->forward(ops::upsample_nearest2x(x), training);
    return head_out_->forward(y);
  }

  Tensor<T> forward(const Tensor<T>& x, bool training) {
    check_input(x);
    Tensor<T> y = x;
    for (int i = 0; i < split_count(); ++i) y = forward_segment(i, y, training);
    return forward_head(y, training);
  }

  // Full forward that also surfaces the k intermediate representations at the
  // section boundaries.
  std::pair<Tensor<T>, std::vector<Tensor<T>>> forward_collect(const Tensor<T>& x, bool training) {
    check_input(x);
    std::vector<Tensor<T>> irs;
    Tensor<T> y = x;
    for (int i = 0; i < split_count(); ++i) {
      y = forward_segment(i, y, training);
      irs.push_back(y);
    }
    return {forward_head(y, training), std::move(irs)};
  }

  void for_each_parameter(const std::function<void(Parameter<T>&)>& fn) {
    auto conv = [&](net::Conv2dLayer<T>& c) {
      fn(c.w);
      if (c.b) fn(*c.b);
    };
    auto bn = [&](net::BatchNormLayer<T>& b) {
      fn(b.gamma);
      fn(b.beta);
    };
    auto convbn = [&](net::ConvBn<T>& cb) {
      conv(cb.conv);
      bn(cb.bn);
    };
    for (auto& s : stem_) convbn(s);
    for (auto& sec : sections_)
      for (auto& blk : sec) {
        convbn(blk.c1);
        conv(blk.conv2);
        bn(blk.bn2);
        if (blk.proj) convbn(*blk.proj);
      }
    if (fc_) {
      fn(fc_->w);
      fn(fc_->b);
    }
    if (head_up_) convbn(*head_up_);
    if (head_out_) conv(*head_out_);
  }

  std::vector<Parameter<T>*> parameters() {
    std::vector<Parameter<T>*> out;
    for_each_parameter([&](Parameter<T>& p) { out.push_back(&p); });
    return out;
  }

  Parameter<T>* find_parameter(const std::string& name) {
    Parameter<T>* found = nullptr;
    for_each_parameter([&](Parameter<T>& p) {
      if (p.name == name) found = &p;
    });
    return found;
  }

  // Batch-norm running statistics, keyed "<bn name prefix>.running_{mean,var}".
  void for_each_aux(const std::function<void(const std::string&, std::vector<T>&)>& fn) {
    auto bn = [&](net::BatchNormLayer<T>& b) {
      // gamma is named "<prefix>.gamma"
      const std::string prefix = b.gamma.name.substr(0, b.gamma.name.size() - 6);
      fn(prefix + ".running_mean", b.running_mean);
      fn(prefix + ".running_var", b.running_var);
    };
    auto convbn = [&](net::ConvBn<T>& cb) { bn(cb.bn); };
    for (auto& s : stem_) convbn(s);
    for (auto& sec : sections_)
      for (auto& blk : sec) {
        bn(blk.c1.bn);
        bn(blk.bn2);
        if (blk.proj) bn(blk.proj->bn);
      }
    if (head_up_) convbn(*head_up_);
  }

  int64_t parameter_count() {
    int64_t n = 0;
    for_each_parameter([&](Parameter<T>& p) { n += p.value.numel(); });
    return n;
  }

  void zero_grad() {
    for_each_parameter([](Parameter<T>& p) { p.value.zero_grad(); });
  }

  // internals exposed for the builder below
  NetworkSpec spec_;
  std::vector<net::ConvBn<T>> stem_;
  std::vector<std::vector<net::ResidualBlock<T>>> sections_;
  std::optional<net::LinearLayer<T>> fc_;
  std::optional<net::ConvBn<T>> head_up_;
  std::optional<net::Conv2dLayer<T>> head_out_;

 private:
  void check_input(const Tensor<T>& x) const {
    if (x.rank() != 4 || x.dim(1) != spec_.input_channels || x.dim(2) != spec_.input_size ||
        x.dim(3) != spec_.input_size)
      fail(ErrorKind::Dimension,
           "input " + shape_str(x.shape()) + " does not match spec input " +
               std::to_string(spec_.input_channels) + "x" + std::to_string(spec_.input_size) + "x" +
               std::to_string(spec_.input_size));
  }
};

namespace net::detail {

template <typename T>
Tensor<T> he_normal(Rng& rng, Shape shape, int64_t fan_in) {
  Tensor<T> t(std::move(shape));
  const double std_dev = std::sqrt(2.0 / static_cast<double>(fan_in));
  for (auto& v : t.values()) v = static_cast<T>(rng.normal() * std_dev);
  return t;
}

template <typename T>
Conv2dLayer<T> make_conv(Rng& rng, const std::string& name, int64_t in_ch, int64_t out_ch,
                         int64_t k, int64_t stride, int64_t groups, bool bias) {
  Conv2dLayer<T> c;
  const int64_t fan_in = (in_ch / groups) * k * k;
  c.w = Parameter<T>(name + ".w", he_normal<T>(rng, {out_ch, in_ch / groups, k, k}, fan_in));
  if (bias) c.b = Parameter<T>(name + ".b", Tensor<T>({out_ch}));
  c.attrs = {stride, /*padding=*/(k - 1) / 2, groups};
  return c;
}

template <typename T>
BatchNormLayer<T> make_bn(const std::string& name, int64_t ch) {
  BatchNormLayer<T> b;
  Tensor<T> ones({ch});
  for (auto& v : ones.values()) v = T(1);
  b.gamma = Parameter<T>(name + ".gamma", std::move(ones));
  b.beta = Parameter<T>(name + ".beta", Tensor<T>({ch}));
  b.running_mean.assign(static_cast<std::size_t>(ch), T(0));
  b.running_var.assign(static_cast<std::size_t>(ch), T(1));
  return b;
}

template <typename T>
ConvBn<T> make_convbn(Rng& rng, const std::string& conv_name, const std::string& bn_name,
                      int64_t in_ch, int64_t out_ch, int64_t k, int64_t stride, int64_t groups,
                      bool relu) {
  ConvBn<T> cb;
  cb.conv = make_conv<T>(rng, conv_name, in_ch, out_ch, k, stride, groups, /*bias=*/false);
  cb.bn = make_bn<T>(bn_name, out_ch);
  cb.relu = relu;
  return cb;
}

}  // namespace net::detail

// Deterministic construction: He fan-in init for convolutions, ones/zeros for
// batch-norm scale/shift, fan-in normal for the linear head. Same seed, same
// bits.
template <typename T>
SegmentedNetwork<T> build_network(const NetworkSpec& spec, uint64_t seed) {
  using namespace net::detail;
  spec.validate();
  SegmentedNetwork<T> n;
  n.spec_ = spec;
  Rng rng(seed);

  if (spec.kind == NetKind::Classifier) {
    n.stem_.push_back(make_convbn<T>(rng, "stem.conv0", "stem.bn0", spec.input_channels,
                                     spec.stem_channels, 3, 1, 1, true));
  } else {
    n.stem_.push_back(make_convbn<T>(rng, "stem.conv0", "stem.bn0", spec.input_channels,
                                     spec.stem_channels, 3, 1, 1, true));
    n.stem_.push_back(make_convbn<T>(rng, "stem.conv1", "stem.bn1", spec.stem_channels,
                                     spec.sections[0].channels, 3, 2, 1, true));
  }

  int in_ch = spec.kind == NetKind::Classifier ? spec.stem_channels : spec.sections[0].channels;
  for (std::size_t si = 0; si < spec.sections.size(); ++si) {
    const auto& sec = spec.sections[si];
    std::vector<net::ResidualBlock<T>> blocks;
    for (int bi = 0; bi < sec.blocks; ++bi) {
      const std::string base = "sec" + std::to_string(si) + ".block" + std::to_string(bi);
      const int64_t stride = bi == 0 ? sec.downsample : 1;
      net::ResidualBlock<T> blk;
      blk.c1 = make_convbn<T>(rng, base + ".conv1", base + ".bn1", in_ch, sec.channels, 3, stride,
                              sec.cardinality, true);
      blk.conv2 = make_conv<T>(rng, base + ".conv2", sec.channels, sec.channels, 3, 1,
                               sec.cardinality, false);
      blk.bn2 = make_bn<T>(base + ".bn2", sec.channels);
      if (stride != 1 || in_ch != sec.channels)
        blk.proj = make_convbn<T>(rng, base + ".proj", base + ".projbn", in_ch, sec.channels, 1,
                                  stride, 1, false);
      blocks.push_back(std::move(blk));
      in_ch = sec.channels;
    }
    n.sections_.push_back(std::move(blocks));
  }

  if (spec.kind == NetKind::Classifier) {
    net::LinearLayer<T> fc;
    Rng& r = rng;
    Tensor<T> w({spec.class_count, in_ch});
    const double std_dev = 1.0 / std::sqrt(static_cast<double>(in_ch));
    for (auto& v : w.values()) v = static_cast<T>(r.normal() * std_dev);
    fc.w = Parameter<T>("head.fc.w", std::move(w));
    fc.b = Parameter<T>("head.fc.b", Tensor<T>({spec.class_count}));
    n.fc_ = std::move(fc);
  } else {
    n.head_up_ = make_convbn<T>(rng, "head.conv0", "head.bn0", in_ch, spec.stem_channels, 3, 1, 1,
                                true);
    n.head_out_ = make_conv<T>(rng, "head.conv1", spec.stem_channels, spec.input_channels, 3, 1, 1,
                               /*bias=*/true);
  }
  return n;
}

// Copies every parameter (and batch-norm running stats) whose name equals an
// entry or starts with "<entry>.", teacher to student. Copied layers stay
// trainable. Throws ErrorKind::Copy on unmatched entries or shape mismatches.
template <typename T>
void copy_layers(SegmentedNetwork<T>& teacher, SegmentedNetwork<T>& student,
                 const PairingPlan& plan) {
  auto matches = [](const std::string& name, const std::string& entry) {
    return name == entry || (name.size() > entry.size() && name.compare(0, entry.size(), entry) == 0 &&
                             name[entry.size()] == '.');
  };
  for (const auto& entry : plan.copy_list) {
    bool any = false;
    teacher.for_each_parameter([&](Parameter<T>& tp) {
      if (!matches(tp.name, entry)) return;
      any = true;
      Parameter<T>* sp = student.find_parameter(tp.name);
      if (!sp) fail(ErrorKind::Copy, "student has no parameter '" + tp.name + "'");
      if (sp->value.shape() != tp.value.shape())
        fail(ErrorKind::Copy, "copy shape mismatch for '" + tp.name + "': teacher " +
                                  shape_str(tp.value.shape()) + " vs student " +
                                  shape_str(sp->value.shape()));
      std::memcpy(sp->value.data(), tp.value.data(), sizeof(T) * tp.value.numel());
      sp->prune_mask = tp.prune_mask;
    });
    // running stats under the same prefixes
    std::vector<std::pair<std::string, std::vector<T>*>> taux;
    teacher.for_each_aux([&](const std::string& name, std::vector<T>& v) {
      if (matches(name, entry)) taux.emplace_back(name, &v);
    });
    student.for_each_aux([&](const std::string& name, std::vector<T>& v) {
      for (auto& [tname, tv] : taux)
        if (tname == name) {
          if (tv->size() != v.size())
            fail(ErrorKind::Copy, "copy shape mismatch for '" + name + "'");
          v = *tv;
        }
    });
    if (!any) fail(ErrorKind::Copy, "copy entry '" + entry + "' matches no teacher layer");
  }
}

using SegmentedNetworkF = SegmentedNetwork<float>;

}  // namespace lit
