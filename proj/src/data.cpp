// SPDX-License-Identifier: Apache-2.0
#include "lit/data.hpp"

#include <cmath>
#include <fstream>
#include <numbers>

#include "lit/error.hpp"
#include "lit/rng.hpp"

namespace lit::data {

namespace {

constexpr int kChannels = 3;

struct ChannelStats {
  std::vector<float> mean, std;
};

ChannelStats channel_stats(const std::vector<float>& v, const Shape& shape) {
  const int64_t C = shape[0], per = shape[1] * shape[2];
  const int64_t n = static_cast<int64_t>(v.size()) / (C * per);
  ChannelStats st;
  st.mean.assign(C, 0.f);
  st.std.assign(C, 1.f);
  if (n == 0) return st;
  for (int64_t c = 0; c < C; ++c) {
    double s = 0, s2 = 0;
    for (int64_t i = 0; i < n; ++i) {
      const float* p = v.data() + (i * C + c) * per;
      for (int64_t j = 0; j < per; ++j) {
        s += p[j];
        s2 += double(p[j]) * p[j];
      }
    }
    const double m = s / double(n * per);
    double var = s2 / double(n * per) - m * m;
    if (var < 1e-12) var = 1e-12;
    st.mean[c] = static_cast<float>(m);
    st.std[c] = static_cast<float>(std::sqrt(var));
  }
  return st;
}

void apply_norm(std::vector<float>& v, const Shape& shape, const ChannelStats& st) {
  const int64_t C = shape[0], per = shape[1] * shape[2];
  const int64_t n = static_cast<int64_t>(v.size()) / (C * per);
  for (int64_t i = 0; i < n; ++i)
    for (int64_t c = 0; c < C; ++c) {
      float* p = v.data() + (i * C + c) * per;
      for (int64_t j = 0; j < per; ++j) p[j] = (p[j] - st.mean[c]) / st.std[c];
    }
}

}  // namespace

Dataset gen_synthetic_classification(uint64_t seed, int classes, int size, int per_class,
                                     double noise) {
  if (classes < 2) fail(ErrorKind::Config, "need at least 2 classes");
  if (size < 8) fail(ErrorKind::Config, "image size must be >= 8");
  Dataset d;
  d.task = Task::Classification;
  d.input_shape = {kChannels, size, size};
  d.class_count = classes;
  const int64_t n = static_cast<int64_t>(classes) * per_class;
  const int64_t per = d.sample_numel();
  d.inputs.assign(static_cast<std::size_t>(n * per), 0.f);
  d.labels.reserve(static_cast<std::size_t>(n));

  // Class factors: orientation index and a quadrant-sign parity bit. The
  // orientation count covers ceil(classes/2) angles; parity doubles them.
  const int orient_count = (classes + 1) / 2;
  Rng rng(Rng::mix(seed, 0x5e7a11));
  const int half = size / 2;

  for (int64_t i = 0; i < n; ++i) {
    const int c = static_cast<int>(i % classes);
    d.labels.push_back(c);
    const int orient = c % orient_count;
    const int parity = c / orient_count;  // 0 or 1

    const double angle =
        std::numbers::pi * (orient + 0.15 * (rng.uniform() - 0.5)) / orient_count;
    const double freq = 2.0 * std::numbers::pi * 2.0 / size;
    const double phase = rng.uniform() * 2.0 * std::numbers::pi;
    const double amp = 0.8 + 0.4 * rng.uniform();
    // quadrant signs with product fixed by the parity bit
    double sgn[4];
    int prod = 1;
    for (int q = 0; q < 3; ++q) {
      const int s = rng.uniform() < 0.5 ? -1 : 1;
      sgn[q] = s;
      prod *= s;
    }
    sgn[3] = (parity == 0 ? 1 : -1) * prod;
    // per-sample color weights (nuisance)
    double color[kChannels];
    for (double& w : color) w = 0.5 + 0.5 * rng.uniform();

    const double ca = std::cos(angle), sa = std::sin(angle);
    float* img = d.inputs.data() + i * per;
    for (int y = 0; y < size; ++y)
      for (int x = 0; x < size; ++x) {
        const int q = (y >= half ? 2 : 0) + (x >= half ? 1 : 0);
        const double u = x * ca + y * sa;
        const double g = amp * sgn[q] * std::cos(freq * u + phase);
        for (int ch = 0; ch < kChannels; ++ch)
          img[(ch * size + y) * size + x] =
              static_cast<float>(color[ch] * g + noise * rng.normal());
      }
  }
  return d;
}

std::vector<float> translation_transform(uint64_t seed, const std::vector<float>& images,
                                          int size) {
  // f fixed by the seed: three rounds of a saturating color remap followed by
  // a separable [1,2,1] blur with edge clamping. The composition is spatially
  // compositional (7x7 effective support with nonlinear interactions), which
  // rewards generator depth. f(f(x)) != f(x) by construction.
  constexpr int kRounds = 3;
  Rng frng(Rng::mix(seed, 0xf00d));
  double mix[kRounds][kChannels][kChannels], gain[kRounds][kChannels], bias[kRounds][kChannels];
  for (int r = 0; r < kRounds; ++r)
    for (int i = 0; i < kChannels; ++i) {
      for (int j = 0; j < kChannels; ++j)
        mix[r][i][j] = (i == j ? 0.9 : 0.0) + 0.5 * (frng.uniform() - 0.25);
      gain[r][i] = 1.2 + 0.8 * frng.uniform();
      bias[r][i] = 0.4 * (frng.uniform() - 0.5);
    }

  const int64_t per = static_cast<int64_t>(kChannels) * size * size;
  const int64_t n = static_cast<int64_t>(images.size()) / per;
  std::vector<float> out(images.size());
  std::vector<float> cur(static_cast<std::size_t>(per)), pre(static_cast<std::size_t>(per));
  static const double w[3] = {0.25, 0.5, 0.25};
  for (int64_t i = 0; i < n; ++i) {
    std::copy_n(images.data() + i * per, per, cur.data());
    for (int r = 0; r < kRounds; ++r) {
      for (int ch = 0; ch < kChannels; ++ch)
        for (int p = 0; p < size * size; ++p) {
          double v = 0;
          for (int c2 = 0; c2 < kChannels; ++c2) v += mix[r][ch][c2] * cur[static_cast<std::size_t>(c2 * size * size + p)];
          pre[static_cast<std::size_t>(ch * size * size + p)] =
              static_cast<float>(std::tanh(gain[r][ch] * v + bias[r][ch]));
        }
      const auto at = [&](int ch, int y, int xx) {
        y = y < 0 ? 0 : (y >= size ? size - 1 : y);
        xx = xx < 0 ? 0 : (xx >= size ? size - 1 : xx);
        return pre[static_cast<std::size_t>((ch * size + y) * size + xx)];
      };
      for (int ch = 0; ch < kChannels; ++ch)
        for (int y = 0; y < size; ++y)
          for (int xx = 0; xx < size; ++xx) {
            double v = 0;
            for (int dy = -1; dy <= 1; ++dy)
              for (int dx = -1; dx <= 1; ++dx)
                v += w[dy + 1] * w[dx + 1] * at(ch, y + dy, xx + dx);
            cur[static_cast<std::size_t>((ch * size + y) * size + xx)] = static_cast<float>(v);
          }
    }
    std::copy_n(cur.data(), per, out.data() + i * per);
  }
  return out;
}

Dataset gen_synthetic_translation(uint64_t seed, int size, int n) {
  if (size < 8) fail(ErrorKind::Config, "image size must be >= 8");
  Dataset d;
  d.task = Task::Translation;
  d.input_shape = {kChannels, size, size};
  const int64_t per = d.sample_numel();
  d.inputs.assign(static_cast<std::size_t>(n) * per, 0.f);

  Rng rng(Rng::mix(seed, 0x57a9e));
  for (int64_t i = 0; i < n; ++i) {
    float* x = d.inputs.data() + i * per;
    // input: sum of a few random smooth gratings per channel
    for (int ch = 0; ch < kChannels; ++ch) {
      double a[3], kx[3], ky[3], ph[3];
      for (int g = 0; g < 3; ++g) {
        a[g] = 0.4 + 0.6 * rng.uniform();
        const double angle = rng.uniform() * std::numbers::pi;
        const double f = 2.0 * std::numbers::pi * (1.0 + 2.0 * rng.uniform()) / size;
        kx[g] = f * std::cos(angle);
        ky[g] = f * std::sin(angle);
        ph[g] = rng.uniform() * 2.0 * std::numbers::pi;
      }
      for (int y = 0; y < size; ++y)
        for (int xx = 0; xx < size; ++xx) {
          double v = 0;
          for (int g = 0; g < 3; ++g) v += a[g] * std::cos(kx[g] * xx + ky[g] * y + ph[g]);
          x[(ch * size + y) * size + xx] = static_cast<float>(v / 3.0);
        }
    }
  }
  d.targets = translation_transform(seed, d.inputs, size);
  return d;
}

Dataset load_small_image_binary(const std::string& path, int64_t limit) {
  constexpr int64_t kRecord = 1 + 3072;
  std::ifstream f(path, std::ios::binary | std::ios::ate);
  if (!f) fail(ErrorKind::Format, "cannot open dataset file '" + path + "'");
  const int64_t len = static_cast<int64_t>(f.tellg());
  if (len % kRecord != 0)
    fail(ErrorKind::Format, "file length " + std::to_string(len) + " is not a multiple of " +
                                std::to_string(kRecord) + " (truncated record at byte offset " +
                                std::to_string((len / kRecord) * kRecord) + ")");
  f.seekg(0);
  int64_t n = len / kRecord;
  if (limit >= 0 && limit < n) n = limit;

  Dataset d;
  d.task = Task::Classification;
  d.input_shape = {3, 32, 32};
  d.class_count = 10;
  d.inputs.assign(static_cast<std::size_t>(n) * 3072, 0.f);
  d.labels.reserve(static_cast<std::size_t>(n));
  std::vector<unsigned char> rec(kRecord);
  for (int64_t i = 0; i < n; ++i) {
    f.read(reinterpret_cast<char*>(rec.data()), kRecord);
    if (!f)
      fail(ErrorKind::Format,
           "truncated record at byte offset " + std::to_string(i * kRecord));
    if (rec[0] >= 10)
      fail(ErrorKind::Format, "label " + std::to_string(int(rec[0])) + " >= 10 at record " +
                                  std::to_string(i));
    d.labels.push_back(rec[0]);
    float* out = d.inputs.data() + i * 3072;
    for (int j = 0; j < 3072; ++j) out[j] = static_cast<float>(rec[1 + j]) / 255.f;
  }
  return d;
}

Splits partition(const Dataset& pool, int64_t train_n, int64_t val_n, int64_t test_n,
                 uint64_t seed) {
  const int64_t n = pool.size();
  if (train_n + val_n + test_n > n)
    fail(ErrorKind::Config, "split sizes " + std::to_string(train_n + val_n + test_n) +
                                " exceed pool size " + std::to_string(n));
  Rng rng(Rng::mix(seed, 0x5911f));
  const auto perm = rng.permutation(static_cast<uint32_t>(n));

  const int64_t per = pool.sample_numel();
  auto take = [&](int64_t off, int64_t count, const std::string& tag) {
    Dataset d;
    d.task = pool.task;
    d.input_shape = pool.input_shape;
    d.class_count = pool.class_count;
    d.split = tag;
    d.inputs.resize(static_cast<std::size_t>(count * per));
    if (pool.task == Task::Translation) d.targets.resize(static_cast<std::size_t>(count * per));
    for (int64_t i = 0; i < count; ++i) {
      const int64_t src = perm[static_cast<std::size_t>(off + i)];
      std::copy_n(pool.inputs.data() + src * per, per, d.inputs.data() + i * per);
      if (pool.task == Task::Classification)
        d.labels.push_back(pool.labels[static_cast<std::size_t>(src)]);
      else
        std::copy_n(pool.targets.data() + src * per, per, d.targets.data() + i * per);
    }
    return d;
  };

  Splits s;
  s.train = take(0, train_n, "train");
  s.val = take(train_n, val_n, "val");
  s.test = take(train_n + val_n, test_n, "test");

  const auto in_st = channel_stats(s.train.inputs, pool.input_shape);
  ChannelStats tg_st;
  if (pool.task == Task::Translation) tg_st = channel_stats(s.train.targets, pool.input_shape);
  for (Dataset* d : {&s.train, &s.val, &s.test}) {
    apply_norm(d->inputs, d->input_shape, in_st);
    d->norm_mean = in_st.mean;
    d->norm_std = in_st.std;
    if (pool.task == Task::Translation) {
      apply_norm(d->targets, d->input_shape, tg_st);
      d->target_mean = tg_st.mean;
      d->target_std = tg_st.std;
    }
  }
  return s;
}

std::vector<float> denormalize(const Dataset& d, const std::vector<float>& values, bool targets) {
  const auto& mean = targets ? d.target_mean : d.norm_mean;
  const auto& stdv = targets ? d.target_std : d.norm_std;
  const int64_t C = d.input_shape[0], per = d.input_shape[1] * d.input_shape[2];
  std::vector<float> out(values.size());
  const int64_t n = static_cast<int64_t>(values.size()) / (C * per);
  for (int64_t i = 0; i < n; ++i)
    for (int64_t c = 0; c < C; ++c)
      for (int64_t j = 0; j < per; ++j) {
        const auto idx = static_cast<std::size_t>((i * C + c) * per + j);
        out[idx] = values[idx] * stdv[c] + mean[c];
      }
  return out;
}

std::vector<float> normalize(const Dataset& d, const std::vector<float>& values, bool targets) {
  const auto& mean = targets ? d.target_mean : d.norm_mean;
  const auto& stdv = targets ? d.target_std : d.norm_std;
  const int64_t C = d.input_shape[0], per = d.input_shape[1] * d.input_shape[2];
  std::vector<float> out(values.size());
  const int64_t n = static_cast<int64_t>(values.size()) / (C * per);
  for (int64_t i = 0; i < n; ++i)
    for (int64_t c = 0; c < C; ++c)
      for (int64_t j = 0; j < per; ++j) {
        const auto idx = static_cast<std::size_t>((i * C + c) * per + j);
        out[idx] = (values[idx] - mean[c]) / stdv[c];
      }
  return out;
}

TensorF gather_inputs(const Dataset& d, const std::vector<uint32_t>& idx, std::size_t off,
                      std::size_t count) {
  const int64_t per = d.sample_numel();
  TensorF x({static_cast<int64_t>(count), d.input_shape[0], d.input_shape[1], d.input_shape[2]});
  for (std::size_t i = 0; i < count; ++i)
    std::copy_n(d.inputs.data() + static_cast<int64_t>(idx[off + i]) * per, per,
                x.data() + static_cast<int64_t>(i) * per);
  return x;
}

TensorF gather_targets(const Dataset& d, const std::vector<uint32_t>& idx, std::size_t off,
                       std::size_t count) {
  const int64_t per = d.sample_numel();
  TensorF t({static_cast<int64_t>(count), d.input_shape[0], d.input_shape[1], d.input_shape[2]});
  for (std::size_t i = 0; i < count; ++i)
    std::copy_n(d.targets.data() + static_cast<int64_t>(idx[off + i]) * per, per,
                t.data() + static_cast<int64_t>(i) * per);
  return t;
}

std::vector<int32_t> gather_labels(const Dataset& d, const std::vector<uint32_t>& idx,
                                   std::size_t off, std::size_t count) {
  std::vector<int32_t> out(count);
  for (std::size_t i = 0; i < count; ++i) out[i] = d.labels[idx[off + i]];
  return out;
}

}  // namespace lit::data
