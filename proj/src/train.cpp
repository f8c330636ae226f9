// SPDX-License-Identifier: Apache-2.0
#include "lit/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>

#include "lit/rng.hpp"

namespace lit {

namespace {

constexpr int kEvalBatch = 64;

TensorF gather_rows(const std::vector<float>& flat, const Shape& row_shape,
                    const std::vector<uint32_t>& idx, std::size_t off, std::size_t count) {
  const int64_t per = shape_numel(row_shape);
  Shape shape;
  shape.push_back(static_cast<int64_t>(count));
  for (auto d : row_shape) shape.push_back(d);
  TensorF out(std::move(shape));
  for (std::size_t i = 0; i < count; ++i)
    std::copy_n(flat.data() + static_cast<int64_t>(idx[off + i]) * per, per,
                out.data() + static_cast<int64_t>(i) * per);
  return out;
}

std::vector<uint32_t> identity_order(int64_t n) {
  std::vector<uint32_t> v(static_cast<std::size_t>(n));
  for (int64_t i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = static_cast<uint32_t>(i);
  return v;
}

// Spatial shapes must agree at every split; channel widths may differ (the
// hint variants bridge them with a 1x1 adapter on the penalty side).
void validate_hint_pairing(const NetworkSpec& teacher, const NetworkSpec& student) {
  teacher.validate();
  student.validate();
  if (teacher.kind != NetKind::Classifier || student.kind != NetKind::Classifier)
    fail(ErrorKind::Config, "hint variants apply to classifiers");
  if (teacher.input_channels != student.input_channels || teacher.input_size != student.input_size)
    fail(ErrorKind::Pairing, "teacher and student input shapes differ");
  if (teacher.class_count != student.class_count)
    fail(ErrorKind::Pairing, "teacher and student class counts differ");
  if (teacher.sections.size() != student.sections.size())
    fail(ErrorKind::Pairing, "section counts differ");
  const auto ts = section_output_shapes(teacher);
  const auto ss = section_output_shapes(student);
  for (std::size_t i = 0; i < ts.size(); ++i)
    if (ts[i][1] != ss[i][1] || ts[i][2] != ss[i][2])
      fail(ErrorKind::Pairing, "spatial IR shapes differ at split " + std::to_string(i + 1));
}

}  // namespace

const char* variant_name(Variant v) {
  switch (v) {
    case Variant::Scratch: return "scratch";
    case Variant::Kd: return "kd";
    case Variant::Lit: return "lit";
    case Variant::HintSingleNoInput: return "hint_single_no_input";
    case Variant::HintSingleWithInput: return "hint_single_with_input";
    default: return "multi_ir_no_input";
  }
}

Variant variant_from(const std::string& s) {
  for (Variant v : {Variant::Scratch, Variant::Kd, Variant::Lit, Variant::HintSingleNoInput,
                    Variant::HintSingleWithInput, Variant::MultiIrNoInput})
    if (s == variant_name(v)) return v;
  fail(ErrorKind::Config, "unknown training variant '" + s + "'");
}

void TrainConfig::validate() const {
  if (epochs < 1) fail(ErrorKind::Config, "epochs must be >= 1");
  if (fine_tune_epochs < 0) fail(ErrorKind::Config, "fine_tune_epochs must be >= 0");
  if (batch_size < 1) fail(ErrorKind::Config, "batch_size must be >= 1");
  if (!(lr0 > 0) || !(ft_lr0 > 0)) fail(ErrorKind::Config, "learning rates must be > 0");
  if (lr_decay <= 0) fail(ErrorKind::Config, "lr_decay must be > 0");
  if (momentum < 0 || momentum >= 1) fail(ErrorKind::Config, "momentum must be in [0,1)");
  if (weight_decay < 0) fail(ErrorKind::Config, "weight_decay must be >= 0");
  auto check_ms = [](const std::vector<int>& ms, int count, const char* what) {
    for (std::size_t i = 0; i < ms.size(); ++i) {
      if (ms[i] < 1 || ms[i] >= count)
        fail(ErrorKind::Config, std::string(what) + " milestones must lie in [1, epochs)");
      if (i && ms[i] <= ms[i - 1])
        fail(ErrorKind::Config, std::string(what) + " milestones must be strictly increasing");
    }
  };
  check_ms(milestones, epochs, "train");
  if (fine_tune_epochs > 0) check_ms(ft_milestones, fine_tune_epochs, "fine-tune");
  distill.validate();
  if (variant == Variant::Scratch || variant == Variant::Kd) {
    if (fine_tune_epochs > 0)
      fail(ErrorKind::Config, "fine_tune_epochs applies only to the IR-based variants");
  }
}

Schedule preset_schedule(Variant v, double scale) {
  auto scaled = [&](int e) { return std::max(1, static_cast<int>(std::lround(e * scale))); };
  auto ms = [&](std::vector<int> raw, int epochs) {
    std::vector<int> out;
    for (int m : raw) {
      int s = std::clamp(static_cast<int>(std::lround(m * scale)), 1, epochs - 1);
      if (out.empty() || s > out.back()) out.push_back(s);
    }
    return out;
  };
  Schedule s{};
  s.lr0 = 0.1;
  s.ft_lr0 = 0.01;
  switch (v) {
    case Variant::Scratch:
      s.epochs = scaled(200);
      s.milestones = ms({100, 150}, s.epochs);
      break;
    case Variant::Kd:
      s.epochs = scaled(250);
      s.milestones = ms({100, 175}, s.epochs);
      break;
    default:
      s.epochs = scaled(175);
      s.milestones = ms({60, 100, 125}, s.epochs);
      s.fine_tune_epochs = scaled(75);
      s.ft_milestones = ms({35, 55}, s.fine_tune_epochs);
      break;
  }
  return s;
}

double lr_at(double lr0, const std::vector<int>& milestones, double decay, int epoch) {
  int hits = 0;
  for (int m : milestones)
    if (m <= epoch) ++hits;
  return lr0 / std::pow(decay, hits);
}

double lr_at_epoch(const TrainConfig& cfg, int epoch) {
  if (epoch < 0 || epoch >= cfg.epochs)
    fail(ErrorKind::Usage, "epoch " + std::to_string(epoch) + " outside [0, epochs)");
  return lr_at(cfg.lr0, cfg.milestones, cfg.lr_decay, epoch);
}

void sgd_step(const std::vector<Parameter<float>*>& params, double lr, double momentum,
              double wd) {
  for (Parameter<float>* p : params) {
    if (!p->value.has_grad())
      fail(ErrorKind::Internal, "sgd_step: parameter '" + p->name + "' has no gradient");
    const auto n = static_cast<std::size_t>(p->value.numel());
    kernels::sgd_update(p->value.data(), p->momentum.data(), p->value.grad().data(),
                        p->prune_mask.empty() ? nullptr : p->prune_mask.data(),
                        static_cast<float>(lr), static_cast<float>(momentum),
                        static_cast<float>(wd), n);
  }
}

double magnitude_prune(SegmentedNetworkF& net, const PruneSpec& spec) {
  if (spec.sparsity < 0 || spec.sparsity >= 1)
    fail(ErrorKind::Config, "sparsity must be in [0, 1)");
  std::vector<Parameter<float>*> eligible;
  net.for_each_parameter([&](Parameter<float>& p) {
    if (p.value.rank() >= 2) eligible.push_back(&p);
  });

  int64_t total = 0, zeros = 0;
  auto apply = [&](Parameter<float>* p, const std::vector<char>& zero_flags) {
    const auto n = static_cast<std::size_t>(p->value.numel());
    p->prune_mask.assign(n, 1.f);
    for (std::size_t i = 0; i < n; ++i)
      if (zero_flags[i]) {
        p->prune_mask[i] = 0.f;
        p->value.data()[i] = 0.f;
        ++zeros;
      }
  };

  if (!spec.global_scope) {
    for (auto* p : eligible) {
      const auto n = static_cast<std::size_t>(p->value.numel());
      total += static_cast<int64_t>(n);
      const auto k = static_cast<std::size_t>(spec.sparsity * static_cast<double>(n));
      std::vector<char> flags(n, 0);
      if (k > 0) {
        std::vector<std::pair<float, std::size_t>> mag(n);
        for (std::size_t i = 0; i < n; ++i) mag[i] = {std::fabs(p->value.data()[i]), i};
        std::nth_element(mag.begin(), mag.begin() + k - 1, mag.end());
        for (std::size_t i = 0; i < k; ++i) flags[mag[i].second] = 1;
      }
      apply(p, flags);
    }
  } else {
    struct Item {
      float mag;
      std::size_t tensor, idx;
      bool operator<(const Item& o) const {
        return mag != o.mag ? mag < o.mag : (tensor != o.tensor ? tensor < o.tensor : idx < o.idx);
      }
    };
    std::vector<Item> all;
    for (std::size_t t = 0; t < eligible.size(); ++t) {
      const auto n = static_cast<std::size_t>(eligible[t]->value.numel());
      total += static_cast<int64_t>(n);
      for (std::size_t i = 0; i < n; ++i)
        all.push_back({std::fabs(eligible[t]->value.data()[i]), t, i});
    }
    const auto k = static_cast<std::size_t>(spec.sparsity * static_cast<double>(total));
    std::vector<std::vector<char>> flags(eligible.size());
    for (std::size_t t = 0; t < eligible.size(); ++t)
      flags[t].assign(static_cast<std::size_t>(eligible[t]->value.numel()), 0);
    if (k > 0) {
      std::nth_element(all.begin(), all.begin() + k - 1, all.end());
      for (std::size_t i = 0; i < k; ++i) flags[all[i].tensor][all[i].idx] = 1;
    }
    for (std::size_t t = 0; t < eligible.size(); ++t) apply(eligible[t], flags[t]);
  }
  return total ? static_cast<double>(zeros) / static_cast<double>(total) : 0.0;
}

double evaluate(SegmentedNetworkF& net, const data::Dataset& dataset) {
  const int64_t n = dataset.size();
  if (n == 0) fail(ErrorKind::Usage, "evaluate: dataset is empty");
  NoGradScope ng;
  const auto order = identity_order(n);
  int64_t correct = 0;
  double abs_err = 0;
  for (int64_t off = 0; off < n; off += kEvalBatch) {
    const auto count = static_cast<std::size_t>(std::min<int64_t>(kEvalBatch, n - off));
    auto x = data::gather_inputs(dataset, order, static_cast<std::size_t>(off), count);
    auto out = net.forward(x, /*training=*/false);
    if (dataset.task == data::Task::Classification) {
      const int64_t K = out.dim(1);
      for (std::size_t i = 0; i < count; ++i) {
        const float* row = out.data() + static_cast<int64_t>(i) * K;
        int best = 0;
        for (int64_t k = 1; k < K; ++k)
          if (row[k] > row[best]) best = static_cast<int>(k);
        if (best == dataset.labels[static_cast<std::size_t>(off) + i]) ++correct;
      }
    } else {
      auto t = data::gather_targets(dataset, order, static_cast<std::size_t>(off), count);
      const auto m = static_cast<std::size_t>(out.numel());
      for (std::size_t i = 0; i < m; ++i) abs_err += std::fabs(out.data()[i] - t.data()[i]);
    }
  }
  if (dataset.task == data::Task::Classification)
    return static_cast<double>(correct) / static_cast<double>(n);
  return abs_err / (static_cast<double>(n) * static_cast<double>(dataset.sample_numel()));
}

TeacherCache build_teacher_cache(SegmentedNetworkF& teacher, const data::Dataset& train,
                                 bool want_irs, bool want_logits, int batch_size) {
  TeacherCache cache;
  cache.n = train.size();
  const int k = teacher.split_count();
  cache.ir_shapes = section_output_shapes(teacher.spec());
  if (want_irs) {
    cache.irs.resize(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i)
      cache.irs[static_cast<std::size_t>(i)].assign(
          static_cast<std::size_t>(cache.n * shape_numel(cache.ir_shapes[static_cast<std::size_t>(i)])), 0.f);
  }
  if (want_logits) {
    cache.classes = teacher.spec().class_count;
    cache.logits.assign(static_cast<std::size_t>(cache.n * cache.classes), 0.f);
  }
  NoGradScope ng;
  const auto order = identity_order(cache.n);
  for (int64_t off = 0; off < cache.n; off += batch_size) {
    const auto count = static_cast<std::size_t>(std::min<int64_t>(batch_size, cache.n - off));
    auto x = data::gather_inputs(train, order, static_cast<std::size_t>(off), count);
    if (want_irs) {
      auto [out, irs] = teacher.forward_collect(x, /*training=*/false);
      for (int i = 0; i < k; ++i) {
        const int64_t per = shape_numel(cache.ir_shapes[static_cast<std::size_t>(i)]);
        std::copy_n(irs[static_cast<std::size_t>(i)].data(), static_cast<int64_t>(count) * per,
                    cache.irs[static_cast<std::size_t>(i)].data() + off * per);
      }
      if (want_logits)
        std::copy_n(out.data(), static_cast<int64_t>(count) * cache.classes,
                    cache.logits.data() + off * cache.classes);
    } else if (want_logits) {
      auto out = teacher.forward(x, /*training=*/false);
      std::copy_n(out.data(), static_cast<int64_t>(count) * cache.classes,
                  cache.logits.data() + off * cache.classes);
    }
  }
  return cache;
}

TrainOutput train(const TrainConfig& cfg, SegmentedNetworkF* teacher,
                  const NetworkSpec& student_spec, const data::Splits& data) {
  const auto t_start = std::chrono::steady_clock::now();
  cfg.validate();
  student_spec.validate();
  const bool classifier = student_spec.kind == NetKind::Classifier;
  // beta = 1 is the KD endpoint: the lit variant degenerates to the plain KD
  // procedure (no layer copy, no IR work), so beta-sweep rows at 1 match KD.
  const bool lit_is_plain_kd = cfg.variant == Variant::Lit && cfg.distill.beta == 1.0;
  const bool uses_irs = (cfg.variant == Variant::Lit && !lit_is_plain_kd) ||
                        cfg.variant == Variant::MultiIrNoInput ||
                        cfg.variant == Variant::HintSingleNoInput ||
                        cfg.variant == Variant::HintSingleWithInput;

  if (cfg.variant != Variant::Scratch && !teacher)
    fail(ErrorKind::Config, std::string("variant ") + variant_name(cfg.variant) + " requires a teacher");
  if (!classifier) {
    if (cfg.variant != Variant::Scratch && cfg.variant != Variant::Lit)
      fail(ErrorKind::Config, "generator training supports variants scratch and lit only");
    if (cfg.variant == Variant::Lit && cfg.distill.beta != 0.0)
      fail(ErrorKind::Config, "generator lit training requires beta = 0 (no KD term)");
    if (cfg.fine_tune_epochs > 0)
      fail(ErrorKind::Config, "generator KD fine-tune is not supported; set fine_tune_epochs = 0");
  }

  RunReport report;
  if ((cfg.variant == Variant::Lit && !lit_is_plain_kd) || cfg.variant == Variant::MultiIrNoInput) {
    validate_pairing(teacher->spec(), student_spec);
  } else if (cfg.variant == Variant::HintSingleNoInput ||
             cfg.variant == Variant::HintSingleWithInput) {
    validate_hint_pairing(teacher->spec(), student_spec);
  }

  SegmentedNetworkF student = build_network<float>(student_spec, cfg.seed);
  // Generator lit trains the residual sections only; the copied non-residual
  // layers stay fixed (the adversarial fine-tune that would adjust them is
  // out of scope).
  const bool freeze_copied = cfg.variant == Variant::Lit && !classifier;
  if (cfg.variant == Variant::Lit && !lit_is_plain_kd) {
    PairingPlan plan;
    plan.split = validate_pairing(teacher->spec(), student_spec);
    plan.copy_list = default_copy_list();
    copy_layers(*teacher, student, plan);
    report.notes.push_back(freeze_copied ? "copied=stem,head (frozen)" : "copied=stem,head");
  }
  auto trainable = [&](const Parameter<float>& p) {
    if (!freeze_copied) return true;
    return p.name.rfind("sec", 0) == 0;
  };

  // hint split: the middle boundary; adapter bridges a width mismatch
  const int k = student.split_count();
  const int hint = k / 2;
  std::optional<net::Conv2dLayer<float>> adapter;
  if (cfg.variant == Variant::HintSingleNoInput || cfg.variant == Variant::HintSingleWithInput) {
    const auto t_shapes = section_output_shapes(teacher->spec());
    const auto s_shapes = section_output_shapes(student_spec);
    if (cfg.variant == Variant::HintSingleWithInput && hint > 0 &&
        t_shapes[static_cast<std::size_t>(hint) - 1] != s_shapes[static_cast<std::size_t>(hint) - 1])
      fail(ErrorKind::Pairing,
           "hint_single_with_input needs matching widths at the split feeding the hint block");
    if (t_shapes[static_cast<std::size_t>(hint)] != s_shapes[static_cast<std::size_t>(hint)]) {
      Rng arng(Rng::mix(cfg.seed, 0xada9));
      adapter = net::detail::make_conv<float>(
          arng, "hint.adapter", s_shapes[static_cast<std::size_t>(hint)][0],
          t_shapes[static_cast<std::size_t>(hint)][0], 1, 1, 1, /*bias=*/false);
      report.notes.push_back("hint_adapter=conv1x1");
    } else {
      report.notes.push_back("hint_adapter=none");
    }
  }
  if (classifier && cfg.variant != Variant::Scratch)
    report.notes.push_back("kd_soft_term=cross_entropy(teacher_target,student_softened)");

  // teacher outputs cached once (eval mode; exact per-sample values)
  TeacherCache cache;
  const bool want_logits = classifier && cfg.variant != Variant::Scratch;
  if (uses_irs || want_logits)
    cache = build_teacher_cache(*teacher, data.train, uses_irs, want_logits, cfg.batch_size);

  const int64_t n_train = data.train.size();
  if (n_train == 0) fail(ErrorKind::Usage, "training split is empty");
  const float alpha = static_cast<float>(cfg.distill.alpha);
  const float tau = static_cast<float>(cfg.distill.tau);
  const float beta = static_cast<float>(cfg.distill.beta);

  auto kd_term = [&](const TensorF& x, const std::vector<uint32_t>& idx, std::size_t off,
                     std::size_t count, const std::vector<int32_t>& labels) {
    auto t_logits = gather_rows(cache.logits, {cache.classes}, idx, off, count);
    auto s_logits = student.forward(x, /*training=*/true);
    return kd_loss(s_logits, t_logits, labels, alpha, tau, cfg.distill.soft_term_tau_squared);
  };
  auto gather_irs = [&](const std::vector<uint32_t>& idx, std::size_t off, std::size_t count) {
    std::vector<TensorF> out;
    for (int i = 0; i < k; ++i)
      out.push_back(gather_rows(cache.irs[static_cast<std::size_t>(i)],
                                cache.ir_shapes[static_cast<std::size_t>(i)], idx, off, count));
    return out;
  };
  auto combine = [&](TensorF kd, TensorF ir) {
    if (cfg.distill.beta == 1.0) return kd;
    if (cfg.distill.beta == 0.0) return ir;
    return ops::add(ops::scale(kd, beta), ops::scale(ir, 1.f - beta));
  };

  // one training step's loss (phase 1)
  auto batch_loss = [&](const std::vector<uint32_t>& idx, std::size_t off, std::size_t count) {
    auto x = data::gather_inputs(data.train, idx, off, count);
    std::vector<int32_t> labels;
    if (classifier) labels = data::gather_labels(data.train, idx, off, count);
    switch (cfg.variant) {
      case Variant::Scratch: {
        if (classifier)
          return ops::nll(ops::log_softmax_temperature(student.forward(x, true), 1.f), labels);
        auto t = data::gather_targets(data.train, idx, off, count);
        return ir_penalty_loss(student.forward(x, true), t, IrPenalty::L2);
      }
      case Variant::Kd:
        return kd_term(x, idx, off, count, labels);
      case Variant::Lit: {
        if (cfg.distill.beta == 1.0) return kd_term(x, idx, off, count, labels);
        auto ir = ir_loss_terms(gather_irs(idx, off, count), student, x, cfg.distill.penalty, true);
        if (cfg.distill.beta == 0.0) return ir;
        return combine(kd_term(x, idx, off, count, labels), std::move(ir));
      }
      case Variant::HintSingleNoInput: {
        auto [s_logits, s_irs] = student.forward_collect(x, true);
        auto t_ir = gather_rows(cache.irs[static_cast<std::size_t>(hint)],
                                cache.ir_shapes[static_cast<std::size_t>(hint)], idx, off, count);
        auto s_ir = adapter ? adapter->forward(s_irs[static_cast<std::size_t>(hint)])
                            : s_irs[static_cast<std::size_t>(hint)];
        auto hint_loss = ir_penalty_loss(s_ir, t_ir, cfg.distill.penalty);
        auto t_logits = gather_rows(cache.logits, {cache.classes}, idx, off, count);
        auto kd = kd_loss(s_logits, t_logits, labels, alpha, tau, cfg.distill.soft_term_tau_squared);
        return combine(std::move(kd), std::move(hint_loss));
      }
      case Variant::HintSingleWithInput: {
        TensorF block_in =
            hint == 0 ? x
                      : gather_rows(cache.irs[static_cast<std::size_t>(hint) - 1],
                                    cache.ir_shapes[static_cast<std::size_t>(hint) - 1], idx, off, count);
        auto s_out = student.forward_segment(hint, block_in, true);
        auto t_ir = gather_rows(cache.irs[static_cast<std::size_t>(hint)],
                                cache.ir_shapes[static_cast<std::size_t>(hint)], idx, off, count);
        auto s_ir = adapter ? adapter->forward(s_out) : s_out;
        auto hint_loss = ir_penalty_loss(s_ir, t_ir, cfg.distill.penalty);
        return combine(kd_term(x, idx, off, count, labels), std::move(hint_loss));
      }
      default: {  // MultiIrNoInput
        auto [s_logits, s_irs] = student.forward_collect(x, true);
        auto t_irs = gather_irs(idx, off, count);
        auto ir = ir_penalty_loss(s_irs[0], t_irs[0], cfg.distill.penalty);
        for (int i = 1; i < k; ++i)
          ir = ops::add(ir, ir_penalty_loss(s_irs[static_cast<std::size_t>(i)],
                                            t_irs[static_cast<std::size_t>(i)], cfg.distill.penalty));
        auto t_logits = gather_rows(cache.logits, {cache.classes}, idx, off, count);
        auto kd = kd_loss(s_logits, t_logits, labels, alpha, tau, cfg.distill.soft_term_tau_squared);
        return combine(std::move(kd), std::move(ir));
      }
    }
  };

  auto fine_tune_loss = [&](const std::vector<uint32_t>& idx, std::size_t off, std::size_t count) {
    auto x = data::gather_inputs(data.train, idx, off, count);
    auto labels = data::gather_labels(data.train, idx, off, count);
    return kd_term(x, idx, off, count, labels);
  };

  auto run_epoch = [&](int phase_id, int epoch_in_phase, int epoch_number, double lr,
                       const std::function<TensorF(const std::vector<uint32_t>&, std::size_t,
                                                   std::size_t)>& loss_fn) {
    Rng perm_rng(Rng::mix(cfg.seed, Rng::mix(static_cast<uint64_t>(phase_id),
                                             static_cast<uint64_t>(epoch_in_phase))));
    const auto perm = perm_rng.permutation(static_cast<uint32_t>(n_train));
    double loss_sum = 0;
    for (int64_t off = 0; off < n_train; off += cfg.batch_size) {
      const auto count = static_cast<std::size_t>(std::min<int64_t>(cfg.batch_size, n_train - off));
      TapeScope<float> scope;
      auto loss = loss_fn(perm, static_cast<std::size_t>(off), count);
      backward(loss);
      std::vector<Parameter<float>*> step_params;
      student.for_each_parameter([&](Parameter<float>& p) {
        if (p.value.has_grad() && trainable(p)) step_params.push_back(&p);
      });
      if (adapter && adapter->w.value.has_grad()) step_params.push_back(&adapter->w);
      sgd_step(step_params, lr, cfg.momentum, cfg.weight_decay);
      student.zero_grad();
      if (adapter) adapter->w.value.zero_grad();
      loss_sum += static_cast<double>(loss.item()) * static_cast<double>(count);
    }
    EpochRow row;
    row.epoch = epoch_number;
    row.phase = phase_id == 0 ? "train" : "fine_tune";
    row.lr = lr;
    row.train_loss = loss_sum / static_cast<double>(n_train);
    row.val_metric = evaluate(student, data.val);
    report.rows.push_back(row);
  };

  for (int e = 0; e < cfg.epochs; ++e)
    run_epoch(0, e, e, lr_at(cfg.lr0, cfg.milestones, cfg.lr_decay, e), batch_loss);
  if (cfg.fine_tune_epochs > 0 && cfg.variant != Variant::Scratch && cfg.variant != Variant::Kd)
    for (int e = 0; e < cfg.fine_tune_epochs; ++e)
      run_epoch(1, e, cfg.epochs + e, lr_at(cfg.ft_lr0, cfg.ft_milestones, cfg.lr_decay, e),
                fine_tune_loss);

  report.final_val = evaluate(student, data.val);
  report.final_test = evaluate(student, data.test);
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return {std::move(student), std::move(report)};
}

RunReport fine_tune_inplace(SegmentedNetworkF& net, const TrainConfig& cfg,
                            const data::Splits& data) {
  const auto t_start = std::chrono::steady_clock::now();
  const bool classifier = net.spec().kind == NetKind::Classifier;
  const int64_t n_train = data.train.size();
  if (n_train == 0) fail(ErrorKind::Usage, "training split is empty");
  RunReport report;
  for (int e = 0; e < cfg.epochs; ++e) {
    const double lr = lr_at(cfg.lr0, cfg.milestones, cfg.lr_decay, e);
    Rng perm_rng(Rng::mix(cfg.seed, Rng::mix(2, static_cast<uint64_t>(e))));
    const auto perm = perm_rng.permutation(static_cast<uint32_t>(n_train));
    double loss_sum = 0;
    for (int64_t off = 0; off < n_train; off += cfg.batch_size) {
      const auto count = static_cast<std::size_t>(std::min<int64_t>(cfg.batch_size, n_train - off));
      TapeScope<float> scope;
      auto x = data::gather_inputs(data.train, perm, static_cast<std::size_t>(off), count);
      TensorF loss;
      if (classifier) {
        auto labels = data::gather_labels(data.train, perm, static_cast<std::size_t>(off), count);
        loss = ops::nll(ops::log_softmax_temperature(net.forward(x, true), 1.f), labels);
      } else {
        auto t = data::gather_targets(data.train, perm, static_cast<std::size_t>(off), count);
        loss = ir_penalty_loss(net.forward(x, true), t, IrPenalty::L2);
      }
      backward(loss);
      std::vector<Parameter<float>*> step_params;
      net.for_each_parameter([&](Parameter<float>& p) {
        if (p.value.has_grad()) step_params.push_back(&p);
      });
      sgd_step(step_params, lr, cfg.momentum, cfg.weight_decay);
      net.zero_grad();
      loss_sum += static_cast<double>(loss.item()) * static_cast<double>(count);
    }
    EpochRow row;
    row.epoch = e;
    row.phase = "fine_tune";
    row.lr = lr;
    row.train_loss = loss_sum / static_cast<double>(n_train);
    row.val_metric = evaluate(net, data.val);
    report.rows.push_back(row);
  }
  report.final_val = evaluate(net, data.val);
  report.final_test = evaluate(net, data.test);
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return report;
}

}  // namespace lit
