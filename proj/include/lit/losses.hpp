// SPDX-License-Identifier: Apache-2.0
#pragma once

// Distillation losses: softened distributions, the KD loss, the per-split
// intermediate-representation loss, and their beta interpolation. Teacher
// passes run under NoGradScope, so no loss here ever sends gradient into
// teacher parameters.

#include <cstdint>
#include <string>
#include <vector>

#include "lit/net/network.hpp"
#include "lit/ops.hpp"

namespace lit {

enum class IrPenalty { L2, L1, SmoothedL1 };

inline const char* ir_penalty_name(IrPenalty p) {
  switch (p) {
    case IrPenalty::L2: return "l2";
    case IrPenalty::L1: return "l1";
    default: return "smoothed_l1";
  }
}

inline IrPenalty ir_penalty_from(const std::string& s) {
  if (s == "l2") return IrPenalty::L2;
  if (s == "l1") return IrPenalty::L1;
  if (s == "smoothed_l1") return IrPenalty::SmoothedL1;
  fail(ErrorKind::Config, "unknown IR penalty '" + s + "' (l2, l1, smoothed_l1)");
}

struct DistillConfig {
  double tau = 6.0;     // softmax temperature
  double alpha = 0.95;  // KD: hard-label vs soft-target weight
  double beta = 0.75;   // LIT: KD vs IR weight
  IrPenalty penalty = IrPenalty::L2;
  // Classical tau^2 rescaling of the soft term. The loss is stated without
  // it, so this is off by default.
  bool soft_term_tau_squared = false;

  void validate() const {
    if (!(tau > 0)) fail(ErrorKind::Config, "tau must be > 0, got " + std::to_string(tau));
    if (alpha < 0 || alpha > 1) fail(ErrorKind::Config, "alpha must be in [0,1], got " + std::to_string(alpha));
    if (beta < 0 || beta > 1) fail(ErrorKind::Config, "beta must be in [0,1], got " + std::to_string(beta));
  }
};

// exp(z_i/tau) / sum_j exp(z_j/tau), row-wise.
template <typename T>
Tensor<T> softened_distribution(const Tensor<T>& z, T tau) {
  return ops::softmax_temperature(z, tau);
}

// alpha * CE(labels, student at tau=1) + (1-alpha) * CE(teacher softened
// target, student softened prediction). The soft term is cross-entropy with
// the teacher's softened distribution held fixed: -(1/N) sum q_t log p_s.
// Gradient flows only into the student logits.
template <typename T>
Tensor<T> kd_loss(const Tensor<T>& student_logits, const Tensor<T>& teacher_logits,
                  const std::vector<int32_t>& labels, T alpha, T tau, bool tau_squared = false) {
  if (!(tau > 0)) fail(ErrorKind::Config, "tau must be > 0");
  if (alpha < 0 || alpha > 1) fail(ErrorKind::Config, "alpha must be in [0,1]");
  if (alpha == T(1))  // endpoint: plain cross-entropy, invariant to tau
    return ops::nll(ops::log_softmax_temperature(student_logits, T(1)), labels);

  require_same_shape(student_logits, teacher_logits, "kd_loss logits");
  Tensor<T> q_teacher;
  {
    NoGradScope ng;
    q_teacher = ops::softmax_temperature(teacher_logits.detach(), tau);
  }
  auto logp_tau = ops::log_softmax_temperature(student_logits, tau);
  const T batch = static_cast<T>(student_logits.dim(0));
  auto soft = ops::scale(ops::sum_all(ops::mul(q_teacher, logp_tau)), T(-1) / batch);
  if (tau_squared) soft = ops::scale(soft, tau * tau);
  if (alpha == T(0)) return soft;
  auto hard = ops::nll(ops::log_softmax_temperature(student_logits, T(1)), labels);
  return ops::add(ops::scale(hard, alpha), ops::scale(soft, T(1) - alpha));
}

// Element-mean of (a-b)^2, |a-b|, or huber_unit(a-b).
template <typename T>
Tensor<T> ir_penalty_loss(const Tensor<T>& a, const Tensor<T>& b, IrPenalty p) {
  require_same_shape(a, b, "ir_penalty");
  auto d = ops::sub(a, b);
  switch (p) {
    case IrPenalty::L2: return ops::mean_all(ops::square(d));
    case IrPenalty::L1: return ops::mean_all(ops::abs_val(d));
    default: return ops::mean_all(ops::huber_unit(d));
  }
}

// Sum of the k per-split penalties with teacher IRs already materialized:
// term 1 compares S_1(x) with T_1(x); term i >= 2 compares S_i(T_{i-1})
// with T_i. teacher_irs must be grad-free.
template <typename T>
Tensor<T> ir_loss_terms(const std::vector<Tensor<T>>& teacher_irs, SegmentedNetwork<T>& student,
                        const Tensor<T>& x, IrPenalty p, bool student_training) {
  const int k = student.split_count();
  if (static_cast<int>(teacher_irs.size()) != k)
    fail(ErrorKind::Pairing, "expected " + std::to_string(k) + " teacher IRs, got " +
                                 std::to_string(teacher_irs.size()));
  Tensor<T> total =
      ir_penalty_loss(student.forward_segment(0, x, student_training), teacher_irs[0], p);
  for (int i = 1; i < k; ++i) {
    auto si = student.forward_segment(i, teacher_irs[static_cast<std::size_t>(i) - 1], student_training);
    total = ops::add(total, ir_penalty_loss(si, teacher_irs[static_cast<std::size_t>(i)], p));
  }
  return total;
}

// Full intermediate loss. The teacher runs in eval mode under NoGradScope;
// student_training selects the student's normalization mode (eval for
// measurement, train inside the training loop).
template <typename T>
Tensor<T> ir_loss(SegmentedNetwork<T>& teacher, SegmentedNetwork<T>& student, const Tensor<T>& x,
                  IrPenalty p, bool student_training = false) {
  validate_pairing(teacher.spec(), student.spec());
  std::vector<Tensor<T>> teacher_irs;
  {
    NoGradScope ng;
    teacher_irs = teacher.forward_collect(x, /*training=*/false).second;
  }
  return ir_loss_terms(teacher_irs, student, x, p, student_training);
}

// beta * KD(S(x), T(x)) + (1 - beta) * IR loss. beta = 0 skips the KD forward
// entirely (generator mode, labels may be empty); beta = 1 is exactly the KD
// loss.
template <typename T>
Tensor<T> lit_loss(SegmentedNetwork<T>& teacher, SegmentedNetwork<T>& student, const Tensor<T>& x,
                   const std::vector<int32_t>& labels, const DistillConfig& cfg,
                   bool student_training = false) {
  cfg.validate();
  const T beta = static_cast<T>(cfg.beta);
  if (cfg.beta > 0 && student.spec().kind != NetKind::Classifier)
    fail(ErrorKind::Config, "lit_loss with beta > 0 needs a classifier head; got a generator");

  auto kd_term = [&] {
    Tensor<T> teacher_logits;
    {
      NoGradScope ng;
      teacher_logits = teacher.forward(x, /*training=*/false);
    }
    auto student_logits = student.forward(x, student_training);
    return kd_loss(student_logits, teacher_logits, labels, static_cast<T>(cfg.alpha),
                   static_cast<T>(cfg.tau), cfg.soft_term_tau_squared);
  };
  if (cfg.beta == 1.0) return kd_term();
  if (cfg.beta == 0.0) return ir_loss(teacher, student, x, cfg.penalty, student_training);
  auto kd = kd_term();
  auto ir = ir_loss(teacher, student, x, cfg.penalty, student_training);
  return ops::add(ops::scale(kd, beta), ops::scale(ir, T(1) - beta));
}

}  // namespace lit
