// SPDX-License-Identifier: Apache-2.0
#pragma once

// Test-side oracles, written independently of the library kernels: a direct
// nested-loop convolution, explicit log-sum-exp loss arithmetic, and a
// central finite-difference gradient checker. All double precision.

#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "lit/rng.hpp"
#include "lit/tape.hpp"
#include "lit/tensor.hpp"

namespace oracle {

using lit::Rng;
using lit::Shape;
using lit::Tensor;

template <typename T>
Tensor<T> random_tensor(Rng& rng, Shape shape, double scale = 1.0) {
  Tensor<T> t(std::move(shape));
  for (auto& v : t.values()) v = static_cast<T>(rng.normal() * scale);
  return t;
}

// y[n,f,oy,ox] = sum_c,ky,kx x * w (+ b), zero padding
inline std::vector<double> conv2d_direct(const std::vector<double>& x, const std::vector<double>& w,
                                         const std::vector<double>* b, int64_t N, int64_t C,
                                         int64_t H, int64_t W, int64_t F, int64_t kh, int64_t kw,
                                         int64_t stride, int64_t pad, int64_t groups) {
  const int64_t OH = (H + 2 * pad - kh) / stride + 1;
  const int64_t OW = (W + 2 * pad - kw) / stride + 1;
  const int64_t cg = C / groups, fg = F / groups;
  std::vector<double> y(static_cast<std::size_t>(N * F * OH * OW), 0.0);
  for (int64_t n = 0; n < N; ++n)
    for (int64_t f = 0; f < F; ++f)
      for (int64_t oy = 0; oy < OH; ++oy)
        for (int64_t ox = 0; ox < OW; ++ox) {
          double acc = b ? (*b)[static_cast<std::size_t>(f)] : 0.0;
          for (int64_t c = 0; c < cg; ++c)
            for (int64_t ky = 0; ky < kh; ++ky)
              for (int64_t kx = 0; kx < kw; ++kx) {
                const int64_t iy = oy * stride + ky - pad;
                const int64_t ix = ox * stride + kx - pad;
                if (iy < 0 || iy >= H || ix < 0 || ix >= W) continue;
                acc += x[static_cast<std::size_t>(((n * C + (f / fg) * cg + c) * H + iy) * W + ix)] *
                       w[static_cast<std::size_t>(((f * cg + c) * kh + ky) * kw + kx)];
              }
          y[static_cast<std::size_t>(((n * F + f) * OH + oy) * OW + ox)] = acc;
        }
  return y;
}

// row-wise exp((z - max)/tau) / sum
inline std::vector<double> softened_rows(const std::vector<double>& z, int64_t n, int64_t k,
                                         double tau) {
  std::vector<double> q(z.size());
  for (int64_t i = 0; i < n; ++i) {
    double mx = z[static_cast<std::size_t>(i * k)];
    for (int64_t j = 1; j < k; ++j) mx = std::max(mx, z[static_cast<std::size_t>(i * k + j)]);
    double sum = 0;
    for (int64_t j = 0; j < k; ++j) {
      q[static_cast<std::size_t>(i * k + j)] = std::exp((z[static_cast<std::size_t>(i * k + j)] - mx) / tau);
      sum += q[static_cast<std::size_t>(i * k + j)];
    }
    for (int64_t j = 0; j < k; ++j) q[static_cast<std::size_t>(i * k + j)] /= sum;
  }
  return q;
}

inline std::vector<double> log_softened_rows(const std::vector<double>& z, int64_t n, int64_t k,
                                             double tau) {
  std::vector<double> out(z.size());
  for (int64_t i = 0; i < n; ++i) {
    double mx = z[static_cast<std::size_t>(i * k)];
    for (int64_t j = 1; j < k; ++j) mx = std::max(mx, z[static_cast<std::size_t>(i * k + j)]);
    double sum = 0;
    for (int64_t j = 0; j < k; ++j) sum += std::exp((z[static_cast<std::size_t>(i * k + j)] - mx) / tau);
    const double lse = std::log(sum);
    for (int64_t j = 0; j < k; ++j)
      out[static_cast<std::size_t>(i * k + j)] = (z[static_cast<std::size_t>(i * k + j)] - mx) / tau - lse;
  }
  return out;
}

// alpha * H(y, p_1) + (1 - alpha) * H with teacher softened target
inline double kd_loss(const std::vector<double>& student, const std::vector<double>& teacher,
                      const std::vector<int32_t>& labels, int64_t n, int64_t k, double alpha,
                      double tau, bool tau_squared = false) {
  const auto logp1 = log_softened_rows(student, n, k, 1.0);
  double hard = 0;
  for (int64_t i = 0; i < n; ++i) hard -= logp1[static_cast<std::size_t>(i * k + labels[static_cast<std::size_t>(i)])];
  hard /= static_cast<double>(n);
  if (alpha == 1.0) return hard;
  const auto q = softened_rows(teacher, n, k, tau);
  const auto logp = log_softened_rows(student, n, k, tau);
  double soft = 0;
  for (std::size_t i = 0; i < q.size(); ++i) soft -= q[i] * logp[i];
  soft /= static_cast<double>(n);
  if (tau_squared) soft *= tau * tau;
  return alpha * hard + (1 - alpha) * soft;
}

inline double penalty_mean(const std::vector<double>& a, const std::vector<double>& b, int kind) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    if (kind == 0) s += d * d;                                     // L2
    else if (kind == 1) s += std::fabs(d);                         // L1
    else s += std::fabs(d) < 1 ? 0.5 * d * d : std::fabs(d) - 0.5; // smoothed L1
  }
  return s / static_cast<double>(a.size());
}

// Central finite differences against the recorded gradient. make_loss must
// rebuild the graph from the current parameter values on every call.
//
// skip_nonsmooth guards deep compositions with relu/abs kinks: an element
// whose half-step estimate disagrees with the full-step one has a kink
// inside the probed interval, where a finite difference measures nothing;
// such elements are counted in `skipped` instead of compared.
struct FdReport {
  double max_rel = 0;
  int checked = 0;
  int skipped = 0;
};

inline FdReport fd_check(const std::vector<Tensor<double>*>& params,
                         const std::function<Tensor<double>()>& make_loss, double eps = 1e-4,
                         bool skip_nonsmooth = false) {
  std::vector<std::vector<double>> analytic;
  {
    lit::TapeScope<double> scope;
    auto loss = make_loss();
    lit::backward(loss);
    for (auto* p : params) {
      if (p->has_grad())
        analytic.emplace_back(p->grad().begin(), p->grad().end());
      else
        analytic.emplace_back(static_cast<std::size_t>(p->numel()), 0.0);
      p->zero_grad();
    }
  }
  FdReport rep;
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    Tensor<double>& p = *params[pi];
    for (int64_t i = 0; i < p.numel(); ++i) {
      const double keep = p.data()[i];
      const auto probe = [&](double step) {
        p.data()[i] = keep + step;
        const double up = make_loss().item();
        p.data()[i] = keep - step;
        const double down = make_loss().item();
        p.data()[i] = keep;
        return (up - down) / (2 * step);
      };
      const double fd = probe(eps);
      if (skip_nonsmooth) {
        const double fd_half = probe(eps / 2);
        if (std::fabs(fd - fd_half) > 1e-3 * std::max({std::fabs(fd), std::fabs(fd_half), 1e-3})) {
          ++rep.skipped;
          continue;
        }
      }
      const double g = analytic[pi][static_cast<std::size_t>(i)];
      const double rel = std::fabs(g - fd) / std::max({std::fabs(g), std::fabs(fd), 1e-3});
      rep.max_rel = std::max(rep.max_rel, rel);
      ++rep.checked;
    }
  }
  return rep;
}

}  // namespace oracle
