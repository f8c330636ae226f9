// SPDX-License-Identifier: Apache-2.0
#pragma once

// Differentiable primitives. Each op validates shapes, computes the forward
// through the kernel layer, and records a backward closure on the active tape
// when grad is flowing. Closures guard on an empty output grad (dead branch)
// and accumulate only into inputs that require grad.

#include <cmath>
#include <cstdint>
#include <vector>

#include "lit/kernels/kernels.hpp"
#include "lit/tape.hpp"
#include "lit/tensor.hpp"

namespace lit::ops {

template <typename T>
bool grad_flows(const Tensor<T>& x) {
  return Tape<T>::recording() && x.requires_grad();
}

// ---------------------------------------------------------------------------
// elementwise

template <typename T>
Tensor<T> relu(const Tensor<T>& x) {
  Tensor<T> y(x.shape());
  const auto n = static_cast<std::size_t>(x.numel());
  kernels::map_relu(x.data(), y.data(), n);
  if (grad_flows(x)) {
    y.set_requires_grad(true);
    Tape<T>::active()->record("relu", [xs = x.storage(), ys = y.storage(), n] {
      if (ys->grad.empty()) return;
      xs->ensure_grad();
      kernels::acc_relu_grad(xs->values->data(), ys->grad.data(), xs->grad.data(), n);
    });
  }
  return y;
}

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
  require_same_shape(a, b, "add");
  Tensor<T> y(a.shape());
  const auto n = static_cast<std::size_t>(a.numel());
  kernels::ew_add(a.data(), b.data(), y.data(), n);
  if (Tape<T>::recording() && (a.requires_grad() || b.requires_grad())) {
    y.set_requires_grad(true);
    Tape<T>::active()->record("add", [as = a.storage(), bs = b.storage(), ys = y.storage(), n] {
      if (ys->grad.empty()) return;
      if (as->requires_grad) {
        as->ensure_grad();
        kernels::acc(ys->grad.data(), as->grad.data(), n);
      }
      if (bs->requires_grad) {
        bs->ensure_grad();
        kernels::acc(ys->grad.data(), bs->grad.data(), n);
      }
    });
  }
  return y;
}

template <typename T>
Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b) {
  require_same_shape(a, b, "sub");
  Tensor<T> y(a.shape());
  const auto n = static_cast<std::size_t>(a.numel());
  kernels::ew_sub(a.data(), b.data(), y.data(), n);
  if (Tape<T>::recording() && (a.requires_grad() || b.requires_grad())) {
    y.set_requires_grad(true);
    Tape<T>::active()->record("sub", [as = a.storage(), bs = b.storage(), ys = y.storage(), n] {
      if (ys->grad.empty()) return;
      if (as->requires_grad) {
        as->ensure_grad();
        kernels::acc(ys->grad.data(), as->grad.data(), n);
      }
      if (bs->requires_grad) {
        bs->ensure_grad();
        kernels::acc_scaled(ys->grad.data(), T(-1), bs->grad.data(), n);
      }
    });
  }
  return y;
}

template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b) {
  require_same_shape(a, b, "mul");
  Tensor<T> y(a.shape());
  const auto n = static_cast<std::size_t>(a.numel());
  kernels::ew_mul(a.data(), b.data(), y.data(), n);
  if (Tape<T>::recording() && (a.requires_grad() || b.requires_grad())) {
    y.set_requires_grad(true);
    Tape<T>::active()->record("mul", [as = a.storage(), bs = b.storage(), ys = y.storage(), n] {
      if (ys->grad.empty()) return;
      if (as->requires_grad) {
        as->ensure_grad();
        kernels::acc_prod(ys->grad.data(), bs->values->data(), as->grad.data(), n);
      }
      if (bs->requires_grad) {
        bs->ensure_grad();
        kernels::acc_prod(ys->grad.data(), as->values->data(), bs->grad.data(), n);
      }
    });
  }
  return y;
}

template <typename T>
Tensor<T> square(const Tensor<T>& x) {
  Tensor<T> y(x.shape());
  const auto n = static_cast<std::size_t>(x.numel());
  kernels::map_square(x.data(), y.data(), n);
  if (grad_flows(x)) {
    y.set_requires_grad(true);
    Tape<T>::active()->record("square", [xs = x.storage(), ys = y.storage(), n] {
      if (ys->grad.empty()) return;
      xs->ensure_grad();
      const T* xv = xs->values->data();
      const T* dy = ys->grad.data();
      T* dx = xs->grad.data();
      for (std::size_t i = 0; i < n; ++i) dx[i] += T(2) * dy[i] * xv[i];
    });
  }
  return y;
}

template <typename T>
Tensor<T> abs_val(const Tensor<T>& x) {
  Tensor<T> y(x.shape());
  const auto n = static_cast<std::size_t>(x.numel());
  kernels::map_abs(x.data(), y.data(), n);
  if (grad_flows(x)) {
    y.set_requires_grad(true);
    Tape<T>::active()->record("abs", [xs = x.storage(), ys = y.storage(), n] {
      if (ys->grad.empty()) return;
      xs->ensure_grad();
      const T* xv = xs->values->data();
      const T* dy = ys->grad.data();
      T* dx = xs->grad.data();
      // subgradient 0 at x == 0
      for (std::size_t i = 0; i < n; ++i)
        dx[i] += xv[i] > T(0) ? dy[i] : (xv[i] < T(0) ? -dy[i] : T(0));
    });
  }
  return y;
}

// per element: 0.5 d^2 for |d| < 1, |d| - 0.5 otherwise
template <typename T>
Tensor<T> huber_unit(const Tensor<T>& x) {
  Tensor<T> y(x.shape());
  const auto n = static_cast<std::size_t>(x.numel());
  kernels::map_huber_unit(x.data(), y.data(), n);
  if (grad_flows(x)) {
    y.set_requires_grad(true);
    Tape<T>::active()->record("huber_unit", [xs = x.storage(), ys = y.storage(), n] {
      if (ys->grad.empty()) return;
      xs->ensure_grad();
      const T* xv = xs->values->data();
      const T* dy = ys->grad.data();
      T* dx = xs->grad.data();
      for (std::size_t i = 0; i < n; ++i) {
        const T d = xv[i] < T(-1) ? T(-1) : (xv[i] > T(1) ? T(1) : xv[i]);
        dx[i] += dy[i] * d;
      }
    });
  }
  return y;
}

template <typename T>
Tensor<T> scale(const Tensor<T>& x, T c) {
  Tensor<T> y(x.shape());
  const auto n = static_cast<std::size_t>(x.numel());
  kernels::map_scale(x.data(), c, y.data(), n);
  if (grad_flows(x)) {
    y.set_requires_grad(true);
    Tape<T>::active()->record("scale", [xs = x.storage(), ys = y.storage(), c, n] {
      if (ys->grad.empty()) return;
      xs->ensure_grad();
      kernels::acc_scaled(ys->grad.data(), c, xs->grad.data(), n);
    });
  }
  return y;
}

template <typename T>
Tensor<T> detach(const Tensor<T>& x) {
  return x.detach();
}

// ---------------------------------------------------------------------------
// reductions

template <typename T>
Tensor<T> sum_all(const Tensor<T>& x) {
  const auto n = static_cast<std::size_t>(x.numel());
  Tensor<T> y = Tensor<T>::scalar(kernels::reduce_sum(x.data(), n));
  if (grad_flows(x)) {
    y.set_requires_grad(true);
    Tape<T>::active()->record("sum", [xs = x.storage(), ys = y.storage(), n] {
      if (ys->grad.empty()) return;
      xs->ensure_grad();
      const T g = ys->grad[0];
      T* dx = xs->grad.data();
      for (std::size_t i = 0; i < n; ++i) dx[i] += g;
    });
  }
  return y;
}

template <typename T>
Tensor<T> mean_all(const Tensor<T>& x) {
  const auto n = static_cast<std::size_t>(x.numel());
  Tensor<T> y = Tensor<T>::scalar(kernels::reduce_sum(x.data(), n) / static_cast<T>(n));
  if (grad_flows(x)) {
    y.set_requires_grad(true);
    Tape<T>::active()->record("mean", [xs = x.storage(), ys = y.storage(), n] {
      if (ys->grad.empty()) return;
      xs->ensure_grad();
      const T g = ys->grad[0] / static_cast<T>(n);
      T* dx = xs->grad.data();
      for (std::size_t i = 0; i < n; ++i) dx[i] += g;
    });
  }
  return y;
}

// ---------------------------------------------------------------------------
// linear / conv / pooling

template <typename T>
Tensor<T> linear(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b) {
  if (x.rank() != 2 || w.rank() != 2)
    fail(ErrorKind::Dimension, "linear expects x[N,I] and w[O,I], got " + shape_str(x.shape()) +
                                   " and " + shape_str(w.shape()));
  const auto N = static_cast<std::size_t>(x.dim(0)), I = static_cast<std::size_t>(x.dim(1));
  const auto O = static_cast<std::size_t>(w.dim(0));
  if (static_cast<std::size_t>(w.dim(1)) != I)
    fail(ErrorKind::Dimension, "linear: input features " + std::to_string(I) +
                                   " vs weight columns " + std::to_string(w.dim(1)));
  if (b.defined() && (b.rank() != 1 || static_cast<std::size_t>(b.dim(0)) != O))
    fail(ErrorKind::Dimension, "linear: bias shape " + shape_str(b.shape()));

  Tensor<T> y({static_cast<int64_t>(N), static_cast<int64_t>(O)});
  if (b.defined()) {
    for (std::size_t i = 0; i < N; ++i)
      kernels::scalar::copy(b.data(), y.data() + i * O, O);
    kernels::gemm(false, true, N, O, I, T(1), x.data(), I, w.data(), I, T(1), y.data(), O);
  } else {
    kernels::gemm(false, true, N, O, I, T(1), x.data(), I, w.data(), I, T(0), y.data(), O);
  }

  const bool want = Tape<T>::recording() &&
                    (x.requires_grad() || w.requires_grad() || (b.defined() && b.requires_grad()));
  if (want) {
    y.set_requires_grad(true);
    auto bs = b.defined() ? b.storage() : nullptr;
    Tape<T>::active()->record(
        "linear", [xs = x.storage(), ws = w.storage(), bs, ys = y.storage(), N, I, O] {
          if (ys->grad.empty()) return;
          const T* dy = ys->grad.data();
          if (xs->requires_grad) {
            xs->ensure_grad();
            kernels::gemm(false, false, N, I, O, T(1), dy, O, ws->values->data(), I, T(1),
                          xs->grad.data(), I);
          }
          if (ws->requires_grad) {
            ws->ensure_grad();
            kernels::gemm(true, false, O, I, N, T(1), dy, O, xs->values->data(), I, T(1),
                          ws->grad.data(), I);
          }
          if (bs && bs->requires_grad) {
            bs->ensure_grad();
            T* db = bs->grad.data();
            for (std::size_t i = 0; i < N; ++i)
              for (std::size_t o = 0; o < O; ++o) db[o] += dy[i * O + o];
          }
        });
  }
  return y;
}

struct Conv2dAttrs {
  int64_t stride = 1;
  int64_t padding = 0;
  int64_t groups = 1;
};

inline kernels::ConvDims conv_dims(const Shape& xs, const Shape& ws, const Conv2dAttrs& a) {
  if (xs.size() != 4 || ws.size() != 4)
    fail(ErrorKind::Dimension,
         "conv2d expects x[N,C,H,W] and w[F,C/g,kh,kw], got " + shape_str(xs) + " and " + shape_str(ws));
  if (a.stride < 1 || a.padding < 0 || a.groups < 1)
    fail(ErrorKind::Config, "conv2d: stride must be >= 1, padding >= 0, groups >= 1");
  kernels::ConvDims d{};
  d.N = xs[0]; d.C = xs[1]; d.H = xs[2]; d.W = xs[3];
  d.F = ws[0]; d.kh = ws[2]; d.kw = ws[3];
  d.stride = a.stride; d.pad = a.padding; d.groups = a.groups;
  if (d.C % d.groups != 0 || d.F % d.groups != 0)
    fail(ErrorKind::Config, "conv2d: groups " + std::to_string(d.groups) +
                                " must divide input channels " + std::to_string(d.C) +
                                " and filter count " + std::to_string(d.F));
  if (ws[1] != d.C / d.groups)
    fail(ErrorKind::Dimension, "conv2d: weight expects " + std::to_string(ws[1]) +
                                   " channels per group, input provides " +
                                   std::to_string(d.C / d.groups));
  d.OH = (d.H + 2 * d.pad - d.kh) / d.stride + 1;
  d.OW = (d.W + 2 * d.pad - d.kw) / d.stride + 1;
  if (d.kh > d.H + 2 * d.pad || d.kw > d.W + 2 * d.pad || d.OH < 1 || d.OW < 1)
    fail(ErrorKind::Dimension, "conv2d: kernel " + std::to_string(d.kh) + "x" + std::to_string(d.kw) +
                                   " does not fit padded input " + shape_str(xs));
  return d;
}

template <typename T>
Tensor<T> conv2d(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b,
                 const Conv2dAttrs& attrs) {
  const kernels::ConvDims d = conv_dims(x.shape(), w.shape(), attrs);
  if (b.defined() && (b.rank() != 1 || b.dim(0) != d.F))
    fail(ErrorKind::Dimension, "conv2d: bias shape " + shape_str(b.shape()) + " for " +
                                   std::to_string(d.F) + " filters");
  Tensor<T> y({d.N, d.F, d.OH, d.OW});
  kernels::conv2d_fwd(x.data(), w.data(), b.defined() ? b.data() : nullptr, y.data(), d);

  const bool want = Tape<T>::recording() &&
                    (x.requires_grad() || w.requires_grad() || (b.defined() && b.requires_grad()));
  if (want) {
    y.set_requires_grad(true);
    auto bs = b.defined() ? b.storage() : nullptr;
    Tape<T>::active()->record("conv2d",
                              [xs = x.storage(), ws = w.storage(), bs, ys = y.storage(), d] {
                                if (ys->grad.empty()) return;
                                const T* dy = ys->grad.data();
                                if (xs->requires_grad) {
                                  xs->ensure_grad();
                                  kernels::conv2d_bwd_input(dy, ws->values->data(), xs->grad.data(), d);
                                }
                                const bool want_db = bs && bs->requires_grad;
                                if (ws->requires_grad || want_db) {
                                  T* dw = nullptr;
                                  if (ws->requires_grad) {
                                    ws->ensure_grad();
                                    dw = ws->grad.data();
                                  }
                                  T* db = nullptr;
                                  if (want_db) {
                                    bs->ensure_grad();
                                    db = bs->grad.data();
                                  }
                                  if (dw) {
                                    kernels::conv2d_bwd_weight(xs->values->data(), dy, dw, db, d);
                                  } else if (db) {
                                    const auto sp = static_cast<std::size_t>(d.OH * d.OW);
                                    for (int64_t n = 0; n < d.N; ++n)
                                      for (int64_t f = 0; f < d.F; ++f)
                                        db[f] += kernels::reduce_sum(dy + (n * d.F + f) * d.OH * d.OW, sp);
                                  }
                                }
                              });
  }
  return y;
}

template <typename T>
Tensor<T> global_avg_pool(const Tensor<T>& x) {
  if (x.rank() != 4)
    fail(ErrorKind::Dimension, "global_avg_pool expects [N,C,H,W], got " + shape_str(x.shape()));
  const int64_t N = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
  const auto sp = static_cast<std::size_t>(H * W);
  Tensor<T> y({N, C});
  for (int64_t i = 0; i < N * C; ++i)
    y.data()[i] = kernels::reduce_sum(x.data() + i * H * W, sp) / static_cast<T>(sp);
  if (grad_flows(x)) {
    y.set_requires_grad(true);
    Tape<T>::active()->record("global_avg_pool", [xs = x.storage(), ys = y.storage(), N, C, sp] {
      if (ys->grad.empty()) return;
      xs->ensure_grad();
      T* dx = xs->grad.data();
      const T* dy = ys->grad.data();
      for (int64_t i = 0; i < N * C; ++i) {
        const T g = dy[i] / static_cast<T>(sp);
        for (std::size_t j = 0; j < sp; ++j) dx[i * sp + j] += g;
      }
    });
  }
  return y;
}

template <typename T>
Tensor<T> upsample_nearest2x(const Tensor<T>& x) {
  if (x.rank() != 4)
    fail(ErrorKind::Dimension, "upsample_nearest2x expects [N,C,H,W], got " + shape_str(x.shape()));
  const int64_t NC = x.dim(0) * x.dim(1), H = x.dim(2), W = x.dim(3);
  Tensor<T> y({x.dim(0), x.dim(1), 2 * H, 2 * W});
  for (int64_t i = 0; i < NC; ++i) {
    const T* src = x.data() + i * H * W;
    T* dst = y.data() + i * 4 * H * W;
    for (int64_t r = 0; r < H; ++r)
      for (int64_t c = 0; c < W; ++c) {
        const T v = src[r * W + c];
        T* d0 = dst + (2 * r) * 2 * W + 2 * c;
        d0[0] = v;
        d0[1] = v;
        d0[2 * W] = v;
        d0[2 * W + 1] = v;
      }
  }
  if (grad_flows(x)) {
    y.set_requires_grad(true);
    Tape<T>::active()->record("upsample_nearest2x", [xs = x.storage(), ys = y.storage(), NC, H, W] {
      if (ys->grad.empty()) return;
      xs->ensure_grad();
      T* dx = xs->grad.data();
      const T* dy = ys->grad.data();
      for (int64_t i = 0; i < NC; ++i) {
        const T* g = dy + i * 4 * H * W;
        T* d = dx + i * H * W;
        for (int64_t r = 0; r < H; ++r)
          for (int64_t c = 0; c < W; ++c) {
            const T* g0 = g + (2 * r) * 2 * W + 2 * c;
            d[r * W + c] += g0[0] + g0[1] + g0[2 * W] + g0[2 * W + 1];
          }
      }
    });
  }
  return y;
}

// ---------------------------------------------------------------------------
// batch norm

// Running statistics are plain state owned by the layer; the train-mode
// forward updates them (momentum 0.1 convention, unbiased running variance).
template <typename T>
Tensor<T> batch_norm(const Tensor<T>& x, const Tensor<T>& gamma, const Tensor<T>& beta,
                     std::vector<T>& running_mean, std::vector<T>& running_var, bool training,
                     T momentum = T(0.1), T eps = T(1e-5)) {
  if (x.rank() != 4)
    fail(ErrorKind::Dimension, "batch_norm expects [N,C,H,W], got " + shape_str(x.shape()));
  const int64_t N = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
  if (gamma.numel() != C || beta.numel() != C || static_cast<int64_t>(running_mean.size()) != C ||
      static_cast<int64_t>(running_var.size()) != C)
    fail(ErrorKind::Dimension, "batch_norm: per-channel parameters must have " +
                                   std::to_string(C) + " elements");
  const auto sp = static_cast<std::size_t>(H * W);
  const T m = static_cast<T>(N) * static_cast<T>(sp);

  std::vector<T> mean(C), var(C);
  if (training) {
    for (int64_t c = 0; c < C; ++c) {
      T s = 0, s2 = 0;
      for (int64_t n = 0; n < N; ++n) {
        const T* chunk = x.data() + (n * C + c) * H * W;
        s += kernels::reduce_sum(chunk, sp);
        s2 += kernels::dot(chunk, chunk, sp);
      }
      mean[c] = s / m;
      var[c] = s2 / m - mean[c] * mean[c];
      if (var[c] < T(0)) var[c] = T(0);  // guard fp cancellation
      running_mean[c] = (T(1) - momentum) * running_mean[c] + momentum * mean[c];
      const T unbiased = m > T(1) ? var[c] * m / (m - T(1)) : var[c];
      running_var[c] = (T(1) - momentum) * running_var[c] + momentum * unbiased;
    }
  } else {
    mean = running_mean;
    var = running_var;
  }

  std::vector<T> inv_std(C);
  for (int64_t c = 0; c < C; ++c) inv_std[c] = T(1) / std::sqrt(var[c] + eps);

  Tensor<T> y(x.shape());
  for (int64_t n = 0; n < N; ++n)
    for (int64_t c = 0; c < C; ++c) {
      const T a = gamma.data()[c] * inv_std[c];
      const T b = beta.data()[c] - a * mean[c];
      kernels::map_affine(x.data() + (n * C + c) * H * W, a, b, y.data() + (n * C + c) * H * W, sp);
    }

  const bool want = Tape<T>::recording() &&
                    (x.requires_grad() || gamma.requires_grad() || beta.requires_grad());
  if (want) {
    y.set_requires_grad(true);
    Tape<T>::active()->record(
        "batch_norm", [xs = x.storage(), gs = gamma.storage(), bs = beta.storage(),
                       ys = y.storage(), mean = std::move(mean), inv_std = std::move(inv_std),
                       training, N, C, sp, m] {
          if (ys->grad.empty()) return;
          for (int64_t c = 0; c < C; ++c) {
            T s1 = 0, s2 = 0;  // sum dy, sum dy*x
            for (int64_t n = 0; n < N; ++n) {
              const std::size_t off = static_cast<std::size_t>((n * C + c)) * sp;
              s1 += kernels::reduce_sum(ys->grad.data() + off, sp);
              s2 += kernels::dot(ys->grad.data() + off, xs->values->data() + off, sp);
            }
            const T sum_dy_xhat = inv_std[c] * (s2 - mean[c] * s1);
            if (gs->requires_grad) {
              gs->ensure_grad();
              gs->grad[c] += sum_dy_xhat;
            }
            if (bs->requires_grad) {
              bs->ensure_grad();
              bs->grad[c] += s1;
            }
            if (!xs->requires_grad) continue;
            xs->ensure_grad();
            const T g = gs->values->data()[c];
            if (training) {
              const T a = g * inv_std[c];
              const T t = sum_dy_xhat / m;
              const T b = -g * inv_std[c] * inv_std[c] * t;
              const T cc = -a * (s1 / m) - b * mean[c];
              for (int64_t n = 0; n < N; ++n) {
                const std::size_t off = static_cast<std::size_t>((n * C + c)) * sp;
                kernels::acc_affine2(ys->grad.data() + off, xs->values->data() + off, a, b, cc,
                                     xs->grad.data() + off, sp);
              }
            } else {
              const T a = g * inv_std[c];
              for (int64_t n = 0; n < N; ++n) {
                const std::size_t off = static_cast<std::size_t>((n * C + c)) * sp;
                kernels::acc_scaled(ys->grad.data() + off, a, xs->grad.data() + off, sp);
              }
            }
          }
        });
  }
  return y;
}

// ---------------------------------------------------------------------------
// softmax family (temperature tau divides the logits)

template <typename T>
void check_logits(const Tensor<T>& z, T tau) {
  if (z.rank() != 2)
    fail(ErrorKind::Dimension, "softmax expects logits [N,K], got " + shape_str(z.shape()));
  if (!(tau > T(0))) fail(ErrorKind::Config, "temperature must be > 0, got " + std::to_string(tau));
}

template <typename T>
Tensor<T> softmax_temperature(const Tensor<T>& z, T tau) {
  check_logits(z, tau);
  const int64_t N = z.dim(0), K = z.dim(1);
  Tensor<T> y(z.shape());
  for (int64_t i = 0; i < N; ++i) {
    const T* row = z.data() + i * K;
    T* out = y.data() + i * K;
    T mx = row[0];
    for (int64_t k = 1; k < K; ++k) mx = row[k] > mx ? row[k] : mx;
    T sum = 0;
    for (int64_t k = 0; k < K; ++k) {
      out[k] = std::exp((row[k] - mx) / tau);
      sum += out[k];
    }
    for (int64_t k = 0; k < K; ++k) out[k] /= sum;
  }
  if (grad_flows(z)) {
    y.set_requires_grad(true);
    Tape<T>::active()->record("softmax_temperature",
                              [zs = z.storage(), ys = y.storage(), tau, N, K] {
                                if (ys->grad.empty()) return;
                                zs->ensure_grad();
                                for (int64_t i = 0; i < N; ++i) {
                                  const T* p = ys->values->data() + i * K;
                                  const T* dy = ys->grad.data() + i * K;
                                  T* dz = zs->grad.data() + i * K;
                                  T dotpg = 0;
                                  for (int64_t k = 0; k < K; ++k) dotpg += p[k] * dy[k];
                                  for (int64_t k = 0; k < K; ++k)
                                    dz[k] += p[k] * (dy[k] - dotpg) / tau;
                                }
                              });
  }
  return y;
}

template <typename T>
Tensor<T> log_softmax_temperature(const Tensor<T>& z, T tau) {
  check_logits(z, tau);
  const int64_t N = z.dim(0), K = z.dim(1);
  Tensor<T> y(z.shape());
  for (int64_t i = 0; i < N; ++i) {
    const T* row = z.data() + i * K;
    T* out = y.data() + i * K;
    T mx = row[0];
    for (int64_t k = 1; k < K; ++k) mx = row[k] > mx ? row[k] : mx;
    T sum = 0;
    for (int64_t k = 0; k < K; ++k) {
      out[k] = (row[k] - mx) / tau;
      sum += std::exp(out[k]);
    }
    const T lse = std::log(sum);
    for (int64_t k = 0; k < K; ++k) out[k] -= lse;
  }
  if (grad_flows(z)) {
    y.set_requires_grad(true);
    Tape<T>::active()->record("log_softmax_temperature",
                              [zs = z.storage(), ys = y.storage(), tau, N, K] {
                                if (ys->grad.empty()) return;
                                zs->ensure_grad();
                                for (int64_t i = 0; i < N; ++i) {
                                  const T* logp = ys->values->data() + i * K;
                                  const T* dy = ys->grad.data() + i * K;
                                  T* dz = zs->grad.data() + i * K;
                                  T gsum = 0;
                                  for (int64_t k = 0; k < K; ++k) gsum += dy[k];
                                  for (int64_t k = 0; k < K; ++k)
                                    dz[k] += (dy[k] - std::exp(logp[k]) * gsum) / tau;
                                }
                              });
  }
  return y;
}

// -(1/N) sum_i logp[i, labels[i]]
template <typename T>
Tensor<T> nll(const Tensor<T>& logp, const std::vector<int32_t>& labels) {
  if (logp.rank() != 2)
    fail(ErrorKind::Dimension, "nll expects log-probabilities [N,K], got " + shape_str(logp.shape()));
  const int64_t N = logp.dim(0), K = logp.dim(1);
  if (static_cast<int64_t>(labels.size()) != N)
    fail(ErrorKind::Dimension, "nll: " + std::to_string(labels.size()) + " labels for batch of " +
                                   std::to_string(N));
  T loss = 0;
  for (int64_t i = 0; i < N; ++i) {
    const int32_t y = labels[i];
    if (y < 0 || y >= K)
      fail(ErrorKind::Data, "label " + std::to_string(y) + " out of range [0," + std::to_string(K) + ")");
    loss -= logp.data()[i * K + y];
  }
  Tensor<T> out = Tensor<T>::scalar(loss / static_cast<T>(N));
  if (grad_flows(logp)) {
    out.set_requires_grad(true);
    Tape<T>::active()->record("nll", [ls = logp.storage(), os = out.storage(), labels, N, K] {
      if (os->grad.empty()) return;
      ls->ensure_grad();
      const T g = os->grad[0] / static_cast<T>(N);
      for (int64_t i = 0; i < N; ++i) ls->grad[i * K + labels[i]] -= g;
    });
  }
  return out;
}

}  // namespace lit::ops
