// SPDX-License-Identifier: Apache-2.0
#pragma once

// Scalar reference kernels. Every SIMD variant is checked against these, so
// they stay as plain loops: fixed evaluation order, no clever blocking.

#include <cmath>
#include <cstddef>
#include <cstdint>

namespace lit::kernels::scalar {

// C[M,N] = alpha * op(A) * op(B) + beta * C, all row-major.
// op(A) is A[M,K] (lda = row stride of the stored matrix), transposed when ta.
template <typename T>
void gemm(bool ta, bool tb, std::size_t M, std::size_t N, std::size_t K, T alpha, const T* A,
          std::size_t lda, const T* B, std::size_t ldb, T beta, T* C, std::size_t ldc) {
  for (std::size_t i = 0; i < M; ++i) {
    for (std::size_t j = 0; j < N; ++j) {
      T acc = 0;
      for (std::size_t k = 0; k < K; ++k) {
        const T a = ta ? A[k * lda + i] : A[i * lda + k];
        const T b = tb ? B[j * ldb + k] : B[k * ldb + j];
        acc += a * b;
      }
      T& c = C[i * ldc + j];
      c = alpha * acc + (beta == T(0) ? T(0) : beta * c);
    }
  }
}

template <typename T>
void fill(T* dst, T v, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) dst[i] = v;
}

template <typename T>
void copy(const T* x, T* dst, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) dst[i] = x[i];
}

template <typename T>
void map_relu(const T* x, T* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = x[i] > T(0) ? x[i] : T(0);
}

template <typename T>
void map_square(const T* x, T* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = x[i] * x[i];
}

template <typename T>
void map_abs(const T* x, T* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = x[i] < T(0) ? -x[i] : x[i];
}

// 0.5*d^2 for |d| < 1, |d| - 0.5 otherwise.
template <typename T>
void map_huber_unit(const T* x, T* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const T a = x[i] < T(0) ? -x[i] : x[i];
    y[i] = a < T(1) ? T(0.5) * x[i] * x[i] : a - T(0.5);
  }
}

template <typename T>
void map_scale(const T* x, T a, T* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = a * x[i];
}

template <typename T>
void ew_add(const T* a, const T* b, T* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = a[i] + b[i];
}

template <typename T>
void ew_sub(const T* a, const T* b, T* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = a[i] - b[i];
}

template <typename T>
void ew_mul(const T* a, const T* b, T* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = a[i] * b[i];
}

// dst += x
template <typename T>
void acc(const T* x, T* dst, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) dst[i] += x[i];
}

// dst += a * x
template <typename T>
void acc_scaled(const T* x, T a, T* dst, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) dst[i] += a * x[i];
}

// dst += a ⊙ b
template <typename T>
void acc_prod(const T* a, const T* b, T* dst, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) dst[i] += a[i] * b[i];
}

// dst += dy where x > 0
template <typename T>
void acc_relu_grad(const T* x, const T* dy, T* dst, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i)
    if (x[i] > T(0)) dst[i] += dy[i];
}

// dst += a*x + b*z + c  (batch-norm input gradient shape)
template <typename T>
void acc_affine2(const T* x, const T* z, T a, T b, T c, T* dst, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) dst[i] += a * x[i] + b * z[i] + c;
}

// y = a*x + b
template <typename T>
void map_affine(const T* x, T a, T b, T* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = a * x[i] + b;
}

template <typename T>
T reduce_sum(const T* x, std::size_t n) {
  T s = 0;
  for (std::size_t i = 0; i < n; ++i) s += x[i];
  return s;
}

template <typename T>
T dot(const T* a, const T* b, std::size_t n) {
  T s = 0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

// buf = momentum*buf + g + wd*v;  v -= lr*buf;  v *= mask (when mask != nullptr)
template <typename T>
void sgd_update(T* v, T* buf, const T* g, const T* mask, T lr, T momentum, T wd, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    buf[i] = momentum * buf[i] + g[i] + wd * v[i];
    v[i] -= lr * buf[i];
    if (mask) v[i] *= mask[i];
  }
}

// Direct nested-loop convolution, the oracle form. x:[N,C,H,W] w:[F,C/g,kh,kw]
// b:[F] or nullptr, y:[N,F,OH,OW]. Overwrites y.
template <typename T>
void conv2d_fwd_direct(const T* x, const T* w, const T* b, T* y, int64_t N, int64_t C, int64_t H,
                       int64_t W, int64_t F, int64_t kh, int64_t kw, int64_t OH, int64_t OW,
                       int64_t stride, int64_t pad, int64_t groups) {
  const int64_t cg = C / groups, fg = F / groups;
  for (int64_t n = 0; n < N; ++n)
    for (int64_t f = 0; f < F; ++f) {
      const int64_t g = f / fg;
      for (int64_t oy = 0; oy < OH; ++oy)
        for (int64_t ox = 0; ox < OW; ++ox) {
          T acc = b ? b[f] : T(0);
          for (int64_t c = 0; c < cg; ++c)
            for (int64_t ky = 0; ky < kh; ++ky)
              for (int64_t kx = 0; kx < kw; ++kx) {
                const int64_t iy = oy * stride + ky - pad;
                const int64_t ix = ox * stride + kx - pad;
                if (iy < 0 || iy >= H || ix < 0 || ix >= W) continue;
                acc += x[((n * C + g * cg + c) * H + iy) * W + ix] *
                       w[((f * cg + c) * kh + ky) * kw + kx];
              }
          y[((n * F + f) * OH + oy) * OW + ox] = acc;
        }
    }
}

// dx += conv-transpose(dy, w). Accumulates.
template <typename T>
void conv2d_bwd_input_direct(const T* dy, const T* w, T* dx, int64_t N, int64_t C, int64_t H,
                             int64_t W, int64_t F, int64_t kh, int64_t kw, int64_t OH, int64_t OW,
                             int64_t stride, int64_t pad, int64_t groups) {
  const int64_t cg = C / groups, fg = F / groups;
  for (int64_t n = 0; n < N; ++n)
    for (int64_t f = 0; f < F; ++f) {
      const int64_t g = f / fg;
      for (int64_t oy = 0; oy < OH; ++oy)
        for (int64_t ox = 0; ox < OW; ++ox) {
          const T gy = dy[((n * F + f) * OH + oy) * OW + ox];
          for (int64_t c = 0; c < cg; ++c)
            for (int64_t ky = 0; ky < kh; ++ky)
              for (int64_t kx = 0; kx < kw; ++kx) {
                const int64_t iy = oy * stride + ky - pad;
                const int64_t ix = ox * stride + kx - pad;
                if (iy < 0 || iy >= H || ix < 0 || ix >= W) continue;
                dx[((n * C + g * cg + c) * H + iy) * W + ix] +=
                    gy * w[((f * cg + c) * kh + ky) * kw + kx];
              }
        }
    }
}

// dw += correlation(x, dy); db += per-filter sums of dy (db may be nullptr).
template <typename T>
void conv2d_bwd_weight_direct(const T* x, const T* dy, T* dw, T* db, int64_t N, int64_t C,
                              int64_t H, int64_t W, int64_t F, int64_t kh, int64_t kw, int64_t OH,
                              int64_t OW, int64_t stride, int64_t pad, int64_t groups) {
  const int64_t cg = C / groups, fg = F / groups;
  for (int64_t n = 0; n < N; ++n)
    for (int64_t f = 0; f < F; ++f) {
      const int64_t g = f / fg;
      for (int64_t oy = 0; oy < OH; ++oy)
        for (int64_t ox = 0; ox < OW; ++ox) {
          const T gy = dy[((n * F + f) * OH + oy) * OW + ox];
          if (db) db[f] += gy;
          for (int64_t c = 0; c < cg; ++c)
            for (int64_t ky = 0; ky < kh; ++ky)
              for (int64_t kx = 0; kx < kw; ++kx) {
                const int64_t iy = oy * stride + ky - pad;
                const int64_t ix = ox * stride + kx - pad;
                if (iy < 0 || iy >= H || ix < 0 || ix >= W) continue;
                dw[((f * cg + c) * kh + ky) * kw + kx] +=
                    gy * x[((n * C + g * cg + c) * H + iy) * W + ix];
              }
        }
    }
}

}  // namespace lit::kernels::scalar
