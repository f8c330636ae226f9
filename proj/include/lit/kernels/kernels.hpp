// SPDX-License-Identifier: Apache-2.0
#pragma once

// Dispatched kernel entry points. Float routes to the AVX2 table when the
// active backend is Avx2; everything else runs the scalar reference kernels.

#include <cstddef>
#include <cstdint>
#include <type_traits>

#include "lit/kernels/avx2_table.hpp"
#include "lit/kernels/backend.hpp"
#include "lit/kernels/scalar.hpp"

namespace lit::kernels {

namespace detail {
inline const Avx2Table* table() {
  return active_backend() == Backend::Avx2 ? avx2_table() : nullptr;
}
}  // namespace detail

template <typename T>
void gemm(bool ta, bool tb, std::size_t M, std::size_t N, std::size_t K, T alpha, const T* A,
          std::size_t lda, const T* B, std::size_t ldb, T beta, T* C, std::size_t ldc) {
  if constexpr (std::is_same_v<T, float>) {
    if (const auto* t = detail::table()) return t->gemm(ta, tb, M, N, K, alpha, A, lda, B, ldb, beta, C, ldc);
  }
  scalar::gemm(ta, tb, M, N, K, alpha, A, lda, B, ldb, beta, C, ldc);
}

#define LIT_DISPATCH_MAP(NAME)                                          \
  template <typename T>                                                 \
  void NAME(const T* x, T* y, std::size_t n) {                          \
    if constexpr (std::is_same_v<T, float>) {                           \
      if (const auto* t = detail::table()) return t->NAME(x, y, n);     \
    }                                                                   \
    scalar::NAME(x, y, n);                                              \
  }

LIT_DISPATCH_MAP(map_relu)
LIT_DISPATCH_MAP(map_square)
LIT_DISPATCH_MAP(map_abs)
LIT_DISPATCH_MAP(map_huber_unit)
#undef LIT_DISPATCH_MAP

template <typename T>
void map_scale(const T* x, T a, T* y, std::size_t n) {
  if constexpr (std::is_same_v<T, float>) {
    if (const auto* t = detail::table()) return t->map_scale(x, a, y, n);
  }
  scalar::map_scale(x, a, y, n);
}

template <typename T>
void map_affine(const T* x, T a, T b, T* y, std::size_t n) {
  if constexpr (std::is_same_v<T, float>) {
    if (const auto* t = detail::table()) return t->map_affine(x, a, b, y, n);
  }
  scalar::map_affine(x, a, b, y, n);
}

#define LIT_DISPATCH_BINOP(NAME)                                         \
  template <typename T>                                                  \
  void NAME(const T* a, const T* b, T* y, std::size_t n) {               \
    if constexpr (std::is_same_v<T, float>) {                            \
      if (const auto* t = detail::table()) return t->NAME(a, b, y, n);   \
    }                                                                    \
    scalar::NAME(a, b, y, n);                                            \
  }

LIT_DISPATCH_BINOP(ew_add)
LIT_DISPATCH_BINOP(ew_sub)
LIT_DISPATCH_BINOP(ew_mul)
#undef LIT_DISPATCH_BINOP

template <typename T>
void acc(const T* x, T* dst, std::size_t n) {
  if constexpr (std::is_same_v<T, float>) {
    if (const auto* t = detail::table()) return t->acc(x, dst, n);
  }
  scalar::acc(x, dst, n);
}

template <typename T>
void acc_scaled(const T* x, T a, T* dst, std::size_t n) {
  if constexpr (std::is_same_v<T, float>) {
    if (const auto* t = detail::table()) return t->acc_scaled(x, a, dst, n);
  }
  scalar::acc_scaled(x, a, dst, n);
}

template <typename T>
void acc_prod(const T* a, const T* b, T* dst, std::size_t n) {
  if constexpr (std::is_same_v<T, float>) {
    if (const auto* t = detail::table()) return t->acc_prod(a, b, dst, n);
  }
  scalar::acc_prod(a, b, dst, n);
}

template <typename T>
void acc_relu_grad(const T* x, const T* dy, T* dst, std::size_t n) {
  if constexpr (std::is_same_v<T, float>) {
    if (const auto* t = detail::table()) return t->acc_relu_grad(x, dy, dst, n);
  }
  scalar::acc_relu_grad(x, dy, dst, n);
}

template <typename T>
void acc_affine2(const T* x, const T* z, T a, T b, T c, T* dst, std::size_t n) {
  if constexpr (std::is_same_v<T, float>) {
    if (const auto* t = detail::table()) return t->acc_affine2(x, z, a, b, c, dst, n);
  }
  scalar::acc_affine2(x, z, a, b, c, dst, n);
}

template <typename T>
T reduce_sum(const T* x, std::size_t n) {
  if constexpr (std::is_same_v<T, float>) {
    if (const auto* t = detail::table()) return t->reduce_sum(x, n);
  }
  return scalar::reduce_sum(x, n);
}

template <typename T>
T dot(const T* a, const T* b, std::size_t n) {
  if constexpr (std::is_same_v<T, float>) {
    if (const auto* t = detail::table()) return t->dot(a, b, n);
  }
  return scalar::dot(a, b, n);
}

template <typename T>
void sgd_update(T* v, T* buf, const T* g, const T* mask, T lr, T momentum, T wd, std::size_t n) {
  if constexpr (std::is_same_v<T, float>) {
    if (const auto* t = detail::table()) return t->sgd_update(v, buf, g, mask, lr, momentum, wd, n);
  }
  scalar::sgd_update(v, buf, g, mask, lr, momentum, wd, n);
}

// ---------------------------------------------------------------------------
// Convolution. Scalar backend runs the direct nested-loop reference; the AVX2
// float path lowers to im2col + GEMM (see conv.cpp).

struct ConvDims {
  int64_t N, C, H, W;       // input
  int64_t F, kh, kw;        // filters
  int64_t OH, OW;           // output spatial
  int64_t stride, pad, groups;
};

template <typename T>
void conv2d_fwd(const T* x, const T* w, const T* b, T* y, const ConvDims& d) {
  scalar::conv2d_fwd_direct(x, w, b, y, d.N, d.C, d.H, d.W, d.F, d.kh, d.kw, d.OH, d.OW, d.stride,
                            d.pad, d.groups);
}

template <typename T>
void conv2d_bwd_input(const T* dy, const T* w, T* dx_acc, const ConvDims& d) {
  scalar::conv2d_bwd_input_direct(dy, w, dx_acc, d.N, d.C, d.H, d.W, d.F, d.kh, d.kw, d.OH, d.OW,
                                  d.stride, d.pad, d.groups);
}

template <typename T>
void conv2d_bwd_weight(const T* x, const T* dy, T* dw_acc, T* db_acc, const ConvDims& d) {
  scalar::conv2d_bwd_weight_direct(x, dy, dw_acc, db_acc, d.N, d.C, d.H, d.W, d.F, d.kh, d.kw,
                                   d.OH, d.OW, d.stride, d.pad, d.groups);
}

// Float specializations dispatch to the im2col path when AVX2 is active.
template <>
void conv2d_fwd<float>(const float* x, const float* w, const float* b, float* y, const ConvDims& d);
template <>
void conv2d_bwd_input<float>(const float* dy, const float* w, float* dx_acc, const ConvDims& d);
template <>
void conv2d_bwd_weight<float>(const float* x, const float* dy, float* dw_acc, float* db_acc,
                              const ConvDims& d);

}  // namespace lit::kernels
