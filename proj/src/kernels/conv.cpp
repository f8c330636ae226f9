// SPDX-License-Identifier: Apache-2.0
#include <cstring>
#include <vector>

#include "lit/kernels/kernels.hpp"

namespace lit::kernels {

namespace {

// Whole-batch lowering: col is [cg*kh*kw, N*OH*OW] for one group, columns
// ordered (image, oy, ox). One wide GEMM per group amortizes packing.
void im2col_batch(const float* x, float* col, const ConvDims& d, int64_t g) {
  const int64_t cg = d.C / d.groups;
  const int64_t sp = d.OH * d.OW;
  const int64_t cols = d.N * sp;
  int64_t row = 0;
  for (int64_t c = 0; c < cg; ++c)
    for (int64_t ky = 0; ky < d.kh; ++ky)
      for (int64_t kx = 0; kx < d.kw; ++kx, ++row) {
        float* out = col + row * cols;
        for (int64_t n = 0; n < d.N; ++n) {
          const float* xc = x + ((n * d.C + g * cg + c) * d.H) * d.W;
          float* o = out + n * sp;
          for (int64_t oy = 0; oy < d.OH; ++oy) {
            const int64_t iy = oy * d.stride + ky - d.pad;
            if (iy < 0 || iy >= d.H) {
              std::memset(o + oy * d.OW, 0, d.OW * sizeof(float));
              continue;
            }
            const int64_t ix0 = kx - d.pad;
            if (d.stride == 1) {
              // contiguous middle, clamped edges
              int64_t ox = 0;
              for (; ox < d.OW && ix0 + ox < 0; ++ox) o[oy * d.OW + ox] = 0.f;
              int64_t run_end = d.OW;
              while (run_end > ox && ix0 + run_end - 1 >= d.W) --run_end;
              if (run_end > ox)
                std::memcpy(o + oy * d.OW + ox, xc + iy * d.W + ix0 + ox,
                            (run_end - ox) * sizeof(float));
              for (ox = run_end; ox < d.OW; ++ox) o[oy * d.OW + ox] = 0.f;
            } else {
              for (int64_t ox = 0; ox < d.OW; ++ox) {
                const int64_t ix = ix0 + ox * d.stride;
                o[oy * d.OW + ox] = (ix < 0 || ix >= d.W) ? 0.f : xc[iy * d.W + ix];
              }
            }
          }
        }
      }
}

void col2im_batch_acc(const float* col, float* dx, const ConvDims& d, int64_t g) {
  const int64_t cg = d.C / d.groups;
  const int64_t sp = d.OH * d.OW;
  const int64_t cols = d.N * sp;
  int64_t row = 0;
  for (int64_t c = 0; c < cg; ++c)
    for (int64_t ky = 0; ky < d.kh; ++ky)
      for (int64_t kx = 0; kx < d.kw; ++kx, ++row) {
        const float* in = col + row * cols;
        for (int64_t n = 0; n < d.N; ++n) {
          float* xc = dx + ((n * d.C + g * cg + c) * d.H) * d.W;
          const float* i = in + n * sp;
          for (int64_t oy = 0; oy < d.OH; ++oy) {
            const int64_t iy = oy * d.stride + ky - d.pad;
            if (iy < 0 || iy >= d.H) continue;
            for (int64_t ox = 0; ox < d.OW; ++ox) {
              const int64_t ix = ox * d.stride + kx - d.pad;
              if (ix < 0 || ix >= d.W) continue;
              xc[iy * d.W + ix] += i[oy * d.OW + ox];
            }
          }
        }
      }
}

std::vector<float>& col_scratch() {
  thread_local std::vector<float> buf;
  return buf;
}
std::vector<float>& gemm_scratch() {
  thread_local std::vector<float> buf;
  return buf;
}

bool use_gemm_path() { return active_backend() == Backend::Avx2 && avx2_table() != nullptr; }

}  // namespace

template <>
void conv2d_fwd<float>(const float* x, const float* w, const float* b, float* y,
                       const ConvDims& d) {
  if (!use_gemm_path()) {
    scalar::conv2d_fwd_direct(x, w, b, y, d.N, d.C, d.H, d.W, d.F, d.kh, d.kw, d.OH, d.OW,
                              d.stride, d.pad, d.groups);
    return;
  }
  const int64_t cg = d.C / d.groups, fg = d.F / d.groups;
  const int64_t K = cg * d.kh * d.kw, sp = d.OH * d.OW, cols = d.N * sp;
  auto& col = col_scratch();
  col.resize(static_cast<std::size_t>(K * cols));
  auto& out = gemm_scratch();
  out.resize(static_cast<std::size_t>(fg * cols));
  const auto* t = avx2_table();
  for (int64_t g = 0; g < d.groups; ++g) {
    im2col_batch(x, col.data(), d, g);
    t->gemm(false, false, fg, cols, K, 1.f, w + g * fg * K, K, col.data(), cols, 0.f, out.data(),
            cols);
    for (int64_t f = 0; f < fg; ++f)
      for (int64_t n = 0; n < d.N; ++n) {
        float* dst = y + ((n * d.F + g * fg + f) * sp);
        const float* src = out.data() + f * cols + n * sp;
        if (b) {
          const float bv = b[g * fg + f];
          for (int64_t i = 0; i < sp; ++i) dst[i] = src[i] + bv;
        } else {
          std::memcpy(dst, src, sp * sizeof(float));
        }
      }
  }
}

template <>
void conv2d_bwd_input<float>(const float* dy, const float* w, float* dx_acc, const ConvDims& d) {
  if (!use_gemm_path()) {
    scalar::conv2d_bwd_input_direct(dy, w, dx_acc, d.N, d.C, d.H, d.W, d.F, d.kh, d.kw, d.OH, d.OW,
                                    d.stride, d.pad, d.groups);
    return;
  }
  const int64_t cg = d.C / d.groups, fg = d.F / d.groups;
  const int64_t K = cg * d.kh * d.kw, sp = d.OH * d.OW, cols = d.N * sp;
  auto& col = col_scratch();
  col.resize(static_cast<std::size_t>(K * cols));
  auto& dybuf = gemm_scratch();
  dybuf.resize(static_cast<std::size_t>(fg * cols));
  const auto* t = avx2_table();
  for (int64_t g = 0; g < d.groups; ++g) {
    for (int64_t f = 0; f < fg; ++f)
      for (int64_t n = 0; n < d.N; ++n)
        std::memcpy(dybuf.data() + f * cols + n * sp, dy + ((n * d.F + g * fg + f) * sp),
                    sp * sizeof(float));
    // dcol[K, cols] = W^T[K, fg] * dy_g[fg, cols]
    t->gemm(true, false, K, cols, fg, 1.f, w + g * fg * K, K, dybuf.data(), cols, 0.f, col.data(),
            cols);
    col2im_batch_acc(col.data(), dx_acc, d, g);
  }
}

template <>
void conv2d_bwd_weight<float>(const float* x, const float* dy, float* dw_acc, float* db_acc,
                              const ConvDims& d) {
  if (!use_gemm_path()) {
    scalar::conv2d_bwd_weight_direct(x, dy, dw_acc, db_acc, d.N, d.C, d.H, d.W, d.F, d.kh, d.kw,
                                     d.OH, d.OW, d.stride, d.pad, d.groups);
    return;
  }
  const int64_t cg = d.C / d.groups, fg = d.F / d.groups;
  const int64_t K = cg * d.kh * d.kw, sp = d.OH * d.OW, cols = d.N * sp;
  auto& col = col_scratch();
  col.resize(static_cast<std::size_t>(K * cols));
  auto& dybuf = gemm_scratch();
  dybuf.resize(static_cast<std::size_t>(fg * cols));
  const auto* t = avx2_table();
  for (int64_t g = 0; g < d.groups; ++g) {
    im2col_batch(x, col.data(), d, g);
    for (int64_t f = 0; f < fg; ++f)
      for (int64_t n = 0; n < d.N; ++n)
        std::memcpy(dybuf.data() + f * cols + n * sp, dy + ((n * d.F + g * fg + f) * sp),
                    sp * sizeof(float));
    // dW_g[fg, K] += dy_g[fg, cols] * col^T[cols, K]
    t->gemm(false, true, fg, K, cols, 1.f, dybuf.data(), cols, col.data(), cols, 1.f,
            dw_acc + g * fg * K, K);
    if (db_acc)
      for (int64_t f = 0; f < fg; ++f)
        db_acc[g * fg + f] += t->reduce_sum(dybuf.data() + f * cols, static_cast<std::size_t>(cols));
  }
}

}  // namespace lit::kernels
