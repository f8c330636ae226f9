// SPDX-License-Identifier: Apache-2.0
#include "lit/kernels/avx2_table.hpp"

#include "lit/kernels/backend.hpp"

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include <cstring>
#include <vector>

namespace lit::kernels {
namespace {

inline float hsum8(__m256 v) {
  __m128 lo = _mm256_castps256_ps128(v);
  __m128 hi = _mm256_extractf128_ps(v, 1);
  lo = _mm_add_ps(lo, hi);
  lo = _mm_add_ps(lo, _mm_movehl_ps(lo, lo));
  lo = _mm_add_ss(lo, _mm_shuffle_ps(lo, lo, 1));
  return _mm_cvtss_f32(lo);
}

void k_map_relu(const float* x, float* y, std::size_t n) {
  const __m256 z = _mm256_setzero_ps();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) _mm256_storeu_ps(y + i, _mm256_max_ps(_mm256_loadu_ps(x + i), z));
  for (; i < n; ++i) y[i] = x[i] > 0.f ? x[i] : 0.f;
}

void k_map_square(const float* x, float* y, std::size_t n) {
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256 v = _mm256_loadu_ps(x + i);
    _mm256_storeu_ps(y + i, _mm256_mul_ps(v, v));
  }
  for (; i < n; ++i) y[i] = x[i] * x[i];
}

const __m256 kAbsMask = _mm256_castsi256_ps(_mm256_set1_epi32(0x7fffffff));

void k_map_abs(const float* x, float* y, std::size_t n) {
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8)
    _mm256_storeu_ps(y + i, _mm256_and_ps(_mm256_loadu_ps(x + i), kAbsMask));
  for (; i < n; ++i) y[i] = x[i] < 0.f ? -x[i] : x[i];
}

void k_map_huber(const float* x, float* y, std::size_t n) {
  const __m256 one = _mm256_set1_ps(1.f), half = _mm256_set1_ps(0.5f);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256 v = _mm256_loadu_ps(x + i);
    __m256 a = _mm256_and_ps(v, kAbsMask);
    __m256 quad = _mm256_mul_ps(half, _mm256_mul_ps(v, v));
    __m256 lin = _mm256_sub_ps(a, half);
    __m256 lt = _mm256_cmp_ps(a, one, _CMP_LT_OQ);
    _mm256_storeu_ps(y + i, _mm256_blendv_ps(lin, quad, lt));
  }
  for (; i < n; ++i) {
    const float a = x[i] < 0.f ? -x[i] : x[i];
    y[i] = a < 1.f ? 0.5f * x[i] * x[i] : a - 0.5f;
  }
}

void k_map_scale(const float* x, float a, float* y, std::size_t n) {
  const __m256 va = _mm256_set1_ps(a);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) _mm256_storeu_ps(y + i, _mm256_mul_ps(va, _mm256_loadu_ps(x + i)));
  for (; i < n; ++i) y[i] = a * x[i];
}

void k_map_affine(const float* x, float a, float b, float* y, std::size_t n) {
  const __m256 va = _mm256_set1_ps(a), vb = _mm256_set1_ps(b);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8)
    _mm256_storeu_ps(y + i, _mm256_fmadd_ps(va, _mm256_loadu_ps(x + i), vb));
  for (; i < n; ++i) y[i] = a * x[i] + b;
}

void k_ew_add(const float* a, const float* b, float* y, std::size_t n) {
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8)
    _mm256_storeu_ps(y + i, _mm256_add_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i)));
  for (; i < n; ++i) y[i] = a[i] + b[i];
}

void k_ew_sub(const float* a, const float* b, float* y, std::size_t n) {
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8)
    _mm256_storeu_ps(y + i, _mm256_sub_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i)));
  for (; i < n; ++i) y[i] = a[i] - b[i];
}

void k_ew_mul(const float* a, const float* b, float* y, std::size_t n) {
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8)
    _mm256_storeu_ps(y + i, _mm256_mul_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i)));
  for (; i < n; ++i) y[i] = a[i] * b[i];
}

void k_acc(const float* x, float* dst, std::size_t n) {
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8)
    _mm256_storeu_ps(dst + i, _mm256_add_ps(_mm256_loadu_ps(dst + i), _mm256_loadu_ps(x + i)));
  for (; i < n; ++i) dst[i] += x[i];
}

void k_acc_scaled(const float* x, float a, float* dst, std::size_t n) {
  const __m256 va = _mm256_set1_ps(a);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8)
    _mm256_storeu_ps(dst + i, _mm256_fmadd_ps(va, _mm256_loadu_ps(x + i), _mm256_loadu_ps(dst + i)));
  for (; i < n; ++i) dst[i] += a * x[i];
}

void k_acc_prod(const float* a, const float* b, float* dst, std::size_t n) {
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8)
    _mm256_storeu_ps(dst + i, _mm256_fmadd_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i),
                                              _mm256_loadu_ps(dst + i)));
  for (; i < n; ++i) dst[i] += a[i] * b[i];
}

void k_acc_relu_grad(const float* x, const float* dy, float* dst, std::size_t n) {
  const __m256 z = _mm256_setzero_ps();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256 gt = _mm256_cmp_ps(_mm256_loadu_ps(x + i), z, _CMP_GT_OQ);
    __m256 g = _mm256_and_ps(_mm256_loadu_ps(dy + i), gt);
    _mm256_storeu_ps(dst + i, _mm256_add_ps(_mm256_loadu_ps(dst + i), g));
  }
  for (; i < n; ++i)
    if (x[i] > 0.f) dst[i] += dy[i];
}

void k_acc_affine2(const float* x, const float* z, float a, float b, float c, float* dst,
                   std::size_t n) {
  const __m256 va = _mm256_set1_ps(a), vb = _mm256_set1_ps(b), vc = _mm256_set1_ps(c);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256 t = _mm256_fmadd_ps(va, _mm256_loadu_ps(x + i), vc);
    t = _mm256_fmadd_ps(vb, _mm256_loadu_ps(z + i), t);
    _mm256_storeu_ps(dst + i, _mm256_add_ps(_mm256_loadu_ps(dst + i), t));
  }
  for (; i < n; ++i) dst[i] += a * x[i] + b * z[i] + c;
}

float k_reduce_sum(const float* x, std::size_t n) {
  __m256 s = _mm256_setzero_ps();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) s = _mm256_add_ps(s, _mm256_loadu_ps(x + i));
  float r = hsum8(s);
  for (; i < n; ++i) r += x[i];
  return r;
}

float k_dot(const float* a, const float* b, std::size_t n) {
  __m256 s = _mm256_setzero_ps();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8)
    s = _mm256_fmadd_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i), s);
  float r = hsum8(s);
  for (; i < n; ++i) r += a[i] * b[i];
  return r;
}

void k_sgd_update(float* v, float* buf, const float* g, const float* mask, float lr,
                  float momentum, float wd, std::size_t n) {
  const __m256 vlr = _mm256_set1_ps(lr), vm = _mm256_set1_ps(momentum), vwd = _mm256_set1_ps(wd);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256 val = _mm256_loadu_ps(v + i);
    __m256 b = _mm256_mul_ps(vm, _mm256_loadu_ps(buf + i));
    b = _mm256_add_ps(b, _mm256_loadu_ps(g + i));
    b = _mm256_fmadd_ps(vwd, val, b);
    _mm256_storeu_ps(buf + i, b);
    val = _mm256_fnmadd_ps(vlr, b, val);
    if (mask) val = _mm256_mul_ps(val, _mm256_loadu_ps(mask + i));
    _mm256_storeu_ps(v + i, val);
  }
  for (; i < n; ++i) {
    buf[i] = momentum * buf[i] + g[i] + wd * v[i];
    v[i] -= lr * buf[i];
    if (mask) v[i] *= mask[i];
  }
}

// ---------------------------------------------------------------------------
// Packed GEMM: 6x16 FMA microkernel, row-major, transposes resolved while
// packing. Tails are padded with zeros and written back through a bounce
// buffer.

constexpr std::size_t MR = 6, NR = 16, NC = 2048;

inline float at(const float* A, std::size_t ld, bool trans, std::size_t r, std::size_t c) {
  return trans ? A[c * ld + r] : A[r * ld + c];
}

// packs rows [i0, i0+mr) of op(A) into panel, MR-padded
void pack_a(const float* A, std::size_t lda, bool ta, std::size_t i0, std::size_t mr,
            std::size_t K, float* dst) {
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t i = 0; i < MR; ++i)
      dst[k * MR + i] = i < mr ? at(A, lda, ta, i0 + i, k) : 0.f;
}

// packs cols [j0, j0+nr) of op(B) into panel, NR-padded
void pack_b(const float* B, std::size_t ldb, bool tb, std::size_t j0, std::size_t nr,
            std::size_t K, float* dst) {
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t j = 0; j < NR; ++j)
      dst[k * NR + j] = j < nr ? at(B, ldb, tb, k, j0 + j) : 0.f;
}

// C6x16 = panelA * panelB, accumulating into acc registers then applying
// alpha/beta into out (ldo = NR for the bounce buffer, ldc for direct hits).
void kernel_6x16(const float* a, const float* b, std::size_t K, float alpha, float beta,
                 float* out, std::size_t ldo) {
  __m256 c[MR][2];
  for (auto& row : c) {
    row[0] = _mm256_setzero_ps();
    row[1] = _mm256_setzero_ps();
  }
  for (std::size_t k = 0; k < K; ++k) {
    const __m256 b0 = _mm256_loadu_ps(b + k * NR);
    const __m256 b1 = _mm256_loadu_ps(b + k * NR + 8);
    for (std::size_t i = 0; i < MR; ++i) {
      const __m256 ai = _mm256_set1_ps(a[k * MR + i]);
      c[i][0] = _mm256_fmadd_ps(ai, b0, c[i][0]);
      c[i][1] = _mm256_fmadd_ps(ai, b1, c[i][1]);
    }
  }
  const __m256 va = _mm256_set1_ps(alpha);
  for (std::size_t i = 0; i < MR; ++i) {
    float* row = out + i * ldo;
    if (beta == 0.f) {
      _mm256_storeu_ps(row, _mm256_mul_ps(va, c[i][0]));
      _mm256_storeu_ps(row + 8, _mm256_mul_ps(va, c[i][1]));
    } else {
      const __m256 vb = _mm256_set1_ps(beta);
      _mm256_storeu_ps(row, _mm256_fmadd_ps(va, c[i][0], _mm256_mul_ps(vb, _mm256_loadu_ps(row))));
      _mm256_storeu_ps(row + 8,
                       _mm256_fmadd_ps(va, c[i][1], _mm256_mul_ps(vb, _mm256_loadu_ps(row + 8))));
    }
  }
}

void k_gemm(bool ta, bool tb, std::size_t M, std::size_t N, std::size_t K, float alpha,
            const float* A, std::size_t lda, const float* B, std::size_t ldb, float beta, float* C,
            std::size_t ldc) {
  thread_local std::vector<float> packed_a, packed_b;
  packed_a.resize(MR * K);
  for (std::size_t jc = 0; jc < N; jc += NC) {
    const std::size_t nc = N - jc < NC ? N - jc : NC;
    const std::size_t npanels = (nc + NR - 1) / NR;
    packed_b.resize(npanels * K * NR);
    for (std::size_t p = 0; p < npanels; ++p) {
      const std::size_t j0 = jc + p * NR;
      const std::size_t nr = N - j0 < NR ? N - j0 : NR;
      pack_b(B, ldb, tb, j0, nr, K, packed_b.data() + p * K * NR);
    }
    for (std::size_t i0 = 0; i0 < M; i0 += MR) {
      const std::size_t mr = M - i0 < MR ? M - i0 : MR;
      pack_a(A, lda, ta, i0, mr, K, packed_a.data());
      for (std::size_t p = 0; p < npanels; ++p) {
        const std::size_t j0 = jc + p * NR;
        const std::size_t nr = N - j0 < NR ? N - j0 : NR;
        const float* bp = packed_b.data() + p * K * NR;
        if (mr == MR && nr == NR) {
          kernel_6x16(packed_a.data(), bp, K, alpha, beta, C + i0 * ldc + j0, ldc);
        } else {
          float bounce[MR * NR] = {};
          if (beta != 0.f)
            for (std::size_t i = 0; i < mr; ++i)
              std::memcpy(bounce + i * NR, C + (i0 + i) * ldc + j0, nr * sizeof(float));
          kernel_6x16(packed_a.data(), bp, K, alpha, beta, bounce, NR);
          for (std::size_t i = 0; i < mr; ++i)
            std::memcpy(C + (i0 + i) * ldc + j0, bounce + i * NR, nr * sizeof(float));
        }
      }
    }
  }
}

const Avx2Table kTable = {
    k_gemm,       k_map_relu,   k_map_square,    k_map_abs,     k_map_huber, k_map_scale,
    k_map_affine, k_ew_add,     k_ew_sub,        k_ew_mul,      k_acc,       k_acc_scaled,
    k_acc_prod,   k_acc_relu_grad, k_acc_affine2, k_reduce_sum, k_dot,       k_sgd_update,
};

}  // namespace

const Avx2Table* avx2_table() { return avx2_available() ? &kTable : nullptr; }

}  // namespace lit::kernels

#else

namespace lit::kernels {
const Avx2Table* avx2_table() { return nullptr; }
}  // namespace lit::kernels

#endif
