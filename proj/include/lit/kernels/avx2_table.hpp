// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>

namespace lit::kernels {

// Function table filled in by the AVX2 translation unit (compiled with
// -mavx2 -mfma). Float only; the double path stays on the scalar kernels.
struct Avx2Table {
  void (*gemm)(bool ta, bool tb, std::size_t M, std::size_t N, std::size_t K, float alpha,
               const float* A, std::size_t lda, const float* B, std::size_t ldb, float beta,
               float* C, std::size_t ldc);
  void (*map_relu)(const float*, float*, std::size_t);
  void (*map_square)(const float*, float*, std::size_t);
  void (*map_abs)(const float*, float*, std::size_t);
  void (*map_huber_unit)(const float*, float*, std::size_t);
  void (*map_scale)(const float*, float, float*, std::size_t);
  void (*map_affine)(const float*, float, float, float*, std::size_t);
  void (*ew_add)(const float*, const float*, float*, std::size_t);
  void (*ew_sub)(const float*, const float*, float*, std::size_t);
  void (*ew_mul)(const float*, const float*, float*, std::size_t);
  void (*acc)(const float*, float*, std::size_t);
  void (*acc_scaled)(const float*, float, float*, std::size_t);
  void (*acc_prod)(const float*, const float*, float*, std::size_t);
  void (*acc_relu_grad)(const float*, const float*, float*, std::size_t);
  void (*acc_affine2)(const float*, const float*, float, float, float, float*, std::size_t);
  float (*reduce_sum)(const float*, std::size_t);
  float (*dot)(const float*, const float*, std::size_t);
  void (*sgd_update)(float*, float*, const float*, const float*, float, float, float, std::size_t);
};

// Null when the build has no AVX2 TU or the CPU lacks AVX2+FMA.
const Avx2Table* avx2_table();

}  // namespace lit::kernels
