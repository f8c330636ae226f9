// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string_view>

namespace lit::kernels {

// Compute backend for the float kernels. Scalar kernels are the reference
// implementations; the AVX2 variants are equivalence-tested against them.
enum class Backend { Scalar, Avx2 };

// True if this build carries AVX2 kernels and the CPU reports AVX2+FMA.
bool avx2_available();

// Backend used for float kernels. Resolution order: force_backend() override,
// then the LIT_KERNELS environment variable ("scalar" or "avx2"), then the
// best available. Double kernels always run scalar.
Backend active_backend();

std::string_view backend_name(Backend b);

// Test hook: pin the backend, or pass nullopt to return to auto selection.
// Requesting Avx2 on a machine without it throws.
void force_backend(std::optional<Backend> b);

}  // namespace lit::kernels
