// SPDX-License-Identifier: Apache-2.0
#include "lit/kernels/backend.hpp"

#include <cstdlib>
#include <stdexcept>
#include <string>

namespace lit::kernels {

namespace {

bool detect_avx2() {
#if defined(LIT_WITH_AVX2) && (defined(__x86_64__) || defined(_M_X64))
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

std::optional<Backend> g_forced;

Backend env_or_auto() {
  if (const char* env = std::getenv("LIT_KERNELS")) {
    std::string v(env);
    if (v == "scalar") return Backend::Scalar;
    if (v == "avx2") {
      if (!detect_avx2()) throw std::runtime_error("LIT_KERNELS=avx2 but AVX2+FMA is not available");
      return Backend::Avx2;
    }
  }
  return detect_avx2() ? Backend::Avx2 : Backend::Scalar;
}

}  // namespace

bool avx2_available() {
  static const bool v = detect_avx2();
  return v;
}

Backend active_backend() {
  if (g_forced) return *g_forced;
  static const Backend auto_choice = env_or_auto();
  return auto_choice;
}

std::string_view backend_name(Backend b) {
  return b == Backend::Avx2 ? "avx2" : "scalar";
}

void force_backend(std::optional<Backend> b) {
  if (b && *b == Backend::Avx2 && !avx2_available())
    throw std::runtime_error("cannot force AVX2 backend: not available on this CPU/build");
  g_forced = b;
}

}  // namespace lit::kernels
