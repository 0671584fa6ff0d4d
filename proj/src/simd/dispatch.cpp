#include <atomic>
#include <cstdlib>
#include <cstring>

#include "pm/simd/kernels.hpp"

namespace pm::simd {

namespace {

std::atomic<int> g_override{-1};

}  // namespace

bool cpu_has_avx2() {
#if defined(__x86_64__) && (defined(__GNUC__) || defined(__clang__))
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Isa detected_isa() {
  if (const char* env = std::getenv("PM_SIMD"); env != nullptr && std::strcmp(env, "scalar") == 0) {
    return Isa::Scalar;
  }
  if (avx2_kernels() != nullptr && cpu_has_avx2()) return Isa::Avx2;
  return Isa::Scalar;
}

Isa active_isa() {
  const int o = g_override.load(std::memory_order_relaxed);
  if (o >= 0) return static_cast<Isa>(o);
  static const Isa detected = detected_isa();
  return detected;
}

void set_active_isa(Isa isa) { g_override.store(static_cast<int>(isa), std::memory_order_relaxed); }

const KernelTable& kernels_for(Isa isa) {
  if (isa == Isa::Avx2 && avx2_kernels() != nullptr && cpu_has_avx2()) return *avx2_kernels();
  return scalar_kernels();
}

const KernelTable& active() { return kernels_for(active_isa()); }

const char* isa_name(Isa isa) {
  switch (isa) {
    case Isa::Avx2:
      return "avx2";
    case Isa::Scalar:
      break;
  }
  return "scalar";
}

}  // namespace pm::simd
