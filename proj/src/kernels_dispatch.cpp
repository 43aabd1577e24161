#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "facetproc/kernels.hpp"

namespace facetproc::simd {
namespace {

using KernelFn = double (*)(const IntersectionBox&, const ClassColumns&);

KernelFn kernel_for(Isa isa) {
  switch (isa) {
#if defined(__x86_64__) || defined(_M_X64)
    case Isa::avx2: return &extension_sum_avx2;
#endif
#if defined(__aarch64__)
    case Isa::neon: return &extension_sum_neon;
#endif
    default: return &extension_sum_scalar;
  }
}

Isa detect() {
  if (const char* env = std::getenv("FACETPROC_ISA")) {
    const std::string s = env;
    if (s == "scalar") return Isa::scalar;
    if (s == "avx2" && available(Isa::avx2)) return Isa::avx2;
    if (s == "neon" && available(Isa::neon)) return Isa::neon;
  }
  if (available(Isa::avx2)) return Isa::avx2;
  if (available(Isa::neon)) return Isa::neon;
  return Isa::scalar;
}

std::atomic<int> g_isa{-1};

}  // namespace

std::string_view name(Isa isa) {
  switch (isa) {
    case Isa::scalar: return "scalar";
    case Isa::avx2: return "avx2";
    case Isa::neon: return "neon";
  }
  return "unknown";
}

bool available(Isa isa) {
  switch (isa) {
    case Isa::scalar: return true;
    case Isa::avx2:
#if defined(__x86_64__) || defined(_M_X64)
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
    case Isa::neon:
#if defined(__aarch64__)
      return true;
#else
      return false;
#endif
  }
  return false;
}

Isa active() {
  int v = g_isa.load(std::memory_order_relaxed);
  if (v < 0) {
    v = static_cast<int>(detect());
    g_isa.store(v, std::memory_order_relaxed);
  }
  return static_cast<Isa>(v);
}

void set_isa(Isa isa) {
  if (!available(isa)) throw std::invalid_argument("set_isa: " + std::string(name(isa)) + " not available");
  g_isa.store(static_cast<int>(isa), std::memory_order_relaxed);
}

double extension_sum(const IntersectionBox& box, const ClassColumns& cls) {
  return kernel_for(active())(box, cls);
}

}  // namespace facetproc::simd
