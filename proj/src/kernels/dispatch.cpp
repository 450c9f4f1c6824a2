#include <atomic>
#include <cstdlib>
#include <string>

#include "kernels_internal.hpp"

namespace gs1mc::kernels {
namespace {

bool cpu_has_avx2() noexcept {
#if defined(GS1MC_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable* best() noexcept {
  if (const KernelTable* t = avx2_table()) return t;
  return &scalar_table();
}

const KernelTable* from_env() noexcept {
  const char* env = std::getenv("GS1MC_KERNELS");
  if (env == nullptr) return best();
  const std::string_view name(env);
  if (name == "scalar") return &scalar_table();
  if (name == "avx2" && avx2_table() != nullptr) return avx2_table();
  return best();
}

std::atomic<const KernelTable*>& slot() noexcept {
  static std::atomic<const KernelTable*> current{from_env()};
  return current;
}

}  // namespace

const KernelTable& scalar_table() noexcept { return detail::scalar_impl(); }

const KernelTable* avx2_table() noexcept {
#if defined(GS1MC_HAVE_AVX2)
  static const bool ok = cpu_has_avx2();
  return ok ? &detail::avx2_impl() : nullptr;
#else
  return nullptr;
#endif
}

const KernelTable& active() noexcept { return *slot().load(std::memory_order_acquire); }

bool select(std::string_view name) {
  const KernelTable* t = nullptr;
  if (name == "scalar") t = &scalar_table();
  else if (name == "avx2") t = avx2_table();
  else if (name == "auto") t = best();
  if (t == nullptr) return false;
  slot().store(t, std::memory_order_release);
  return true;
}

std::vector<std::string_view> available() {
  std::vector<std::string_view> names{"scalar"};
  if (avx2_table() != nullptr) names.emplace_back("avx2");
  return names;
}

}  // namespace gs1mc::kernels
