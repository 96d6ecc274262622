#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "hme/kernels/kernels.hpp"

namespace hme::kernels {
namespace {

bool cpu_has_avx2() {
#if defined(__x86_64__) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Backend initial_backend() {
  const bool avx2 = avx2_supported();
  if (const char* env = std::getenv("HME_KERNELS")) {
    const std::string choice(env);
    if (choice == "scalar") return Backend::scalar;
    if (choice == "avx2" && avx2) return Backend::avx2;
  }
  return avx2 ? Backend::avx2 : Backend::scalar;
}

std::atomic<const KernelTable*>& current() {
  static std::atomic<const KernelTable*> table{
      initial_backend() == Backend::avx2 ? avx2_table() : &scalar_table()};
  return table;
}

}  // namespace

bool avx2_supported() {
  static const bool supported = avx2_table() != nullptr && cpu_has_avx2();
  return supported;
}

const KernelTable& active() { return *current().load(std::memory_order_relaxed); }

Backend active_backend() {
  return &active() == &scalar_table() ? Backend::scalar : Backend::avx2;
}

void set_backend(Backend backend) {
  if (backend == Backend::avx2) {
    if (!avx2_supported()) throw std::runtime_error("AVX2 kernels are not available on this CPU");
    current().store(avx2_table());
  } else {
    current().store(&scalar_table());
  }
}

std::string_view backend_name(Backend backend) {
  return backend == Backend::avx2 ? "avx2" : "scalar";
}

}  // namespace hme::kernels
