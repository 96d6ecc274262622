#pragma once

// Dense double-precision inner loops used by the autodiff core.
//
// Every kernel has a scalar reference implementation and, on x86-64, an
// AVX2+FMA variant. The variant is chosen once at startup from CPUID and can
// be overridden with HME_KERNELS=scalar|avx2 or set_backend(). All matrices
// are row-major and contiguous.

#include <cstddef>
#include <string_view>

namespace hme::kernels {

enum class Backend { scalar, avx2 };

struct KernelTable {
  double (*dot)(const double* a, const double* b, std::size_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // out = a + b (out may alias a or b)
  void (*add)(const double* a, const double* b, double* out, std::size_t n);
  // out = a * b elementwise (out may alias a or b)
  void (*mul)(const double* a, const double* b, double* out, std::size_t n);
  // C[m,n] += A[m,k] * B[k,n]
  void (*gemm_nn)(const double* A, const double* B, double* C, std::size_t m,
                  std::size_t k, std::size_t n);
  // C[m,n] += A[m,k] * B[n,k]^T
  void (*gemm_nt)(const double* A, const double* B, double* C, std::size_t m,
                  std::size_t k, std::size_t n);
  // C[m,n] += A[k,m]^T * B[k,n]
  void (*gemm_tn)(const double* A, const double* B, double* C, std::size_t m,
                  std::size_t k, std::size_t n);
};

const KernelTable& scalar_table();
// Null when the build has no AVX2 variant.
const KernelTable* avx2_table();

bool avx2_supported();
Backend active_backend();
// Throws std::runtime_error when the backend is unavailable on this CPU.
void set_backend(Backend backend);
std::string_view backend_name(Backend backend);

const KernelTable& active();

inline double dot(const double* a, const double* b, std::size_t n) {
  return active().dot(a, b, n);
}
inline void axpy(double alpha, const double* x, double* y, std::size_t n) {
  active().axpy(alpha, x, y, n);
}
inline void add(const double* a, const double* b, double* out, std::size_t n) {
  active().add(a, b, out, n);
}
inline void mul(const double* a, const double* b, double* out, std::size_t n) {
  active().mul(a, b, out, n);
}
inline void gemm_nn(const double* A, const double* B, double* C, std::size_t m,
                    std::size_t k, std::size_t n) {
  active().gemm_nn(A, B, C, m, k, n);
}
inline void gemm_nt(const double* A, const double* B, double* C, std::size_t m,
                    std::size_t k, std::size_t n) {
  active().gemm_nt(A, B, C, m, k, n);
}
inline void gemm_tn(const double* A, const double* B, double* C, std::size_t m,
                    std::size_t k, std::size_t n) {
  active().gemm_tn(A, B, C, m, k, n);
}

}  // namespace hme::kernels
