#include "hme/kernels/kernels.hpp"

namespace hme::kernels {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void add_scalar(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] + b[i];
}

void mul_scalar(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

void gemm_nn_scalar(const double* A, const double* B, double* C, std::size_t m,
                    std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t p = 0; p < k; ++p) axpy_scalar(A[i * k + p], B + p * n, C + i * n, n);
}

void gemm_nt_scalar(const double* A, const double* B, double* C, std::size_t m,
                    std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) C[i * n + j] += dot_scalar(A + i * k, B + j * k, k);
}

void gemm_tn_scalar(const double* A, const double* B, double* C, std::size_t m,
                    std::size_t k, std::size_t n) {
  for (std::size_t p = 0; p < k; ++p)
    for (std::size_t i = 0; i < m; ++i) axpy_scalar(A[p * m + i], B + p * n, C + i * n, n);
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable table{dot_scalar,     axpy_scalar,    add_scalar,    mul_scalar,
                                 gemm_nn_scalar, gemm_nt_scalar, gemm_tn_scalar};
  return table;
}

}  // namespace hme::kernels
