// Compiled with -mavx2 -mfma. Only reached after a runtime CPUID check.
#include "hme/kernels/kernels.hpp"

#if defined(__x86_64__) && defined(__AVX2__) && defined(__FMA__)
#include <immintrin.h>

#include <vector>

namespace hme::kernels {
namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d swapped = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, swapped));
}

inline double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4)
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

inline void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void add_avx2(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  for (; i < n; ++i) out[i] = a[i] + b[i];
}

void mul_avx2(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  for (; i < n; ++i) out[i] = a[i] * b[i];
}

// C[m x n] += op(A) B with B row-major [k x n]; element (i, p) of op(A) sits
// at A[i * rs + p * cs]. Register-blocked over 4 rows and 8 columns.
void gemm_strided(const double* A, std::size_t rs, std::size_t cs, const double* B, double* C,
                  std::size_t m, std::size_t k, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= m; i += 4) {
    const double* a0 = A + i * rs;
    const double* a1 = a0 + rs;
    const double* a2 = a1 + rs;
    const double* a3 = a2 + rs;
    std::size_t j = 0;
    for (; j + 8 <= n; j += 8) {
      __m256d c00 = _mm256_setzero_pd(), c01 = _mm256_setzero_pd();
      __m256d c10 = _mm256_setzero_pd(), c11 = _mm256_setzero_pd();
      __m256d c20 = _mm256_setzero_pd(), c21 = _mm256_setzero_pd();
      __m256d c30 = _mm256_setzero_pd(), c31 = _mm256_setzero_pd();
      for (std::size_t p = 0; p < k; ++p) {
        const __m256d b0 = _mm256_loadu_pd(B + p * n + j);
        const __m256d b1 = _mm256_loadu_pd(B + p * n + j + 4);
        __m256d a = _mm256_broadcast_sd(a0 + p * cs);
        c00 = _mm256_fmadd_pd(a, b0, c00);
        c01 = _mm256_fmadd_pd(a, b1, c01);
        a = _mm256_broadcast_sd(a1 + p * cs);
        c10 = _mm256_fmadd_pd(a, b0, c10);
        c11 = _mm256_fmadd_pd(a, b1, c11);
        a = _mm256_broadcast_sd(a2 + p * cs);
        c20 = _mm256_fmadd_pd(a, b0, c20);
        c21 = _mm256_fmadd_pd(a, b1, c21);
        a = _mm256_broadcast_sd(a3 + p * cs);
        c30 = _mm256_fmadd_pd(a, b0, c30);
        c31 = _mm256_fmadd_pd(a, b1, c31);
      }
      double* r0 = C + i * n + j;
      _mm256_storeu_pd(r0, _mm256_add_pd(_mm256_loadu_pd(r0), c00));
      _mm256_storeu_pd(r0 + 4, _mm256_add_pd(_mm256_loadu_pd(r0 + 4), c01));
      double* r1 = r0 + n;
      _mm256_storeu_pd(r1, _mm256_add_pd(_mm256_loadu_pd(r1), c10));
      _mm256_storeu_pd(r1 + 4, _mm256_add_pd(_mm256_loadu_pd(r1 + 4), c11));
      double* r2 = r1 + n;
      _mm256_storeu_pd(r2, _mm256_add_pd(_mm256_loadu_pd(r2), c20));
      _mm256_storeu_pd(r2 + 4, _mm256_add_pd(_mm256_loadu_pd(r2 + 4), c21));
      double* r3 = r2 + n;
      _mm256_storeu_pd(r3, _mm256_add_pd(_mm256_loadu_pd(r3), c30));
      _mm256_storeu_pd(r3 + 4, _mm256_add_pd(_mm256_loadu_pd(r3 + 4), c31));
    }
    for (; j < n; ++j)
      for (std::size_t r = 0; r < 4; ++r) {
        const double* a = A + (i + r) * rs;
        double s = 0.0;
        for (std::size_t p = 0; p < k; ++p) s += a[p * cs] * B[p * n + j];
        C[(i + r) * n + j] += s;
      }
  }
  for (; i < m; ++i)
    for (std::size_t p = 0; p < k; ++p) axpy_avx2(A[i * rs + p * cs], B + p * n, C + i * n, n);
}

void gemm_nn_avx2(const double* A, const double* B, double* C, std::size_t m, std::size_t k,
                  std::size_t n) {
  gemm_strided(A, k, 1, B, C, m, k, n);
}

void gemm_nt_avx2(const double* A, const double* B, double* C, std::size_t m, std::size_t k,
                  std::size_t n) {
  if (m < 4 || n < 8) {
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) C[i * n + j] += dot_avx2(A + i * k, B + j * k, k);
    return;
  }
  thread_local std::vector<double> bt;
  bt.resize(k * n);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t p = 0; p < k; ++p) bt[p * n + j] = B[j * k + p];
  gemm_strided(A, k, 1, bt.data(), C, m, k, n);
}

void gemm_tn_avx2(const double* A, const double* B, double* C, std::size_t m, std::size_t k,
                  std::size_t n) {
  gemm_strided(A, 1, m, B, C, m, k, n);
}

double dot_entry(const double* a, const double* b, std::size_t n) { return dot_avx2(a, b, n); }
void axpy_entry(double alpha, const double* x, double* y, std::size_t n) {
  axpy_avx2(alpha, x, y, n);
}

}  // namespace

const KernelTable* avx2_table() {
  static const KernelTable table{dot_entry,    axpy_entry,   add_avx2,    mul_avx2,
                                 gemm_nn_avx2, gemm_nt_avx2, gemm_tn_avx2};
  return &table;
}

}  // namespace hme::kernels

#else

namespace hme::kernels {
const KernelTable* avx2_table() { return nullptr; }
}  // namespace hme::kernels

#endif
