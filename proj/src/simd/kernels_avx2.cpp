#include "absorbd/simd/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#define ABSORBD_HAVE_X86 1
#include <immintrin.h>
#else
#define ABSORBD_HAVE_X86 0
#endif

namespace absorbd::simd::avx2 {

#if ABSORBD_HAVE_X86

bool supported() { return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma"); }

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  const std::size_t n = y.size();
  const __m256d a = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256d y0 = _mm256_loadu_pd(y.data() + i);
    __m256d y1 = _mm256_loadu_pd(y.data() + i + 4);
    y0 = _mm256_fmadd_pd(a, _mm256_loadu_pd(x.data() + i), y0);
    y1 = _mm256_fmadd_pd(a, _mm256_loadu_pd(x.data() + i + 4), y1);
    _mm256_storeu_pd(y.data() + i, y0);
    _mm256_storeu_pd(y.data() + i + 4, y1);
  }
  for (; i + 4 <= n; i += 4) {
    __m256d y0 = _mm256_loadu_pd(y.data() + i);
    _mm256_storeu_pd(y.data() + i, _mm256_fmadd_pd(a, _mm256_loadu_pd(x.data() + i), y0));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

double dot(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x.data() + i), _mm256_loadu_pd(y.data() + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(x.data() + i + 4), _mm256_loadu_pd(y.data() + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4)
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x.data() + i), _mm256_loadu_pd(y.data() + i), acc0);
  acc0 = _mm256_add_pd(acc0, acc1);
  __m128d lo = _mm256_castpd256_pd128(acc0);
  __m128d hi = _mm256_extractf128_pd(acc0, 1);
  lo = _mm_add_pd(lo, hi);
  double s = _mm_cvtsd_f64(lo) + _mm_cvtsd_f64(_mm_unpackhi_pd(lo, lo));
  for (; i < n; ++i) s += x[i] * y[i];
  return s;
}

void scale(double alpha, std::span<double> x) {
  const std::size_t n = x.size();
  const __m256d a = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) _mm256_storeu_pd(x.data() + i, _mm256_mul_pd(a, _mm256_loadu_pd(x.data() + i)));
  for (; i < n; ++i) x[i] *= alpha;
}

#else

bool supported() { return false; }
void axpy(double alpha, std::span<const double> x, std::span<double> y) { scalar::axpy(alpha, x, y); }
double dot(std::span<const double> x, std::span<const double> y) { return scalar::dot(x, y); }
void scale(double alpha, std::span<double> x) { scalar::scale(alpha, x); }

#endif

}  // namespace absorbd::simd::avx2
