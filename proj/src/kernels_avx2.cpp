// AVX2/FMA variants of the field kernels. Compiled with -mavx2 -mfma on
// x86-64 only; the dispatcher checks CPU support at runtime.

#include "poplab/kernels.hpp"

#if defined(__x86_64__)

#include <immintrin.h>

#include <cmath>

namespace poplab::kernels {
namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(lo, _mm_unpackhi_pd(lo, lo)));
}

double k_sum(const double* x, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
  double s = hsum(acc);
  for (; i < n; ++i) s += x[i];
  return s;
}

double k_dot(const double* x, const double* y, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc);
  double s = hsum(acc);
  for (; i < n; ++i) s += x[i] * y[i];
  return s;
}

double k_wdot(const double* w, const double* x, const double* y,
              std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d xy = _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i));
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(w + i), xy, acc);
  }
  double s = hsum(acc);
  for (; i < n; ++i) s += w[i] * x[i] * y[i];
  return s;
}

double k_wsum3(const double* w, const double* x, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d xv = _mm256_loadu_pd(x + i);
    __m256d x3 = _mm256_mul_pd(_mm256_mul_pd(xv, xv), xv);
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(w + i), x3, acc);
  }
  double s = hsum(acc);
  for (; i < n; ++i) s += w[i] * x[i] * x[i] * x[i];
  return s;
}

void k_axpy(double a, const double* x, double* y, std::size_t n) {
  const __m256d av = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d yv = _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i),
                                 _mm256_loadu_pd(y + i));
    _mm256_storeu_pd(y + i, yv);
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

double k_max_abs(const double* x, std::size_t n) {
  const __m256d mask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x7fffffffffffffffLL));
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    acc = _mm256_max_pd(acc, _mm256_and_pd(mask, _mm256_loadu_pd(x + i)));
  double m = 0.0;
  alignas(32) double tmp[4];
  _mm256_store_pd(tmp, acc);
  for (double v : tmp) m = std::max(m, v);
  for (; i < n; ++i) m = std::max(m, std::fabs(x[i]));
  return m;
}

double k_min(const double* x, std::size_t n) {
  double m = x[0];
  std::size_t i = 0;
  if (n >= 4) {
    __m256d acc = _mm256_loadu_pd(x);
    for (i = 4; i + 4 <= n; i += 4)
      acc = _mm256_min_pd(acc, _mm256_loadu_pd(x + i));
    alignas(32) double tmp[4];
    _mm256_store_pd(tmp, acc);
    m = tmp[0];
    for (int k = 1; k < 4; ++k) m = std::min(m, tmp[k]);
  }
  for (; i < n; ++i) m = std::min(m, x[i]);
  return m;
}

void k_lap1d(const double* u, double* out, std::size_t n, double inv_h2) {
  const __m256d c = _mm256_set1_pd(inv_h2);
  const __m256d two = _mm256_set1_pd(2.0);
  out[0] = 2.0 * (u[1] - u[0]) * inv_h2;
  std::size_t i = 1;
  for (; i + 4 <= n - 1; i += 4) {
    __m256d l = _mm256_loadu_pd(u + i - 1);
    __m256d m = _mm256_loadu_pd(u + i);
    __m256d r = _mm256_loadu_pd(u + i + 1);
    __m256d v = _mm256_add_pd(l, r);
    v = _mm256_fnmadd_pd(two, m, v);
    _mm256_storeu_pd(out + i, _mm256_mul_pd(v, c));
  }
  for (; i + 1 < n; ++i)
    out[i] = (u[i - 1] - 2.0 * u[i] + u[i + 1]) * inv_h2;
  out[n - 1] = 2.0 * (u[n - 2] - u[n - 1]) * inv_h2;
}

void k_lap2d(const double* u, double* out, std::size_t n, double inv_h2) {
  const __m256d c = _mm256_set1_pd(inv_h2);
  const __m256d four = _mm256_set1_pd(4.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double* up = u + ((i == 0) ? 1 : i - 1) * n;
    const double* dn = u + ((i == n - 1) ? n - 2 : i + 1) * n;
    const double* row = u + i * n;
    double* o = out + i * n;
    // j = 0 column (mirrored)
    o[0] = (up[0] + dn[0] + 2.0 * row[1] - 4.0 * row[0]) * inv_h2;
    std::size_t j = 1;
    for (; j + 4 <= n - 1; j += 4) {
      __m256d v = _mm256_add_pd(_mm256_loadu_pd(up + j), _mm256_loadu_pd(dn + j));
      v = _mm256_add_pd(v, _mm256_loadu_pd(row + j - 1));
      v = _mm256_add_pd(v, _mm256_loadu_pd(row + j + 1));
      v = _mm256_fnmadd_pd(four, _mm256_loadu_pd(row + j), v);
      _mm256_storeu_pd(o + j, _mm256_mul_pd(v, c));
    }
    for (; j + 1 < n; ++j)
      o[j] = (up[j] + dn[j] + row[j - 1] + row[j + 1] - 4.0 * row[j]) * inv_h2;
    o[n - 1] =
        (up[n - 1] + dn[n - 1] + 2.0 * row[n - 2] - 4.0 * row[n - 1]) * inv_h2;
  }
}

}  // namespace

const Table* avx2_table() {
  static const Table t = {"avx2",  k_sum,     k_dot, k_wdot, k_wsum3,
                          k_axpy,  k_max_abs, k_min, k_lap1d, k_lap2d};
  return &t;
}

}  // namespace poplab::kernels

#else

namespace poplab::kernels {
const Table* avx2_table() { return nullptr; }
}  // namespace poplab::kernels

#endif
