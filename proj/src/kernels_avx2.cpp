// AVX2 variants.  Compiled with -mavx2 for this translation unit only; the
// dispatcher guarantees these are never called on CPUs without AVX2 support.
//
// Reduction order must replicate the scalar reference exactly: four lanes of
// partial sums, combined as (lane0+lane2)+(lane1+lane3), scalar tail appended
// left to right.  Multiplies and adds stay separate instructions (no FMA).

#include "titan/kernels/kernels.hpp"

#include <immintrin.h>

#include <cmath>
#include <cstdint>

namespace titan::kernels::detail {

namespace {

inline double reduce4(__m256d acc) {
  const __m128d lo = _mm256_castpd256_pd128(acc);       // lanes 0,1
  const __m128d hi = _mm256_extractf128_pd(acc, 1);     // lanes 2,3
  const __m128d pair = _mm_add_pd(lo, hi);              // (s0+s2, s1+s3)
  const __m128d swapped = _mm_unpackhi_pd(pair, pair);
  return _mm_cvtsd_f64(pair) + _mm_cvtsd_f64(swapped);
}

double dot_avx2(const double* a, const double* b, int n) {
  __m256d acc = _mm256_setzero_pd();
  const int n4 = n & ~3;
  for (int i = 0; i < n4; i += 4) {
    const __m256d prod = _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc = _mm256_add_pd(acc, prod);
  }
  double s = reduce4(acc);
  for (int i = n4; i < n; ++i) s += a[i] * b[i];
  return s;
}

void affine_avx2(const double* w, const double* b, const double* x, double* y,
                 int rows, int cols) {
  for (int r = 0; r < rows; ++r) {
    const double acc = dot_avx2(w + static_cast<std::int64_t>(r) * cols, x, cols);
    y[r] = (b != nullptr) ? acc + b[r] : acc;
  }
}

void matvec_t_acc_avx2(const double* w, const double* dy, double* dx,
                       int rows, int cols) {
  const int n4 = cols & ~3;
  for (int r = 0; r < rows; ++r) {
    const double g = dy[r];
    const __m256d gv = _mm256_set1_pd(g);
    const double* row = w + static_cast<std::int64_t>(r) * cols;
    for (int c = 0; c < n4; c += 4) {
      const __m256d prod = _mm256_mul_pd(gv, _mm256_loadu_pd(row + c));
      _mm256_storeu_pd(dx + c, _mm256_add_pd(_mm256_loadu_pd(dx + c), prod));
    }
    for (int c = n4; c < cols; ++c) dx[c] += g * row[c];
  }
}

void ger_acc_avx2(double* dw, const double* dy, const double* x,
                  int rows, int cols) {
  const int n4 = cols & ~3;
  for (int r = 0; r < rows; ++r) {
    const double g = dy[r];
    const __m256d gv = _mm256_set1_pd(g);
    double* row = dw + static_cast<std::int64_t>(r) * cols;
    for (int c = 0; c < n4; c += 4) {
      const __m256d prod = _mm256_mul_pd(gv, _mm256_loadu_pd(x + c));
      _mm256_storeu_pd(row + c, _mm256_add_pd(_mm256_loadu_pd(row + c), prod));
    }
    for (int c = n4; c < cols; ++c) row[c] += g * x[c];
  }
}

void axpy_avx2(double a, const double* x, double* y, int n) {
  const __m256d av = _mm256_set1_pd(a);
  const int n4 = n & ~3;
  for (int i = 0; i < n4; i += 4) {
    const __m256d prod = _mm256_mul_pd(av, _mm256_loadu_pd(x + i));
    _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), prod));
  }
  for (int i = n4; i < n; ++i) y[i] += a * x[i];
}

void rmsprop_update_avx2(double* w, const double* g, double* ms, int n,
                         double lr, double alpha, double eps) {
  const __m256d alphav = _mm256_set1_pd(alpha);
  const __m256d omav = _mm256_set1_pd(1.0 - alpha);
  const __m256d lrv = _mm256_set1_pd(lr);
  const __m256d epsv = _mm256_set1_pd(eps);
  const int n4 = n & ~3;
  for (int i = 0; i < n4; i += 4) {
    const __m256d gi = _mm256_loadu_pd(g + i);
    const __m256d msv = _mm256_add_pd(_mm256_mul_pd(alphav, _mm256_loadu_pd(ms + i)),
                                      _mm256_mul_pd(omav, _mm256_mul_pd(gi, gi)));
    _mm256_storeu_pd(ms + i, msv);
    const __m256d denom = _mm256_add_pd(_mm256_sqrt_pd(msv), epsv);
    const __m256d delta = _mm256_div_pd(_mm256_mul_pd(lrv, gi), denom);
    _mm256_storeu_pd(w + i, _mm256_sub_pd(_mm256_loadu_pd(w + i), delta));
  }
  const double one_minus_alpha = 1.0 - alpha;
  for (int i = n4; i < n; ++i) {
    const double gi = g[i];
    ms[i] = alpha * ms[i] + one_minus_alpha * (gi * gi);
    w[i] -= (lr * gi) / (std::sqrt(ms[i]) + eps);
  }
}

}  // namespace

const Impl& avx2_impl() {
  static const Impl impl{affine_avx2, dot_avx2, matvec_t_acc_avx2,
                         ger_acc_avx2, axpy_avx2, rmsprop_update_avx2};
  return impl;
}

}  // namespace titan::kernels::detail
