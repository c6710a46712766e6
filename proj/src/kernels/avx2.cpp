// Copyright 2026 The acpinn Authors
// SPDX-License-Identifier: Apache-2.0

// Compiled with -mavx2 -mfma; only reached after a CPUID check.

#include "kernels_internal.hpp"

#include <immintrin.h>

#include <cmath>

namespace acpinn::kernels::avx2 {
namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

// C[rows x n] = op(A) * B where op(A)(i, p) = a[i * rs + p * cs].
// Column blocks outer so a k x 8 panel of B stays in L1 across row blocks.
void gemm_strided(std::size_t rows, std::size_t n, std::size_t inner,
                  const double* a, std::size_t rs, std::size_t cs,
                  const double* b, std::size_t ldb, double* c,
                  std::size_t ldc) {
  const std::size_t n8 = n - n % 8;
  const std::size_t r4 = rows - rows % 4;
  for (std::size_t j = 0; j < n8; j += 8) {
    std::size_t i = 0;
    for (; i < r4; i += 4) {
      __m256d c00 = _mm256_setzero_pd(), c01 = _mm256_setzero_pd();
      __m256d c10 = _mm256_setzero_pd(), c11 = _mm256_setzero_pd();
      __m256d c20 = _mm256_setzero_pd(), c21 = _mm256_setzero_pd();
      __m256d c30 = _mm256_setzero_pd(), c31 = _mm256_setzero_pd();
      const double* a0 = a + i * rs;
      const double* a1 = a0 + rs;
      const double* a2 = a1 + rs;
      const double* a3 = a2 + rs;
      for (std::size_t p = 0; p < inner; ++p) {
        const double* bp = b + p * ldb + j;
        const __m256d b0 = _mm256_loadu_pd(bp);
        const __m256d b1 = _mm256_loadu_pd(bp + 4);
        const std::size_t off = p * cs;
        __m256d av = _mm256_broadcast_sd(a0 + off);
        c00 = _mm256_fmadd_pd(av, b0, c00);
        c01 = _mm256_fmadd_pd(av, b1, c01);
        av = _mm256_broadcast_sd(a1 + off);
        c10 = _mm256_fmadd_pd(av, b0, c10);
        c11 = _mm256_fmadd_pd(av, b1, c11);
        av = _mm256_broadcast_sd(a2 + off);
        c20 = _mm256_fmadd_pd(av, b0, c20);
        c21 = _mm256_fmadd_pd(av, b1, c21);
        av = _mm256_broadcast_sd(a3 + off);
        c30 = _mm256_fmadd_pd(av, b0, c30);
        c31 = _mm256_fmadd_pd(av, b1, c31);
      }
      double* cp = c + i * ldc + j;
      _mm256_storeu_pd(cp, c00);
      _mm256_storeu_pd(cp + 4, c01);
      _mm256_storeu_pd(cp + ldc, c10);
      _mm256_storeu_pd(cp + ldc + 4, c11);
      _mm256_storeu_pd(cp + 2 * ldc, c20);
      _mm256_storeu_pd(cp + 2 * ldc + 4, c21);
      _mm256_storeu_pd(cp + 3 * ldc, c30);
      _mm256_storeu_pd(cp + 3 * ldc + 4, c31);
    }
    for (; i < rows; ++i) {
      __m256d c0 = _mm256_setzero_pd(), c1 = _mm256_setzero_pd();
      const double* ai = a + i * rs;
      for (std::size_t p = 0; p < inner; ++p) {
        const double* bp = b + p * ldb + j;
        const __m256d av = _mm256_broadcast_sd(ai + p * cs);
        c0 = _mm256_fmadd_pd(av, _mm256_loadu_pd(bp), c0);
        c1 = _mm256_fmadd_pd(av, _mm256_loadu_pd(bp + 4), c1);
      }
      _mm256_storeu_pd(c + i * ldc + j, c0);
      _mm256_storeu_pd(c + i * ldc + j + 4, c1);
    }
  }
  if (n8 == n) return;
  // Ragged right edge.
  for (std::size_t i = 0; i < rows; ++i) {
    double* crow = c + i * ldc;
    for (std::size_t j = n8; j < n; ++j) crow[j] = 0.0;
    const double* ai = a + i * rs;
    for (std::size_t p = 0; p < inner; ++p) {
      const double aip = ai[p * cs];
      const double* brow = b + p * ldb;
      for (std::size_t j = n8; j < n; ++j) crow[j] = std::fma(aip, brow[j], crow[j]);
    }
  }
}

inline __m256d polevl2(__m256d x, double c0, double c1, double c2) {
  return _mm256_fmadd_pd(_mm256_fmadd_pd(_mm256_set1_pd(c0), x, _mm256_set1_pd(c1)), x,
                         _mm256_set1_pd(c2));
}

// Cephes-style exp for arguments in [0, 41].
inline __m256d exp_bounded(__m256d x) {
  const __m256d log2e = _mm256_set1_pd(1.4426950408889634073599);
  const __m256d fx = _mm256_round_pd(_mm256_mul_pd(x, log2e),
                                     _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  x = _mm256_fnmadd_pd(fx, _mm256_set1_pd(6.93145751953125e-1), x);
  x = _mm256_fnmadd_pd(fx, _mm256_set1_pd(1.42860682030941723212e-6), x);
  const __m256d xx = _mm256_mul_pd(x, x);
  const __m256d px = _mm256_mul_pd(
      x, polevl2(xx, 1.26177193074810590878e-4, 3.02994407707441961300e-2,
                 9.99999999999999999910e-1));
  const __m256d qx = _mm256_fmadd_pd(
      polevl2(xx, 3.00198505138664455042e-6, 2.52448340349684104192e-3,
              2.27265548208155028766e-1),
      xx, _mm256_set1_pd(2.00000000000000000009e0));
  __m256d r = _mm256_div_pd(px, _mm256_sub_pd(qx, px));
  r = _mm256_fmadd_pd(_mm256_set1_pd(2.0), r, _mm256_set1_pd(1.0));
  const __m128i n32 = _mm256_cvtpd_epi32(fx);
  __m256i n64 = _mm256_cvtepi32_epi64(n32);
  n64 = _mm256_slli_epi64(_mm256_add_epi64(n64, _mm256_set1_epi64x(1023)), 52);
  return _mm256_mul_pd(r, _mm256_castsi256_pd(n64));
}

inline __m256d tanh4(__m256d x) {
  const __m256d sign_mask = _mm256_set1_pd(-0.0);
  const __m256d ax = _mm256_min_pd(_mm256_andnot_pd(sign_mask, x), _mm256_set1_pd(20.0));
  const __m256d sign = _mm256_and_pd(sign_mask, x);

  // |x| >= 0.625: 1 - 2 / (exp(2|x|) + 1)
  const __m256d e = exp_bounded(_mm256_add_pd(ax, ax));
  const __m256d big = _mm256_sub_pd(
      _mm256_set1_pd(1.0), _mm256_div_pd(_mm256_set1_pd(2.0), _mm256_add_pd(e, _mm256_set1_pd(1.0))));

  // |x| < 0.625: rational approximation
  const __m256d z = _mm256_mul_pd(ax, ax);
  const __m256d p = polevl2(z, -9.64399179425052238628e-1, -9.92877231001918586564e1,
                            -1.61468768441708447952e3);
  const __m256d q = _mm256_add_pd(
      _mm256_mul_pd(
          _mm256_add_pd(_mm256_mul_pd(_mm256_add_pd(z, _mm256_set1_pd(1.12811678491632931402e2)), z),
                        _mm256_set1_pd(2.23548839060100448583e3)),
          z),
      _mm256_set1_pd(4.84406305325125486048e3));
  const __m256d small = _mm256_fmadd_pd(_mm256_mul_pd(ax, z), _mm256_div_pd(p, q), ax);

  const __m256d use_small = _mm256_cmp_pd(ax, _mm256_set1_pd(0.625), _CMP_LT_OQ);
  __m256d r = _mm256_or_pd(_mm256_blendv_pd(big, small, use_small), sign);
  const __m256d nan = _mm256_cmp_pd(x, x, _CMP_UNORD_Q);
  return _mm256_blendv_pd(r, x, nan);
}

}  // namespace

void gemm_nn(std::size_t m, std::size_t n, std::size_t k, const double* a,
             std::size_t lda, const double* b, std::size_t ldb, double* c,
             std::size_t ldc) {
  gemm_strided(m, n, k, a, lda, 1, b, ldb, c, ldc);
}

void gemm_tn(std::size_t m, std::size_t n, std::size_t k, const double* a,
             std::size_t lda, const double* b, std::size_t ldb, double* c,
             std::size_t ldc) {
  gemm_strided(k, n, m, a, 1, lda, b, ldb, c, ldc);
}

void gemm_nt_acc(std::size_t m, std::size_t n, std::size_t k, const double* a,
                 std::size_t lda, const double* b, std::size_t ldb, double* c,
                 std::size_t ldc) {
  const std::size_t n4 = n - n % 4;
  const std::size_t m2 = m - m % 2;
  const std::size_t k4 = k - k % 4;
  std::size_t i = 0;
  for (; i < m2; i += 2) {
    const double* a0 = a + i * lda;
    const double* a1 = a0 + lda;
    std::size_t j = 0;
    for (; j < k4; j += 4) {
      const double* b0 = b + j * ldb;
      const double* b1 = b0 + ldb;
      const double* b2 = b1 + ldb;
      const double* b3 = b2 + ldb;
      __m256d s00 = _mm256_setzero_pd(), s01 = _mm256_setzero_pd();
      __m256d s02 = _mm256_setzero_pd(), s03 = _mm256_setzero_pd();
      __m256d s10 = _mm256_setzero_pd(), s11 = _mm256_setzero_pd();
      __m256d s12 = _mm256_setzero_pd(), s13 = _mm256_setzero_pd();
      for (std::size_t p = 0; p < n4; p += 4) {
        const __m256d x0 = _mm256_loadu_pd(a0 + p);
        const __m256d x1 = _mm256_loadu_pd(a1 + p);
        __m256d y = _mm256_loadu_pd(b0 + p);
        s00 = _mm256_fmadd_pd(x0, y, s00);
        s10 = _mm256_fmadd_pd(x1, y, s10);
        y = _mm256_loadu_pd(b1 + p);
        s01 = _mm256_fmadd_pd(x0, y, s01);
        s11 = _mm256_fmadd_pd(x1, y, s11);
        y = _mm256_loadu_pd(b2 + p);
        s02 = _mm256_fmadd_pd(x0, y, s02);
        s12 = _mm256_fmadd_pd(x1, y, s12);
        y = _mm256_loadu_pd(b3 + p);
        s03 = _mm256_fmadd_pd(x0, y, s03);
        s13 = _mm256_fmadd_pd(x1, y, s13);
      }
      double t[2][4] = {{hsum(s00), hsum(s01), hsum(s02), hsum(s03)},
                        {hsum(s10), hsum(s11), hsum(s12), hsum(s13)}};
      for (std::size_t p = n4; p < n; ++p) {
        for (int q = 0; q < 4; ++q) {
          t[0][q] = std::fma(a0[p], b[(j + q) * ldb + p], t[0][q]);
          t[1][q] = std::fma(a1[p], b[(j + q) * ldb + p], t[1][q]);
        }
      }
      for (int q = 0; q < 4; ++q) {
        c[i * ldc + j + q] += t[0][q];
        c[(i + 1) * ldc + j + q] += t[1][q];
      }
    }
    for (; j < k; ++j) {
      c[i * ldc + j] += dot(a0, b + j * ldb, n);
      c[(i + 1) * ldc + j] += dot(a1, b + j * ldb, n);
    }
  }
  for (; i < m; ++i) {
    for (std::size_t j = 0; j < k; ++j) c[i * ldc + j] += dot(a + i * lda, b + j * ldb, n);
  }
}

void tanh(const double* x, double* y, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) _mm256_storeu_pd(y + i, tanh4(_mm256_loadu_pd(x + i)));
  if (i < n) {
    double buf[4] = {0.0, 0.0, 0.0, 0.0};
    for (std::size_t r = i; r < n; ++r) buf[r - i] = x[r];
    _mm256_storeu_pd(buf, tanh4(_mm256_loadu_pd(buf)));
    for (std::size_t r = i; r < n; ++r) y[r] = buf[r - i];
  }
}

double dot(const double* x, const double* y, std::size_t n) {
  __m256d s0 = _mm256_setzero_pd(), s1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    s0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), s0);
    s1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), s1);
  }
  double s = hsum(_mm256_add_pd(s0, s1));
  for (; i < n; ++i) s = std::fma(x[i], y[i], s);
  return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d av = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  for (; i < n; ++i) y[i] = std::fma(alpha, x[i], y[i]);
}

}  // namespace acpinn::kernels::avx2
