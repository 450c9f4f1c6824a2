// Compiled with -mavx2 -mfma; only reached after a runtime CPU check.

#include <immintrin.h>

#include <cmath>

#include "kernels_internal.hpp"

namespace gs1mc::kernels::detail {
namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

inline __m256d vabs(__m256d x) { return _mm256_andnot_pd(_mm256_set1_pd(-0.0), x); }

// exp(x) for x <= 0. Arguments below -708 are clamped (result ~1e-308, never subnormal).
inline __m256d exp_nonpos(__m256d x) {
  x = _mm256_max_pd(x, _mm256_set1_pd(-708.0));
  const __m256d n = _mm256_round_pd(_mm256_mul_pd(x, _mm256_set1_pd(1.4426950408889634)),
                                    _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_fnmadd_pd(n, _mm256_set1_pd(6.93145751953125e-1), x);
  r = _mm256_fnmadd_pd(n, _mm256_set1_pd(1.42860682030941723212e-6), r);

  // Taylor series to degree 13; |r| <= ln(2)/2 keeps the truncation below 2e-17.
  __m256d p = _mm256_set1_pd(1.0 / 6227020800.0);
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 479001600.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 39916800.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 3628800.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 362880.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 40320.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 5040.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 720.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 120.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 24.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 6.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(0.5));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0));

  const __m128i n32 = _mm256_cvtpd_epi32(n);
  __m256i bits = _mm256_add_epi64(_mm256_cvtepi32_epi64(n32), _mm256_set1_epi64x(1023));
  bits = _mm256_slli_epi64(bits, 52);
  return _mm256_mul_pd(p, _mm256_castsi256_pd(bits));
}

// log(1 + e) for e in [0, 1] via 2*atanh(e / (2 + e)); no cancellation for small e.
inline __m256d log1p_unit(__m256d e) {
  const __m256d s = _mm256_div_pd(e, _mm256_add_pd(_mm256_set1_pd(2.0), e));
  const __m256d s2 = _mm256_mul_pd(s, s);
  __m256d p = _mm256_set1_pd(1.0 / 35.0);
  for (int k = 16; k >= 0; --k) p = _mm256_fmadd_pd(p, s2, _mm256_set1_pd(1.0 / (2.0 * k + 1.0)));
  return _mm256_mul_pd(_mm256_add_pd(s, s), p);
}

inline double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

inline double sigmoid1(double z) {
  const double e = std::exp(-std::abs(z));
  return z >= 0.0 ? 1.0 / (1.0 + e) : e / (1.0 + e);
}

double masked_logistic(const double* m, const double* pos, const double* neg, double* grad,
                       std::size_t n) {
  const __m256d zero = _mm256_setzero_pd();
  const __m256d one = _mm256_set1_pd(1.0);
  __m256d acc = zero;
  std::size_t e = 0;
  for (; e + 4 <= n; e += 4) {
    const __m256d mv = _mm256_loadu_pd(m + e);
    const __m256d pv = _mm256_loadu_pd(pos + e);
    const __m256d nv = _mm256_loadu_pd(neg + e);
    const __m256d ex = exp_nonpos(_mm256_sub_pd(zero, vabs(mv)));
    const __m256d l1p = log1p_unit(ex);
    const __m256d sp_neg = _mm256_add_pd(_mm256_max_pd(_mm256_sub_pd(zero, mv), zero), l1p);
    const __m256d sp_pos = _mm256_add_pd(_mm256_max_pd(mv, zero), l1p);
    acc = _mm256_fmadd_pd(pv, sp_neg, acc);
    acc = _mm256_fmadd_pd(nv, sp_pos, acc);
    if (grad) {
      const __m256d d = _mm256_add_pd(one, ex);
      const __m256d nonneg = _mm256_cmp_pd(mv, zero, _CMP_GE_OQ);
      const __m256d f = _mm256_div_pd(_mm256_blendv_pd(ex, one, nonneg), d);
      const __m256d g = _mm256_fmadd_pd(pv, _mm256_sub_pd(f, one), _mm256_mul_pd(nv, f));
      _mm256_storeu_pd(grad + e, g);
    }
  }
  double loss = hsum(acc);
  for (; e < n; ++e) {
    if (pos[e] != 0.0) loss += pos[e] * softplus(-m[e]);
    if (neg[e] != 0.0) loss += neg[e] * softplus(m[e]);
    if (grad) {
      const double f = sigmoid1(m[e]);
      grad[e] = pos[e] * (f - 1.0) + neg[e] * f;
    }
  }
  return loss;
}

void sigmoid(const double* z, double* out, std::size_t n) {
  const __m256d zero = _mm256_setzero_pd();
  const __m256d one = _mm256_set1_pd(1.0);
  std::size_t e = 0;
  for (; e + 4 <= n; e += 4) {
    const __m256d zv = _mm256_loadu_pd(z + e);
    const __m256d ex = exp_nonpos(_mm256_sub_pd(zero, vabs(zv)));
    const __m256d nonneg = _mm256_cmp_pd(zv, zero, _CMP_GE_OQ);
    _mm256_storeu_pd(out + e,
                     _mm256_div_pd(_mm256_blendv_pd(ex, one, nonneg), _mm256_add_pd(one, ex)));
  }
  for (; e < n; ++e) out[e] = sigmoid1(z[e]);
}

double dot(const double* x, const double* y, std::size_t n) {
  __m256d a0 = _mm256_setzero_pd();
  __m256d a1 = _mm256_setzero_pd();
  std::size_t e = 0;
  for (; e + 8 <= n; e += 8) {
    a0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + e), _mm256_loadu_pd(y + e), a0);
    a1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + e + 4), _mm256_loadu_pd(y + e + 4), a1);
  }
  if (e + 4 <= n) {
    a0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + e), _mm256_loadu_pd(y + e), a0);
    e += 4;
  }
  double s = hsum(_mm256_add_pd(a0, a1));
  for (; e < n; ++e) s += x[e] * y[e];
  return s;
}

void axpy(double a, const double* x, double* y, std::size_t n) {
  const __m256d av = _mm256_set1_pd(a);
  std::size_t e = 0;
  for (; e + 4 <= n; e += 4)
    _mm256_storeu_pd(y + e, _mm256_fmadd_pd(av, _mm256_loadu_pd(x + e), _mm256_loadu_pd(y + e)));
  for (; e < n; ++e) y[e] += a * x[e];
}

}  // namespace

const KernelTable& avx2_impl() noexcept {
  static const KernelTable table{"avx2", masked_logistic, sigmoid, dot, axpy};
  return table;
}

}  // namespace gs1mc::kernels::detail
