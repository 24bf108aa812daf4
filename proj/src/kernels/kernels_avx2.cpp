// AVX2/FMA variants of the energy kernels. Compiled with -mavx2 -mfma and only
// entered after a runtime CPUID check (see dispatch.cpp).

#include <immintrin.h>

#include <cfloat>
#include <cmath>
#include <cstdint>

#include "plap/kernels.hpp"

namespace plap::kernels::avx2 {

namespace {

constexpr double kLn2Hi = 6.93147180369123816490e-01;
constexpr double kLn2Lo = 1.90821492927058770002e-10;
constexpr double kLog2e = 1.44269504088896338700e+00;
constexpr double kSqrt2 = 1.41421356237309504880e+00;
// Outside this window the exponent no longer maps onto a normal double.
constexpr double kExpMin = -708.0;
constexpr double kExpMax = 709.0;

inline __m256d abs_pd(__m256d x) { return _mm256_andnot_pd(_mm256_set1_pd(-0.0), x); }

inline __m256d copysign_pd(__m256d mag, __m256d sign) {
  const __m256d m = _mm256_set1_pd(-0.0);
  return _mm256_or_pd(_mm256_andnot_pd(m, mag), _mm256_and_pd(m, sign));
}

// Natural log for positive normal lanes. The mantissa is folded into
// [sqrt(1/2), sqrt(2)] and log(m) = 2 atanh((m-1)/(m+1)) is summed as a
// degree-11 series in z^2, |z| <= 0.1716.
inline __m256d vlog(__m256d x) {
  const __m256i bits = _mm256_castpd_si256(x);
  const __m256i two52_bits = _mm256_set1_epi64x(0x4330000000000000LL);
  const __m256d two52 = _mm256_set1_pd(4503599627370496.0);
  const __m256i biased = _mm256_srli_epi64(bits, 52);
  __m256d e = _mm256_sub_pd(_mm256_castsi256_pd(_mm256_or_si256(biased, two52_bits)), two52);
  e = _mm256_sub_pd(e, _mm256_set1_pd(1023.0));

  const __m256i mant_mask = _mm256_set1_epi64x(0x000FFFFFFFFFFFFFLL);
  const __m256i one_bits = _mm256_set1_epi64x(0x3FF0000000000000LL);
  __m256d m = _mm256_castsi256_pd(_mm256_or_si256(_mm256_and_si256(bits, mant_mask), one_bits));
  const __m256d big = _mm256_cmp_pd(m, _mm256_set1_pd(kSqrt2), _CMP_GT_OQ);
  m = _mm256_blendv_pd(m, _mm256_mul_pd(m, _mm256_set1_pd(0.5)), big);
  e = _mm256_blendv_pd(e, _mm256_add_pd(e, _mm256_set1_pd(1.0)), big);

  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d z = _mm256_div_pd(_mm256_sub_pd(m, one), _mm256_add_pd(m, one));
  const __m256d z2 = _mm256_mul_pd(z, z);
  __m256d s = _mm256_set1_pd(1.0 / 23.0);
  s = _mm256_fmadd_pd(s, z2, _mm256_set1_pd(1.0 / 21.0));
  s = _mm256_fmadd_pd(s, z2, _mm256_set1_pd(1.0 / 19.0));
  s = _mm256_fmadd_pd(s, z2, _mm256_set1_pd(1.0 / 17.0));
  s = _mm256_fmadd_pd(s, z2, _mm256_set1_pd(1.0 / 15.0));
  s = _mm256_fmadd_pd(s, z2, _mm256_set1_pd(1.0 / 13.0));
  s = _mm256_fmadd_pd(s, z2, _mm256_set1_pd(1.0 / 11.0));
  s = _mm256_fmadd_pd(s, z2, _mm256_set1_pd(1.0 / 9.0));
  s = _mm256_fmadd_pd(s, z2, _mm256_set1_pd(1.0 / 7.0));
  s = _mm256_fmadd_pd(s, z2, _mm256_set1_pd(1.0 / 5.0));
  s = _mm256_fmadd_pd(s, z2, _mm256_set1_pd(1.0 / 3.0));
  // log m = 2 (z + z^3 s), leading term kept separate for accuracy.
  const __m256d tail = _mm256_mul_pd(_mm256_mul_pd(z, z2), s);
  const __m256d two = _mm256_set1_pd(2.0);
  const __m256d logm = _mm256_mul_pd(two, _mm256_add_pd(z, tail));
  return _mm256_fmadd_pd(e, _mm256_set1_pd(kLn2Hi),
                         _mm256_fmadd_pd(e, _mm256_set1_pd(kLn2Lo), logm));
}

// exp for lanes in [kExpMin, kExpMax]; Taylor polynomial of degree 14 on
// |r| <= ln2/2 followed by exact scaling with 2^n.
inline __m256d vexp(__m256d y) {
  const __m256d n = _mm256_round_pd(_mm256_mul_pd(y, _mm256_set1_pd(kLog2e)),
                                    _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_fnmadd_pd(n, _mm256_set1_pd(kLn2Hi), y);
  r = _mm256_fnmadd_pd(n, _mm256_set1_pd(kLn2Lo), r);

  static constexpr double kInvFact[15] = {1.0,
                                          1.0,
                                          1.0 / 2.0,
                                          1.0 / 6.0,
                                          1.0 / 24.0,
                                          1.0 / 120.0,
                                          1.0 / 720.0,
                                          1.0 / 5040.0,
                                          1.0 / 40320.0,
                                          1.0 / 362880.0,
                                          1.0 / 3628800.0,
                                          1.0 / 39916800.0,
                                          1.0 / 479001600.0,
                                          1.0 / 6227020800.0,
                                          1.0 / 87178291200.0};
  __m256d p = _mm256_set1_pd(kInvFact[14]);
  for (int k = 13; k >= 0; --k) p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(kInvFact[k]));

  const __m256d magic = _mm256_set1_pd(6755399441055744.0);  // 1.5 * 2^52
  const __m256i ni = _mm256_sub_epi64(_mm256_castpd_si256(_mm256_add_pd(n, magic)),
                                      _mm256_castpd_si256(magic));
  const __m256i scale_bits = _mm256_slli_epi64(_mm256_add_epi64(ni, _mm256_set1_epi64x(1023)), 52);
  return _mm256_mul_pd(p, _mm256_castsi256_pd(scale_bits));
}

// Per-element references used for lanes the vector path cannot represent.
inline double abs_pow_m1(double ax, double q) {
  if (ax == 0.0) return 0.0;
  return std::pow(ax, q - 1.0);
}

enum class Mode { Q15, Q2, Q3, Q4, General };

inline Mode mode_for(double q) {
  if (q == 1.5) return Mode::Q15;
  if (q == 2.0) return Mode::Q2;
  if (q == 3.0) return Mode::Q3;
  if (q == 4.0) return Mode::Q4;
  return Mode::General;
}

// Computes ax^k for ax >= 0 in four lanes. Returns false if any lane falls
// outside the vector path's domain; the caller then takes the scalar route.
inline bool vpow_nonneg(__m256d ax, double k, __m256d& out) {
  const __m256d zero = _mm256_setzero_pd();
  const __m256d is_zero = _mm256_cmp_pd(ax, zero, _CMP_EQ_OQ);
  const __m256d tiny = _mm256_cmp_pd(ax, _mm256_set1_pd(DBL_MIN), _CMP_LT_OQ);
  // Denormal inputs (tiny but nonzero) are not handled by the exponent split.
  if (_mm256_movemask_pd(_mm256_andnot_pd(is_zero, tiny)) != 0) return false;
  const __m256d safe = _mm256_blendv_pd(ax, _mm256_set1_pd(1.0), is_zero);
  const __m256d y = _mm256_mul_pd(_mm256_set1_pd(k), vlog(safe));
  const __m256d out_of_range =
      _mm256_or_pd(_mm256_cmp_pd(y, _mm256_set1_pd(kExpMin), _CMP_LT_OQ),
                   _mm256_cmp_pd(y, _mm256_set1_pd(kExpMax), _CMP_GT_OQ));
  if (_mm256_movemask_pd(out_of_range) != 0) return false;
  out = _mm256_blendv_pd(vexp(y), zero, is_zero);
  return true;
}

inline double hsum(__m256d v) {
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, v);
  return ((lanes[0] + lanes[1]) + lanes[2]) + lanes[3];
}

// |x|^(q-1) in four lanes; false requests the scalar fallback.
inline bool abs_pow_m1_vec(Mode mode, __m256d ax, double q, __m256d& out) {
  switch (mode) {
    case Mode::Q15: out = _mm256_sqrt_pd(ax); return true;
    case Mode::Q2: out = ax; return true;
    case Mode::Q3: out = _mm256_mul_pd(ax, ax); return true;
    case Mode::Q4: out = _mm256_mul_pd(_mm256_mul_pd(ax, ax), ax); return true;
    case Mode::General: return vpow_nonneg(ax, q - 1.0, out);
  }
  return false;
}

}  // namespace

double power_sum(const double* x, const double* w, std::size_t n, double q) {
  const Mode mode = mode_for(q);
  __m256d acc = _mm256_setzero_pd();
  double tail = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d ax = abs_pd(_mm256_loadu_pd(x + i));
    const __m256d wv = _mm256_loadu_pd(w + i);
    __m256d v;
    bool ok = true;
    switch (mode) {
      case Mode::Q15: v = _mm256_mul_pd(ax, _mm256_sqrt_pd(ax)); break;
      case Mode::Q2: v = _mm256_mul_pd(ax, ax); break;
      case Mode::Q3: v = _mm256_mul_pd(_mm256_mul_pd(ax, ax), ax); break;
      case Mode::Q4: {
        const __m256d s = _mm256_mul_pd(ax, ax);
        v = _mm256_mul_pd(s, s);
        break;
      }
      case Mode::General: ok = vpow_nonneg(ax, q, v); break;
    }
    if (ok) {
      acc = _mm256_fmadd_pd(wv, v, acc);
    } else {
      for (std::size_t j = i; j < i + 4; ++j) {
        const double axj = std::fabs(x[j]);
        tail += w[j] * (axj == 0.0 ? 0.0 : std::pow(axj, q));
      }
    }
  }
  for (; i < n; ++i) tail += scalar::power_sum(x + i, w + i, 1, q);
  return hsum(acc) + tail;
}

double power_sum_grad(const double* x, const double* w, std::size_t n, double q, double scale,
                      double* grad) {
  const Mode mode = mode_for(q);
  const double qs = q * scale;
  const __m256d qsv = _mm256_set1_pd(qs);
  __m256d acc = _mm256_setzero_pd();
  double tail = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d xv = _mm256_loadu_pd(x + i);
    const __m256d ax = abs_pd(xv);
    const __m256d wv = _mm256_loadu_pd(w + i);
    __m256d m1;
    if (abs_pow_m1_vec(mode, ax, q, m1)) {
      acc = _mm256_fmadd_pd(wv, _mm256_mul_pd(m1, ax), acc);
      const __m256d g = _mm256_loadu_pd(grad + i);
      _mm256_storeu_pd(grad + i,
                       _mm256_fmadd_pd(_mm256_mul_pd(qsv, wv), copysign_pd(m1, xv), g));
    } else {
      for (std::size_t j = i; j < i + 4; ++j) {
        const double axj = std::fabs(x[j]);
        const double m1j = abs_pow_m1(axj, q);
        tail += w[j] * (m1j * axj);
        grad[j] += qs * w[j] * std::copysign(m1j, x[j]);
      }
    }
  }
  for (; i < n; ++i) tail += scalar::power_sum_grad(x + i, w + i, 1, q, scale, grad + i);
  return hsum(acc) + tail;
}

void power_pair(const double* t, std::size_t n, double e, double* value, double* factor) {
  if (e == 1.0 || e == 1.5 || e == 2.0) {
    // sqrt and products are exact-rounded in both paths; share the scalar code.
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
      const __m256d tv = _mm256_loadu_pd(t + i);
      __m256d f;
      if (e == 1.0) {
        f = _mm256_set1_pd(1.0);
        _mm256_storeu_pd(value + i, tv);
        _mm256_storeu_pd(factor + i, f);
        continue;
      }
      f = (e == 1.5) ? _mm256_sqrt_pd(tv) : tv;
      _mm256_storeu_pd(factor + i, f);
      _mm256_storeu_pd(value + i, _mm256_mul_pd(f, tv));
    }
    if (i < n) scalar::power_pair(t + i, n - i, e, value + i, factor + i);
    return;
  }
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d tv = _mm256_loadu_pd(t + i);
    __m256d f;
    if (vpow_nonneg(tv, e - 1.0, f)) {
      _mm256_storeu_pd(factor + i, f);
      _mm256_storeu_pd(value + i, _mm256_mul_pd(f, tv));
    } else {
      scalar::power_pair(t + i, 4, e, value + i, factor + i);
    }
  }
  if (i < n) scalar::power_pair(t + i, n - i, e, value + i, factor + i);
}

}  // namespace plap::kernels::avx2
