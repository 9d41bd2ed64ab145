// kernels_avx2.cpp - AVX2+FMA cosine/phase product kernels, four time points per vector
//
// Compiled with -mavx2 -mfma; only reached after a runtime CPU check.
// sin/cos use a three-part Cody-Waite reduction by pi/2 followed by the fdlibm
// minimax polynomials on [-pi/4, pi/4]. Lanes whose argument exceeds the
// reduction range (or is not finite) fall back to libm for that vector.
#include "kernels_impl.h"

#include <immintrin.h>

#include <cmath>

namespace coh::simd::avx2 {

namespace {

// pi/2 split into 33-bit pieces so that k * piece is exact for |k| < 2^20.
constexpr double kPio2Hi = 1.57079632673412561417e+00;
constexpr double kPio2Mid = 6.07710050630396597660e-11;
constexpr double kPio2Lo = 2.02226624871116645580e-21;
constexpr double kTwoOverPi = 6.36619772367581382433e-01;
constexpr double kMaxReduced = 5.0e5;  // |x| below this keeps k < 2^19

constexpr double kS1 = -1.66666666666666324348e-01;
constexpr double kS2 = 8.33333333332248946124e-03;
constexpr double kS3 = -1.98412698298579493134e-04;
constexpr double kS4 = 2.75573137070700676789e-06;
constexpr double kS5 = -2.50507602534068634195e-08;
constexpr double kS6 = 1.58969099521155010221e-10;

constexpr double kC1 = 4.16666666666666019037e-02;
constexpr double kC2 = -1.38888888888741095749e-03;
constexpr double kC3 = 2.48015872894767294178e-05;
constexpr double kC4 = -2.75573143513906633035e-07;
constexpr double kC5 = 2.08757232129817482790e-09;
constexpr double kC6 = -1.13596475577881948265e-11;

inline __m256d splat(double v) { return _mm256_set1_pd(v); }

/// True if every lane satisfies |x| <= kMaxReduced (NaN fails the compare).
inline bool in_range(__m256d x) {
    const __m256d ax = _mm256_andnot_pd(splat(-0.0), x);
    return _mm256_movemask_pd(_mm256_cmp_pd(ax, splat(kMaxReduced), _CMP_LE_OQ)) == 0xF;
}

inline void sincos(__m256d x, __m256d& s_out, __m256d& c_out) {
    const __m256d k = _mm256_round_pd(_mm256_mul_pd(x, splat(kTwoOverPi)),
                                      _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
    __m256d r = _mm256_fnmadd_pd(k, splat(kPio2Hi), x);
    r = _mm256_fnmadd_pd(k, splat(kPio2Mid), r);
    r = _mm256_fnmadd_pd(k, splat(kPio2Lo), r);

    const __m256d z = _mm256_mul_pd(r, r);

    __m256d ps = _mm256_fmadd_pd(z, splat(kS6), splat(kS5));
    ps = _mm256_fmadd_pd(z, ps, splat(kS4));
    ps = _mm256_fmadd_pd(z, ps, splat(kS3));
    ps = _mm256_fmadd_pd(z, ps, splat(kS2));
    ps = _mm256_fmadd_pd(z, ps, splat(kS1));
    const __m256d sin_r = _mm256_fmadd_pd(_mm256_mul_pd(z, r), ps, r);

    __m256d pc = _mm256_fmadd_pd(z, splat(kC6), splat(kC5));
    pc = _mm256_fmadd_pd(z, pc, splat(kC4));
    pc = _mm256_fmadd_pd(z, pc, splat(kC3));
    pc = _mm256_fmadd_pd(z, pc, splat(kC2));
    pc = _mm256_fmadd_pd(z, pc, splat(kC1));
    // cos r = 1 - z/2 + z^2 * pc
    const __m256d cos_r = _mm256_fmadd_pd(_mm256_mul_pd(z, z), pc, _mm256_fnmadd_pd(splat(0.5), z, splat(1.0)));

    // quadrant q = k mod 4, as an exact small double
    const __m256d q = _mm256_sub_pd(k, _mm256_mul_pd(splat(4.0), _mm256_floor_pd(_mm256_mul_pd(k, splat(0.25)))));
    const __m256d odd = _mm256_or_pd(_mm256_cmp_pd(q, splat(1.0), _CMP_EQ_OQ), _mm256_cmp_pd(q, splat(3.0), _CMP_EQ_OQ));
    const __m256d cos_neg = _mm256_or_pd(_mm256_cmp_pd(q, splat(1.0), _CMP_EQ_OQ), _mm256_cmp_pd(q, splat(2.0), _CMP_EQ_OQ));
    const __m256d sin_neg = _mm256_cmp_pd(q, splat(2.0), _CMP_GE_OQ);
    const __m256d sign = splat(-0.0);

    const __m256d s = _mm256_blendv_pd(sin_r, cos_r, odd);
    const __m256d c = _mm256_blendv_pd(cos_r, sin_r, odd);
    s_out = _mm256_xor_pd(s, _mm256_and_pd(sin_neg, sign));
    c_out = _mm256_xor_pd(c, _mm256_and_pd(cos_neg, sign));
}

inline void sincos_libm(__m256d x, __m256d& s_out, __m256d& c_out) {
    alignas(32) double xs[4], ss[4], cs[4];
    _mm256_store_pd(xs, x);
    for (int j = 0; j < 4; ++j) {
        ss[j] = std::sin(xs[j]);
        cs[j] = std::cos(xs[j]);
    }
    s_out = _mm256_load_pd(ss);
    c_out = _mm256_load_pd(cs);
}

inline __m256d cos_only(__m256d x) {
    __m256d s, c;
    if (in_range(x)) {
        sincos(x, s, c);
    } else {
        sincos_libm(x, s, c);
    }
    return c;
}

/// Loads up to four times; a short tail repeats the last valid time.
inline __m256d load_times(const double* t, std::size_t i, std::size_t nt) {
    if (i + 4 <= nt) return _mm256_loadu_pd(t + i);
    alignas(32) double buf[4];
    for (std::size_t j = 0; j < 4; ++j) buf[j] = t[i + j < nt ? i + j : nt - 1];
    return _mm256_load_pd(buf);
}

inline void store_lanes(double* out, std::size_t i, std::size_t nt, __m256d v) {
    if (i + 4 <= nt) {
        _mm256_storeu_pd(out + i, v);
        return;
    }
    alignas(32) double buf[4];
    _mm256_store_pd(buf, v);
    for (std::size_t j = 0; i + j < nt; ++j) out[i + j] = buf[j];
}

} // namespace

void cos_product(const double* g, std::size_t m, const double* t, std::size_t nt, double* out) {
    for (std::size_t i = 0; i < nt; i += 4) {
        const __m256d tv = load_times(t, i, nt);
        __m256d acc = splat(1.0);
        for (std::size_t k = 0; k < m; ++k) {
            const __m256d x = _mm256_mul_pd(splat(2.0 * g[k]), tv);
            acc = _mm256_mul_pd(acc, cos_only(x));
        }
        store_lanes(out, i, nt, acc);
    }
}

void phase_product(const double* g, const double* bias, std::size_t m, const double* t, std::size_t nt,
                   double* out_re, double* out_im) {
    for (std::size_t i = 0; i < nt; i += 4) {
        const __m256d tv = load_times(t, i, nt);
        __m256d re = splat(1.0);
        __m256d im = _mm256_setzero_pd();
        for (std::size_t k = 0; k < m; ++k) {
            const __m256d x = _mm256_mul_pd(splat(2.0 * g[k]), tv);
            __m256d s, c;
            if (in_range(x)) {
                sincos(x, s, c);
            } else {
                sincos_libm(x, s, c);
            }
            s = _mm256_mul_pd(splat(bias[k]), s);
            const __m256d nre = _mm256_fmsub_pd(re, c, _mm256_mul_pd(im, s));
            const __m256d nim = _mm256_fmadd_pd(re, s, _mm256_mul_pd(im, c));
            re = nre;
            im = nim;
        }
        store_lanes(out_re, i, nt, re);
        store_lanes(out_im, i, nt, im);
    }
}

} // namespace coh::simd::avx2
