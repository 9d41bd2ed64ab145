// kernels_scalar.cpp - reference cosine/phase product kernels
#include "kernels_impl.h"

#include <cmath>

namespace coh::simd::scalar {

void cos_product(const double* g, std::size_t m, const double* t, std::size_t nt, double* out) {
    for (std::size_t i = 0; i < nt; ++i) {
        double acc = 1.0;
        for (std::size_t k = 0; k < m; ++k) acc *= std::cos((2.0 * g[k]) * t[i]);
        out[i] = acc;
    }
}

void phase_product(const double* g, const double* bias, std::size_t m, const double* t, std::size_t nt,
                   double* out_re, double* out_im) {
    for (std::size_t i = 0; i < nt; ++i) {
        double re = 1.0, im = 0.0;
        for (std::size_t k = 0; k < m; ++k) {
            const double x = (2.0 * g[k]) * t[i];
            const double c = std::cos(x);
            const double s = bias[k] * std::sin(x);
            const double nre = re * c - im * s;
            const double nim = re * s + im * c;
            re = nre;
            im = nim;
        }
        out_re[i] = re;
        out_im[i] = im;
    }
}

} // namespace coh::simd::scalar
