// kernels_impl.h - per-ISA kernel entry points (internal)
#pragma once

#include <cstddef>

namespace coh::simd {

namespace scalar {
void cos_product(const double* g, std::size_t m, const double* t, std::size_t nt, double* out);
void phase_product(const double* g, const double* bias, std::size_t m, const double* t, std::size_t nt,
                   double* out_re, double* out_im);
} // namespace scalar

#if defined(COH_HAVE_AVX2_KERNELS)
namespace avx2 {
void cos_product(const double* g, std::size_t m, const double* t, std::size_t nt, double* out);
void phase_product(const double* g, const double* bias, std::size_t m, const double* t, std::size_t nt,
                   double* out_re, double* out_im);
} // namespace avx2
#endif

} // namespace coh::simd
