// kernels_dispatch.cpp - runtime selection between scalar and vector kernels
#include "coherence/kernels.h"

#include "coherence/errors.h"
#include "kernels_impl.h"

#include <atomic>
#include <cstdlib>
#include <string>

namespace coh::simd {

std::string_view isa_name(Isa isa) {
    switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
    }
    return "unknown";
}

bool isa_supported(Isa isa) {
    switch (isa) {
    case Isa::Scalar: return true;
    case Isa::Avx2:
#if defined(COH_HAVE_AVX2_KERNELS)
        return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
        return false;
#endif
    }
    return false;
}

Isa best_isa() { return isa_supported(Isa::Avx2) ? Isa::Avx2 : Isa::Scalar; }

Isa parse_isa(std::string_view name) {
    if (name == "scalar") return Isa::Scalar;
    if (name == "avx2") return Isa::Avx2;
    if (name == "auto") return best_isa();
    throw InvalidArgument("unknown kernel '" + std::string(name) + "' (expected auto, scalar or avx2)");
}

namespace {

constexpr int kUnset = -1;
std::atomic<int> g_active{kUnset};

Isa initial_isa() {
    if (const char* env = std::getenv("COHERENCE_KERNEL"); env != nullptr && *env != '\0') {
        const Isa isa = parse_isa(env);
        if (isa_supported(isa)) return isa;
    }
    return best_isa();
}

void check_sizes(std::size_t nt, std::size_t n_out) {
    if (n_out < nt) throw InvalidArgument("kernel output span shorter than the time grid");
}

} // namespace

Isa active_isa() {
    int v = g_active.load(std::memory_order_relaxed);
    if (v == kUnset) {
        int expected = kUnset;
        g_active.compare_exchange_strong(expected, static_cast<int>(initial_isa()));
        v = g_active.load(std::memory_order_relaxed);
    }
    return static_cast<Isa>(v);
}

void set_active_isa(Isa isa) {
    if (!isa_supported(isa)) {
        throw InvalidArgument("kernel '" + std::string(isa_name(isa)) + "' is not supported on this CPU");
    }
    g_active.store(static_cast<int>(isa), std::memory_order_relaxed);
}

void cos_product(Isa isa, std::span<const double> couplings, std::span<const double> times, std::span<double> out) {
    check_sizes(times.size(), out.size());
#if defined(COH_HAVE_AVX2_KERNELS)
    if (isa == Isa::Avx2) {
        avx2::cos_product(couplings.data(), couplings.size(), times.data(), times.size(), out.data());
        return;
    }
#endif
    (void)isa;
    scalar::cos_product(couplings.data(), couplings.size(), times.data(), times.size(), out.data());
}

void cos_product(std::span<const double> couplings, std::span<const double> times, std::span<double> out) {
    cos_product(active_isa(), couplings, times, out);
}

void phase_product(Isa isa, std::span<const double> couplings, std::span<const double> bias,
                   std::span<const double> times, std::span<double> out_re, std::span<double> out_im) {
    if (bias.size() != couplings.size()) throw InvalidArgument("bias and coupling spans differ in length");
    check_sizes(times.size(), out_re.size());
    check_sizes(times.size(), out_im.size());
#if defined(COH_HAVE_AVX2_KERNELS)
    if (isa == Isa::Avx2) {
        avx2::phase_product(couplings.data(), bias.data(), couplings.size(), times.data(), times.size(),
                            out_re.data(), out_im.data());
        return;
    }
#endif
    (void)isa;
    scalar::phase_product(couplings.data(), bias.data(), couplings.size(), times.data(), times.size(),
                          out_re.data(), out_im.data());
}

void phase_product(std::span<const double> couplings, std::span<const double> bias, std::span<const double> times,
                   std::span<double> out_re, std::span<double> out_im) {
    phase_product(active_isa(), couplings, bias, times, out_re, out_im);
}

} // namespace coh::simd
