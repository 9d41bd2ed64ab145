// kernels.h - data-parallel cosine/phase product kernels with runtime ISA dispatch
//
// The hot loop of every coherence trace is, for one particle l and every grid
// time t, the product over partners k of the single-pair factor
//     cos(2 g_k t) + i * bias_k * sin(2 g_k t)
// where bias_k = |b_k|^2 - |a_k|^2 (zero for full superpositions, giving a real
// cosine product). The scalar variant is the reference; vector variants must
// agree with it to 1e-12 absolute on every output element.
#pragma once

#include <span>
#include <string_view>

namespace coh::simd {

enum class Isa { Scalar, Avx2 };

std::string_view isa_name(Isa isa);
/// Parses "scalar", "avx2" or "auto" (best supported). Throws InvalidArgument.
Isa parse_isa(std::string_view name);

/// True when the variant is compiled in and the running CPU supports it.
bool isa_supported(Isa isa);
Isa best_isa();

/// Variant used by the one-argument-less overloads. Initialised from the
/// COHERENCE_KERNEL environment variable when set, otherwise best_isa().
Isa active_isa();
/// Throws InvalidArgument if `isa` is not supported on this machine.
void set_active_isa(Isa isa);

/// out[t] = prod_k cos(2 couplings[k] times[t]).
void cos_product(Isa isa, std::span<const double> couplings, std::span<const double> times,
                 std::span<double> out);
void cos_product(std::span<const double> couplings, std::span<const double> times, std::span<double> out);

/// (out_re + i out_im)[t] = prod_k (cos(2 g_k t) + i bias_k sin(2 g_k t)).
void phase_product(Isa isa, std::span<const double> couplings, std::span<const double> bias,
                   std::span<const double> times, std::span<double> out_re, std::span<double> out_im);
void phase_product(std::span<const double> couplings, std::span<const double> bias,
                   std::span<const double> times, std::span<double> out_re, std::span<double> out_im);

} // namespace coh::simd
