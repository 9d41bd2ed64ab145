// recurrence.h - Poincare recurrence upper bounds from pairwise coupling periods
#pragma once

#include "coherence/spin_model.h"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace coh {

/// n/d in lowest terms. The numerator is an integer-valued double so that
/// ratios beyond 2^64 (very strong couplings) stay representable.
struct RationalApprox {
    double numerator = 0.0;
    std::uint64_t denominator = 1;
};

struct RecurrenceEstimate {
    double t_unit = 0.0;
    std::vector<RationalApprox> rationals;  ///< one per period, input order
    double log10_tp = 0.0;                  ///< log10(t_unit) + sum log10(d_i)
};

inline constexpr std::uint64_t kDefaultMaxDenominator = 10000;

/// pi / g_ij for every pair i < j, row-major over i then j.
std::vector<double> pair_periods(const SpinEnsemble& ensemble);

/// Last continued-fraction convergent of x whose denominator is <= max_denominator.
RationalApprox rational_approx(double x, std::uint64_t max_denominator);

/// T_P = t_unit * prod d_i with t_unit / T_i ~ n_i / d_i, accumulated in log10.
RecurrenceEstimate poincare_log_bound(std::span<const double> periods, double t_unit,
                                      std::uint64_t max_denominator = kDefaultMaxDenominator);

/// pi / (eta n^(eps/D)): the period unit used for the procedural bound.
double recurrence_time_unit(const ModelParams& params);

/// Procedural bound for one ensemble, in the ensemble's real time units.
RecurrenceEstimate ensemble_recurrence(const SpinEnsemble& ensemble,
                                       std::uint64_t max_denominator = kDefaultMaxDenominator);

/// Fitted law log10[pi eta^-1 n^(-eps/D) exp(3.07 (N^2 - N))].
double recurrence_law(std::size_t n_particles, double density, double eta, double epsilon, int dimension);

/// log10(N!), the factorial-growth comparator.
double log10_factorial(std::size_t n);

/// Columns kind,i,j,period,n,d,log10_tp: one "pair" row per period followed by
/// a "summary" row carrying t_unit (in the period column) and log10_tp.
std::string recurrence_to_csv(const RecurrenceEstimate& estimate, std::span<const double> periods,
                              std::size_t n_particles, std::span<const std::string> comments = {});

/// Named interaction strengths: "em" (electron charge, 8.22e43 e^2 Hz m C^-2)
/// and "li6" (spin-spin, 3.27e-26 m^3 Hz). Anything else is parsed as a number.
double parse_eta(const std::string& text);

} // namespace coh
