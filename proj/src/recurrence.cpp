// recurrence.cpp - continued fractions and log-space Poincare bounds
#include "coherence/recurrence.h"

#include "coherence/errors.h"
#include "coherence/io.h"

#include <cmath>
#include <numbers>

namespace coh {

std::vector<double> pair_periods(const SpinEnsemble& ensemble) {
    std::vector<double> out;
    const std::size_t n = ensemble.size();
    out.reserve(n * (n - 1) / 2);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) out.push_back(std::numbers::pi / ensemble.coupling(i, j));
    return out;
}

RationalApprox rational_approx(double x, std::uint64_t max_denominator) {
    if (!(x > 0.0) || !std::isfinite(x)) throw InvalidArgument("rational_approx needs a finite positive value");
    if (max_denominator < 1) throw InvalidArgument("max_denominator must be >= 1");

    // convergents h/k with h_{-1}/k_{-1} = 1/0 and h_{-2}/k_{-2} = 0/1
    double h_prev = 1.0, h_prev2 = 0.0;
    std::uint64_t k_prev = 0, k_prev2 = 1;
    RationalApprox best{std::floor(x), 1};
    double r = x;
    for (int depth = 0; depth < 64; ++depth) {
        const double a = std::floor(r);
        const double k_next = a * static_cast<double>(k_prev) + static_cast<double>(k_prev2);
        if (k_next > static_cast<double>(max_denominator)) break;
        const double h = a * h_prev + h_prev2;
        const auto k = static_cast<std::uint64_t>(k_next);
        best = RationalApprox{h, k};
        h_prev2 = h_prev;
        h_prev = h;
        k_prev2 = k_prev;
        k_prev = k;
        const double frac = r - a;
        if (frac == 0.0 || h / static_cast<double>(k) == x) break;
        r = 1.0 / frac;
        if (!std::isfinite(r)) break;
    }
    return best;
}

RecurrenceEstimate poincare_log_bound(std::span<const double> periods, double t_unit, std::uint64_t max_denominator) {
    if (periods.empty()) throw InvalidArgument("no periods");
    if (!(t_unit > 0.0) || !std::isfinite(t_unit)) throw InvalidArgument("t_unit must be finite and positive");
    RecurrenceEstimate est;
    est.t_unit = t_unit;
    est.rationals.reserve(periods.size());
    double log_sum = 0.0;
    for (double period : periods) {
        if (!(period > 0.0)) throw InvalidArgument("periods must be positive");
        const RationalApprox q = rational_approx(t_unit / period, max_denominator);
        est.rationals.push_back(q);
        log_sum += std::log10(static_cast<double>(q.denominator));
    }
    est.log10_tp = std::log10(t_unit) + log_sum;
    return est;
}

double recurrence_time_unit(const ModelParams& params) {
    return std::numbers::pi / params.simulation_time_rate(UnitConvention::Text);
}

RecurrenceEstimate ensemble_recurrence(const SpinEnsemble& ensemble, std::uint64_t max_denominator) {
    const auto periods = pair_periods(ensemble);
    return poincare_log_bound(periods, recurrence_time_unit(ensemble.params()), max_denominator);
}

double recurrence_law(std::size_t n_particles, double density, double eta, double epsilon, int dimension) {
    if (n_particles < 2) throw InvalidArgument("recurrence law needs N >= 2");
    if (!(density > 0.0) || !(eta > 0.0) || !(epsilon > 0.0) || dimension < 1) {
        throw InvalidArgument("recurrence law parameters must be positive");
    }
    const double n = static_cast<double>(n_particles);
    return std::log10(std::numbers::pi / eta) - (epsilon / dimension) * std::log10(density) +
           3.07 * (n * n - n) / std::numbers::ln10;
}

double log10_factorial(std::size_t n) { return std::lgamma(static_cast<double>(n) + 1.0) / std::numbers::ln10; }

std::string recurrence_to_csv(const RecurrenceEstimate& est, std::span<const double> periods, std::size_t n_particles,
                              std::span<const std::string> comments) {
    if (periods.size() != est.rationals.size()) throw InvalidArgument("period and rational counts differ");
    if (n_particles * (n_particles - 1) / 2 != periods.size()) throw InvalidArgument("period count is not N(N-1)/2");
    std::string out;
    for (const auto& c : comments) out += "# " + c + "\n";
    out += "kind,i,j,period,n,d,log10_tp\n";
    std::size_t idx = 0;
    for (std::size_t i = 0; i < n_particles; ++i)
        for (std::size_t j = i + 1; j < n_particles; ++j, ++idx) {
            const auto& q = est.rationals[idx];
            out += "pair," + std::to_string(i) + "," + std::to_string(j) + "," + fmt_double(periods[idx]) + "," +
                   fmt_double(q.numerator) + "," + std::to_string(q.denominator) + ",\n";
        }
    out += "summary,,," + fmt_double(est.t_unit) + ",,," + fmt_double(est.log10_tp) + "\n";
    return out;
}

double parse_eta(const std::string& text) {
    constexpr double kElementaryCharge = 1.602176634e-19;
    if (text == "em") return 8.22e43 * kElementaryCharge * kElementaryCharge;
    if (text == "li6") return 3.27e-26;
    double v = 0.0;
    if (!parse_double(text, v) || !(v > 0.0)) throw InvalidArgument("eta must be 'em', 'li6' or a positive number");
    return v;
}

} // namespace coh
