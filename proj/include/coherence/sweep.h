// sweep.h - seeded Monte Carlo runs over (N, D, epsilon) cells and the empirical decay laws
#pragma once

#include "coherence/fit.h"
#include "coherence/recurrence.h"
#include "coherence/spin_model.h"

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace coh {

/// One parameter cell. Density and eta are 1, so real time equals text-convention simulation time.
struct SweepCell {
    std::size_t n_particles = 100;
    int dimension = 1;
    double epsilon = 1.0;
    std::size_t runs = 100;
    std::uint64_t base_seed = 0;

    void validate() const;
};

struct SweepOptions {
    TimeGridSpec grid{};
    FitOptions fit{};
    std::uint64_t max_denominator = kDefaultMaxDenominator;
    unsigned threads = 1;
    /// When [50 s, 150 s] runs past the fit grid, the floor is averaged over
    /// this many extra linear samples of the window instead of clamping it.
    std::size_t floor_points = 2048;
};

struct RunRecord {
    std::size_t run = 0;
    std::uint64_t seed = 0;
    bool fitted = false;      ///< false when sampling or fitting threw
    FitResult fit{};          ///< text-convention time units
    double log10_tp = 0.0;    ///< procedural recurrence bound, NaN if unavailable
    std::string error;

    /// Counted in the weighted aggregates.
    bool usable() const;
};

struct WeightedStat {
    double mean = 0.0;
    double sd = 0.0;  ///< weighted standard deviation
    double se = 0.0;  ///< sd / sqrt(effective sample size)
};

struct CellStats {
    SweepCell cell{};
    std::vector<RunRecord> runs;
    std::size_t used = 0;
    std::size_t failed = 0;
    WeightedStat t_d{};
    WeightedStat exponent{};
    WeightedStat floor{};
    double mean_log10_tp = 0.0;
    double effective_runs = 0.0;  ///< (sum w)^2 / sum w^2
};

/// Stable per-run seed: 64-bit mix of (base_seed, N, D, bits of epsilon, run).
std::uint64_t run_seed(std::uint64_t base_seed, std::size_t n_particles, int dimension, double epsilon,
                       std::size_t run);

/// Single run u of the cell: sample, trace, floor, fit, recurrence bound.
RunRecord run_one(const SweepCell& cell, std::size_t run, const SweepOptions& options = {});

/// Weighted statistics with w_i = 1/chi_i^2 over usable runs, in run order.
void aggregate(CellStats& stats);

/// All runs of a cell, parallel over runs, aggregated in run order. Output
/// is independent of options.threads.
CellStats run_cell(const SweepCell& cell, const SweepOptions& options = {});

/// True inside N in [20, 100], D in [1, 4], eps in [1, 2], or the N = 200 slice with D, eps in [1, 10].
bool in_validated_domain(std::size_t n_particles, int dimension, double epsilon);

/// Stretching exponent law 1.97 (1 - 0.93 exp(-0.65 D^1.35 eps^-1.68)).
double f_exponent(double dimension, double epsilon);

/// Decoherence-time law; seconds for physical eta and density, text-convention
/// simulation units when eta = density = 1.
double tau_d_law(std::size_t n_particles, double density, double eta, double epsilon, int dimension);

/// Converts a text-convention time to the figure convention (divides by 2^(eps/D)).
double to_figure_units(double text_time, int dimension, double epsilon);

/// D + 1 > sqrt(N/200) exp(eps/2).
bool fluctuation_regime(std::size_t n_particles, int dimension, double epsilon);

// Per-run and per-cell CSV. The first comment line names the schema version,
// the second records the resolved configuration.
inline constexpr std::string_view kRunsSchema = "schema: coherence-sweep-runs/1";
inline constexpr std::string_view kSummarySchema = "schema: coherence-sweep-summary/1";

std::string runs_csv(std::span<const CellStats> cells, UnitConvention convention, std::string_view config);
std::string summary_csv(std::span<const CellStats> cells, UnitConvention convention, std::string_view config);

struct RunRow {
    std::size_t n_particles = 0;
    int dimension = 0;
    double epsilon = 0.0;
    std::size_t run = 0;
    std::uint64_t seed = 0;
    double t_d = 0.0, exponent = 0.0, floor = 0.0, chi_sq = 0.0, weight = 0.0, log10_tp = 0.0;
    bool converged = false;
};

struct SummaryRow {
    std::size_t n_particles = 0;
    int dimension = 0;
    double epsilon = 0.0;
    std::size_t runs = 0, used = 0, failed = 0;
    double t_d_mean = 0.0, t_d_sd = 0.0;
    double c_exp_mean = 0.0, c_exp_sd = 0.0, c_exp_se = 0.0;
    double floor_mean = 0.0, floor_sd = 0.0;
    double log10_tp_mean = 0.0;
    double f_exponent = 0.0, tau_d_law = 0.0;
    bool low_fluctuation = false, validated_domain = false;
};

std::vector<RunRow> parse_runs_csv(std::string_view text);
std::vector<SummaryRow> parse_summary_csv(std::string_view text);

} // namespace coh
