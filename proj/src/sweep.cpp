// sweep.cpp - Monte Carlo cells, weighted aggregation and empirical-law evaluators
#include "coherence/sweep.h"

#include "coherence/errors.h"
#include "coherence/io.h"
#include "coherence/random.h"

#include <atomic>
#include <charconv>
#include <cmath>
#include <limits>
#include <thread>

namespace coh {

void SweepCell::validate() const {
    if (n_particles < 2) throw InvalidArgument("cell needs N >= 2");
    if (dimension < 1) throw InvalidArgument("cell needs D >= 1");
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw InvalidArgument("cell needs epsilon > 0");
    if (runs < 1) throw InvalidArgument("cell needs at least one run");
}

bool RunRecord::usable() const {
    return fitted && fit.converged && std::isfinite(fit.weight) && fit.weight > 0.0;
}

std::uint64_t run_seed(std::uint64_t base_seed, std::size_t n_particles, int dimension, double epsilon,
                       std::size_t run) {
    return mix_seed({base_seed, static_cast<std::uint64_t>(n_particles), static_cast<std::uint64_t>(dimension),
                     double_bits(epsilon), static_cast<std::uint64_t>(run)});
}

namespace {

FitResult fit_run_trace(const SpinEnsemble& ensemble, const CoherenceTrace& trace, const SweepOptions& options) {
    const double scale = crude_decay_scale(trace);
    const double t1 = 50.0 * scale, t2 = 150.0 * scale;
    if (t2 <= trace.times.back() || options.floor_points < 2) return fit_trace(trace, options.fit);
    std::vector<double> window(options.floor_points);
    for (std::size_t i = 0; i < window.size(); ++i)
        window[i] = t1 + (t2 - t1) * static_cast<double>(i) / static_cast<double>(window.size() - 1);
    window.back() = t2;
    const double floor = std::max(0.0, estimate_floor(xi_re_trace(ensemble, window), t1, t2));
    if (floor >= 1.0 - options.fit.delta) throw InsufficientData("trace does not decay below its floor");
    return fit_decay(trace, floor, options.fit);
}

} // namespace

RunRecord run_one(const SweepCell& cell, std::size_t run, const SweepOptions& options) {
    RunRecord rec;
    rec.run = run;
    rec.seed = run_seed(cell.base_seed, cell.n_particles, cell.dimension, cell.epsilon, run);
    rec.log10_tp = std::numeric_limits<double>::quiet_NaN();
    try {
        ModelParams params;
        params.n_particles = cell.n_particles;
        params.dimension = cell.dimension;
        params.epsilon = cell.epsilon;
        const SpinEnsemble ensemble = sample_ensemble(params, rec.seed);
        try {
            rec.log10_tp = ensemble_recurrence(ensemble, options.max_denominator).log10_tp;
        } catch (const InvalidArgument&) {
            // a coupling outside the rational range leaves the bound undefined for this run
        }
        const auto times = make_time_grid(options.grid);
        const CoherenceTrace trace = xi_re_trace(ensemble, times);
        rec.fit = fit_run_trace(ensemble, trace, options);
        rec.fitted = true;
        if (!rec.fit.converged) rec.error = "fit did not converge";
    } catch (const Error& e) {
        rec.fitted = false;
        rec.error = e.what();
    }
    return rec;
}

namespace {

WeightedStat weighted(const std::vector<double>& x, const std::vector<double>& w) {
    WeightedStat s;
    double mean = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) mean += w[i] * x[i];
    double var = 0.0;
    double w2 = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        var += w[i] * (x[i] - mean) * (x[i] - mean);
        w2 += w[i] * w[i];
    }
    s.mean = mean;
    s.sd = std::sqrt(var);
    s.se = s.sd * std::sqrt(w2);
    return s;
}

} // namespace

void aggregate(CellStats& stats) {
    std::vector<double> w, td, ce, fl;
    double log_sum = 0.0;
    std::size_t log_count = 0;
    stats.used = 0;
    stats.failed = 0;
    for (const auto& r : stats.runs) {
        if (std::isfinite(r.log10_tp)) {
            log_sum += r.log10_tp;
            ++log_count;
        }
        if (!r.usable()) {
            ++stats.failed;
            continue;
        }
        ++stats.used;
        w.push_back(r.fit.weight);
        td.push_back(r.fit.t_d);
        ce.push_back(r.fit.c_exponent);
        fl.push_back(r.fit.c_floor);
    }
    const double nan = std::numeric_limits<double>::quiet_NaN();
    stats.mean_log10_tp = log_count ? log_sum / static_cast<double>(log_count) : nan;
    if (w.empty()) {
        stats.t_d = stats.exponent = stats.floor = WeightedStat{nan, nan, nan};
        stats.effective_runs = 0.0;
        return;
    }
    double total = 0.0;
    for (double v : w) total += v;
    double w2 = 0.0;
    for (double& v : w) {
        v /= total;
        w2 += v * v;
    }
    stats.effective_runs = 1.0 / w2;
    stats.t_d = weighted(td, w);
    stats.exponent = weighted(ce, w);
    stats.floor = weighted(fl, w);
}

CellStats run_cell(const SweepCell& cell, const SweepOptions& options) {
    cell.validate();
    CellStats stats;
    stats.cell = cell;
    stats.runs.resize(cell.runs);

    const unsigned workers = std::max(1U, std::min<unsigned>(options.threads, static_cast<unsigned>(cell.runs)));
    if (workers == 1) {
        for (std::size_t u = 0; u < cell.runs; ++u) stats.runs[u] = run_one(cell, u, options);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned k = 0; k < workers; ++k) {
            pool.emplace_back([&] {
                for (std::size_t u = next.fetch_add(1); u < cell.runs; u = next.fetch_add(1)) {
                    stats.runs[u] = run_one(cell, u, options);
                }
            });
        }
        for (auto& t : pool) t.join();
    }
    aggregate(stats);
    return stats;
}

bool in_validated_domain(std::size_t n, int d, double eps) {
    if (n >= 20 && n <= 100 && d >= 1 && d <= 4 && eps >= 1.0 && eps <= 2.0) return true;
    return n == 200 && d >= 1 && d <= 10 && eps >= 1.0 && eps <= 10.0;
}

double f_exponent(double dimension, double epsilon) {
    if (!(dimension >= 1.0) || !(epsilon > 0.0)) throw InvalidArgument("f_exponent needs D >= 1 and eps > 0");
    return 1.97 * (1.0 - 0.93 * std::exp(-0.65 * std::pow(dimension, 1.35) * std::pow(epsilon, -1.68)));
}

double tau_d_law(std::size_t n_particles, double density, double eta, double epsilon, int dimension) {
    if (n_particles < 2) throw InvalidArgument("tau_d law needs N >= 2");
    if (!(density > 0.0) || !(eta > 0.0) || !(epsilon > 0.0) || dimension < 1) {
        throw InvalidArgument("tau_d law parameters must be positive");
    }
    const double d = dimension;
    const double n = static_cast<double>(n_particles);
    const double prefactor =
        std::pow(density, -epsilon / d) / eta * std::pow(n / 200.0, -0.085 * (d - 1.0) / epsilon);

    const double first = 0.29 * std::exp(-0.79 * (d - 1.0) * std::pow(epsilon, 0.25) -
                                         0.13 * (epsilon - 3.4) * (epsilon - 3.4));
    double second = 0.0;
    if (epsilon != 1.0) {
        const double base = (d - 2.0) * (d - 2.0);
        const double power = 0.19 * (epsilon - 1.0);
        if (base == 0.0) {
            if (power < 0.0) throw InvalidArgument("tau_d law diverges at D = 2 for eps < 1");
            // 0^positive = 0
        } else {
            second = 0.17 * (epsilon - 1.0) / std::pow(2.0, epsilon) * std::pow(base, power);
        }
    }
    const double third = 0.03 / std::sqrt(epsilon);
    return prefactor * (first + second + third + 0.07);
}

double to_figure_units(double text_time, int dimension, double epsilon) {
    return text_time / std::pow(2.0, epsilon / dimension);
}

bool fluctuation_regime(std::size_t n_particles, int dimension, double epsilon) {
    return dimension + 1.0 > std::sqrt(static_cast<double>(n_particles) / 200.0) * std::exp(epsilon / 2.0);
}

namespace {

std::string header_block(std::string_view schema, std::string_view config, UnitConvention convention) {
    std::string out = "# ";
    out += schema;
    out += "\n# config: ";
    out += config;
    out += " unit_convention=";
    out += unit_convention_name(convention);
    out += "\n";
    return out;
}

double convert(double text_time, const SweepCell& cell, UnitConvention convention) {
    return convention == UnitConvention::Text ? text_time : to_figure_units(text_time, cell.dimension, cell.epsilon);
}

} // namespace

std::string runs_csv(std::span<const CellStats> cells, UnitConvention convention, std::string_view config) {
    std::string out = header_block(kRunsSchema, config, convention);
    out += "N,D,epsilon,run,seed,t_d,C,c,chi_sq,weight,log10_tp,converged\n";
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (const auto& cs : cells) {
        for (const auto& r : cs.runs) {
            out += std::to_string(cs.cell.n_particles) + "," + std::to_string(cs.cell.dimension) + "," +
                   fmt_double(cs.cell.epsilon) + "," + std::to_string(r.run) + "," + std::to_string(r.seed) + ",";
            if (r.fitted) {
                out += fmt_double(convert(r.fit.t_d, cs.cell, convention)) + "," + fmt_double(r.fit.c_exponent) + "," +
                       fmt_double(r.fit.c_floor) + "," + fmt_double(r.fit.chi_sq) + "," + fmt_double(r.fit.weight) + ",";
            } else {
                for (int k = 0; k < 5; ++k) out += fmt_double(nan) + ",";
            }
            out += fmt_double(r.log10_tp) + "," + (r.usable() ? "1" : "0") + "\n";
        }
    }
    return out;
}

std::string summary_csv(std::span<const CellStats> cells, UnitConvention convention, std::string_view config) {
    std::string out = header_block(kSummarySchema, config, convention);
    out += "N,D,epsilon,runs,used,failed,t_d_mean,t_d_sd,C_mean,C_sd,C_se,c_mean,c_sd,log10_tp_mean,f_exponent,"
           "tau_d_law,low_fluctuation,validated_domain\n";
    for (const auto& cs : cells) {
        const auto& c = cs.cell;
        double law = std::numeric_limits<double>::quiet_NaN();
        try {
            law = tau_d_law(c.n_particles, 1.0, 1.0, c.epsilon, c.dimension);
        } catch (const InvalidArgument&) {
            // law undefined for this cell; reported as nan
        }
        out += std::to_string(c.n_particles) + "," + std::to_string(c.dimension) + "," + fmt_double(c.epsilon) + "," +
               std::to_string(c.runs) + "," + std::to_string(cs.used) + "," + std::to_string(cs.failed) + "," +
               fmt_double(convert(cs.t_d.mean, c, convention)) + "," + fmt_double(convert(cs.t_d.sd, c, convention)) +
               "," + fmt_double(cs.exponent.mean) + "," + fmt_double(cs.exponent.sd) + "," +
               fmt_double(cs.exponent.se) + "," + fmt_double(cs.floor.mean) + "," + fmt_double(cs.floor.sd) + "," +
               fmt_double(cs.mean_log10_tp) + "," + fmt_double(f_exponent(c.dimension, c.epsilon)) + "," +
               fmt_double(convert(law, c, convention)) + "," +
               (fluctuation_regime(c.n_particles, c.dimension, c.epsilon) ? "1" : "0") + "," +
               (in_validated_domain(c.n_particles, c.dimension, c.epsilon) ? "1" : "0") + "\n";
    }
    return out;
}

namespace {

std::size_t as_count(const CsvTable& t, std::size_t r, std::string_view col) {
    const double v = t.number(r, col);
    if (!(v >= 0.0) || v != std::floor(v)) throw ParseError("column '" + std::string(col) + "' is not a count");
    return static_cast<std::size_t>(v);
}

void check_schema(const CsvTable& t, std::string_view schema) {
    if (t.comments.empty() || t.comments.front() != schema) {
        throw ParseError("missing schema line '" + std::string(schema) + "'");
    }
}

} // namespace

std::vector<RunRow> parse_runs_csv(std::string_view text) {
    const CsvTable t = parse_csv(text);
    check_schema(t, kRunsSchema);
    std::vector<RunRow> rows;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        RunRow row;
        row.n_particles = as_count(t, r, "N");
        row.dimension = static_cast<int>(as_count(t, r, "D"));
        row.epsilon = t.number(r, "epsilon");
        row.run = as_count(t, r, "run");
        const std::string& seed = t.rows[r][t.column("seed")];
        const auto [end, ec] = std::from_chars(seed.data(), seed.data() + seed.size(), row.seed);
        if (ec != std::errc{} || end != seed.data() + seed.size()) throw ParseError("seed is not an unsigned integer");
        row.t_d = t.number(r, "t_d");
        row.exponent = t.number(r, "C");
        row.floor = t.number(r, "c");
        row.chi_sq = t.number(r, "chi_sq");
        row.weight = t.number(r, "weight");
        row.log10_tp = t.number(r, "log10_tp");
        row.converged = as_count(t, r, "converged") == 1;
        rows.push_back(row);
    }
    return rows;
}

std::vector<SummaryRow> parse_summary_csv(std::string_view text) {
    const CsvTable t = parse_csv(text);
    check_schema(t, kSummarySchema);
    std::vector<SummaryRow> rows;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        SummaryRow s;
        s.n_particles = as_count(t, r, "N");
        s.dimension = static_cast<int>(as_count(t, r, "D"));
        s.epsilon = t.number(r, "epsilon");
        s.runs = as_count(t, r, "runs");
        s.used = as_count(t, r, "used");
        s.failed = as_count(t, r, "failed");
        s.t_d_mean = t.number(r, "t_d_mean");
        s.t_d_sd = t.number(r, "t_d_sd");
        s.c_exp_mean = t.number(r, "C_mean");
        s.c_exp_sd = t.number(r, "C_sd");
        s.c_exp_se = t.number(r, "C_se");
        s.floor_mean = t.number(r, "c_mean");
        s.floor_sd = t.number(r, "c_sd");
        s.log10_tp_mean = t.number(r, "log10_tp_mean");
        s.f_exponent = t.number(r, "f_exponent");
        s.tau_d_law = t.number(r, "tau_d_law");
        s.low_fluctuation = as_count(t, r, "low_fluctuation") == 1;
        s.validated_domain = as_count(t, r, "validated_domain") == 1;
        rows.push_back(s);
    }
    return rows;
}

} // namespace coh
