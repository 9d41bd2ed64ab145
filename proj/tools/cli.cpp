// cli.cpp - metrics, simulate, fit, sweep and recurrence subcommands
#include "cli.h"

#include "coherence/density_matrix.h"
#include "coherence/errors.h"
#include "coherence/fit.h"
#include "coherence/io.h"
#include "coherence/kernels.h"
#include "coherence/recurrence.h"
#include "coherence/spin_model.h"
#include "coherence/sweep.h"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <ostream>
#include <sstream>

namespace coh::cli {

namespace {

constexpr std::string_view kVersion = "coherence 1.0.0";

struct Globals {
    std::uint64_t seed = 0;
    std::string unit_convention = "text";
    unsigned threads = 1;
    std::string out;
    std::string kernel = "auto";
};

struct ModelFlags {
    std::size_t n = 100;
    int d = 1;
    double eps = 1.0;
    std::string eta = "1";
    double density = 1.0;
};

void add_model_flags(CLI::App* cmd, ModelFlags& m) {
    cmd->add_option("-N,--particles", m.n, "number of particles")->check(CLI::Range(std::size_t{2}, std::size_t{1} << 20));
    cmd->add_option("-D,--dimension", m.d, "spatial dimension")->check(CLI::Range(1, 64));
    cmd->add_option("-e,--epsilon", m.eps, "coupling exponent")->check(CLI::PositiveNumber);
    cmd->add_option("--eta", m.eta, "coupling strength: number, 'em' or 'li6'");
    cmd->add_option("--density", m.density, "particle density")->check(CLI::PositiveNumber);
}

ModelParams model_params(const ModelFlags& m) {
    ModelParams p;
    p.n_particles = m.n;
    p.dimension = m.d;
    p.epsilon = m.eps;
    p.eta = parse_eta(m.eta);
    p.density = m.density;
    p.validate();
    return p;
}

void add_grid_flags(CLI::App* cmd, TimeGridSpec& g) {
    cmd->add_option("--log-points", g.log_points, "log-spaced grid points")->capture_default_str();
    cmd->add_option("--log-start", g.log_start, "first log-spaced time / t_ref")->capture_default_str();
    cmd->add_option("--log-end", g.log_end, "last log-spaced time / t_ref")->capture_default_str();
    cmd->add_option("--linear-points", g.linear_points, "linear grid points")->capture_default_str();
    cmd->add_option("--linear-end", g.linear_end, "linear grid end / t_ref")->capture_default_str();
    cmd->add_option("--t-ref", g.t_ref, "grid time scale")->capture_default_str();
}

std::string grid_config(const TimeGridSpec& g) {
    std::ostringstream s;
    s << "log_points=" << g.log_points << " log_start=" << fmt_double(g.log_start)
      << " log_end=" << fmt_double(g.log_end) << " linear_points=" << g.linear_points
      << " linear_end=" << fmt_double(g.linear_end) << " t_ref=" << fmt_double(g.t_ref);
    return s.str();
}

std::string model_config(const ModelParams& p) {
    std::ostringstream s;
    s << "N=" << p.n_particles << " D=" << p.dimension << " epsilon=" << fmt_double(p.epsilon)
      << " eta=" << fmt_double(p.eta) << " density=" << fmt_double(p.density);
    return s.str();
}

/// Writes to --out atomically, or to stdout when no path is given.
void emit(const Globals& g, std::ostream& out, const std::string& text) {
    if (g.out.empty() || g.out == "-") {
        out << text;
    } else {
        write_file_atomic(g.out, text);
    }
}

std::string provenance_line(const Globals& g, std::string_view command) {
    std::string s(kVersion);
    s += " command=";
    s += command;
    s += " seed=" + std::to_string(g.seed) + " unit_convention=" + g.unit_convention +
         " kernel=" + std::string(simd::isa_name(simd::active_isa()));
    return s;
}

std::string provenance(const Globals& g, std::string_view command) {
    return "# " + provenance_line(g, command) + "\n";
}

std::vector<std::size_t> parse_partition(const std::string& text) {
    std::vector<std::size_t> dims;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        double v = 0;
        if (!parse_double(item, v) || v < 1 || v != std::floor(v)) throw ParseError("bad partition entry '" + item + "'");
        dims.push_back(static_cast<std::size_t>(v));
    }
    if (dims.empty()) throw ParseError("empty partition");
    return dims;
}

// ---------------------------------------------------------------- metrics

struct MetricsArgs {
    std::string file;
    std::string partition;
};

void cmd_metrics(const Globals& g, const MetricsArgs& a, std::ostream& out) {
    const DensityMatrix rho = read_density_matrix_file(a.file);
    const auto spec = eigen_spectrum(rho);
    std::string text = provenance(g, "metrics") + "# input=" + a.file + "\n";
    text += "dim=" + std::to_string(rho.dim()) + "\n";
    text += "lambda_max=" + fmt_double(spec.lambda_max()) + "\n";
    if (rho.dim() >= 2) text += "xi=" + fmt_double(coherence(spec)) + "\n";
    text += "entropy=" + fmt_double(von_neumann_entropy(spec)) + "\n";
    if (!a.partition.empty()) {
        const auto dims = parse_partition(a.partition);
        const auto r = metrics_report(rho, dims);
        text += "xi_id=" + fmt_double(r.xi_id) + "\n";
        text += "xi_re=" + fmt_double(r.xi_re) + "\n";
        text += "s_id=" + fmt_double(r.s_id) + "\n";
        text += "s_re=" + fmt_double(r.s_re) + "\n";
        text += "mutual_information=" + fmt_double(r.mutual_information) + "\n";
        text += "mutual_entanglement=" + fmt_double(r.mutual_entanglement) + "\n";
    }
    emit(g, out, text);
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
    ModelFlags model;
    TimeGridSpec grid;
    std::string ensemble_in;
    std::string ensemble_out;
    bool oracle = false;
    std::size_t oracle_cap = kDefaultOracleCap;
};

void cmd_simulate(const Globals& g, const SimulateArgs& a, std::ostream& out) {
    const UnitConvention conv = parse_unit_convention(g.unit_convention);
    const SpinEnsemble ens =
        a.ensemble_in.empty() ? sample_ensemble(model_params(a.model), g.seed) : read_ensemble_file(a.ensemble_in);
    if (a.oracle && ens.size() > a.oracle_cap) {
        throw CapacityError("oracle needs 2^" + std::to_string(ens.size()) + " amplitudes; cap is 2^" +
                            std::to_string(a.oracle_cap));
    }
    // grid is in simulation time; the model evolves in real time
    const double rate = ens.params().simulation_time_rate(conv);
    const auto sim_times = make_time_grid(a.grid);
    std::vector<double> real_times(sim_times.size());
    std::transform(sim_times.begin(), sim_times.end(), real_times.begin(), [&](double t) { return t / rate; });
    const CoherenceTrace trace = xi_re_trace(ens, real_times);

    std::string text = provenance(g, "simulate");
    text += "# " + model_config(ens.params()) + " ensemble_seed=" + std::to_string(ens.seed()) +
            (a.ensemble_in.empty() ? "" : " ensemble_file=" + a.ensemble_in) + "\n";
    text += "# grid: " + grid_config(a.grid) + " time_unit=simulation\n";
    text += a.oracle ? "t,xi_re,oracle_dev\n" : "t,xi_re\n";
    for (std::size_t i = 0; i < sim_times.size(); ++i) {
        text += fmt_double(sim_times[i]) + "," + fmt_double(trace.values[i]);
        if (a.oracle) {
            const double ref = brute_force_xi_re(ens, real_times[i], a.oracle_cap);
            text += "," + fmt_double(std::abs(trace.values[i] - ref));
        }
        text += "\n";
    }
    if (!a.ensemble_out.empty()) {
        std::ostringstream es;
        write_ensemble(es, ens);
        write_file_atomic(a.ensemble_out, es.str());
    }
    emit(g, out, text);
}

// ---------------------------------------------------------------- fit

struct FitArgs {
    std::string trace;
    std::string residuals;
    double floor = -1.0;
};

void cmd_fit(const Globals& g, const FitArgs& a, std::ostream& out) {
    const CoherenceTrace trace = trace_from_csv(read_text_file(a.trace));
    if (trace.times.empty()) throw InsufficientData("trace has no rows");
    const FitResult fit = a.floor >= 0.0 ? fit_decay(trace, a.floor) : fit_trace(trace);
    std::string text = provenance(g, "fit") + "# input=" + a.trace +
                       (a.floor >= 0.0 ? " floor=fixed" : " floor=estimated") + "\n" + fit_record(fit);
    text += "iterations=" + std::to_string(fit.iterations) + "\n";
    if (a.floor < 0.0) {
        const FloorWindow w = default_floor_window(trace, crude_decay_scale(trace));
        text += "floor_window=" + fmt_double(w.t1) + "," + fmt_double(w.t2) + "\n";
        text += std::string("floor_window_clamped=") + (w.clamped ? "1" : "0") + "\n";
    }
    if (!a.residuals.empty()) {
        std::string res = provenance(g, "fit") + "# input=" + a.trace + "\nt,xi_re,model,residual\n";
        for (std::size_t i = 0; i < trace.times.size(); ++i) {
            const double model = decay_profile(trace.times[i], fit.t_d, fit.c_exponent, fit.c_floor);
            res += fmt_double(trace.times[i]) + "," + fmt_double(trace.values[i]) + "," + fmt_double(model) + "," +
                   fmt_double(trace.values[i] - model) + "\n";
        }
        write_file_atomic(a.residuals, res);
    }
    emit(g, out, text);
}

// ---------------------------------------------------------------- sweep

struct SweepArgs {
    std::vector<std::size_t> n{100};
    std::vector<int> d{1};
    std::vector<double> eps{1.0};
    std::size_t runs = 100;
    TimeGridSpec grid;
    std::uint64_t max_denominator = kDefaultMaxDenominator;
};

void cmd_sweep(const Globals& g, const SweepArgs& a, std::ostream& out) {
    if (g.out.empty()) throw InvalidArgument("sweep needs --out <directory>");
    const UnitConvention conv = parse_unit_convention(g.unit_convention);
    SweepOptions opts;
    opts.grid = a.grid;
    opts.threads = std::max(1U, g.threads);
    opts.max_denominator = a.max_denominator;

    std::error_code ec;
    std::filesystem::create_directories(g.out, ec);
    if (ec) throw IoError("cannot create output directory '" + g.out + "': " + ec.message());

    std::vector<CellStats> cells;
    for (std::size_t n : a.n)
        for (int d : a.d)
            for (double e : a.eps) {
                const SweepCell cell{n, d, e, a.runs, g.seed};
                cell.validate();
                cells.push_back(run_cell(cell, opts));
                const auto& s = cells.back();
                out << "cell N=" << n << " D=" << d << " epsilon=" << fmt_double(e) << " used=" << s.used << "/"
                    << a.runs << " C=" << fmt_double(s.exponent.mean) << " f=" << fmt_double(f_exponent(d, e))
                    << (in_validated_domain(n, d, e) ? "" : " (outside validated domain)") << "\n";
            }

    std::ostringstream cfg;
    cfg << std::string(kVersion) << " base_seed=" << g.seed << " runs=" << a.runs << " " << grid_config(a.grid)
        << " max_denominator=" << a.max_denominator << " eta=1 density=1";
    const std::filesystem::path dir(g.out);
    write_file_atomic((dir / "runs.csv").string(), runs_csv(cells, conv, cfg.str()));
    write_file_atomic((dir / "summary.csv").string(), summary_csv(cells, conv, cfg.str()));
}

// ---------------------------------------------------------------- recurrence

struct RecurrenceArgs {
    ModelFlags model;
    std::string ensemble_in;
    bool law = false;
    std::uint64_t max_denominator = kDefaultMaxDenominator;
    std::string csv;
};

void cmd_recurrence(const Globals& g, const RecurrenceArgs& a, std::ostream& out) {
    std::string text = provenance(g, "recurrence");
    if (a.law) {
        const ModelParams p = model_params(a.model);
        text += "# " + model_config(p) + "\n";
        text += "log10_tp_law=" + fmt_double(recurrence_law(p.n_particles, p.density, p.eta, p.epsilon, p.dimension)) + "\n";
        text += "log10_factorial=" + fmt_double(log10_factorial(p.n_particles)) + "\n";
        emit(g, out, text);
        return;
    }
    const SpinEnsemble ens =
        a.ensemble_in.empty() ? sample_ensemble(model_params(a.model), g.seed) : read_ensemble_file(a.ensemble_in);
    const auto periods = pair_periods(ens);
    const auto est = ensemble_recurrence(ens, a.max_denominator);
    text += "# " + model_config(ens.params()) + " ensemble_seed=" + std::to_string(ens.seed()) +
            " max_denominator=" + std::to_string(a.max_denominator) + "\n";
    text += "pairs=" + std::to_string(periods.size()) + "\n";
    text += "t_unit=" + fmt_double(est.t_unit) + "\n";
    text += "log10_tp=" + fmt_double(est.log10_tp) + "\n";
    text += "log10_factorial=" + fmt_double(log10_factorial(ens.size())) + "\n";
    if (!a.csv.empty()) {
        const std::vector<std::string> comments{provenance_line(g, "recurrence")};
        write_file_atomic(a.csv, recurrence_to_csv(est, periods, ens.size(), comments));
    }
    emit(g, out, text);
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Coherence measure, spin-ensemble decoherence and recurrence toolkit", "coherence"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(kVersion));

    Globals g;
    app.add_option("--seed", g.seed, "base random seed")->capture_default_str();
    app.add_option("--unit-convention", g.unit_convention, "simulation time convention")
        ->check(CLI::IsMember({"text", "figure"}))
        ->capture_default_str();
    app.add_option("--threads", g.threads, "worker threads for sweeps")->check(CLI::Range(1U, 1024U))->capture_default_str();
    app.add_option("--out", g.out, "output file (directory for sweep); stdout when omitted");
    auto* kernel_opt = app.add_option("--kernel", g.kernel, "product kernel: auto, scalar or avx2 (default: COHERENCE_KERNEL or auto)")
                           ->check(CLI::IsMember({"auto", "scalar", "avx2"}));

    MetricsArgs ma;
    auto* metrics = app.add_subcommand("metrics", "coherence and entropy of a density-matrix file")->fallthrough();
    metrics->add_option("file", ma.file, "matrix file: 'dim N' then N*N lines 'i j re im'")->required();
    metrics->add_option("--partition", ma.partition, "subsystem dimensions, e.g. 2,2");

    SimulateArgs sa;
    auto* simulate = app.add_subcommand("simulate", "realistic coherence trace of a random spin ensemble")->fallthrough();
    add_model_flags(simulate, sa.model);
    add_grid_flags(simulate, sa.grid);
    simulate->add_option("--ensemble", sa.ensemble_in, "read the ensemble from a file instead of sampling");
    simulate->add_option("--save-ensemble", sa.ensemble_out, "write the sampled ensemble to a file");
    simulate->add_flag("--oracle", sa.oracle, "append |closed form - state vector| per grid point");
    simulate->add_option("--oracle-cap", sa.oracle_cap, "largest N for the state-vector oracle")->capture_default_str();

    FitArgs fa;
    auto* fit = app.add_subcommand("fit", "stretched-exponential fit of a trace CSV")->fallthrough();
    fit->add_option("trace", fa.trace, "CSV with columns t,xi_re")->required();
    fit->add_option("--residuals", fa.residuals, "write t,xi_re,model,residual CSV");
    fit->add_option("--floor", fa.floor, "hold the floor at this value instead of estimating it")
        ->check(CLI::Range(0.0, 1.0));

    SweepArgs wa;
    auto* sweep = app.add_subcommand("sweep", "Monte Carlo runs over (N, D, epsilon) cells")->fallthrough();
    sweep->add_option("-N,--particles", wa.n, "particle counts")->delimiter(',');
    sweep->add_option("-D,--dimension", wa.d, "dimensions")->delimiter(',');
    sweep->add_option("-e,--epsilon", wa.eps, "coupling exponents")->delimiter(',');
    sweep->add_option("-U,--runs", wa.runs, "runs per cell")->check(CLI::Range(std::size_t{1}, std::size_t{1000000}))
        ->capture_default_str();
    sweep->add_option("--max-denominator", wa.max_denominator, "rational approximation cap")->capture_default_str();
    add_grid_flags(sweep, wa.grid);

    RecurrenceArgs ra;
    auto* recurrence = app.add_subcommand("recurrence", "Poincare recurrence bound")->fallthrough();
    add_model_flags(recurrence, ra.model);
    recurrence->add_option("--ensemble", ra.ensemble_in, "read the ensemble from a file instead of sampling");
    recurrence->add_flag("--law", ra.law, "evaluate the fitted law instead of the procedural bound");
    recurrence->add_option("--max-denominator", ra.max_denominator, "rational approximation cap")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    recurrence->add_option("--csv", ra.csv, "write the per-pair table");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::CallForVersion&) {
        out << kVersion << "\n";
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }

    try {
        if (kernel_opt->count() > 0) simd::set_active_isa(simd::parse_isa(g.kernel));
        if (metrics->parsed()) cmd_metrics(g, ma, out);
        else if (simulate->parsed()) cmd_simulate(g, sa, out);
        else if (fit->parsed()) cmd_fit(g, fa, out);
        else if (sweep->parsed()) cmd_sweep(g, wa, out);
        else if (recurrence->parsed()) cmd_recurrence(g, ra, out);
        return 0;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return e.exit_code();
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

} // namespace coh::cli
