// spin_model.cpp - ensemble sampling, closed-form reduced dynamics and the state-vector oracle
#include "coherence/spin_model.h"

#include "coherence/errors.h"
#include "coherence/io.h"
#include "coherence/kernels.h"
#include "coherence/random.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace coh {

UnitConvention parse_unit_convention(std::string_view name) {
    if (name == "text") return UnitConvention::Text;
    if (name == "figure") return UnitConvention::Figure;
    throw InvalidArgument("unknown unit convention '" + std::string(name) + "' (expected text or figure)");
}

std::string_view unit_convention_name(UnitConvention c) {
    return c == UnitConvention::Text ? "text" : "figure";
}

void ModelParams::validate() const {
    if (n_particles < 2) throw InvalidArgument("need at least two particles");
    if (dimension < 1) throw InvalidArgument("dimension must be >= 1");
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw InvalidArgument("epsilon must be positive");
    if (!(eta > 0.0) || !std::isfinite(eta)) throw InvalidArgument("eta must be positive");
    if (!(density > 0.0) || !std::isfinite(density)) throw InvalidArgument("density must be positive");
    if (!amplitudes.empty()) {
        if (amplitudes.size() != n_particles) throw InvalidArgument("amplitude count does not match particle count");
        for (std::size_t k = 0; k < amplitudes.size(); ++k) {
            const double norm = std::norm(amplitudes[k].a) + std::norm(amplitudes[k].b);
            if (std::abs(norm - 1.0) > 1e-12) {
                throw InvalidArgument("amplitudes of particle " + std::to_string(k) + " are not normalised");
            }
        }
    }
}

Amplitude ModelParams::amplitude(std::size_t k) const { return amplitudes.empty() ? Amplitude{} : amplitudes.at(k); }

bool ModelParams::full_superposition() const {
    constexpr double kTol = 1e-14;
    return std::all_of(amplitudes.begin(), amplitudes.end(), [](const Amplitude& amp) {
        return std::abs(std::norm(amp.a) - 0.5) < kTol && std::abs(std::norm(amp.b) - 0.5) < kTol;
    });
}

double ModelParams::box_side() const {
    return std::pow(static_cast<double>(n_particles) / density, 1.0 / dimension);
}

double ModelParams::simulation_time_rate(UnitConvention convention) const {
    const double exponent = epsilon / dimension;
    const double rate = eta * std::pow(density, exponent);
    return convention == UnitConvention::Text ? rate : rate / std::pow(2.0, exponent);
}

namespace {

Eigen::MatrixXd couplings_from_positions(const ModelParams& p, std::span<const double> pos) {
    const auto n = static_cast<Eigen::Index>(p.n_particles);
    const auto d = static_cast<std::size_t>(p.dimension);
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j) {
            double r2 = 0.0;
            for (std::size_t c = 0; c < d; ++c) {
                const double dx = pos[static_cast<std::size_t>(i) * d + c] - pos[static_cast<std::size_t>(j) * d + c];
                r2 += dx * dx;
            }
            const double r = std::sqrt(r2);
            if (!(r > 0.0)) throw DegenerateGeometry("particles coincide; coupling diverges");
            g(i, j) = g(j, i) = p.eta / std::pow(r, p.epsilon);
        }
    return g;
}

void check_index(const SpinEnsemble& e, std::size_t l) {
    if (l >= e.size()) throw InvalidArgument("particle index " + std::to_string(l) + " out of range");
}

void check_time(double t) {
    if (!(t >= 0.0) || !std::isfinite(t)) throw InvalidArgument("time must be finite and non-negative");
}

} // namespace

SpinEnsemble::SpinEnsemble(ModelParams params, std::vector<double> positions, std::uint64_t seed)
    : params_(std::move(params)), positions_(std::move(positions)), seed_(seed) {
    params_.validate();
    if (positions_.size() != params_.n_particles * static_cast<std::size_t>(params_.dimension)) {
        throw InvalidArgument("position array does not hold N x D coordinates");
    }
    couplings_ = couplings_from_positions(params_, positions_);
}

SpinEnsemble SpinEnsemble::with_couplings(Eigen::MatrixXd couplings) const {
    const auto n = static_cast<Eigen::Index>(size());
    if (couplings.rows() != n || couplings.cols() != n) throw InvalidArgument("coupling matrix has wrong shape");
    for (Eigen::Index i = 0; i < n; ++i) {
        if (couplings(i, i) != 0.0) throw InvalidArgument("coupling matrix diagonal must be zero");
        for (Eigen::Index j = 0; j < n; ++j)
            if (couplings(i, j) != couplings(j, i) || !std::isfinite(couplings(i, j)) || couplings(i, j) < 0.0)
                throw InvalidArgument("coupling matrix must be symmetric, finite and non-negative");
    }
    SpinEnsemble copy = *this;
    copy.couplings_ = std::move(couplings);
    return copy;
}

SpinEnsemble SpinEnsemble::with_amplitudes(std::vector<Amplitude> amplitudes) const {
    SpinEnsemble copy = *this;
    copy.params_.amplitudes = std::move(amplitudes);
    copy.params_.validate();
    return copy;
}

std::span<const double> SpinEnsemble::position(std::size_t i) const {
    const auto d = static_cast<std::size_t>(params_.dimension);
    return std::span<const double>(positions_).subspan(i * d, d);
}

SpinEnsemble sample_ensemble(const ModelParams& params, std::uint64_t seed) {
    params.validate();
    const std::size_t n = params.n_particles;
    const auto d = static_cast<std::size_t>(params.dimension);
    const double side = params.box_side();
    const double r_min = 1e-6 * side;
    constexpr int kRetryCap = 100;

    UniformStream rng(seed);
    std::vector<double> pos(n * d);
    for (std::size_t i = 0; i < n; ++i) {
        int attempt = 0;
        while (true) {
            for (std::size_t c = 0; c < d; ++c) pos[i * d + c] = side * rng.next();
            bool clear = true;
            for (std::size_t j = 0; j < i && clear; ++j) {
                double r2 = 0.0;
                for (std::size_t c = 0; c < d; ++c) {
                    const double dx = pos[i * d + c] - pos[j * d + c];
                    r2 += dx * dx;
                }
                clear = std::sqrt(r2) >= r_min;
            }
            if (clear) break;
            if (++attempt >= kRetryCap) {
                throw DegenerateGeometry("could not place particle " + std::to_string(i) +
                                         " at the minimum pair distance after 100 draws");
            }
        }
    }
    return SpinEnsemble(params, std::move(pos), seed);
}

Complex offdiag_z(const SpinEnsemble& ensemble, std::size_t l, double t) {
    check_index(ensemble, l);
    check_time(t);
    const auto& p = ensemble.params();
    const Amplitude al = p.amplitude(l);
    Complex z = al.a * std::conj(al.b);
    for (std::size_t k = 0; k < ensemble.size(); ++k) {
        if (k == l) continue;
        const Amplitude ak = p.amplitude(k);
        const double phase = (2.0 * ensemble.coupling(l, k)) * t;
        z *= std::norm(ak.a) * std::polar(1.0, -phase) + std::norm(ak.b) * std::polar(1.0, phase);
    }
    return z;
}

SingleParticleState reduced_density(const SpinEnsemble& ensemble, std::size_t l, double t) {
    const Complex z = offdiag_z(ensemble, l, t);
    const Amplitude al = ensemble.params().amplitude(l);
    const double pa = std::norm(al.a);
    const double pb = std::norm(al.b);
    Eigen::Matrix2cd m;
    m << pa, z, std::conj(z), pb;
    const double root = std::sqrt(std::max(0.0, 1.0 - 4.0 * (pa * pb - std::norm(z))));
    return SingleParticleState{z, DensityMatrix(m), {0.5 + 0.5 * root, 0.5 - 0.5 * root}};
}

Eigen::Matrix2cd spin_basis_unitary(double theta, double phi) {
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    Eigen::Matrix2cd u;
    u << c, std::polar(s, -phi), std::polar(s, phi), -c;
    return u;
}

DensityMatrix reduced_density_rotated(const SpinEnsemble& ensemble, std::size_t l, double t, double theta,
                                      double phi) {
    const Complex z = offdiag_z(ensemble, l, t);
    const Amplitude al = ensemble.params().amplitude(l);
    const double pa = std::norm(al.a);
    const double pb = std::norm(al.b);
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    const Complex e1 = std::polar(1.0, -phi);
    const Complex e2 = std::polar(1.0, -2.0 * phi);
    const double cross = s * c * 2.0 * (e1 * z).real();  // sc (e^-i phi z + e^i phi z*)
    const double top = c * c * pa + s * s * pb + cross;
    const double bottom = s * s * pa + c * c * pb - cross;
    const Complex off = e1 * (s * c * (pa - pb)) + e2 * (s * s) * z - (c * c) * std::conj(z);
    Eigen::Matrix2cd m;
    m << top, off, std::conj(off), bottom;
    return DensityMatrix(m);
}

CoherenceTrace xi_re_trace(const SpinEnsemble& ensemble, std::span<const double> times) {
    if (times.empty()) throw InvalidArgument("empty time grid");
    for (std::size_t i = 0; i < times.size(); ++i) {
        check_time(times[i]);
        if (i > 0 && !(times[i] > times[i - 1])) throw InvalidArgument("time grid must be strictly increasing");
    }
    const auto& p = ensemble.params();
    const std::size_t n = ensemble.size();
    const std::size_t nt = times.size();
    const bool fast = p.full_superposition();

    CoherenceTrace trace;
    trace.times.assign(times.begin(), times.end());
    trace.values.assign(nt, 0.0);

    std::vector<double> row(n - 1), bias(n - 1), re(nt), im(nt);
    for (std::size_t l = 0; l < n; ++l) {
        std::size_t m = 0;
        for (std::size_t k = 0; k < n; ++k) {
            if (k == l) continue;
            row[m] = ensemble.coupling(l, k);
            const Amplitude ak = p.amplitude(k);
            bias[m] = std::norm(ak.b) - std::norm(ak.a);
            ++m;
        }
        if (fast) {
            simd::cos_product(row, times, re);
            for (std::size_t i = 0; i < nt; ++i) trace.values[i] += std::abs(re[i]);
        } else {
            simd::phase_product(row, bias, times, re, im);
            const Amplitude al = p.amplitude(l);
            const double ab = std::norm(al.a) * std::norm(al.b);
            for (std::size_t i = 0; i < nt; ++i) {
                const double z2 = ab * (re[i] * re[i] + im[i] * im[i]);
                trace.values[i] += std::sqrt(std::max(0.0, 1.0 - 4.0 * (ab - z2)));
            }
        }
    }
    for (double& v : trace.values) v = std::clamp(v / static_cast<double>(n), 0.0, 1.0);
    return trace;
}

namespace {

/// psi(s) for every basis state s; bit k set means particle k is in |->.
Eigen::VectorXcd evolve_state(const SpinEnsemble& ensemble, double t, std::size_t cap) {
    const std::size_t n = ensemble.size();
    if (n > cap) {
        throw CapacityError("oracle needs " + std::to_string(n) + " particles, cap is " + std::to_string(cap));
    }
    check_time(t);
    const auto& p = ensemble.params();
    const std::size_t states = std::size_t{1} << n;
    Eigen::VectorXcd psi(static_cast<Eigen::Index>(states));
    std::vector<double> spin(n);
    for (std::size_t s = 0; s < states; ++s) {
        Complex amp{1.0, 0.0};
        for (std::size_t k = 0; k < n; ++k) {
            const bool down = (s >> k) & 1U;
            spin[k] = down ? -1.0 : 1.0;
            const Amplitude ak = p.amplitude(k);
            amp *= down ? ak.b : ak.a;
        }
        double energy = 0.0;
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t i = j + 1; i < n; ++i) energy += ensemble.coupling(i, j) * spin[j] * spin[i];
        psi(static_cast<Eigen::Index>(s)) = amp * std::polar(1.0, -energy * t);
    }
    return psi;
}

Eigen::Matrix2cd trace_to_particle(const Eigen::VectorXcd& psi, std::size_t n, std::size_t l) {
    const std::size_t states = std::size_t{1} << n;
    const std::size_t bit = std::size_t{1} << l;
    Eigen::Matrix2cd r = Eigen::Matrix2cd::Zero();
    for (std::size_t s = 0; s < states; ++s) {
        if (s & bit) continue;
        const Complex up = psi(static_cast<Eigen::Index>(s));
        const Complex dn = psi(static_cast<Eigen::Index>(s | bit));
        r(0, 0) += std::norm(up);
        r(0, 1) += up * std::conj(dn);
        r(1, 1) += std::norm(dn);
    }
    r(1, 0) = std::conj(r(0, 1));
    return r;
}

} // namespace

DensityMatrix brute_force_reduced_density(const SpinEnsemble& ensemble, std::size_t l, double t,
                                          std::size_t oracle_cap) {
    check_index(ensemble, l);
    const auto psi = evolve_state(ensemble, t, oracle_cap);
    return DensityMatrix(trace_to_particle(psi, ensemble.size(), l), Tolerances{.structural = 1e-10});
}

double brute_force_xi_re(const SpinEnsemble& ensemble, double t, std::size_t oracle_cap) {
    const auto psi = evolve_state(ensemble, t, oracle_cap);
    double acc = 0.0;
    for (std::size_t l = 0; l < ensemble.size(); ++l) {
        acc += coherence(DensityMatrix(trace_to_particle(psi, ensemble.size(), l), Tolerances{.structural = 1e-10}));
    }
    return acc / static_cast<double>(ensemble.size());
}

std::vector<double> make_time_grid(const TimeGridSpec& spec) {
    if (spec.log_points == 1 || spec.linear_points == 1) throw InvalidArgument("grid segments need 0 or >= 2 points");
    if (spec.log_points > 0 && !(spec.log_start > 0.0 && spec.log_end > spec.log_start))
        throw InvalidArgument("log grid needs 0 < start < end");
    if (spec.linear_points > 0 && !(spec.linear_end > 0.0)) throw InvalidArgument("linear grid end must be positive");
    if (!(spec.t_ref > 0.0)) throw InvalidArgument("t_ref must be positive");
    std::vector<double> grid;
    grid.reserve(spec.log_points + spec.linear_points);
    const double ratio = std::log(spec.log_end / spec.log_start);
    for (std::size_t i = 0; i < spec.log_points; ++i) {
        const double f = static_cast<double>(i) / static_cast<double>(spec.log_points - 1);
        const double t = i + 1 == spec.log_points ? spec.log_end : spec.log_start * std::exp(ratio * f);
        grid.push_back(spec.t_ref * t);
    }
    for (std::size_t i = 0; i < spec.linear_points; ++i) {
        const double f = static_cast<double>(i) / static_cast<double>(spec.linear_points - 1);
        grid.push_back(spec.t_ref * spec.linear_end * f);
    }
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    if (grid.empty()) throw InvalidArgument("empty time grid");
    return grid;
}

void write_ensemble(std::ostream& out, const SpinEnsemble& e) {
    const auto& p = e.params();
    out << "ensemble " << p.n_particles << ' ' << p.dimension << ' ' << fmt_double(p.epsilon) << ' '
        << fmt_double(p.eta) << ' ' << fmt_double(p.density) << ' ' << e.seed() << '\n';
    for (std::size_t i = 0; i < e.size(); ++i) {
        const auto row = e.position(i);
        for (std::size_t c = 0; c < row.size(); ++c) out << (c ? " " : "") << fmt_double(row[c]);
        out << '\n';
    }
    if (!p.amplitudes.empty()) {
        out << "amplitudes\n";
        for (const auto& a : p.amplitudes) {
            out << fmt_double(a.a.real()) << ' ' << fmt_double(a.a.imag()) << ' ' << fmt_double(a.b.real()) << ' '
                << fmt_double(a.b.imag()) << '\n';
        }
    }
}

SpinEnsemble read_ensemble(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    auto next_line = [&]() -> bool {
        while (std::getline(in, line)) {
            ++line_no;
            const auto pos = line.find_first_not_of(" \t\r");
            if (pos == std::string::npos || line[pos] == '#') continue;
            return true;
        }
        return false;
    };
    auto fail = [&](const std::string& what) {
        return ParseError("ensemble line " + std::to_string(line_no) + ": " + what);
    };
    auto read_numbers = [&](std::size_t count) {
        std::istringstream row(line);
        std::vector<double> v(count);
        std::string tok;
        for (std::size_t c = 0; c < count; ++c) {
            if (!(row >> tok) || !parse_double(tok, v[c])) throw fail("expected " + std::to_string(count) + " numbers");
        }
        if (row >> tok) throw fail("too many fields");
        return v;
    };

    if (!next_line()) throw ParseError("empty ensemble file");
    std::istringstream head(line);
    std::string tag, eps_s, eta_s, dens_s;
    long long n = 0, d = 0;
    std::uint64_t seed = 0;
    if (!(head >> tag >> n >> d >> eps_s >> eta_s >> dens_s >> seed) || tag != "ensemble" || n < 2 || d < 1)
        throw fail("expected 'ensemble N D epsilon eta density seed'");
    ModelParams p;
    p.n_particles = static_cast<std::size_t>(n);
    p.dimension = static_cast<int>(d);
    if (!parse_double(eps_s, p.epsilon) || !parse_double(eta_s, p.eta) || !parse_double(dens_s, p.density))
        throw fail("malformed model parameter");

    std::vector<double> pos;
    pos.reserve(p.n_particles * static_cast<std::size_t>(d));
    for (std::size_t i = 0; i < p.n_particles; ++i) {
        if (!next_line()) throw ParseError("ensemble file ends before all positions");
        const auto row = read_numbers(static_cast<std::size_t>(d));
        pos.insert(pos.end(), row.begin(), row.end());
    }
    if (next_line()) {
        if (line.find("amplitudes") == std::string::npos) throw fail("expected 'amplitudes' or end of file");
        for (std::size_t i = 0; i < p.n_particles; ++i) {
            if (!next_line()) throw ParseError("ensemble file ends before all amplitudes");
            const auto v = read_numbers(4);
            p.amplitudes.push_back(Amplitude{Complex(v[0], v[1]), Complex(v[2], v[3])});
        }
        if (next_line()) throw fail("trailing content");
    }
    try {
        return SpinEnsemble(std::move(p), std::move(pos), seed);
    } catch (const InvalidArgument& e) {
        throw ParseError(std::string("invalid ensemble: ") + e.what());
    }
}

SpinEnsemble read_ensemble_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    return read_ensemble(in);
}

std::string trace_to_csv(const CoherenceTrace& trace, std::span<const std::string> comments) {
    std::string out;
    for (const auto& c : comments) out += "# " + c + "\n";
    out += "t,xi_re\n";
    for (std::size_t i = 0; i < trace.times.size(); ++i) {
        out += fmt_double(trace.times[i]);
        out += ',';
        out += fmt_double(trace.values[i]);
        out += '\n';
    }
    return out;
}

CoherenceTrace trace_from_csv(std::string_view text) {
    const CsvTable table = parse_csv(text);
    CoherenceTrace trace;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        trace.times.push_back(table.number(r, "t"));
        trace.values.push_back(table.number(r, "xi_re"));
    }
    for (std::size_t i = 1; i < trace.times.size(); ++i)
        if (!(trace.times[i] > trace.times[i - 1])) throw ParseError("trace times are not strictly increasing");
    return trace;
}

} // namespace coh
