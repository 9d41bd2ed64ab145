// spin_model.h - closed Ising-coupled spin-1/2 ensemble and its exact reduced dynamics
#pragma once

#include "coherence/density_matrix.h"

#include <Eigen/Dense>

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace coh {

/// How simulation time T relates to real time t.
///  Text:   T = eta * n^(eps/D) * t
///  Figure: T = eta * n^(eps/D) * t / 2^(eps/D), a halved-pair-frequency scale.
enum class UnitConvention { Text, Figure };

UnitConvention parse_unit_convention(std::string_view name);
std::string_view unit_convention_name(UnitConvention c);

/// Initial single-particle state a|+> + b|->.
struct Amplitude {
    static constexpr double kHalfRoot = 0.70710678118654752440;
    Complex a{kHalfRoot, 0.0};
    Complex b{kHalfRoot, 0.0};
};

struct ModelParams {
    std::size_t n_particles = 2;
    int dimension = 1;
    double epsilon = 1.0;
    double eta = 1.0;       ///< coupling strength, rad s^-1 m^eps
    double density = 1.0;   ///< particles per m^D
    /// Per-particle amplitudes; empty means every particle starts in (|+> + |->)/sqrt 2.
    std::vector<Amplitude> amplitudes;

    /// Throws InvalidArgument on any violated invariant.
    void validate() const;
    Amplitude amplitude(std::size_t k) const;
    bool full_superposition() const;
    /// l = (N / n)^(1/D)
    double box_side() const;
    /// Factor r with T = r * t under the given convention.
    double simulation_time_rate(UnitConvention convention = UnitConvention::Text) const;
};

/// N fixed particles in a D-box with their pairwise couplings g_ij = eta / r_ij^eps.
class SpinEnsemble {
public:
    /// `positions` holds N rows of D coordinates, row-major.
    SpinEnsemble(ModelParams params, std::vector<double> positions, std::uint64_t seed);

    /// Copy whose coupling matrix is replaced (symmetric, zero diagonal). The
    /// positions are kept for reference only; used for commensurate fixtures.
    SpinEnsemble with_couplings(Eigen::MatrixXd couplings) const;
    /// Copy with new initial amplitudes.
    SpinEnsemble with_amplitudes(std::vector<Amplitude> amplitudes) const;

    const ModelParams& params() const noexcept { return params_; }
    std::size_t size() const noexcept { return params_.n_particles; }
    std::uint64_t seed() const noexcept { return seed_; }
    std::span<const double> positions() const noexcept { return positions_; }
    std::span<const double> position(std::size_t i) const;
    const Eigen::MatrixXd& couplings() const noexcept { return couplings_; }
    double coupling(std::size_t i, std::size_t j) const { return couplings_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)); }

private:
    ModelParams params_;
    std::vector<double> positions_;
    Eigen::MatrixXd couplings_;
    std::uint64_t seed_ = 0;
};

/// Uniform random placement seeded by `seed`. Points closer than 1e-6 * l to
/// an earlier point are redrawn, at most 100 times per point.
SpinEnsemble sample_ensemble(const ModelParams& params, std::uint64_t seed);

/// Off-diagonal element <+|rho_l|-> at real time t.
Complex offdiag_z(const SpinEnsemble& ensemble, std::size_t l, double t);

struct SingleParticleState {
    Complex z;
    DensityMatrix rho;
    std::array<double, 2> eigenvalues;  ///< descending
};

SingleParticleState reduced_density(const SpinEnsemble& ensemble, std::size_t l, double t);

/// Reduced matrix of particle l in the spin basis rotated by (theta, phi).
/// For full superpositions this is U rho_l U^dagger; in general it is
/// U rho_l^T U^dagger with U = [[cos th, e^-i phi sin th], [e^i phi sin th, -cos th]].
DensityMatrix reduced_density_rotated(const SpinEnsemble& ensemble, std::size_t l, double t, double theta,
                                      double phi);

/// The unitary of the rotated spin basis.
Eigen::Matrix2cd spin_basis_unitary(double theta, double phi);

struct CoherenceTrace {
    std::vector<double> times;
    std::vector<double> values;
};

/// Realistic coherence at each real time in `times` (strictly increasing, >= 0).
CoherenceTrace xi_re_trace(const SpinEnsemble& ensemble, std::span<const double> times);

/// Default oracle cap: 2^14 amplitudes.
inline constexpr std::size_t kDefaultOracleCap = 14;

/// Evolves the full 2^N state vector and traces down to particle l.
DensityMatrix brute_force_reduced_density(const SpinEnsemble& ensemble, std::size_t l, double t,
                                          std::size_t oracle_cap = kDefaultOracleCap);

/// Realistic coherence from the brute-force state vector (all particles at once).
double brute_force_xi_re(const SpinEnsemble& ensemble, double t, std::size_t oracle_cap = kDefaultOracleCap);

struct TimeGridSpec {
    std::size_t log_points = 512;
    double log_start = 1e-3;
    double log_end = 20.0;
    std::size_t linear_points = 512;
    double linear_end = 5.0;
    double t_ref = 1.0;
};

/// Sorted union of the log-spaced and linear grids (scaled by t_ref), exact duplicates removed.
std::vector<double> make_time_grid(const TimeGridSpec& spec = {});

// Ensemble text format:
//   ensemble <N> <D> <epsilon> <eta> <density> <seed>
//   N rows of D coordinates
//   optional "amplitudes" line followed by N rows "a_re a_im b_re b_im"
void write_ensemble(std::ostream& out, const SpinEnsemble& ensemble);
SpinEnsemble read_ensemble(std::istream& in);
SpinEnsemble read_ensemble_file(const std::string& path);

/// CSV with header "t,xi_re" at 17 significant digits. Comment lines are
/// written first, each prefixed with '#'.
std::string trace_to_csv(const CoherenceTrace& trace, std::span<const std::string> comments = {});
CoherenceTrace trace_from_csv(std::string_view text);

} // namespace coh
