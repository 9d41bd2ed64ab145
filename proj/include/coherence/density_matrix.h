// density_matrix.h - density-matrix primitives and basis-independent coherence/entropy metrics
#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace coh {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;

/// Numerical tolerances for the density-matrix checks. Defaults are fixed
/// but every entry point accepts an override.
struct Tolerances {
    double structural = 1e-12;     ///< Hermiticity and trace checks
    double spectral = 1e-10;       ///< spectrum sum and reconstruction
    double negative_clamp = 1e-9;  ///< eigenvalues in [-clamp, 0) are treated as 0
};

/// Hermitian, unit-trace complex matrix. Construction validates Hermiticity
/// and trace; positivity is checked whenever the spectrum is computed.
class DensityMatrix {
public:
    explicit DensityMatrix(ComplexMatrix entries, const Tolerances& tol = {});

    /// Diagonal state with the given probabilities (must sum to one).
    static DensityMatrix diagonal(std::span<const double> probabilities, const Tolerances& tol = {});
    /// Maximally mixed state 1/dim.
    static DensityMatrix maximally_mixed(std::size_t dim);
    /// Projector onto a (not necessarily normalised) state vector.
    static DensityMatrix pure(const Eigen::VectorXcd& state);

    std::size_t dim() const noexcept { return static_cast<std::size_t>(m_.rows()); }
    const ComplexMatrix& matrix() const noexcept { return m_; }
    Complex operator()(std::size_t i, std::size_t j) const { return m_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)); }

private:
    ComplexMatrix m_;
};

/// Full real spectrum sorted descending; eigenvalues()[0] is lambda_max.
struct SpectralDecomposition {
    std::vector<double> eigenvalues;
    std::size_t dim = 0;

    double lambda_max() const { return eigenvalues.front(); }
};

/// Idealistic (whole-system) and realistic (per-subsystem) metrics.
struct MetricsReport {
    double xi_id = 0.0;
    double xi_re = 0.0;
    double s_id = 0.0;
    double s_re = 0.0;
    double mutual_information = 0.0;   ///< s_re - s_id
    double mutual_entanglement = 0.0;  ///< xi_id - xi_re
};

SpectralDecomposition eigen_spectrum(const DensityMatrix& rho, const Tolerances& tol = {});

/// Coherence from lambda_max: (N/(N-1)) (lambda_max - 1/N).
double coherence(const SpectralDecomposition& spectrum);
double coherence(const DensityMatrix& rho, const Tolerances& tol = {});

/// von Neumann entropy in nats, 0 ln 0 = 0.
double von_neumann_entropy(const SpectralDecomposition& spectrum, const Tolerances& tol = {});
double von_neumann_entropy(const DensityMatrix& rho, const Tolerances& tol = {});

/// Maximum number of matrix entries tensor_product will allocate (1024 x 1024).
inline constexpr std::size_t kDefaultMaxEntries = std::size_t{1} << 20;

DensityMatrix tensor_product(const DensityMatrix& a, const DensityMatrix& b,
                             std::size_t max_entries = kDefaultMaxEntries);

/// Reduced state of subsystem `keep` for a Kronecker-ordered partition
/// (subsystem 0 is the most significant index).
DensityMatrix partial_trace(const DensityMatrix& rho, std::span<const std::size_t> subsystem_dims,
                            std::size_t keep);

MetricsReport metrics_report(const DensityMatrix& full, std::span<const std::size_t> partition,
                             const Tolerances& tol = {});

// Text format: "dim N" followed by N*N lines "i j re im".
DensityMatrix read_density_matrix(std::istream& in, const Tolerances& tol = {});
DensityMatrix read_density_matrix_file(const std::string& path, const Tolerances& tol = {});
void write_density_matrix(std::ostream& out, const DensityMatrix& rho);

} // namespace coh
