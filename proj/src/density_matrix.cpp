// density_matrix.cpp - spectra, coherence, entropy, tensor products and partial traces
#include "coherence/density_matrix.h"

#include "coherence/errors.h"
#include "coherence/io.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

namespace coh {

namespace {

void check_structure(const ComplexMatrix& m, const Tolerances& tol) {
    if (m.rows() == 0) throw InvalidArgument("density matrix has dimension 0");
    if (m.rows() != m.cols()) throw InvalidArgument("density matrix is not square");
    const double h = (m - m.adjoint()).cwiseAbs().maxCoeff();
    if (h > tol.structural) {
        std::ostringstream os;
        os << "matrix is not Hermitian (max |rho - rho^dagger| = " << h << ")";
        throw InvalidState(os.str());
    }
    const double tr = m.trace().real();
    if (std::abs(tr - 1.0) > tol.structural) {
        std::ostringstream os;
        os << "trace is " << fmt_double(tr) << ", expected 1";
        throw InvalidState(os.str());
    }
}

} // namespace

DensityMatrix::DensityMatrix(ComplexMatrix entries, const Tolerances& tol) : m_(std::move(entries)) {
    check_structure(m_, tol);
}

DensityMatrix DensityMatrix::diagonal(std::span<const double> probabilities, const Tolerances& tol) {
    const auto n = static_cast<Eigen::Index>(probabilities.size());
    ComplexMatrix m = ComplexMatrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) m(i, i) = probabilities[static_cast<std::size_t>(i)];
    return DensityMatrix(std::move(m), tol);
}

DensityMatrix DensityMatrix::maximally_mixed(std::size_t dim) {
    if (dim == 0) throw InvalidArgument("dimension must be positive");
    const auto n = static_cast<Eigen::Index>(dim);
    ComplexMatrix m = ComplexMatrix::Identity(n, n) / static_cast<double>(dim);
    return DensityMatrix(std::move(m));
}

DensityMatrix DensityMatrix::pure(const Eigen::VectorXcd& state) {
    const double norm = state.norm();
    if (state.size() == 0 || norm == 0.0) throw InvalidArgument("pure state needs a nonzero vector");
    const Eigen::VectorXcd v = state / norm;
    ComplexMatrix m = v * v.adjoint();
    // Rank-one outer products are Hermitian only up to rounding in the diagonal phase.
    m = 0.5 * (m + m.adjoint()).eval();
    return DensityMatrix(std::move(m));
}

SpectralDecomposition eigen_spectrum(const DensityMatrix& rho, const Tolerances& tol) {
    SpectralDecomposition out;
    out.dim = rho.dim();
    if (out.dim == 1) {
        out.eigenvalues = {rho(0, 0).real()};
        return out;
    }
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(rho.matrix(), Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) throw InvalidState("Hermitian eigen-solve did not converge");
    const Eigen::VectorXd& ev = solver.eigenvalues();
    out.eigenvalues.assign(ev.data(), ev.data() + ev.size());
    std::sort(out.eigenvalues.begin(), out.eigenvalues.end(), std::greater<>());
    if (out.eigenvalues.back() < -tol.negative_clamp) {
        std::ostringstream os;
        os << "matrix is not positive semidefinite (eigenvalue " << out.eigenvalues.back() << ")";
        throw InvalidState(os.str());
    }
    return out;
}

double coherence(const SpectralDecomposition& spectrum) {
    if (spectrum.dim < 2) throw InvalidArgument("coherence needs dimension >= 2");
    const double n = static_cast<double>(spectrum.dim);
    double xi = n / (n - 1.0) * (spectrum.lambda_max() - 1.0 / n);
    constexpr double kEdge = 1e-12;
    if (xi < 0.0 && xi > -kEdge) xi = 0.0;
    if (xi > 1.0 && xi < 1.0 + kEdge) xi = 1.0;
    return xi;
}

double coherence(const DensityMatrix& rho, const Tolerances& tol) {
    if (rho.dim() < 2) throw InvalidArgument("coherence needs dimension >= 2");
    return coherence(eigen_spectrum(rho, tol));
}

double von_neumann_entropy(const SpectralDecomposition& spectrum, const Tolerances& tol) {
    double s = 0.0;
    for (double lambda : spectrum.eigenvalues) {
        if (lambda < -tol.negative_clamp) throw InvalidState("negative eigenvalue in entropy");
        if (lambda <= 0.0) continue;
        s -= lambda * std::log(lambda);
    }
    return std::max(s, 0.0);
}

double von_neumann_entropy(const DensityMatrix& rho, const Tolerances& tol) {
    return von_neumann_entropy(eigen_spectrum(rho, tol), tol);
}

DensityMatrix tensor_product(const DensityMatrix& a, const DensityMatrix& b, std::size_t max_entries) {
    const std::size_t dim = a.dim() * b.dim();
    if (dim != 0 && dim > max_entries / dim) {
        throw CapacityError("tensor product of dimension " + std::to_string(dim) + " exceeds the entry cap");
    }
    const auto na = static_cast<Eigen::Index>(a.dim());
    const auto nb = static_cast<Eigen::Index>(b.dim());
    ComplexMatrix m(na * nb, na * nb);
    for (Eigen::Index i = 0; i < na; ++i)
        for (Eigen::Index j = 0; j < na; ++j) m.block(i * nb, j * nb, nb, nb) = a.matrix()(i, j) * b.matrix();
    // Products of two unit traces drift by a few ulp; tolerance is loosened accordingly.
    return DensityMatrix(std::move(m), Tolerances{.structural = 1e-11});
}

DensityMatrix partial_trace(const DensityMatrix& rho, std::span<const std::size_t> subsystem_dims,
                            std::size_t keep) {
    if (subsystem_dims.empty()) throw InvalidArgument("empty partition");
    if (keep >= subsystem_dims.size()) throw InvalidArgument("kept subsystem index out of range");
    std::size_t total = 1;
    for (std::size_t d : subsystem_dims) {
        if (d == 0) throw InvalidArgument("subsystem dimension must be positive");
        total *= d;
    }
    if (total != rho.dim()) {
        throw InvalidArgument("partition product " + std::to_string(total) + " does not match dimension " +
                              std::to_string(rho.dim()));
    }
    std::size_t left = 1, right = 1;
    for (std::size_t k = 0; k < keep; ++k) left *= subsystem_dims[k];
    for (std::size_t k = keep + 1; k < subsystem_dims.size(); ++k) right *= subsystem_dims[k];
    const std::size_t dk = subsystem_dims[keep];

    const auto& m = rho.matrix();
    ComplexMatrix out = ComplexMatrix::Zero(static_cast<Eigen::Index>(dk), static_cast<Eigen::Index>(dk));
    for (std::size_t x = 0; x < dk; ++x)
        for (std::size_t y = 0; y < dk; ++y) {
            Complex acc{0.0, 0.0};
            for (std::size_t a = 0; a < left; ++a)
                for (std::size_t b = 0; b < right; ++b) {
                    const auto i = static_cast<Eigen::Index>((a * dk + x) * right + b);
                    const auto j = static_cast<Eigen::Index>((a * dk + y) * right + b);
                    acc += m(i, j);
                }
            out(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(y)) = acc;
        }
    out = 0.5 * (out + out.adjoint()).eval();
    return DensityMatrix(std::move(out), Tolerances{.structural = 1e-10});
}

MetricsReport metrics_report(const DensityMatrix& full, std::span<const std::size_t> partition,
                             const Tolerances& tol) {
    MetricsReport r;
    const auto spectrum = eigen_spectrum(full, tol);
    r.xi_id = coherence(spectrum);
    r.s_id = von_neumann_entropy(spectrum, tol);
    double xi_sum = 0.0;
    double s_sum = 0.0;
    for (std::size_t k = 0; k < partition.size(); ++k) {
        const auto sub = eigen_spectrum(partial_trace(full, partition, k), tol);
        xi_sum += coherence(sub);
        s_sum += von_neumann_entropy(sub, tol);
    }
    r.xi_re = xi_sum / static_cast<double>(partition.size());
    r.s_re = s_sum;
    r.mutual_information = r.s_re - r.s_id;
    r.mutual_entanglement = r.xi_id - r.xi_re;
    return r;
}

DensityMatrix read_density_matrix(std::istream& in, const Tolerances& tol) {
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
    auto fail = [&](const std::string& what) -> ParseError {
        return ParseError("line " + std::to_string(line_no) + ": " + what);
    };

    if (!next_line()) throw ParseError("empty density-matrix file");
    std::istringstream head(line);
    std::string tag;
    long long n = 0;
    if (!(head >> tag >> n) || tag != "dim" || n <= 0) throw fail("expected header 'dim N'");
    if (n > 1024) throw CapacityError("density matrix dimension " + std::to_string(n) + " exceeds 1024");

    const auto dim = static_cast<Eigen::Index>(n);
    ComplexMatrix m = ComplexMatrix::Zero(dim, dim);
    std::vector<char> seen(static_cast<std::size_t>(dim * dim), 0);
    for (long long k = 0; k < n * n; ++k) {
        if (!next_line()) throw ParseError("expected " + std::to_string(n * n) + " entries, found " + std::to_string(k));
        std::istringstream row(line);
        long long i = 0, j = 0;
        std::string re_s, im_s, extra;
        if (!(row >> i >> j >> re_s >> im_s) || (row >> extra)) throw fail("expected 'i j re im'");
        if (i < 0 || j < 0 || i >= n || j >= n) throw fail("index out of range");
        double re = 0.0, im = 0.0;
        if (!parse_double(re_s, re) || !parse_double(im_s, im)) throw fail("malformed number");
        auto& flag = seen[static_cast<std::size_t>(i * n + j)];
        if (flag) throw fail("duplicate entry");
        flag = 1;
        m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = Complex(re, im);
    }
    if (next_line()) throw fail("trailing content after matrix entries");
    try {
        return DensityMatrix(std::move(m), tol);
    } catch (const InvalidState& e) {
        throw ParseError(std::string("rejected matrix: ") + e.what());
    }
}

DensityMatrix read_density_matrix_file(const std::string& path, const Tolerances& tol) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    return read_density_matrix(in, tol);
}

void write_density_matrix(std::ostream& out, const DensityMatrix& rho) {
    const std::size_t n = rho.dim();
    out << "dim " << n << '\n';
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const Complex v = rho(i, j);
            out << i << ' ' << j << ' ' << fmt_double(v.real()) << ' ' << fmt_double(v.imag()) << '\n';
        }
}

} // namespace coh
