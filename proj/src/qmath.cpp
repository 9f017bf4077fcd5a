#include "multipath/qmath.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>

namespace multipath {

std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::NotSquare: return "NotSquare";
        case ErrorKind::NotHermitian: return "NotHermitian";
        case ErrorKind::NotPSD: return "NotPSD";
        case ErrorKind::DimensionMismatch: return "DimensionMismatch";
        case ErrorKind::BadDimension: return "BadDimension";
        case ErrorKind::ZeroProbabilityBlock: return "ZeroProbabilityBlock";
        case ErrorKind::ZeroProbabilityPair: return "ZeroProbabilityPair";
        case ErrorKind::NegativeRadicand: return "NegativeRadicand";
        case ErrorKind::IncompatibleMode: return "IncompatibleMode";
        case ErrorKind::BadGrid: return "BadGrid";
        case ErrorKind::GridTooCoarse: return "GridTooCoarse";
        case ErrorKind::AllZeroScan: return "AllZeroScan";
        case ErrorKind::BadSampleCount: return "BadSampleCount";
        case ErrorKind::OvershootBeyondTolerance: return "OvershootBeyondTolerance";
        case ErrorKind::BadPriors: return "BadPriors";
        case ErrorKind::DimensionTooLarge: return "DimensionTooLarge";
        case ErrorKind::Validation: return "Validation";
    }
    return "UnknownError";
}

namespace qmath {

namespace {

void require_square(const ComplexMatrix& m, const char* what) {
    if (m.rows() != m.cols() || m.rows() == 0) {
        throw Error(ErrorKind::NotSquare,
                    fmt::format("{} must be square and non-empty, got {}x{}", what, m.rows(),
                                m.cols()));
    }
}

void require_hermitian(const ComplexMatrix& m, const char* what) {
    const double defect = hermiticity_defect(m);
    if (!(defect <= kHermitianTol)) {
        throw Error(ErrorKind::NotHermitian,
                    fmt::format("{} has hermiticity defect {:.3e}, tolerance {:.1e}", what, defect,
                                kHermitianTol));
    }
}

}  // namespace

ComplexMatrix conjugate_transpose(const ComplexMatrix& m) { return m.adjoint(); }

ComplexMatrix symmetrized(const ComplexMatrix& m) {
    ComplexMatrix out = 0.5 * (m + m.adjoint());
    for (Eigen::Index i = 0; i < out.rows(); ++i) out(i, i) = Complex(out(i, i).real(), 0.0);
    return out;
}

double hermiticity_defect(const ComplexMatrix& m) {
    if (m.rows() != m.cols()) {
        throw Error(ErrorKind::NotSquare, fmt::format("hermiticity defect undefined for {}x{}",
                                                      m.rows(), m.cols()));
    }
    return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

HermitianCheckReport check_hermitian(const ComplexMatrix& m) {
    require_square(m, "matrix");
    HermitianCheckReport report;
    report.max_hermiticity_defect = hermiticity_defect(m);
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(symmetrized(m),
                                                        Eigen::EigenvaluesOnly);
    report.min_eigenvalue = solver.eigenvalues().minCoeff();
    report.trace_defect = std::abs(m.trace() - Complex(1.0, 0.0));
    return report;
}

std::vector<double> eigenvalues_hermitian(const ComplexMatrix& m) {
    require_square(m, "eigenvalue input");
    require_hermitian(m, "eigenvalue input");
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(symmetrized(m),
                                                        Eigen::EigenvaluesOnly);
    const auto& ev = solver.eigenvalues();
    return std::vector<double>(ev.data(), ev.data() + ev.size());  // already ascending
}

ComplexMatrix cholesky_psd(const ComplexMatrix& m) {
    require_square(m, "cholesky input");
    require_hermitian(m, "cholesky input");
    const ComplexMatrix a = symmetrized(m);
    const Eigen::Index n = a.rows();

    const double scale = std::max(1.0, a.diagonal().real().maxCoeff());
    {
        Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(a, Eigen::EigenvaluesOnly);
        const double min_eig = solver.eigenvalues().minCoeff();
        if (min_eig < -kPsdTol * scale) {
            throw Error(ErrorKind::NotPSD,
                        fmt::format("cholesky input has eigenvalue {:.6e} below -{:.1e}", min_eig,
                                    kPsdTol * scale));
        }
    }

    // Pivots this far below the diagonal scale are exact rank deficiency up to
    // roundoff; their whole residual column is zeroed.
    const double pivot_floor = 64.0 * std::numeric_limits<double>::epsilon() * scale;

    ComplexMatrix l = ComplexMatrix::Zero(n, n);
    for (Eigen::Index k = 0; k < n; ++k) {
        double d = a(k, k).real();
        for (Eigen::Index j = 0; j < k; ++j) d -= std::norm(l(k, j));
        if (d <= pivot_floor) continue;  // zero column
        const double pivot = std::sqrt(d);
        l(k, k) = pivot;
        for (Eigen::Index i = k + 1; i < n; ++i) {
            Complex v = a(i, k);
            for (Eigen::Index j = 0; j < k; ++j) v -= l(i, j) * std::conj(l(k, j));
            l(i, k) = v / pivot;
        }
    }
    return l;
}

ComplexMatrix partial_trace_second(const ComplexMatrix& joint, Eigen::Index dim_a,
                                   Eigen::Index dim_b) {
    if (dim_a < 1 || dim_b < 1) {
        throw Error(ErrorKind::BadDimension,
                    fmt::format("tensor factor dimensions must be positive, got {} and {}", dim_a,
                                dim_b));
    }
    require_square(joint, "partial trace input");
    if (joint.rows() != dim_a * dim_b) {
        throw Error(ErrorKind::DimensionMismatch,
                    fmt::format("joint matrix is {}x{} but factors give {}x{}", joint.rows(),
                                joint.cols(), dim_a * dim_b, dim_a * dim_b));
    }
    ComplexMatrix out = ComplexMatrix::Zero(dim_a, dim_a);
    for (Eigen::Index i = 0; i < dim_a; ++i)
        for (Eigen::Index j = 0; j < dim_a; ++j)
            for (Eigen::Index k = 0; k < dim_b; ++k) out(i, j) += joint(i * dim_b + k, j * dim_b + k);
    return out;
}

std::uint64_t mix_seed(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace qmath
}  // namespace multipath
