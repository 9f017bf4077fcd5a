#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <vector>

#include "multipath/error.hpp"

namespace multipath {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

namespace qmath {

// Tolerances shared by every consumer of the kernel. Inputs whose hermiticity
// defect stays below kHermitianTol are symmetrized before factorization;
// eigenvalues above -kPsdTol count as non-negative.
inline constexpr double kHermitianTol = 1e-9;
inline constexpr double kPsdTol = 1e-9;

struct HermitianCheckReport {
    double max_hermiticity_defect = 0.0;  // max_ij |m_ij - conj(m_ji)|
    double min_eigenvalue = 0.0;
    double trace_defect = 0.0;  // |tr(m) - 1|
};

ComplexMatrix conjugate_transpose(const ComplexMatrix& m);

// (m + m^dagger)/2; the diagonal comes out exactly real.
ComplexMatrix symmetrized(const ComplexMatrix& m);

double hermiticity_defect(const ComplexMatrix& m);

HermitianCheckReport check_hermitian(const ComplexMatrix& m);

// Ascending eigenvalues of a Hermitian matrix. Throws NotSquare/NotHermitian.
std::vector<double> eigenvalues_hermitian(const ComplexMatrix& m);

// Lower-triangular L with L L^dagger = m (entrywise within 1e-10 for PSD m).
// Singular PSD inputs are handled by a zero-pivot rule: a residual pivot
// indistinguishable from zero produces a zero column, which keeps the factor
// lower-triangular and the reconstruction identity intact.
ComplexMatrix cholesky_psd(const ComplexMatrix& m);

// Trace over the second tensor factor of a (dim_a*dim_b) square matrix:
// out[i][j] = sum_k joint[i*dim_b + k][j*dim_b + k].
ComplexMatrix partial_trace_second(const ComplexMatrix& joint, Eigen::Index dim_a,
                                   Eigen::Index dim_b);

// Stateless 64-bit mixer (splitmix64); used to derive independent seeds from
// a base seed and a counter.
std::uint64_t mix_seed(std::uint64_t x) noexcept;

}  // namespace qmath
}  // namespace multipath
