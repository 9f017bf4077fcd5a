#include "multipath/states.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <set>

namespace multipath {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void require_paths(Eigen::Index n, const char* what) {
    if (n < 2) {
        throw Error(ErrorKind::BadDimension,
                    fmt::format("{} needs at least 2 paths, got {}", what, n));
    }
}

std::mt19937_64 seeded_engine(std::uint64_t seed) { return std::mt19937_64(seed); }

ComplexVector gaussian_vector(Eigen::Index n, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    ComplexVector v(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double re = normal(rng);
        const double im = normal(rng);
        v(i) = Complex(re, im);
    }
    return v;
}

}  // namespace

PureQuanton::PureQuanton(ComplexVector amplitudes) : c_(std::move(amplitudes)) {
    require_paths(c_.size(), "pure quanton");
    const double defect = std::abs(c_.squaredNorm() - 1.0);
    if (defect > kUnitNormTol) {
        throw Error(ErrorKind::Validation,
                    fmt::format("pure quanton norm defect {:.3e} exceeds {:.1e}; "
                                "sum of |c_i|^2 must be 1",
                                defect, kUnitNormTol));
    }
}

PureQuanton PureQuanton::normalized(ComplexVector amplitudes) {
    require_paths(amplitudes.size(), "pure quanton");
    const double norm = amplitudes.norm();
    if (norm <= 0.0 || !std::isfinite(norm)) {
        throw Error(ErrorKind::Validation, "cannot normalize a zero or non-finite amplitude vector");
    }
    return PureQuanton(ComplexVector(amplitudes / norm));
}

QuantonState::QuantonState(ComplexMatrix rho) {
    if (rho.rows() != rho.cols()) {
        throw Error(ErrorKind::NotSquare, fmt::format("density matrix must be square, got {}x{}",
                                                      rho.rows(), rho.cols()));
    }
    require_paths(rho.rows(), "quanton state");
    const double herm_defect = qmath::hermiticity_defect(rho);
    if (herm_defect > qmath::kHermitianTol) {
        throw Error(ErrorKind::NotHermitian,
                    fmt::format("density matrix hermiticity defect {:.3e} exceeds {:.1e}",
                                herm_defect, qmath::kHermitianTol));
    }
    rho_ = qmath::symmetrized(rho);
    const double trace_defect = std::abs(rho_.trace().real() - 1.0);
    if (trace_defect > kTraceTol) {
        throw Error(ErrorKind::Validation,
                    fmt::format("density matrix trace defect {:.3e} exceeds {:.1e}", trace_defect,
                                kTraceTol));
    }
    for (Eigen::Index i = 0; i < rho_.rows(); ++i) {
        const double p = rho_(i, i).real();
        if (p < -qmath::kPsdTol || p > 1.0 + kTraceTol) {
            throw Error(ErrorKind::Validation,
                        fmt::format("population {} = {:.6e} outside [0, 1]", i, p));
        }
    }
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(rho_, Eigen::EigenvaluesOnly);
    const double min_eig = solver.eigenvalues().minCoeff();
    if (min_eig < -qmath::kPsdTol) {
        throw Error(ErrorKind::NotPSD,
                    fmt::format("density matrix has eigenvalue {:.6e} below -{:.1e}", min_eig,
                                qmath::kPsdTol));
    }
}

Ensemble::Ensemble(std::vector<Member> members) : members_(std::move(members)) {
    if (members_.empty()) {
        throw Error(ErrorKind::Validation, "ensemble needs at least one member");
    }
    const Eigen::Index n = members_.front().amplitudes.size();
    require_paths(n, "ensemble member");
    double weight_sum = 0.0;
    for (std::size_t k = 0; k < members_.size(); ++k) {
        const auto& member = members_[k];
        if (member.amplitudes.size() != n) {
            throw Error(ErrorKind::DimensionMismatch,
                        fmt::format("ensemble member {} has {} paths, member 0 has {}", k,
                                    member.amplitudes.size(), n));
        }
        if (!(member.weight > 0.0)) {
            throw Error(ErrorKind::Validation,
                        fmt::format("ensemble weight {} = {:.6e} must be positive", k,
                                    member.weight));
        }
        const double defect = std::abs(member.amplitudes.squaredNorm() - 1.0);
        if (defect > kUnitNormTol) {
            throw Error(ErrorKind::Validation,
                        fmt::format("ensemble member {} norm defect {:.3e} exceeds {:.1e}", k,
                                    defect, kUnitNormTol));
        }
        weight_sum += member.weight;
    }
    if (std::abs(weight_sum - 1.0) > kUnitNormTol) {
        throw Error(ErrorKind::Validation,
                    fmt::format("ensemble weights sum to {:.17g}, must be 1 within {:.1e}",
                                weight_sum, kUnitNormTol));
    }
}

DetectorGram::DetectorGram(ComplexMatrix g) {
    if (g.rows() != g.cols()) {
        throw Error(ErrorKind::NotSquare,
                    fmt::format("gram matrix must be square, got {}x{}", g.rows(), g.cols()));
    }
    require_paths(g.rows(), "detector gram");
    const double herm_defect = qmath::hermiticity_defect(g);
    if (herm_defect > qmath::kHermitianTol) {
        throw Error(ErrorKind::NotHermitian,
                    fmt::format("gram hermiticity defect {:.3e} exceeds {:.1e}", herm_defect,
                                qmath::kHermitianTol));
    }
    g_ = qmath::symmetrized(g);
    for (Eigen::Index i = 0; i < g_.rows(); ++i) {
        if (std::abs(g_(i, i) - Complex(1.0, 0.0)) > kUnitNormTol) {
            throw Error(ErrorKind::Validation,
                        fmt::format("gram diagonal entry {} = {:.17g} must be 1 (unit detector "
                                    "states)",
                                    i, g_(i, i).real()));
        }
        for (Eigen::Index j = 0; j < g_.cols(); ++j) {
            if (std::abs(g_(i, j)) > 1.0 + kUnitNormTol) {
                throw Error(ErrorKind::Validation,
                            fmt::format("gram entry ({}, {}) has modulus {:.17g} above 1", i, j,
                                        std::abs(g_(i, j))));
            }
        }
    }
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(g_, Eigen::EigenvaluesOnly);
    const double min_eig = solver.eigenvalues().minCoeff();
    if (min_eig < -qmath::kPsdTol) {
        throw Error(ErrorKind::NotPSD,
                    fmt::format("gram matrix has eigenvalue {:.6e} below -{:.1e}", min_eig,
                                qmath::kPsdTol));
    }
}

DetectorGram DetectorGram::identity(int n) {
    require_paths(n, "detector gram");
    return DetectorGram(ComplexMatrix::Identity(n, n));
}

DetectorGram DetectorGram::all_ones(int n) {
    require_paths(n, "detector gram");
    return DetectorGram(ComplexMatrix::Ones(n, n));
}

PhaseVector::PhaseVector(RealVector theta_rad) : theta_(std::move(theta_rad)) {
    require_paths(theta_.size(), "phase vector");
    for (Eigen::Index i = 0; i < theta_.size(); ++i) {
        if (!std::isfinite(theta_(i))) {
            throw Error(ErrorKind::Validation, fmt::format("phase {} is not finite", i));
        }
        double t = std::fmod(theta_(i), kTwoPi);
        if (t < 0.0) t += kTwoPi;
        theta_(i) = t;
    }
}

PhaseVector PhaseVector::zero(int n) {
    require_paths(n, "phase vector");
    return PhaseVector(RealVector::Zero(n));
}

PathMask::PathMask(std::vector<int> open) : open_(std::move(open)) {
    if (open_.size() < 2) {
        throw Error(ErrorKind::Validation,
                    fmt::format("path mask keeps {} paths open, needs at least 2", open_.size()));
    }
    std::sort(open_.begin(), open_.end());
    if (std::adjacent_find(open_.begin(), open_.end()) != open_.end()) {
        throw Error(ErrorKind::Validation, "path mask indices must be distinct");
    }
    if (open_.front() < 0) {
        throw Error(ErrorKind::Validation,
                    fmt::format("path mask index {} is negative", open_.front()));
    }
}

PathMask PathMask::pair(int i, int j) { return PathMask(std::vector<int>{i, j}); }

QuantonState density_from_pure(const PureQuanton& psi) {
    const ComplexVector& c = psi.amplitudes();
    return QuantonState(c * c.adjoint());
}

QuantonState density_from_ensemble(const Ensemble& ensemble) {
    const Eigen::Index n = ensemble.paths();
    ComplexMatrix rho = ComplexMatrix::Zero(n, n);
    for (const auto& member : ensemble.members())
        rho += member.weight * (member.amplitudes * member.amplitudes.adjoint());
    return QuantonState(std::move(rho));
}

QuantonState apply_phases(const QuantonState& s, const PhaseVector& phases) {
    if (phases.paths() != s.paths()) {
        throw Error(ErrorKind::DimensionMismatch,
                    fmt::format("phase vector has {} entries, state has {} paths", phases.paths(),
                                s.paths()));
    }
    const Eigen::Index n = s.paths();
    ComplexVector u(n);
    for (Eigen::Index j = 0; j < n; ++j) u(j) = std::polar(1.0, phases.theta()(j));
    ComplexMatrix rho = s.rho().cwiseProduct(u * u.adjoint());
    rho.diagonal() = s.rho().diagonal();  // |e^{i theta}|^2 may be off by an ulp
    return QuantonState(std::move(rho));
}

QuantonState couple_detector(const QuantonState& s, const DetectorGram& g) {
    if (g.paths() != s.paths()) {
        throw Error(ErrorKind::DimensionMismatch,
                    fmt::format("gram is for {} paths, state has {}", g.paths(), s.paths()));
    }
    // Schur product with the transposed Gram; PSD by the Schur-product theorem,
    // asserted along with the other invariants by the QuantonState constructor.
    ComplexMatrix rho = s.rho().cwiseProduct(g.matrix().transpose());
    return QuantonState(std::move(rho));
}

QuantonState block_paths(const QuantonState& s, const PathMask& mask) {
    const auto& open = mask.open();
    if (open.back() >= s.paths()) {
        throw Error(ErrorKind::DimensionMismatch,
                    fmt::format("path mask index {} out of range for {} paths", open.back(),
                                s.paths()));
    }
    double kept = 0.0;
    for (int i : open) kept += s.population(i);
    if (kept <= kZeroPopulationTol) {
        throw Error(ErrorKind::ZeroProbabilityBlock,
                    fmt::format("open paths carry total population {:.3e}; nothing to renormalize",
                                kept));
    }
    const Eigen::Index m = static_cast<Eigen::Index>(open.size());
    ComplexMatrix rho(m, m);
    for (Eigen::Index a = 0; a < m; ++a)
        for (Eigen::Index b = 0; b < m; ++b) rho(a, b) = s.rho()(open[a], open[b]) / kept;
    return QuantonState(std::move(rho));
}

PureQuanton random_pure(int n, std::uint64_t seed) {
    require_paths(n, "random pure state");
    auto rng = seeded_engine(seed);
    return PureQuanton::normalized(gaussian_vector(n, rng));
}

QuantonState random_mixed(int n, int ancilla_dim, std::uint64_t seed) {
    require_paths(n, "random mixed state");
    if (ancilla_dim < 1) {
        throw Error(ErrorKind::BadDimension,
                    fmt::format("ancilla dimension must be >= 1, got {}", ancilla_dim));
    }
    auto rng = seeded_engine(seed);
    ComplexVector joint = gaussian_vector(static_cast<Eigen::Index>(n) * ancilla_dim, rng);
    joint /= joint.norm();
    Eigen::Map<const Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> m(
        joint.data(), n, ancilla_dim);
    ComplexMatrix rho = m * m.adjoint();
    return QuantonState(std::move(rho));
}

DetectorGram random_gram(int n, int detector_dim, std::uint64_t seed, bool orthogonalize) {
    require_paths(n, "random gram");
    if (detector_dim < 1) {
        throw Error(ErrorKind::BadDimension,
                    fmt::format("detector dimension must be >= 1, got {}", detector_dim));
    }
    if (orthogonalize) {
        if (detector_dim < n) {
            throw Error(ErrorKind::BadDimension,
                        fmt::format("{} orthonormal detector states do not fit in dimension {}", n,
                                    detector_dim));
        }
        // Orthonormalized detector states have the identity Gram by construction.
        return DetectorGram::identity(n);
    }
    auto rng = seeded_engine(seed);
    ComplexMatrix vectors(detector_dim, n);
    for (int k = 0; k < n; ++k) {
        ComplexVector v = gaussian_vector(detector_dim, rng);
        vectors.col(k) = v / v.norm();
    }
    ComplexMatrix g = vectors.adjoint() * vectors;
    g.diagonal().setOnes();
    return DetectorGram(std::move(g));
}

std::vector<ComplexVector> detector_vectors_from_gram(const DetectorGram& g) {
    const ComplexMatrix l = qmath::cholesky_psd(g.matrix());
    const Eigen::Index n = l.rows();
    // Columns of L that survived the zero-pivot rule span rank(g) dimensions.
    std::vector<Eigen::Index> live;
    for (Eigen::Index k = 0; k < n; ++k)
        if (l.col(k).norm() > 0.0) live.push_back(k);
    std::vector<ComplexVector> vectors;
    vectors.reserve(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        ComplexVector v(static_cast<Eigen::Index>(live.size()));
        for (std::size_t k = 0; k < live.size(); ++k) v(static_cast<Eigen::Index>(k)) = std::conj(l(i, live[k]));
        vectors.push_back(std::move(v));
    }
    return vectors;
}

std::optional<PureQuanton> pure_from_density(const QuantonState& s) {
    if (std::abs(s.purity() - 1.0) > 1e-9) return std::nullopt;
    Eigen::Index anchor = 0;
    s.rho().diagonal().real().maxCoeff(&anchor);
    const double p = s.population(static_cast<int>(anchor));
    ComplexVector c = s.rho().col(anchor) / std::sqrt(p);
    return PureQuanton::normalized(std::move(c));
}

}  // namespace multipath
