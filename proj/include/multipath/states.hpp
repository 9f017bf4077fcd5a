#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "multipath/qmath.hpp"

namespace multipath {

// Validation tolerances for state-like inputs.
inline constexpr double kUnitNormTol = 1e-12;
inline constexpr double kTraceTol = 1e-9;
inline constexpr double kZeroPopulationTol = 1e-12;

// Normalized amplitude vector over n >= 2 paths.
class PureQuanton {
  public:
    explicit PureQuanton(ComplexVector amplitudes);  // rejects norm defects > 1e-12
    static PureQuanton normalized(ComplexVector amplitudes);

    int paths() const { return static_cast<int>(c_.size()); }
    const ComplexVector& amplitudes() const { return c_; }

  private:
    ComplexVector c_;
};

// Unit-trace PSD Hermitian density matrix over n >= 2 paths. The stored
// matrix is symmetrized on construction, so its diagonal is exactly real.
class QuantonState {
  public:
    explicit QuantonState(ComplexMatrix rho);

    int paths() const { return static_cast<int>(rho_.rows()); }
    const ComplexMatrix& rho() const { return rho_; }
    double population(int i) const { return rho_(i, i).real(); }
    double purity() const { return rho_.squaredNorm(); }  // tr(rho^2) for Hermitian rho

  private:
    ComplexMatrix rho_;
};

// Classical mixture of pure amplitude vectors.
class Ensemble {
  public:
    struct Member {
        double weight;
        ComplexVector amplitudes;
    };

    explicit Ensemble(std::vector<Member> members);
    const std::vector<Member>& members() const { return members_; }
    int paths() const { return static_cast<int>(members_.front().amplitudes.size()); }

  private:
    std::vector<Member> members_;
};

// Hermitian PSD matrix of detector-state overlaps with unit diagonal.
class DetectorGram {
  public:
    explicit DetectorGram(ComplexMatrix g);
    static DetectorGram identity(int n);
    static DetectorGram all_ones(int n);

    int paths() const { return static_cast<int>(g_.rows()); }
    const ComplexMatrix& matrix() const { return g_; }

  private:
    ComplexMatrix g_;
};

// Per-path phases, stored reduced to [0, 2*pi).
class PhaseVector {
  public:
    explicit PhaseVector(RealVector theta_rad);
    static PhaseVector zero(int n);

    int paths() const { return static_cast<int>(theta_.size()); }
    const RealVector& theta() const { return theta_; }

  private:
    RealVector theta_;
};

// Set of at least two distinct path indices kept open; validated against a
// concrete state dimension at use time.
class PathMask {
  public:
    explicit PathMask(std::vector<int> open);
    static PathMask pair(int i, int j);

    const std::vector<int>& open() const { return open_; }

  private:
    std::vector<int> open_;
};

QuantonState density_from_pure(const PureQuanton& psi);
QuantonState density_from_ensemble(const Ensemble& ensemble);

// rho'[j][k] = rho[j][k] * exp(i(theta_j - theta_k)); diagonal untouched.
QuantonState apply_phases(const QuantonState& s, const PhaseVector& phases);

// Reduced state after entangling each path with its detector state:
// rho_r[j][k] = rho[j][k] * g[k][j]. Entrywise identity for the all-ones Gram.
QuantonState couple_detector(const QuantonState& s, const DetectorGram& g);

// Principal submatrix on the open paths, renormalized to unit trace.
QuantonState block_paths(const QuantonState& s, const PathMask& mask);

// Haar-random pure state: normalized vector of iid complex Gaussians.
PureQuanton random_pure(int n, std::uint64_t seed);

// Quanton marginal of a Haar-random pure state on n x ancilla_dim;
// ancilla_dim = 1 reproduces a pure-state density matrix.
QuantonState random_mixed(int n, int ancilla_dim, std::uint64_t seed);

// Gram of n Haar-random unit vectors in dimension detector_dim. With
// orthogonalize set (requires detector_dim >= n) the detectors are an
// orthonormal set, i.e. the identity Gram.
DetectorGram random_gram(int n, int detector_dim, std::uint64_t seed, bool orthogonalize = false);

// Concrete detector states reproducing the Gram, in dimension rank(g):
// <v_i|v_j> = g[i][j] within 1e-9.
std::vector<ComplexVector> detector_vectors_from_gram(const DetectorGram& g);

// Amplitude extraction for rank-one density matrices (purity within 1e-9 of
// one); empty for genuinely mixed states.
std::optional<PureQuanton> pure_from_density(const QuantonState& s);

}  // namespace multipath
