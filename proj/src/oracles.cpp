#include "multipath/oracles.hpp"

#include <fmt/format.h>

#include <cmath>
#include <numbers>
#include <vector>

namespace multipath::oracles {

namespace {

double marginal_concurrence(const ComplexMatrix& marginal) {
    const double purity = marginal.squaredNorm();
    return std::sqrt(std::max(0.0, 2.0 * (1.0 - purity)));
}

}  // namespace

JointPureState build_joint(const PureQuanton& psi, const DetectorGram& g) {
    if (psi.paths() != g.paths()) {
        throw Error(ErrorKind::DimensionMismatch,
                    fmt::format("pure quanton has {} paths, gram has {}", psi.paths(), g.paths()));
    }
    const std::vector<ComplexVector> detectors = detector_vectors_from_gram(g);
    const int n = psi.paths();
    const int dim = static_cast<int>(detectors.front().size());
    JointPureState joint;
    joint.paths = n;
    joint.detector_dim = dim;
    joint.amplitudes = ComplexVector::Zero(static_cast<Eigen::Index>(n) * dim);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < dim; ++k)
            joint.amplitudes(static_cast<Eigen::Index>(i) * dim + k) =
                psi.amplitudes()(i) * detectors[i](k);
    const double norm = joint.amplitudes.norm();
    if (std::abs(norm - 1.0) > 1e-9) {
        throw Error(ErrorKind::Validation,
                    fmt::format("joint state norm {:.17g} too far from 1; gram factorization "
                                "did not reproduce unit detector states",
                                norm));
    }
    joint.amplitudes /= norm;
    return joint;
}

ComplexMatrix joint_density(const JointPureState& joint) {
    return joint.amplitudes * joint.amplitudes.adjoint();
}

ComplexMatrix quanton_marginal(const JointPureState& joint) {
    return qmath::partial_trace_second(joint_density(joint), joint.paths, joint.detector_dim);
}

double i_concurrence_oracle(const JointPureState& joint) {
    return marginal_concurrence(quanton_marginal(joint));
}

double helstrom_oracle(double prior_i, double prior_j, double overlap) {
    if (!(prior_i > 0.0) || !(prior_j > 0.0) || std::abs(prior_i + prior_j - 1.0) > 1e-12) {
        throw Error(ErrorKind::BadPriors,
                    fmt::format("priors ({:.17g}, {:.17g}) must be positive and sum to 1",
                                prior_i, prior_j));
    }
    if (overlap < 0.0 || overlap > 1.0) {
        throw Error(ErrorKind::BadPriors,
                    fmt::format("overlap {:.17g} must lie in [0, 1]", overlap));
    }
    ComplexVector a(2), b(2);
    a << Complex(1.0, 0.0), Complex(0.0, 0.0);
    b << Complex(overlap, 0.0), Complex(std::sqrt(1.0 - overlap * overlap), 0.0);
    const ComplexMatrix discriminant =
        prior_i * (a * a.adjoint()) - prior_j * (b * b.adjoint());
    double trace_norm = 0.0;
    for (double lambda : qmath::eigenvalues_hermitian(discriminant)) trace_norm += std::abs(lambda);
    return trace_norm;
}

double two_qubit_concurrence_oracle(const JointPureState& joint) {
    if (joint.paths != 2) {
        throw Error(ErrorKind::BadDimension,
                    fmt::format("two-qubit concurrence oracle needs 2 paths, got {}",
                                joint.paths));
    }
    return marginal_concurrence(quanton_marginal(joint));
}

double variance_bruteforce(const QuantonState& s, const ChannelModel& channel,
                           int grid_per_phase) {
    if (channel.paths != s.paths()) {
        throw Error(ErrorKind::DimensionMismatch,
                    fmt::format("channel is for {} paths, state has {}", channel.paths,
                                s.paths()));
    }
    if (s.paths() > 6) {
        throw Error(ErrorKind::DimensionTooLarge,
                    fmt::format("{} paths exceed the brute-force limit of 6", s.paths()));
    }
    if (grid_per_phase < 3) {
        throw Error(ErrorKind::GridTooCoarse,
                    fmt::format("{} points per phase miss the quadratic cross terms; 3 or more "
                                "are exact",
                                grid_per_phase));
    }
    const int n = s.paths();
    const ComplexMatrix& rho = s.rho();
    std::size_t total = 1;
    for (int j = 0; j < n; ++j) total *= static_cast<std::size_t>(grid_per_phase);

    std::vector<Complex> phase_table(grid_per_phase);
    for (int k = 0; k < grid_per_phase; ++k)
        phase_table[k] = std::polar(1.0, 2.0 * std::numbers::pi * k / grid_per_phase);

    auto node_intensity = [&](std::size_t index) {
        std::vector<Complex> u(n);
        for (int j = 0; j < n; ++j) {
            u[j] = phase_table[index % grid_per_phase];
            index /= grid_per_phase;
        }
        Complex acc(0.0, 0.0);
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) acc += rho(j, k) * u[j] * std::conj(u[k]);
        return channel.amp2 * acc.real();
    };

    double mean = 0.0;
    for (std::size_t idx = 0; idx < total; ++idx) mean += node_intensity(idx);
    mean /= static_cast<double>(total);
    double var = 0.0;
    for (std::size_t idx = 0; idx < total; ++idx) {
        const double d = node_intensity(idx) - mean;
        var += d * d;
    }
    return var / static_cast<double>(total);
}

}  // namespace multipath::oracles
