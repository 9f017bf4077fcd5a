#pragma once

#include "multipath/interferometer.hpp"
#include "multipath/states.hpp"

// Slow reference implementations used to validate the closed-form measures.
// Everything here recomputes from first principles through the matrix kernel;
// none of it shares formula code with the measures module.
namespace multipath::oracles {

// Quanton-detector pure state sum_i c_i |i> x |d_i> in the product basis,
// detector components in dimension rank(gram).
struct JointPureState {
    int paths = 0;
    int detector_dim = 0;
    ComplexVector amplitudes;  // index (i, k) at i * detector_dim + k
};

JointPureState build_joint(const PureQuanton& psi, const DetectorGram& g);

// |Psi><Psi| of the joint state.
ComplexMatrix joint_density(const JointPureState& joint);

// Quanton marginal via an explicit partial trace over the detector factor.
ComplexMatrix quanton_marginal(const JointPureState& joint);

// I-concurrence sqrt(2 (1 - tr(marginal^2))) of the joint pure state.
double i_concurrence_oracle(const JointPureState& joint);

// Minimum-error discrimination of two pure detector states with the given
// priors and real overlap: trace norm of p_i |a><a| - p_j |b><b| from its
// eigenvalues.
double helstrom_oracle(double prior_i, double prior_j, double overlap);

// Concurrence of a two-path joint pure state via the marginal purity.
double two_qubit_concurrence_oracle(const JointPureState& joint);

// Phase-average variance on a tensor grid of grid_per_phase uniform points per
// path phase; exact for grid_per_phase >= 3. Direct double loop over the raw
// density matrix, n <= 6.
double variance_bruteforce(const QuantonState& s, const ChannelModel& channel,
                           int grid_per_phase);

}  // namespace multipath::oracles
