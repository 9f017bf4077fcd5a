#pragma once

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "multipath/measures.hpp"
#include "multipath/states.hpp"

namespace multipath {

// Symmetric n-port channel: every open path reaches the screen with the same
// weight |A|^2 = amp2. amp2 = 1/n keeps the intensity a probability.
struct ChannelModel {
    ChannelModel(int paths, double amp2);
    static ChannelModel uniform(int paths);  // amp2 = 1/paths

    int paths;
    double amp2;
};

struct IntensityScan {
    std::vector<double> phi;
    std::vector<double> intensity;
};

struct MeiWeitzReport {
    double overlap = 0.0;
    double contrast_before = 0.0;  // flip applied, no decoherence
    double contrast_after = 0.0;   // flip applied, flagged path decohered
    double visibility_before = 0.0;
    double visibility_after = 0.0;
};

struct MonteCarloEstimate {
    double value = 0.0;
    double standard_error = 0.0;
    std::size_t samples = 0;
};

struct ExactAverage {};
struct MonteCarloAverage {
    std::size_t samples = 100000;
    std::uint64_t seed = 1;
};
struct QuadratureAverage {
    int points_per_phase = 3;
};
using VarianceMethod = std::variant<ExactAverage, MonteCarloAverage, QuadratureAverage>;

// Screen intensity amp2 * (1 + sum_{j != k} Re[rho_jk e^{i(theta_j - theta_k)}]),
// evaluated as a quadratic form so it is non-negative for every valid state.
double intensity(const QuantonState& s, const PhaseVector& phases, const ChannelModel& channel);

// Scan theta_j(phi) = base_j + j*phi over a uniform grid of phi in [0, 2*pi);
// the linear ramp is the far-field multi-slit convention. grid >= 8.
IntensityScan fringe_scan(const QuantonState& s, const ChannelModel& channel,
                          const PhaseVector& base, int grid);

// (I_max - I_min) / (I_max + I_min) over the scan samples.
double fringe_contrast(const IntensityScan& scan);

// Variance of the intensity under independent uniform phases. The closed form
// is amp2^2 * sum_{i != j} |rho_ij|^2.
double phase_average_variance_exact(const QuantonState& s, const ChannelModel& channel);
MonteCarloEstimate phase_average_variance_montecarlo(const QuantonState& s,
                                                     const ChannelModel& channel,
                                                     std::size_t samples, std::uint64_t seed);
// Tensor-product uniform grid, exact for points_per_phase >= 3 because the
// intensity is a degree-one trigonometric polynomial in each phase.
double phase_average_variance_quadrature(const QuantonState& s, const ChannelModel& channel,
                                         int points_per_phase);
double phase_average_variance(const QuantonState& s, const ChannelModel& channel,
                              const VarianceMethod& method);

// Inverse of the variance relation at amp2 = 1/n: sqrt(n^3/(n-1) * variance).
// Overshoots above 1 within 1e-6 (statistical noise) clamp to 1.
double visibility_from_variance(double variance, int n);

struct CampaignPair {
    int i = 0;
    int j = 0;
    double weight = 0.0;  // rho_ii + rho_jj
    bool zero_probability = false;
    double contrast_scan = 0.0;  // operational: block, scan, read the contrast
    double visibility = 0.0;     // closed-form two-path value
    double predictability = 0.0;
    std::optional<double> distinguishability;
    std::optional<double> concurrence;
};

struct CampaignRecord {
    int paths = 0;
    int scan_grid = 0;
    std::vector<CampaignPair> pairs;
    PairwiseTable visibility_table;
    PairwiseTable predictability_table;
    std::optional<PairwiseTable> distinguishability_table;
    std::optional<PairwiseTable> concurrence_table;
    double global_visibility = 0.0;
    double global_predictability = 0.0;
    std::optional<double> global_distinguishability;
    std::optional<double> global_entanglement;
    // |rms_reconstruct(weighted) - global|; empty when a zero-probability pair
    // makes the reconstruction undefined.
    std::optional<double> visibility_residual;
    std::optional<double> predictability_residual;
    std::optional<double> distinguishability_residual;
    std::optional<double> concurrence_residual;
};

// Opens every unordered pair of paths in turn: blocks the rest, scans the
// two-path fringe, and tabulates the pairwise measures next to the weighted
// reconstructions of the global ones. Pairwise weights use the original
// populations; contrasts come from the blocked, renormalized states.
CampaignRecord pair_opening_campaign(const QuantonState& s,
                                     const std::optional<DetectorGram>& g, int scan_grid = 1024);

// Equal-population maximally coherent state over n >= 3 paths, pi phase flip
// on flipped_path, then selective decoherence of that path down to the given
// detector overlap. Reports fringe contrast and visibility before and after.
MeiWeitzReport mei_weitz(int n, int flipped_path, double overlap, int scan_grid = 1024);

}  // namespace multipath
