#pragma once

#include <vector>

#include "multipath/states.hpp"

namespace multipath {

// Radicands this far below zero are rounding noise and clamp to zero; anything
// lower signals an invalid input and raises NegativeRadicand.
inline constexpr double kRadicandClampTol = 1e-10;

struct MeasureReport {
    double visibility = 0.0;
    double predictability = 0.0;
    double distinguishability = 0.0;
    double entanglement = 0.0;
    double triality_residual = 0.0;  // P^2 + V^2 + E^2 - 1
    double duality_residual = 0.0;   // D^2 + V^2 - 1, zero only for pure states
};

enum class PairwiseMeasure { Visibility, Predictability, Distinguishability, Concurrence };

std::string_view to_string(PairwiseMeasure measure) noexcept;

struct PairwiseEntry {
    int i = 0;
    int j = 0;
    double weight = 0.0;  // population weight of the pair, see each builder
    double value = 0.0;
    bool zero_probability = false;  // pair carries no population; value undefined
};

struct PairwiseTable {
    PairwiseMeasure measure = PairwiseMeasure::Visibility;
    int paths = 0;
    std::vector<PairwiseEntry> pairs;  // unordered pairs i < j in lexicographic order

    bool has_flagged() const;
};

enum class RmsMode { Equal, Weighted };

struct RmsBreakdown {
    double value = 0.0;
    double mean_square = 0.0;  // the weighted or plain mean-square term
    double offset = 0.0;       // extra additive term inside the square root (zero
                               // except for weighted distinguishability)
};

// Normalized coherence: sqrt( n/(n-1) * sum_{i != j} |rho_ij|^2 ).
double visibility(const QuantonState& s);

// Which-alternative information in the populations:
// sqrt( 1 - n/(n-1) * sum_{i != j} rho_ii rho_jj ).
double predictability(const QuantonState& s);

// Best discrimination of the detector states, square-root measure:
// sqrt( 1 - n/(n-1) * sum_{i != j} rho_ii rho_jj |g_ij|^2 ).
double distinguishability(const QuantonState& s, const DetectorGram& g);

// Unambiguous-discrimination variant:
// sqrt( 1 - ( 1/(n-1) * sum_{i != j} sqrt(rho_ii rho_jj) |g_ij| )^2 ).
double distinguishability_uqsd(const QuantonState& s, const DetectorGram& g);

// Scaled concurrence of the reduced quanton state:
// sqrt( n/(n-1) * sum_{i != j} (rho_ii rho_jj - |rho_ij|^2) ).
double entanglement(const QuantonState& reduced);

// V, P, E on the detector-coupled state, D from populations and Gram, plus the
// triality and duality residuals.
MeasureReport measure_report(const QuantonState& s, const DetectorGram& g);

// Two-path visibilities 2|rho_ij| / (rho_ii + rho_jj), weight (n/2)(rho_ii + rho_jj).
PairwiseTable pairwise_visibility(const QuantonState& s);

// Two-path predictabilities |rho_ii - rho_jj| / (rho_ii + rho_jj), weight rho_ii + rho_jj.
PairwiseTable pairwise_predictability(const QuantonState& s);

// Two-path Helstrom distinguishabilities
// sqrt( 1 - 4 rho_ii rho_jj |g_ij|^2 / (rho_ii + rho_jj)^2 ), weight rho_ii + rho_jj.
PairwiseTable pairwise_distinguishability(const QuantonState& s, const DetectorGram& g);

// Two-path concurrences for a pure quanton:
// 2 |c_i||c_j| sqrt(1 - |g_ij|^2) / (|c_i|^2 + |c_j|^2), weight |c_i|^2 + |c_j|^2.
PairwiseTable pairwise_concurrence(const PureQuanton& psi, const DetectorGram& g);

// Global measure rebuilt from a pairwise table. Equal mode is the plain rms
// over pairs (exact for equal populations); weighted mode applies the
// population weights and reproduces the global formula for any populations.
double rms_reconstruct(const PairwiseTable& table, RmsMode mode);
RmsBreakdown rms_reconstruct_detail(const PairwiseTable& table, RmsMode mode);

}  // namespace multipath
