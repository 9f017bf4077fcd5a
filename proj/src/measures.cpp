#include "multipath/measures.hpp"

#include <fmt/format.h>

#include <cmath>

namespace multipath {

namespace {

double sqrt_clamped(double radicand, const char* what) {
    if (radicand < -kRadicandClampTol) {
        throw Error(ErrorKind::NegativeRadicand,
                    fmt::format("{} radicand {:.6e} below -{:.1e}; input state is not a valid "
                                "density matrix",
                                what, radicand, kRadicandClampTol));
    }
    return std::sqrt(std::max(radicand, 0.0));
}

void require_same_paths(const QuantonState& s, const DetectorGram& g) {
    if (s.paths() != g.paths()) {
        throw Error(ErrorKind::DimensionMismatch,
                    fmt::format("state has {} paths, gram has {}", s.paths(), g.paths()));
    }
}

// sum_{i != j} rho_ii rho_jj |g_ij|^2
double population_pair_sum(const QuantonState& s, const DetectorGram& g) {
    const Eigen::Index n = s.paths();
    double sum = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) {
            if (i == j) continue;
            sum += s.rho()(i, i).real() * s.rho()(j, j).real() * std::norm(g.matrix()(i, j));
        }
    return sum;
}

double off_diagonal_norm2(const QuantonState& s) {
    const Eigen::Index n = s.paths();
    double sum = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            if (i != j) sum += std::norm(s.rho()(i, j));
    return sum;
}

template <typename Fn>
PairwiseTable build_table(PairwiseMeasure measure, int n, Fn&& pair_value) {
    PairwiseTable table;
    table.measure = measure;
    table.paths = n;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) table.pairs.push_back(pair_value(i, j));
    return table;
}

PairwiseEntry scan_pair(const QuantonState& s, int i, int j, double weight_scale) {
    PairwiseEntry entry;
    entry.i = i;
    entry.j = j;
    const double pop = s.population(i) + s.population(j);
    entry.weight = weight_scale * pop;
    entry.zero_probability = pop <= kZeroPopulationTol;
    return entry;
}

}  // namespace

std::string_view to_string(PairwiseMeasure measure) noexcept {
    switch (measure) {
        case PairwiseMeasure::Visibility: return "visibility";
        case PairwiseMeasure::Predictability: return "predictability";
        case PairwiseMeasure::Distinguishability: return "distinguishability";
        case PairwiseMeasure::Concurrence: return "concurrence";
    }
    return "unknown";
}

bool PairwiseTable::has_flagged() const {
    for (const auto& entry : pairs)
        if (entry.zero_probability) return true;
    return false;
}

double visibility(const QuantonState& s) {
    const double n = s.paths();
    return sqrt_clamped(n / (n - 1.0) * off_diagonal_norm2(s), "visibility");
}

double predictability(const QuantonState& s) {
    // Equals 1 - n/(n-1) sum_{i!=j} rho_ii rho_jj at unit trace, but the
    // difference form stays exact when populations are nearly equal instead of
    // cancelling down to rounding noise under the square root.
    const Eigen::Index n = s.paths();
    double sum = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double diff = s.rho()(i, i).real() - s.rho()(j, j).real();
            sum += diff * diff;
        }
    return sqrt_clamped(sum / (static_cast<double>(n) - 1.0), "predictability");
}

double distinguishability(const QuantonState& s, const DetectorGram& g) {
    require_same_paths(s, g);
    const double n = s.paths();
    return sqrt_clamped(1.0 - n / (n - 1.0) * population_pair_sum(s, g), "distinguishability");
}

double distinguishability_uqsd(const QuantonState& s, const DetectorGram& g) {
    require_same_paths(s, g);
    const Eigen::Index n = s.paths();
    double sum = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) {
            if (i == j) continue;
            sum += std::sqrt(s.population(static_cast<int>(i)) *
                             s.population(static_cast<int>(j))) *
                   std::abs(g.matrix()(i, j));
        }
    const double failure = sum / (static_cast<double>(n) - 1.0);
    return sqrt_clamped(1.0 - failure * failure, "unambiguous discrimination");
}

double entanglement(const QuantonState& reduced) {
    const Eigen::Index n = reduced.paths();
    double sum = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) {
            if (i == j) continue;
            sum += reduced.rho()(i, i).real() * reduced.rho()(j, j).real() -
                   std::norm(reduced.rho()(i, j));
        }
    const double nd = static_cast<double>(n);
    return sqrt_clamped(nd / (nd - 1.0) * sum, "entanglement");
}

MeasureReport measure_report(const QuantonState& s, const DetectorGram& g) {
    require_same_paths(s, g);
    const QuantonState reduced = couple_detector(s, g);
    MeasureReport report;
    report.visibility = visibility(reduced);
    report.predictability = predictability(reduced);
    report.distinguishability = distinguishability(s, g);
    report.entanglement = entanglement(reduced);
    const double v2 = report.visibility * report.visibility;
    report.triality_residual =
        report.predictability * report.predictability + v2 +
        report.entanglement * report.entanglement - 1.0;
    report.duality_residual =
        report.distinguishability * report.distinguishability + v2 - 1.0;
    return report;
}

PairwiseTable pairwise_visibility(const QuantonState& s) {
    const int n = s.paths();
    return build_table(PairwiseMeasure::Visibility, n, [&](int i, int j) {
        PairwiseEntry entry = scan_pair(s, i, j, 0.5 * n);
        if (!entry.zero_probability) {
            const double pop = s.population(i) + s.population(j);
            entry.value = 2.0 * std::abs(s.rho()(i, j)) / pop;
        }
        return entry;
    });
}

PairwiseTable pairwise_predictability(const QuantonState& s) {
    return build_table(PairwiseMeasure::Predictability, s.paths(), [&](int i, int j) {
        PairwiseEntry entry = scan_pair(s, i, j, 1.0);
        if (!entry.zero_probability) {
            const double pop = s.population(i) + s.population(j);
            entry.value = std::abs(s.population(i) - s.population(j)) / pop;
        }
        return entry;
    });
}

PairwiseTable pairwise_distinguishability(const QuantonState& s, const DetectorGram& g) {
    require_same_paths(s, g);
    return build_table(PairwiseMeasure::Distinguishability, s.paths(), [&](int i, int j) {
        PairwiseEntry entry = scan_pair(s, i, j, 1.0);
        if (!entry.zero_probability) {
            const double pop = s.population(i) + s.population(j);
            const double overlap2 = std::norm(g.matrix()(i, j));
            entry.value = sqrt_clamped(
                1.0 - 4.0 * s.population(i) * s.population(j) * overlap2 / (pop * pop),
                "pairwise distinguishability");
        }
        return entry;
    });
}

PairwiseTable pairwise_concurrence(const PureQuanton& psi, const DetectorGram& g) {
    if (psi.paths() != g.paths()) {
        throw Error(ErrorKind::DimensionMismatch,
                    fmt::format("pure quanton has {} paths, gram has {}", psi.paths(), g.paths()));
    }
    const ComplexVector& c = psi.amplitudes();
    return build_table(PairwiseMeasure::Concurrence, psi.paths(), [&](int i, int j) {
        PairwiseEntry entry;
        entry.i = i;
        entry.j = j;
        const double pi = std::norm(c(i));
        const double pj = std::norm(c(j));
        entry.weight = pi + pj;
        entry.zero_probability = entry.weight <= kZeroPopulationTol;
        if (!entry.zero_probability) {
            const double overlap2 = std::norm(g.matrix()(i, j));
            entry.value = 2.0 * std::sqrt(pi * pj) *
                          sqrt_clamped(1.0 - overlap2, "pairwise concurrence") / (pi + pj);
        }
        return entry;
    });
}

RmsBreakdown rms_reconstruct_detail(const PairwiseTable& table, RmsMode mode) {
    if (table.pairs.empty() || table.paths < 2) {
        throw Error(ErrorKind::Validation, "pairwise table is empty");
    }
    for (const auto& entry : table.pairs) {
        if (entry.zero_probability) {
            throw Error(ErrorKind::IncompatibleMode,
                        fmt::format("pair ({}, {}) is flagged as zero-probability; its pairwise "
                                    "value is undefined, reconstruction refused",
                                    entry.i, entry.j));
        }
    }
    const double n = table.paths;
    const double pair_count = 0.5 * n * (n - 1.0);
    RmsBreakdown out;
    if (mode == RmsMode::Equal) {
        for (const auto& entry : table.pairs) out.mean_square += entry.value * entry.value;
        out.mean_square /= pair_count;
        out.value = sqrt_clamped(out.mean_square, "rms reconstruction");
        return out;
    }

    // Weighted mode. Per-measure prefactor of sum_pairs (rho_ii + rho_jj)^2 value^2;
    // the visibility table already folds n/2 into its stored weight.
    double weighted = 0.0;
    double weight2 = 0.0;
    for (const auto& entry : table.pairs) {
        weighted += entry.weight * entry.weight * entry.value * entry.value;
        weight2 += entry.weight * entry.weight;
    }
    switch (table.measure) {
        case PairwiseMeasure::Visibility:
            out.mean_square = weighted / pair_count;  // = n/(2(n-1)) sum (pop)^2 v^2
            break;
        case PairwiseMeasure::Predictability:
            out.mean_square = weighted / (n - 1.0);
            break;
        case PairwiseMeasure::Distinguishability:
            out.mean_square = 0.5 * n / (n - 1.0) * weighted;
            out.offset = 1.0 - 0.5 * n / (n - 1.0) * weight2;
            break;
        case PairwiseMeasure::Concurrence:
            out.mean_square = 0.5 * n / (n - 1.0) * weighted;
            break;
    }
    out.value = sqrt_clamped(out.mean_square + out.offset, "rms reconstruction");
    return out;
}

double rms_reconstruct(const PairwiseTable& table, RmsMode mode) {
    return rms_reconstruct_detail(table, mode).value;
}

}  // namespace multipath
