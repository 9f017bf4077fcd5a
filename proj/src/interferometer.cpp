#include "multipath/interferometer.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace multipath {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kIntensityFloor = -1e-12;
constexpr double kContrastOvershootTol = 1e-6;

// sum_{j,k} rho_jk e^{i(theta_j - theta_k)} as the quadratic form u^dag rho u
// with u_k = e^{-i theta_k}; real and non-negative for PSD rho.
double interference_form(const ComplexMatrix& rho, const double* theta) {
    const Eigen::Index n = rho.rows();
    Complex acc(0.0, 0.0);
    for (Eigen::Index j = 0; j < n; ++j) {
        const Complex uj = std::polar(1.0, theta[j]);
        for (Eigen::Index k = 0; k < n; ++k)
            acc += rho(j, k) * uj * std::polar(1.0, -theta[k]);
    }
    return acc.real();
}

void require_channel_match(const QuantonState& s, const ChannelModel& channel) {
    if (channel.paths != s.paths()) {
        throw Error(ErrorKind::DimensionMismatch,
                    fmt::format("channel is for {} paths, state has {}", channel.paths,
                                s.paths()));
    }
}

}  // namespace

ChannelModel::ChannelModel(int paths_, double amp2_) : paths(paths_), amp2(amp2_) {
    if (paths < 2) {
        throw Error(ErrorKind::BadDimension,
                    fmt::format("channel needs at least 2 paths, got {}", paths));
    }
    if (!(amp2 > 0.0) || amp2 > 1.0) {
        throw Error(ErrorKind::Validation,
                    fmt::format("channel weight amp2 = {:.17g} must lie in (0, 1]", amp2));
    }
}

ChannelModel ChannelModel::uniform(int paths_) {
    return ChannelModel(paths_, 1.0 / static_cast<double>(paths_));
}

double intensity(const QuantonState& s, const PhaseVector& phases, const ChannelModel& channel) {
    require_channel_match(s, channel);
    if (phases.paths() != s.paths()) {
        throw Error(ErrorKind::DimensionMismatch,
                    fmt::format("phase vector has {} entries, state has {} paths",
                                phases.paths(), s.paths()));
    }
    return channel.amp2 * interference_form(s.rho(), phases.theta().data());
}

IntensityScan fringe_scan(const QuantonState& s, const ChannelModel& channel,
                          const PhaseVector& base, int grid) {
    require_channel_match(s, channel);
    if (base.paths() != s.paths()) {
        throw Error(ErrorKind::DimensionMismatch,
                    fmt::format("base phase vector has {} entries, state has {} paths",
                                base.paths(), s.paths()));
    }
    if (grid < 8) {
        throw Error(ErrorKind::BadGrid,
                    fmt::format("scan grid {} is below the minimum of 8 points", grid));
    }
    const int n = s.paths();
    IntensityScan scan;
    scan.phi.reserve(grid);
    scan.intensity.reserve(grid);
    std::vector<double> theta(n);
    for (int k = 0; k < grid; ++k) {
        const double phi = kTwoPi * k / grid;
        for (int j = 0; j < n; ++j) theta[j] = base.theta()(j) + j * phi;
        scan.phi.push_back(phi);
        scan.intensity.push_back(channel.amp2 * interference_form(s.rho(), theta.data()));
    }
    return scan;
}

double fringe_contrast(const IntensityScan& scan) {
    if (scan.phi.size() != scan.intensity.size() || scan.intensity.empty()) {
        throw Error(ErrorKind::Validation, "scan arrays are empty or of different lengths");
    }
    double max_i = scan.intensity.front();
    double min_i = scan.intensity.front();
    for (double v : scan.intensity) {
        if (v < kIntensityFloor) {
            throw Error(ErrorKind::Validation,
                        fmt::format("scan intensity {:.6e} below the {:.0e} floor", v,
                                    kIntensityFloor));
        }
        max_i = std::max(max_i, v);
        min_i = std::min(min_i, v);
    }
    if (max_i <= 0.0) {
        throw Error(ErrorKind::AllZeroScan, "no positive intensity anywhere in the scan");
    }
    min_i = std::max(min_i, 0.0);
    return (max_i - min_i) / (max_i + min_i);
}

double phase_average_variance_exact(const QuantonState& s, const ChannelModel& channel) {
    require_channel_match(s, channel);
    double off2 = 0.0;
    const Eigen::Index n = s.paths();
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            if (i != j) off2 += std::norm(s.rho()(i, j));
    return channel.amp2 * channel.amp2 * off2;
}

MonteCarloEstimate phase_average_variance_montecarlo(const QuantonState& s,
                                                     const ChannelModel& channel,
                                                     std::size_t samples, std::uint64_t seed) {
    require_channel_match(s, channel);
    if (samples < 1000) {
        throw Error(ErrorKind::BadSampleCount,
                    fmt::format("{} samples requested, at least 1000 required", samples));
    }
    const int n = s.paths();
    std::vector<double> theta(n);
    std::vector<double> values(samples);
    std::uniform_real_distribution<double> uniform(0.0, kTwoPi);
    // One counter-derived stream per sample keeps the estimate independent of
    // evaluation order.
    for (std::size_t k = 0; k < samples; ++k) {
        std::mt19937_64 rng(qmath::mix_seed(seed ^ (0x5851f42d4c957f2dULL * (k + 1))));
        for (int j = 0; j < n; ++j) theta[j] = uniform(rng);
        values[k] = channel.amp2 * interference_form(s.rho(), theta.data());
    }
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(samples);
    double m2 = 0.0, m4 = 0.0;
    for (double v : values) {
        const double d = v - mean;
        m2 += d * d;
        m4 += d * d * d * d;
    }
    const double nn = static_cast<double>(samples);
    MonteCarloEstimate estimate;
    estimate.samples = samples;
    estimate.value = m2 / (nn - 1.0);  // unbiased sample variance
    m2 /= nn;
    m4 /= nn;
    // Var(s^2) = m4/N - sigma^4 (N-3) / (N (N-1)), with sample moments plugged in.
    const double var_of_var = std::max(0.0, m4 / nn - m2 * m2 * (nn - 3.0) / (nn * (nn - 1.0)));
    estimate.standard_error = std::sqrt(var_of_var);
    return estimate;
}

double phase_average_variance_quadrature(const QuantonState& s, const ChannelModel& channel,
                                         int points_per_phase) {
    require_channel_match(s, channel);
    if (points_per_phase < 3) {
        throw Error(ErrorKind::GridTooCoarse,
                    fmt::format("{} points per phase cannot integrate the quadratic terms; "
                                "3 or more are exact",
                                points_per_phase));
    }
    const int n = s.paths();
    double tuples = 1.0;
    for (int j = 0; j < n; ++j) {
        tuples *= points_per_phase;
        if (tuples > 1e8) {
            throw Error(ErrorKind::DimensionTooLarge,
                        fmt::format("{}^{} quadrature nodes exceed the 1e8 budget",
                                    points_per_phase, n));
        }
    }
    const std::size_t total = static_cast<std::size_t>(tuples);
    std::vector<double> theta(n);
    auto node_intensity = [&](std::size_t index) {
        for (int j = 0; j < n; ++j) {
            theta[j] = kTwoPi * static_cast<double>(index % points_per_phase) / points_per_phase;
            index /= points_per_phase;
        }
        return channel.amp2 * interference_form(s.rho(), theta.data());
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

double phase_average_variance(const QuantonState& s, const ChannelModel& channel,
                              const VarianceMethod& method) {
    return std::visit(
        [&](const auto& m) -> double {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, ExactAverage>) {
                return phase_average_variance_exact(s, channel);
            } else if constexpr (std::is_same_v<T, MonteCarloAverage>) {
                return phase_average_variance_montecarlo(s, channel, m.samples, m.seed).value;
            } else {
                return phase_average_variance_quadrature(s, channel, m.points_per_phase);
            }
        },
        method);
}

double visibility_from_variance(double variance, int n) {
    if (n < 2) {
        throw Error(ErrorKind::BadDimension,
                    fmt::format("visibility needs at least 2 paths, got {}", n));
    }
    if (!(variance >= 0.0)) {
        throw Error(ErrorKind::Validation,
                    fmt::format("variance {:.6e} must be non-negative", variance));
    }
    const double nd = n;
    const double value = std::sqrt(nd * nd * nd / (nd - 1.0) * variance);
    if (value > 1.0 + kContrastOvershootTol) {
        throw Error(ErrorKind::OvershootBeyondTolerance,
                    fmt::format("visibility estimate {:.12g} exceeds 1 by more than {:.0e}",
                                value, kContrastOvershootTol));
    }
    return std::min(value, 1.0);
}

CampaignRecord pair_opening_campaign(const QuantonState& s, const std::optional<DetectorGram>& g,
                                     int scan_grid) {
    if (g && g->paths() != s.paths()) {
        throw Error(ErrorKind::DimensionMismatch,
                    fmt::format("gram is for {} paths, state has {}", g->paths(), s.paths()));
    }
    CampaignRecord record;
    record.paths = s.paths();
    record.scan_grid = scan_grid;
    record.visibility_table = pairwise_visibility(s);
    record.predictability_table = pairwise_predictability(s);
    record.global_visibility = visibility(s);
    record.global_predictability = predictability(s);

    std::optional<PureQuanton> psi = pure_from_density(s);
    if (g) {
        record.distinguishability_table = pairwise_distinguishability(s, *g);
        record.global_distinguishability = distinguishability(s, *g);
        if (psi) {
            record.concurrence_table = pairwise_concurrence(*psi, *g);
            record.global_entanglement = entanglement(couple_detector(s, *g));
        }
    }

    const ChannelModel two_path = ChannelModel::uniform(2);
    const std::size_t pair_count = record.visibility_table.pairs.size();
    for (std::size_t idx = 0; idx < pair_count; ++idx) {
        const auto& ventry = record.visibility_table.pairs[idx];
        CampaignPair pair;
        pair.i = ventry.i;
        pair.j = ventry.j;
        pair.weight = s.population(ventry.i) + s.population(ventry.j);
        pair.zero_probability = ventry.zero_probability;
        if (!pair.zero_probability) {
            const QuantonState blocked = block_paths(s, PathMask::pair(pair.i, pair.j));
            pair.contrast_scan =
                fringe_contrast(fringe_scan(blocked, two_path, PhaseVector::zero(2), scan_grid));
            pair.visibility = ventry.value;
            pair.predictability = record.predictability_table.pairs[idx].value;
            if (record.distinguishability_table)
                pair.distinguishability = record.distinguishability_table->pairs[idx].value;
            if (record.concurrence_table)
                pair.concurrence = record.concurrence_table->pairs[idx].value;
        }
        record.pairs.push_back(std::move(pair));
    }

    const bool flagged = record.visibility_table.has_flagged();
    if (!flagged) {
        record.visibility_residual = std::abs(
            rms_reconstruct(record.visibility_table, RmsMode::Weighted) - record.global_visibility);
        record.predictability_residual =
            std::abs(rms_reconstruct(record.predictability_table, RmsMode::Weighted) -
                     record.global_predictability);
        if (record.distinguishability_table) {
            record.distinguishability_residual =
                std::abs(rms_reconstruct(*record.distinguishability_table, RmsMode::Weighted) -
                         *record.global_distinguishability);
        }
        if (record.concurrence_table) {
            record.concurrence_residual =
                std::abs(rms_reconstruct(*record.concurrence_table, RmsMode::Weighted) -
                         *record.global_entanglement);
        }
    }
    return record;
}

MeiWeitzReport mei_weitz(int n, int flipped_path, double overlap, int scan_grid) {
    if (n < 3) {
        throw Error(ErrorKind::BadDimension,
                    fmt::format("selective decoherence study needs n >= 3, got {}", n));
    }
    if (flipped_path < 0 || flipped_path >= n) {
        throw Error(ErrorKind::Validation,
                    fmt::format("flipped path {} out of range [0, {})", flipped_path, n));
    }
    if (!(overlap >= 0.0) || overlap > 1.0) {
        throw Error(ErrorKind::Validation,
                    fmt::format("detector overlap {:.17g} must lie in [0, 1]", overlap));
    }

    const double amp = 1.0 / std::sqrt(static_cast<double>(n));
    PureQuanton psi{ComplexVector(ComplexVector::Constant(n, Complex(amp, 0.0)))};
    RealVector base = RealVector::Zero(n);
    base(flipped_path) = std::numbers::pi;
    const QuantonState flipped = apply_phases(density_from_pure(psi), PhaseVector(base));

    // Detector states live in two dimensions: every unflagged path points along
    // e1, the flagged path tilts to meet them at the requested overlap.
    ComplexMatrix gram = ComplexMatrix::Ones(n, n);
    for (int i = 0; i < n; ++i) {
        if (i == flipped_path) continue;
        gram(i, flipped_path) = Complex(overlap, 0.0);
        gram(flipped_path, i) = Complex(overlap, 0.0);
    }
    const QuantonState decohered = couple_detector(flipped, DetectorGram(std::move(gram)));

    const ChannelModel channel = ChannelModel::uniform(n);
    const PhaseVector no_base = PhaseVector::zero(n);
    MeiWeitzReport report;
    report.overlap = overlap;
    report.contrast_before = fringe_contrast(fringe_scan(flipped, channel, no_base, scan_grid));
    report.contrast_after = fringe_contrast(fringe_scan(decohered, channel, no_base, scan_grid));
    report.visibility_before = visibility(flipped);
    report.visibility_after = visibility(decohered);
    if (report.visibility_after > report.visibility_before + 1e-12) {
        throw Error(ErrorKind::Validation,
                    fmt::format("visibility rose from {:.17g} to {:.17g} under decoherence, "
                                "which the coupling forbids",
                                report.visibility_before, report.visibility_after));
    }
    return report;
}

}  // namespace multipath
