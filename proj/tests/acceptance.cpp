// Acceptance gate: one pass/fail line per criterion, exit code = number of
// failures. Every check is seeded and deterministic.
#include <fmt/format.h>
#include <sys/wait.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "multipath/interferometer.hpp"
#include "multipath/io.hpp"
#include "multipath/measures.hpp"
#include "multipath/oracles.hpp"
#include "multipath/qmath.hpp"
#include "multipath/states.hpp"

using namespace multipath;

namespace {

struct Criterion {
    bool pass = false;
    std::string detail;
};

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

PureQuanton equal_population_pure(int n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> phase(0.0, 2.0 * 3.14159265358979323846);
    ComplexVector c(n);
    const double amp = 1.0 / std::sqrt(static_cast<double>(n));
    for (int k = 0; k < n; ++k) c(k) = std::polar(amp, phase(rng));
    return PureQuanton{c};
}

// ---- criteria 1-3: one sweep over random instances --------------------------

struct SweepStats {
    double max_triality = 0.0;
    double max_pure_duality = 0.0;
    double max_mixed_duality_excess = 0.0;  // positive part of D^2+V^2-1
    int strict_mixed = 0;
    double max_dpe = 0.0;
    int instances = 0;
    int pure_instances = 0;
    int mixed_instances = 0;
};

SweepStats run_sweep() {
    SweepStats stats;
    for (int n = 2; n <= 8; ++n) {
        const std::uint64_t base = qmath::mix_seed(1000 + n);
        for (int k = 0; k < 1000; ++k) {
            const std::uint64_t state_seed = qmath::mix_seed(base ^ (2ULL * k + 1));
            const std::uint64_t gram_seed = qmath::mix_seed(base ^ (2ULL * k + 2));
            const bool pure = (k % 2 == 0);
            const QuantonState s = pure
                                       ? density_from_pure(random_pure(n, state_seed))
                                       : random_mixed(n, 2 + k % 3, state_seed);
            const DetectorGram g = random_gram(n, n, gram_seed);
            const MeasureReport m = measure_report(s, g);
            ++stats.instances;
            stats.max_triality = std::max(stats.max_triality, std::abs(m.triality_residual));
            if (pure) {
                ++stats.pure_instances;
                stats.max_pure_duality =
                    std::max(stats.max_pure_duality, std::abs(m.duality_residual));
                const double dpe = std::abs(
                    m.distinguishability * m.distinguishability -
                    m.predictability * m.predictability - m.entanglement * m.entanglement);
                stats.max_dpe = std::max(stats.max_dpe, dpe);
            } else {
                ++stats.mixed_instances;
                stats.max_mixed_duality_excess =
                    std::max(stats.max_mixed_duality_excess, m.duality_residual);
                if (m.duality_residual < -1e-6) ++stats.strict_mixed;
            }
        }
    }
    return stats;
}

Criterion criterion_triality(const SweepStats& stats) {
    const bool pass = stats.max_triality <= 1e-10;
    return {pass, fmt::format("max |P^2+V^2+E^2-1| = {:.3e} over {} instances (tol 1e-10)",
                              stats.max_triality, stats.instances)};
}

Criterion criterion_duality(const SweepStats& stats) {
    const bool pure_ok = stats.max_pure_duality <= 1e-10;
    const bool mixed_ok = stats.max_mixed_duality_excess <= 1e-12;
    const bool strict_ok = stats.strict_mixed > 0;
    return {pure_ok && mixed_ok && strict_ok,
            fmt::format("pure max |D^2+V^2-1| = {:.3e} (tol 1e-10); mixed max excess = {:.3e} "
                        "(tol 1e-12); {} of {} mixed instances strictly below 1",
                        stats.max_pure_duality, stats.max_mixed_duality_excess,
                        stats.strict_mixed, stats.mixed_instances)};
}

Criterion criterion_dpe(const SweepStats& stats) {
    const bool pass = stats.max_dpe <= 1e-10;
    return {pass, fmt::format("pure max |D^2-P^2-E^2| = {:.3e} over {} instances (tol 1e-10)",
                              stats.max_dpe, stats.pure_instances)};
}

// ---- criterion 4: rms reconstructions ---------------------------------------

Criterion criterion_rms() {
    double worst_equal = 0.0;
    double worst_weighted = 0.0;
    std::mt19937_64 rng(404);
    for (int n = 2; n <= 6; ++n) {
        for (int k = 0; k < 20; ++k) {
            const std::uint64_t seed = qmath::mix_seed(4000 + 100 * n + k);
            const DetectorGram g = random_gram(n, n, seed);

            // equal populations, pure: all four measures, plain rms
            const PureQuanton psi_eq = equal_population_pure(n, rng);
            const QuantonState s_eq = density_from_pure(psi_eq);
            const QuantonState reduced_eq = couple_detector(s_eq, g);
            worst_equal = std::max(
                worst_equal, std::abs(rms_reconstruct(pairwise_visibility(reduced_eq),
                                                      RmsMode::Equal) -
                                      visibility(reduced_eq)));
            worst_equal = std::max(
                worst_equal, std::abs(rms_reconstruct(pairwise_predictability(s_eq),
                                                      RmsMode::Equal) -
                                      predictability(s_eq)));
            worst_equal = std::max(
                worst_equal, std::abs(rms_reconstruct(pairwise_distinguishability(s_eq, g),
                                                      RmsMode::Equal) -
                                      distinguishability(s_eq, g)));
            worst_equal = std::max(
                worst_equal, std::abs(rms_reconstruct(pairwise_concurrence(psi_eq, g),
                                                      RmsMode::Equal) -
                                      entanglement(reduced_eq)));

            // equal populations, mixed: V, P, D
            const Ensemble mix({{0.35, equal_population_pure(n, rng).amplitudes()},
                                {0.65, equal_population_pure(n, rng).amplitudes()}});
            const QuantonState s_mix = density_from_ensemble(mix);
            const QuantonState reduced_mix = couple_detector(s_mix, g);
            worst_equal = std::max(
                worst_equal, std::abs(rms_reconstruct(pairwise_visibility(reduced_mix),
                                                      RmsMode::Equal) -
                                      visibility(reduced_mix)));
            worst_equal = std::max(
                worst_equal, std::abs(rms_reconstruct(pairwise_predictability(s_mix),
                                                      RmsMode::Equal) -
                                      predictability(s_mix)));
            worst_equal = std::max(
                worst_equal, std::abs(rms_reconstruct(pairwise_distinguishability(s_mix, g),
                                                      RmsMode::Equal) -
                                      distinguishability(s_mix, g)));

            // unequal populations, pure: all four measures, weighted rms
            const PureQuanton psi = random_pure(n, qmath::mix_seed(seed ^ 0x11));
            const QuantonState s = density_from_pure(psi);
            const QuantonState reduced = couple_detector(s, g);
            worst_weighted = std::max(
                worst_weighted, std::abs(rms_reconstruct(pairwise_visibility(reduced),
                                                         RmsMode::Weighted) -
                                         visibility(reduced)));
            worst_weighted = std::max(
                worst_weighted, std::abs(rms_reconstruct(pairwise_predictability(s),
                                                         RmsMode::Weighted) -
                                         predictability(s)));
            worst_weighted = std::max(
                worst_weighted, std::abs(rms_reconstruct(pairwise_distinguishability(s, g),
                                                         RmsMode::Weighted) -
                                         distinguishability(s, g)));
            worst_weighted = std::max(
                worst_weighted, std::abs(rms_reconstruct(pairwise_concurrence(psi, g),
                                                         RmsMode::Weighted) -
                                         entanglement(reduced)));

            // unequal populations, mixed: V, P, D weighted
            const QuantonState sm = random_mixed(n, 2 + k % 2, qmath::mix_seed(seed ^ 0x22));
            const QuantonState reduced_m = couple_detector(sm, g);
            worst_weighted = std::max(
                worst_weighted, std::abs(rms_reconstruct(pairwise_visibility(reduced_m),
                                                         RmsMode::Weighted) -
                                         visibility(reduced_m)));
            worst_weighted = std::max(
                worst_weighted, std::abs(rms_reconstruct(pairwise_predictability(sm),
                                                         RmsMode::Weighted) -
                                         predictability(sm)));
            worst_weighted = std::max(
                worst_weighted, std::abs(rms_reconstruct(pairwise_distinguishability(sm, g),
                                                         RmsMode::Weighted) -
                                         distinguishability(sm, g)));
        }
    }
    const bool pass = worst_equal <= 1e-9 && worst_weighted <= 1e-9;
    return {pass, fmt::format("equal-population rms worst = {:.3e}, weighted rms worst = "
                              "{:.3e}, n in [2,6] (tol 1e-9)",
                              worst_equal, worst_weighted)};
}

// ---- criterion 5: oracle agreement ------------------------------------------

Criterion criterion_oracles() {
    double worst_entanglement = 0.0;
    double worst_helstrom = 0.0;
    double worst_concurrence = 0.0;
    int count = 0;
    for (int k = 0; k < 500; ++k) {
        const int n = 2 + k % 5;
        const std::uint64_t seed = qmath::mix_seed(5000 + k);
        const PureQuanton psi = random_pure(n, seed);
        const QuantonState s = density_from_pure(psi);
        const DetectorGram g = random_gram(n, n, qmath::mix_seed(seed ^ 0x5));
        ++count;

        const double scale = std::sqrt(n / (2.0 * (n - 1.0)));
        const double expected_e =
            scale * oracles::i_concurrence_oracle(oracles::build_joint(psi, g));
        worst_entanglement = std::max(
            worst_entanglement, std::abs(entanglement(couple_detector(s, g)) - expected_e));

        for (const auto& entry : pairwise_distinguishability(s, g).pairs) {
            const double pi = s.population(entry.i);
            const double pj = s.population(entry.j);
            const double expected = oracles::helstrom_oracle(
                pi / (pi + pj), pj / (pi + pj), std::abs(g.matrix()(entry.i, entry.j)));
            worst_helstrom = std::max(worst_helstrom, std::abs(entry.value - expected));
        }

        for (const auto& entry : pairwise_concurrence(psi, g).pairs) {
            ComplexVector pair_amp(2);
            pair_amp << psi.amplitudes()(entry.i), psi.amplitudes()(entry.j);
            ComplexMatrix pair_gram(2, 2);
            const Complex gij = g.matrix()(entry.i, entry.j);
            pair_gram << Complex(1.0, 0.0), gij, std::conj(gij), Complex(1.0, 0.0);
            const double expected = oracles::two_qubit_concurrence_oracle(oracles::build_joint(
                PureQuanton::normalized(pair_amp), DetectorGram(pair_gram)));
            worst_concurrence = std::max(worst_concurrence, std::abs(entry.value - expected));
        }
    }
    const bool pass =
        worst_entanglement <= 1e-9 && worst_helstrom <= 1e-10 && worst_concurrence <= 1e-10;
    return {pass,
            fmt::format("over {} instances: entanglement vs purification {:.3e} (tol 1e-9), "
                        "pairwise D vs discrimination {:.3e} (tol 1e-10), pairwise E vs "
                        "two-qubit {:.3e} (tol 1e-10)",
                        count, worst_entanglement, worst_helstrom, worst_concurrence)};
}

// ---- criterion 6: phase-average route ---------------------------------------

Criterion criterion_variance() {
    double worst_roundtrip = 0.0;
    for (int n = 2; n <= 6; ++n) {
        for (int k = 0; k < 10; ++k) {
            const std::uint64_t seed = qmath::mix_seed(6000 + 10 * n + k);
            const QuantonState s = (k % 2 == 0) ? density_from_pure(random_pure(n, seed))
                                                : random_mixed(n, 2, seed);
            const ChannelModel channel = ChannelModel::uniform(n);
            const double recovered = visibility_from_variance(
                phase_average_variance_exact(s, channel), n);
            worst_roundtrip = std::max(worst_roundtrip, std::abs(recovered - visibility(s)));
        }
    }

    double worst_bruteforce = 0.0;
    for (int n = 2; n <= 5; ++n) {
        const QuantonState s = random_mixed(n, 2, qmath::mix_seed(6600 + n));
        const ChannelModel channel = ChannelModel::uniform(n);
        worst_bruteforce = std::max(
            worst_bruteforce, std::abs(oracles::variance_bruteforce(s, channel, 3) -
                                       phase_average_variance_exact(s, channel)));
    }

    const QuantonState mc_state = random_mixed(3, 2, 6700);
    const ChannelModel mc_channel = ChannelModel::uniform(3);
    const double exact = phase_average_variance_exact(mc_state, mc_channel);
    int covered = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const auto estimate =
            phase_average_variance_montecarlo(mc_state, mc_channel, 100000, 6800 + trial);
        if (std::abs(estimate.value - exact) <= 4.0 * estimate.standard_error) ++covered;
    }

    const bool pass = worst_roundtrip <= 1e-10 && worst_bruteforce <= 1e-12 && covered >= 198;
    return {pass, fmt::format("round-trip worst = {:.3e} (tol 1e-10); brute-force worst = "
                              "{:.3e} (tol 1e-12); monte carlo within 4 standard errors in "
                              "{}/200 trials (need 198)",
                              worst_roundtrip, worst_bruteforce, covered)};
}

// ---- criterion 7: selective decoherence contrast ----------------------------

Criterion criterion_contrast() {
    const MeiWeitzReport report = mei_weitz(3, 2, 0.0, 1024);
    const bool contrast_up = report.contrast_after > report.contrast_before;
    const bool visibility_down = report.visibility_after < report.visibility_before;

    bool monotone = true;
    double worst_gap = 0.0;
    for (int k = 0; k <= 20; ++k) {
        const double overlap = k / 20.0;
        const MeiWeitzReport swept = mei_weitz(3, 2, overlap, 256);
        const double gap = swept.visibility_after - swept.visibility_before;
        worst_gap = std::max(worst_gap, gap);
        if (gap > 1e-12) monotone = false;
    }

    const bool pass = contrast_up && visibility_down && monotone;
    return {pass,
            fmt::format("contrast {:.17g} -> {:.17g} ({}); visibility {:.17g} -> {:.17g} "
                        "({}); overlap sweep max(v_after - v_before) = {:.3e} ({})",
                        report.contrast_before, report.contrast_after,
                        contrast_up ? "strict increase" : "no strict increase",
                        report.visibility_before, report.visibility_after,
                        visibility_down ? "strict decrease" : "no strict decrease", worst_gap,
                        monotone ? "never increases" : "increase found")};
}

// ---- criterion 8: predictability equalization --------------------------------

Criterion criterion_equalization() {
    double worst = 0.0;
    std::mt19937_64 rng(808);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int k = 0; k < 500; ++k) {
        const int n = 2 + k % 7;
        const std::uint64_t seed = qmath::mix_seed(8000 + k);
        const QuantonState s = (k % 2 == 0) ? density_from_pure(random_pure(n, seed))
                                            : random_mixed(n, 2 + k % 3, seed);
        ComplexMatrix before = ComplexMatrix::Zero(n, n);
        for (int i = 0; i < n; ++i) before(i, i) = Complex(s.population(i), 0.0);
        const double a = s.population(0);
        const double b = s.population(1);
        const double eps = unit(rng) * b;  // keeps both populations in range

        ComplexMatrix after = before;
        after(0, 0) += eps;
        after(1, 1) -= eps;

        const double p_before = predictability(QuantonState{before});
        const double p_after = predictability(QuantonState{after});
        const double measured = p_before * p_before - p_after * p_after;
        const double predicted = 2.0 * n * eps / (n - 1.0) * (b - a - eps);
        worst = std::max(worst, std::abs(measured - predicted));
    }
    const bool pass = worst <= 1e-12;
    return {pass, fmt::format("max |decrement - closed form| = {:.3e} over 500 states "
                              "(tol 1e-12)",
                              worst)};
}

// ---- criterion 9: two-path reductions ----------------------------------------

Criterion criterion_two_path() {
    double worst_reduction = 0.0;
    double worst_offset = 0.0;
    for (int k = 0; k < 100; ++k) {
        const std::uint64_t seed = qmath::mix_seed(9000 + k);
        const QuantonState s = (k % 2 == 0) ? density_from_pure(random_pure(2, seed))
                                            : random_mixed(2, 2, seed);
        worst_reduction = std::max(
            worst_reduction, std::abs(visibility(s) - 2.0 * std::abs(s.rho()(0, 1))));
        worst_reduction = std::max(
            worst_reduction,
            std::abs(predictability(s) - std::abs(s.population(0) - s.population(1))));

        const DetectorGram g = random_gram(2, 2, qmath::mix_seed(seed ^ 0x9));
        const auto detail =
            rms_reconstruct_detail(pairwise_distinguishability(s, g), RmsMode::Weighted);
        worst_offset = std::max(worst_offset, std::abs(detail.offset));
    }

    // Real coherences keep the scan extrema on the grid.
    double worst_contrast = 0.0;
    std::mt19937_64 rng(909);
    std::uniform_real_distribution<double> radius(0.0, 0.5);
    for (int k = 0; k < 40; ++k) {
        const double r = (k < 10) ? 0.05 * (k + 1) : radius(rng);
        ComplexMatrix rho(2, 2);
        rho << Complex(0.5, 0.0), Complex(r, 0.0), Complex(r, 0.0), Complex(0.5, 0.0);
        const QuantonState s{rho};
        const double contrast = fringe_contrast(
            fringe_scan(s, ChannelModel::uniform(2), PhaseVector::zero(2), 256));
        worst_contrast = std::max(worst_contrast, std::abs(contrast - visibility(s)));
    }

    const bool pass =
        worst_reduction <= 1e-12 && worst_contrast <= 1e-6 && worst_offset <= 1e-12;
    return {pass, fmt::format("reduction worst = {:.3e} (tol 1e-12); 256-point scan vs "
                              "visibility worst = {:.3e} (tol 1e-6); weighted offset worst = "
                              "{:.3e} (tol 1e-12)",
                              worst_reduction, worst_contrast, worst_offset)};
}

// ---- criterion 10: determinism ------------------------------------------------

Criterion criterion_determinism() {
    const auto dir = std::filesystem::temp_directory_path() / "multipath_acceptance";
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    const auto first = dir / "a.csv";
    const auto second = dir / "b.csv";
    const std::string base =
        std::string(MULTIPATH_CLI_PATH) +
        " random-sweep --seed 77 --set protocol.count=5 --set protocol.n_min=2 "
        "--set protocol.n_max=4 --out-csv ";
    const int rc1 = std::system((base + first.string() + " >/dev/null 2>&1").c_str());
    const int rc2 = std::system((base + second.string() + " >/dev/null 2>&1").c_str());
    const bool ran = rc1 != -1 && rc2 != -1 && WIFEXITED(rc1) && WEXITSTATUS(rc1) == 0 &&
                     WIFEXITED(rc2) && WEXITSTATUS(rc2) == 0;
    if (!ran) {
        return {false, "random-sweep runs did not both exit 0"};
    }
    const std::string a = read_file(first);
    const std::string b = read_file(second);
    std::filesystem::remove_all(dir);
    const bool pass = !a.empty() && a == b;
    return {pass, fmt::format("two seeded random-sweep tables of {} bytes are {}", a.size(),
                              pass ? "byte-identical" : "different")};
}

}  // namespace

int main() {
    const SweepStats stats = run_sweep();
    const std::vector<std::pair<std::string, Criterion>> results = {
        {"triality identity", criterion_triality(stats)},
        {"duality relation", criterion_duality(stats)},
        {"distinguishability split", criterion_dpe(stats)},
        {"rms reconstructions", criterion_rms()},
        {"oracle agreement", criterion_oracles()},
        {"phase-average route", criterion_variance()},
        {"selective-decoherence contrast", criterion_contrast()},
        {"predictability equalization", criterion_equalization()},
        {"two-path reductions", criterion_two_path()},
        {"determinism", criterion_determinism()},
    };

    int failures = 0;
    for (std::size_t i = 0; i < results.size(); ++i) {
        const auto& [name, criterion] = results[i];
        if (!criterion.pass) ++failures;
        fmt::print("[{}] criterion {:>2} {}: {}\n", criterion.pass ? "PASS" : "FAIL", i + 1,
                   name, criterion.detail);
    }
    fmt::print("{} of {} criteria passed\n", results.size() - failures, results.size());
    return failures;
}
