#include "multipath/cli.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "multipath/interferometer.hpp"
#include "multipath/io.hpp"
#include "multipath/measures.hpp"
#include "multipath/oracles.hpp"
#include "multipath/qmath.hpp"
#include "multipath/states.hpp"
#include "multipath/version.hpp"

namespace multipath::cli {

namespace {

struct CommandSchema {
    bool state_required = false;
    bool allows_detector = false;
    bool allows_phases = false;
    bool allows_channel = false;
    std::vector<std::string> protocol_keys;
};

const std::map<std::string, CommandSchema>& schemas() {
    static const std::map<std::string, CommandSchema> table = {
        {"measures", {true, true, false, false, {}}},
        {"campaign", {true, true, false, false, {"grid"}}},
        {"scan", {true, true, true, true, {"grid"}}},
        {"variance", {true, true, false, true, {"method", "samples", "seed", "points"}}},
        {"meiweitz", {false, false, false, false, {"n", "flipped_path", "overlap", "grid"}}},
        {"verify", {true, true, false, false, {"points"}}},
        {"random-sweep",
         {false, false, false, false,
          {"n_min", "n_max", "count", "seed", "ancilla_dim", "detector_dim"}}},
    };
    return table;
}

const CommandSchema& schema_for(const std::string& command) {
    const auto& table = schemas();
    auto it = table.find(command);
    if (it == table.end()) throw ConfigError(fmt::format("unknown command \"{}\"", command));
    return it->second;
}

long long require_int(const json& v, const std::string& key) {
    if (!v.is_number_integer())
        throw ConfigError(fmt::format("protocol.{} must be an integer", key));
    return v.get<long long>();
}

int require_small_int(const json& v, const std::string& key) {
    const long long x = require_int(v, key);
    if (x < -(1LL << 31) || x >= (1LL << 31))
        throw ConfigError(fmt::format("protocol.{} is out of range", key));
    return static_cast<int>(x);
}

std::uint64_t require_uint(const json& v, const std::string& key) {
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    const long long x = require_int(v, key);
    if (x < 0) throw ConfigError(fmt::format("protocol.{} must be non-negative", key));
    return static_cast<std::uint64_t>(x);
}

double require_number(const json& v, const std::string& key) {
    if (!v.is_number()) throw ConfigError(fmt::format("protocol.{} must be a number", key));
    return v.get<double>();
}

void read_protocol(const json& p, const CommandSchema& schema, const std::string& command,
                   ProtocolParams& out) {
    if (!p.is_object()) throw ConfigError("\"protocol\" must be an object");
    for (const auto& [key, value] : p.items()) {
        if (std::find(schema.protocol_keys.begin(), schema.protocol_keys.end(), key) ==
            schema.protocol_keys.end()) {
            throw ConfigError(
                fmt::format("protocol key \"{}\" is not used by command \"{}\"", key, command));
        }
        if (key == "grid") out.grid = require_small_int(value, key);
        else if (key == "samples") out.samples = require_uint(value, key);
        else if (key == "seed") out.seed = require_uint(value, key);
        else if (key == "method") {
            if (!value.is_string()) throw ConfigError("protocol.method must be a string");
            out.method = value.get<std::string>();
            if (out.method != "exact" && out.method != "montecarlo" && out.method != "quadrature")
                throw ConfigError(fmt::format(
                    "protocol.method must be exact, montecarlo or quadrature, got \"{}\"",
                    out.method));
        } else if (key == "points") out.points = require_small_int(value, key);
        else if (key == "overlap") out.overlap = require_number(value, key);
        else if (key == "flipped_path") out.flipped_path = require_small_int(value, key);
        else if (key == "n") out.n = require_small_int(value, key);
        else if (key == "n_min") out.n_min = require_small_int(value, key);
        else if (key == "n_max") out.n_max = require_small_int(value, key);
        else if (key == "count") out.count = require_small_int(value, key);
        else if (key == "ancilla_dim") out.ancilla_dim = require_small_int(value, key);
        else if (key == "detector_dim") out.detector_dim = require_small_int(value, key);
    }
    if (command == "random-sweep") {
        if (out.n_min < 2) throw ConfigError("protocol.n_min must be at least 2");
        if (out.n_max < out.n_min) throw ConfigError("protocol.n_max must be >= n_min");
        if (out.count < 1) throw ConfigError("protocol.count must be at least 1");
        if (out.ancilla_dim < 1) throw ConfigError("protocol.ancilla_dim must be at least 1");
        if (out.detector_dim < 0) throw ConfigError("protocol.detector_dim must be >= 0");
    }
}

json protocol_value(const ProtocolParams& p, const std::string& key) {
    if (key == "grid") return p.grid;
    if (key == "samples") return p.samples;
    if (key == "seed") return p.seed;
    if (key == "method") return p.method;
    if (key == "points") return p.points;
    if (key == "overlap") return p.overlap;
    if (key == "flipped_path") return p.flipped_path;
    if (key == "n") return p.n;
    if (key == "n_min") return p.n_min;
    if (key == "n_max") return p.n_max;
    if (key == "count") return p.count;
    if (key == "ancilla_dim") return p.ancilla_dim;
    return p.detector_dim;  // "detector_dim"
}

// Leading comment of every CSV: version, command and the protocol knobs.
// Output paths never appear here, so reruns into different files stay
// byte-identical.
std::string csv_comment(const ScenarioConfig& cfg) {
    std::string line = fmt::format("# multipath {} {}", kVersion, cfg.command);
    for (const auto& key : schema_for(cfg.command).protocol_keys) {
        const json v = protocol_value(cfg.protocol, key);
        line += fmt::format(" {}={}", key, v.is_string() ? v.get<std::string>() : v.dump());
    }
    line += "\n";
    return line;
}

std::string cell(double value) { return io::format_double(value); }

std::string cell(const std::optional<double>& value) {
    return value ? io::format_double(*value) : std::string();
}

struct Inputs {
    std::optional<QuantonState> state;
    std::optional<PureQuanton> psi;  // set when the state came in as amplitudes
    std::optional<DetectorGram> gram;
    std::optional<PhaseVector> base;  // scan ramp offsets
    std::optional<ChannelModel> channel;
};

// "state" is either the inline {"pure"|"ensemble"|"density": ...} object or
// {"file": "path"} pointing at a JSON file holding that object.
json load_state_source(const json& source) {
    if (!source.is_object() || !source.contains("file")) return source;
    if (source.size() != 1 || !source.at("file").is_string()) {
        throw Error(ErrorKind::Validation,
                    "state.file must be the only state key and hold a path string");
    }
    const std::string path = source.at("file").get<std::string>();
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorKind::Validation, fmt::format("cannot open state file {}", path));
    }
    try {
        json loaded;
        in >> loaded;
        return loaded;
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::Validation,
                    fmt::format("state file {} is not valid JSON: {}", path, e.what()));
    }
}

Inputs build_inputs(const ScenarioConfig& cfg) {
    Inputs in;
    if (cfg.state) {
        const json source = load_state_source(*cfg.state);
        in.state = io::state_from_json(source);
        in.psi = io::pure_from_state_json(source);
    }
    if (cfg.detector) {
        in.gram = io::gram_from_json(*cfg.detector);
        if (in.state && in.gram->paths() != in.state->paths()) {
            throw Error(ErrorKind::DimensionMismatch,
                        fmt::format("detector gram is for {} paths, state has {}",
                                    in.gram->paths(), in.state->paths()));
        }
    }
    if (cfg.phases_rad) {
        RealVector theta(static_cast<Eigen::Index>(cfg.phases_rad->size()));
        for (std::size_t i = 0; i < cfg.phases_rad->size(); ++i)
            theta(static_cast<Eigen::Index>(i)) = (*cfg.phases_rad)[i];
        in.base = PhaseVector(theta);
        if (in.state && in.base->paths() != in.state->paths()) {
            throw Error(ErrorKind::DimensionMismatch,
                        fmt::format("{} phases given for a {}-path state", in.base->paths(),
                                    in.state->paths()));
        }
    }
    if (in.state) {
        const int n = in.state->paths();
        in.channel = cfg.amp2 ? ChannelModel(n, *cfg.amp2) : ChannelModel::uniform(n);
    }
    return in;
}

// One state's worth of identity checks: the global measures, the closed
// identities among them, the weighted pairwise reconstructions, and the
// agreement with the first-principles oracles. Fields stay empty where the
// quantity is undefined (mixed state, flagged pair, large n).
struct ResidualRow {
    double purity = 0.0;
    double visibility = 0.0;
    double predictability = 0.0;
    double distinguishability = 0.0;
    double entanglement = 0.0;
    double triality_residual = 0.0;
    double duality_gap = 0.0;
    std::optional<double> dpe_residual;
    std::optional<double> rms_visibility_residual;
    std::optional<double> rms_predictability_residual;
    std::optional<double> rms_distinguishability_residual;
    std::optional<double> rms_concurrence_residual;
    std::optional<double> oracle_entanglement_residual;
    std::optional<double> oracle_helstrom_residual;
    std::optional<double> oracle_concurrence_residual;
    std::optional<double> variance_residual;
};

constexpr int kBruteforceMaxPaths = 6;

ResidualRow identity_residuals(const QuantonState& s, const std::optional<PureQuanton>& psi_in,
                               const DetectorGram& g, int bruteforce_points) {
    ResidualRow r;
    const int n = s.paths();
    const MeasureReport m = measure_report(s, g);
    r.purity = s.purity();
    r.visibility = m.visibility;
    r.predictability = m.predictability;
    r.distinguishability = m.distinguishability;
    r.entanglement = m.entanglement;
    r.triality_residual = m.triality_residual;
    r.duality_gap = -m.duality_residual;

    const std::optional<PureQuanton> psi = psi_in ? psi_in : pure_from_density(s);
    if (psi) {
        r.dpe_residual = std::abs(m.distinguishability * m.distinguishability -
                                  m.predictability * m.predictability -
                                  m.entanglement * m.entanglement);
    }

    const QuantonState reduced = couple_detector(s, g);
    const PairwiseTable vis_table = pairwise_visibility(reduced);
    if (!vis_table.has_flagged()) {
        r.rms_visibility_residual =
            std::abs(rms_reconstruct(vis_table, RmsMode::Weighted) - m.visibility);
    }
    const PairwiseTable pred_table = pairwise_predictability(s);
    if (!pred_table.has_flagged()) {
        r.rms_predictability_residual =
            std::abs(rms_reconstruct(pred_table, RmsMode::Weighted) - m.predictability);
    }
    const PairwiseTable dist_table = pairwise_distinguishability(s, g);
    if (!dist_table.has_flagged()) {
        r.rms_distinguishability_residual =
            std::abs(rms_reconstruct(dist_table, RmsMode::Weighted) - m.distinguishability);

        double worst = 0.0;
        for (const auto& entry : dist_table.pairs) {
            const double pi = s.population(entry.i);
            const double pj = s.population(entry.j);
            const double overlap = std::abs(g.matrix()(entry.i, entry.j));
            const double expected =
                oracles::helstrom_oracle(pi / (pi + pj), pj / (pi + pj), overlap);
            worst = std::max(worst, std::abs(entry.value - expected));
        }
        r.oracle_helstrom_residual = worst;
    }

    if (psi) {
        const PairwiseTable conc_table = pairwise_concurrence(*psi, g);
        if (!conc_table.has_flagged()) {
            r.rms_concurrence_residual =
                std::abs(rms_reconstruct(conc_table, RmsMode::Weighted) - m.entanglement);

            double worst = 0.0;
            for (const auto& entry : conc_table.pairs) {
                ComplexVector pair_amp(2);
                pair_amp << psi->amplitudes()(entry.i), psi->amplitudes()(entry.j);
                ComplexMatrix pair_gram(2, 2);
                const Complex gij = g.matrix()(entry.i, entry.j);
                pair_gram << Complex(1.0, 0.0), gij, std::conj(gij), Complex(1.0, 0.0);
                const double expected = oracles::two_qubit_concurrence_oracle(oracles::build_joint(
                    PureQuanton::normalized(pair_amp), DetectorGram(pair_gram)));
                worst = std::max(worst, std::abs(entry.value - expected));
            }
            r.oracle_concurrence_residual = worst;
        }

        const double scale = std::sqrt(static_cast<double>(n) / (2.0 * (n - 1)));
        const double expected =
            scale * oracles::i_concurrence_oracle(oracles::build_joint(*psi, g));
        r.oracle_entanglement_residual = std::abs(m.entanglement - expected);
    }

    if (n <= kBruteforceMaxPaths) {
        const ChannelModel channel = ChannelModel::uniform(n);
        r.variance_residual =
            std::abs(phase_average_variance_exact(s, channel) -
                     oracles::variance_bruteforce(s, channel, std::max(3, bruteforce_points)));
    }
    return r;
}

json residual_row_json(const ResidualRow& r) {
    auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
    return json{{"purity", r.purity},
                {"visibility", r.visibility},
                {"predictability", r.predictability},
                {"distinguishability", r.distinguishability},
                {"entanglement", r.entanglement},
                {"triality_residual", r.triality_residual},
                {"duality_gap", r.duality_gap},
                {"dpe_residual", opt(r.dpe_residual)},
                {"rms_visibility_residual", opt(r.rms_visibility_residual)},
                {"rms_predictability_residual", opt(r.rms_predictability_residual)},
                {"rms_distinguishability_residual", opt(r.rms_distinguishability_residual)},
                {"rms_concurrence_residual", opt(r.rms_concurrence_residual)},
                {"oracle_entanglement_residual", opt(r.oracle_entanglement_residual)},
                {"oracle_helstrom_residual", opt(r.oracle_helstrom_residual)},
                {"oracle_concurrence_residual", opt(r.oracle_concurrence_residual)},
                {"variance_residual", opt(r.variance_residual)}};
}

std::string quantity_csv(const ScenarioConfig& cfg,
                         const std::vector<std::pair<std::string, std::string>>& rows) {
    std::string out = csv_comment(cfg) + "quantity,value\n";
    for (const auto& [name, value] : rows) out += name + "," + value + "\n";
    return out;
}

struct CommandOutput {
    json result;
    std::string csv;
};

CommandOutput run_measures(const ScenarioConfig& cfg, const Inputs& in) {
    const QuantonState& s = *in.state;
    const DetectorGram g = in.gram ? *in.gram : DetectorGram::all_ones(s.paths());
    const MeasureReport m = measure_report(s, g);
    const double uqsd = distinguishability_uqsd(s, g);

    json result = io::to_json(m);
    result["paths"] = s.paths();
    result["purity"] = s.purity();
    result["distinguishability_uqsd"] = uqsd;
    result["uqsd_gap"] = m.distinguishability - uqsd;

    const std::string csv = quantity_csv(
        cfg, {{"visibility", cell(m.visibility)},
              {"predictability", cell(m.predictability)},
              {"distinguishability", cell(m.distinguishability)},
              {"distinguishability_uqsd", cell(uqsd)},
              {"uqsd_gap", cell(m.distinguishability - uqsd)},
              {"entanglement", cell(m.entanglement)},
              {"triality_residual", cell(m.triality_residual)},
              {"duality_residual", cell(m.duality_residual)},
              {"purity", cell(s.purity())}});
    return {result, csv};
}

CommandOutput run_campaign(const ScenarioConfig& cfg, const Inputs& in) {
    const CampaignRecord record =
        pair_opening_campaign(*in.state, in.gram, cfg.protocol.grid);

    std::string csv = csv_comment(cfg) +
                      "i,j,weight,zero_probability,contrast,visibility,predictability,"
                      "distinguishability,concurrence\n";
    for (const auto& pair : record.pairs) {
        const bool z = pair.zero_probability;
        csv += fmt::format("{},{},{},{},{},{},{},{},{}\n", pair.i, pair.j, cell(pair.weight),
                           z ? 1 : 0, z ? std::string() : cell(pair.contrast_scan),
                           z ? std::string() : cell(pair.visibility),
                           z ? std::string() : cell(pair.predictability),
                           cell(pair.distinguishability), cell(pair.concurrence));
    }
    return {io::to_json(record), csv};
}

CommandOutput run_scan(const ScenarioConfig& cfg, const Inputs& in) {
    QuantonState s = *in.state;
    if (in.gram) s = couple_detector(s, *in.gram);
    const PhaseVector base = in.base ? *in.base : PhaseVector::zero(s.paths());
    const IntensityScan scan = fringe_scan(s, *in.channel, base, cfg.protocol.grid);
    const double contrast = fringe_contrast(scan);

    json result;
    result["scan"] = io::to_json(scan);
    result["contrast"] = contrast;
    result["amp2"] = in.channel->amp2;

    std::string csv = csv_comment(cfg) + "phi,intensity\n";
    for (std::size_t k = 0; k < scan.phi.size(); ++k)
        csv += cell(scan.phi[k]) + "," + cell(scan.intensity[k]) + "\n";
    return {result, csv};
}

CommandOutput run_variance(const ScenarioConfig& cfg, const Inputs& in) {
    QuantonState s = *in.state;
    if (in.gram) s = couple_detector(s, *in.gram);
    const ChannelModel& channel = *in.channel;
    const ProtocolParams& p = cfg.protocol;

    json result;
    result["method"] = p.method;
    result["amp2"] = channel.amp2;
    double value = 0.0;
    std::optional<double> standard_error;
    if (p.method == "exact") {
        value = phase_average_variance_exact(s, channel);
    } else if (p.method == "montecarlo") {
        const MonteCarloEstimate estimate =
            phase_average_variance_montecarlo(s, channel, p.samples, p.seed);
        value = estimate.value;
        standard_error = estimate.standard_error;
        result["samples"] = estimate.samples;
        result["standard_error"] = estimate.standard_error;
    } else {
        value = phase_average_variance_quadrature(s, channel, p.points);
        result["points_per_phase"] = p.points;
    }
    result["variance"] = value;

    // The variance-to-visibility inversion only holds on the probability
    // normalization amp2 = 1/n.
    std::optional<double> vis;
    if (std::abs(channel.amp2 * s.paths() - 1.0) <= 1e-9) {
        vis = visibility_from_variance(value, s.paths());
        result["visibility"] = *vis;
    } else {
        result["visibility"] = nullptr;
        result["visibility_note"] = "defined only for amp2 = 1/n";
    }

    std::vector<std::pair<std::string, std::string>> rows = {{"variance", cell(value)}};
    if (standard_error) rows.emplace_back("standard_error", cell(*standard_error));
    rows.emplace_back("visibility", cell(vis));
    return {result, quantity_csv(cfg, rows)};
}

CommandOutput run_meiweitz(const ScenarioConfig& cfg) {
    const ProtocolParams& p = cfg.protocol;
    const MeiWeitzReport report = mei_weitz(p.n, p.flipped_path, p.overlap, p.grid);
    const std::string csv = quantity_csv(
        cfg, {{"overlap", cell(report.overlap)},
              {"contrast_before", cell(report.contrast_before)},
              {"contrast_after", cell(report.contrast_after)},
              {"visibility_before", cell(report.visibility_before)},
              {"visibility_after", cell(report.visibility_after)},
              {"contrast_increased",
               report.contrast_after > report.contrast_before ? "1" : "0"}});
    return {io::to_json(report), csv};
}

CommandOutput run_verify(const ScenarioConfig& cfg, const Inputs& in) {
    const QuantonState& s = *in.state;
    const DetectorGram g = in.gram ? *in.gram : DetectorGram::all_ones(s.paths());
    const ResidualRow r = identity_residuals(s, in.psi, g, cfg.protocol.points);

    auto cells = std::vector<std::pair<std::string, std::string>>{
        {"purity", cell(r.purity)},
        {"visibility", cell(r.visibility)},
        {"predictability", cell(r.predictability)},
        {"distinguishability", cell(r.distinguishability)},
        {"entanglement", cell(r.entanglement)},
        {"triality_residual", cell(r.triality_residual)},
        {"duality_gap", cell(r.duality_gap)},
        {"dpe_residual", cell(r.dpe_residual)},
        {"rms_visibility_residual", cell(r.rms_visibility_residual)},
        {"rms_predictability_residual", cell(r.rms_predictability_residual)},
        {"rms_distinguishability_residual", cell(r.rms_distinguishability_residual)},
        {"rms_concurrence_residual", cell(r.rms_concurrence_residual)},
        {"oracle_entanglement_residual", cell(r.oracle_entanglement_residual)},
        {"oracle_helstrom_residual", cell(r.oracle_helstrom_residual)},
        {"oracle_concurrence_residual", cell(r.oracle_concurrence_residual)},
        {"variance_residual", cell(r.variance_residual)}};
    return {residual_row_json(r), quantity_csv(cfg, cells)};
}

CommandOutput run_random_sweep(const ScenarioConfig& cfg) {
    const ProtocolParams& p = cfg.protocol;

    std::string csv =
        csv_comment(cfg) +
        "n,instance,kind,purity,visibility,predictability,distinguishability,entanglement,"
        "triality_residual,duality_gap,dpe_residual,rms_visibility_residual,"
        "rms_predictability_residual,rms_distinguishability_residual,rms_concurrence_residual,"
        "oracle_entanglement_residual,oracle_helstrom_residual,oracle_concurrence_residual,"
        "variance_residual\n";

    json rows = json::array();
    std::map<std::string, double> maxima;
    auto track = [&maxima](const std::string& name, const std::optional<double>& v) {
        if (!v) return;
        auto [it, inserted] = maxima.emplace(name, *v);
        if (!inserted) it->second = std::max(it->second, *v);
    };

    int instances = 0;
    for (int n = p.n_min; n <= p.n_max; ++n) {
        const std::uint64_t base = qmath::mix_seed(p.seed ^ qmath::mix_seed(n));
        const int detector_dim = p.detector_dim > 0 ? p.detector_dim : n;
        for (int k = 0; k < p.count; ++k) {
            const std::uint64_t state_seed = qmath::mix_seed(base ^ (2ULL * k + 1));
            const std::uint64_t gram_seed = qmath::mix_seed(base ^ (2ULL * k + 2));
            const bool pure = (k % 2 == 0);

            std::optional<PureQuanton> psi;
            std::optional<QuantonState> s;
            if (pure) {
                psi = random_pure(n, state_seed);
                s = density_from_pure(*psi);
            } else {
                s = random_mixed(n, p.ancilla_dim, state_seed);
            }
            const DetectorGram g = random_gram(n, detector_dim, gram_seed);
            const ResidualRow r = identity_residuals(*s, psi, g, 3);
            ++instances;

            json row = residual_row_json(r);
            row["n"] = n;
            row["instance"] = k;
            row["kind"] = pure ? "pure" : "mixed";
            rows.push_back(row);

            csv += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", n, k,
                               pure ? "pure" : "mixed", cell(r.purity), cell(r.visibility),
                               cell(r.predictability), cell(r.distinguishability),
                               cell(r.entanglement), cell(r.triality_residual),
                               cell(r.duality_gap), cell(r.dpe_residual),
                               cell(r.rms_visibility_residual), cell(r.rms_predictability_residual),
                               cell(r.rms_distinguishability_residual),
                               cell(r.rms_concurrence_residual),
                               cell(r.oracle_entanglement_residual),
                               cell(r.oracle_helstrom_residual),
                               cell(r.oracle_concurrence_residual), cell(r.variance_residual));

            track("triality_residual", std::abs(r.triality_residual));
            track("duality_gap_negative_part", std::max(0.0, -r.duality_gap));
            if (pure) track("duality_residual_pure", std::abs(r.duality_gap));
            track("dpe_residual", r.dpe_residual);
            track("rms_visibility_residual", r.rms_visibility_residual);
            track("rms_predictability_residual", r.rms_predictability_residual);
            track("rms_distinguishability_residual", r.rms_distinguishability_residual);
            track("rms_concurrence_residual", r.rms_concurrence_residual);
            track("oracle_entanglement_residual", r.oracle_entanglement_residual);
            track("oracle_helstrom_residual", r.oracle_helstrom_residual);
            track("oracle_concurrence_residual", r.oracle_concurrence_residual);
            track("variance_residual", r.variance_residual);
        }
    }

    json result;
    result["instances"] = instances;
    result["rows"] = rows;
    result["max_residuals"] = json(maxima);
    return {result, csv};
}

}  // namespace

const std::vector<std::string>& command_names() {
    static const std::vector<std::string> names = {
        "measures", "campaign", "scan", "variance", "meiweitz", "verify", "random-sweep"};
    return names;
}

json ScenarioConfig::resolved() const {
    json out;
    out["command"] = command;
    if (state) out["state"] = *state;
    if (detector) out["detector"] = *detector;
    if (phases_rad) out["phases_rad"] = *phases_rad;
    if (amp2) out["channel"] = json{{"amp2", *amp2}};
    json p = json::object();
    for (const auto& key : schema_for(command).protocol_keys)
        p[key] = protocol_value(protocol, key);
    out["protocol"] = p;
    json o = json::object();
    if (!out_json.empty()) o["json"] = out_json;
    if (!out_csv.empty()) o["csv"] = out_csv;
    out["output"] = o;
    return out;
}

ScenarioConfig parse_config(const json& config, const std::string& command) {
    if (!config.is_object()) throw ConfigError("config must be a JSON object");
    const CommandSchema& schema = schema_for(command);

    ScenarioConfig cfg;
    cfg.command = command;

    for (const auto& [key, value] : config.items()) {
        if (key == "command") {
            if (!value.is_string()) throw ConfigError("\"command\" must be a string");
            if (value.get<std::string>() != command) {
                throw ConfigError(fmt::format("config names command \"{}\" but \"{}\" was invoked",
                                              value.get<std::string>(), command));
            }
        } else if (key == "state" && schema.state_required) {
            if (!value.is_object()) throw ConfigError("\"state\" must be an object");
            cfg.state = value;
        } else if (key == "detector" && schema.allows_detector) {
            if (!value.is_object()) throw ConfigError("\"detector\" must be an object");
            cfg.detector = value;
        } else if (key == "phases_rad" && schema.allows_phases) {
            if (!value.is_array()) throw ConfigError("\"phases_rad\" must be an array of numbers");
            std::vector<double> phases;
            for (const auto& item : value) {
                if (!item.is_number())
                    throw ConfigError("\"phases_rad\" must be an array of numbers");
                phases.push_back(item.get<double>());
            }
            cfg.phases_rad = std::move(phases);
        } else if (key == "channel" && schema.allows_channel) {
            if (!value.is_object()) throw ConfigError("\"channel\" must be an object");
            for (const auto& [ckey, cval] : value.items()) {
                if (ckey != "amp2")
                    throw ConfigError(fmt::format("unknown channel key \"{}\"", ckey));
                if (!cval.is_number()) throw ConfigError("channel.amp2 must be a number");
                cfg.amp2 = cval.get<double>();
            }
        } else if (key == "protocol") {
            read_protocol(value, schema, command, cfg.protocol);
        } else if (key == "output") {
            if (!value.is_object()) throw ConfigError("\"output\" must be an object");
            for (const auto& [okey, oval] : value.items()) {
                if (okey != "json" && okey != "csv")
                    throw ConfigError(fmt::format("unknown output key \"{}\"", okey));
                if (!oval.is_string())
                    throw ConfigError(fmt::format("output.{} must be a string path", okey));
                (okey == "json" ? cfg.out_json : cfg.out_csv) = oval.get<std::string>();
            }
        } else {
            throw ConfigError(
                fmt::format("key \"{}\" is not used by command \"{}\"", key, command));
        }
    }

    if (schema.state_required && !cfg.state)
        throw ConfigError(fmt::format("command \"{}\" needs a \"state\"", command));
    return cfg;
}

void apply_set_override(json& config, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) {
        throw ConfigError(
            fmt::format("--set expects DOTTED.PATH=VALUE, got \"{}\"", assignment));
    }
    std::string pointer = "/" + assignment.substr(0, eq);
    std::replace(pointer.begin(), pointer.end(), '.', '/');
    const std::string raw = assignment.substr(eq + 1);

    json value;
    try {
        value = json::parse(raw);
    } catch (const json::parse_error&) {
        value = raw;  // unquoted strings are taken verbatim
    }
    try {
        config[json::json_pointer(pointer)] = std::move(value);
    } catch (const json::exception& e) {
        throw ConfigError(fmt::format("cannot apply --set \"{}\": {}", assignment, e.what()));
    }
}

int exit_code_for(const Error& error, RunPhase phase) {
    if (error.kind() == ErrorKind::DimensionMismatch) return 4;
    if (phase == RunPhase::Input) return 3;
    switch (error.kind()) {
        case ErrorKind::NotPSD:
        case ErrorKind::NegativeRadicand:
        case ErrorKind::OvershootBeyondTolerance:
            return 5;
        default:
            return 3;
    }
}

json run(const ScenarioConfig& cfg) {
    Inputs in;
    try {
        in = build_inputs(cfg);
    } catch (const Error& e) {
        throw CommandError(exit_code_for(e, RunPhase::Input), e.what());
    }

    CommandOutput out;
    try {
        if (cfg.command == "measures") out = run_measures(cfg, in);
        else if (cfg.command == "campaign") out = run_campaign(cfg, in);
        else if (cfg.command == "scan") out = run_scan(cfg, in);
        else if (cfg.command == "variance") out = run_variance(cfg, in);
        else if (cfg.command == "meiweitz") out = run_meiweitz(cfg);
        else if (cfg.command == "verify") out = run_verify(cfg, in);
        else out = run_random_sweep(cfg);
    } catch (const Error& e) {
        throw CommandError(exit_code_for(e, RunPhase::Compute), e.what());
    }

    json report;
    report["version"] = std::string(kVersion);
    report["command"] = cfg.command;
    report["config"] = cfg.resolved();
    report["result"] = out.result;
    if (!cfg.out_json.empty()) io::write_text_atomic(cfg.out_json, report.dump(2) + "\n");
    if (!cfg.out_csv.empty()) io::write_text_atomic(cfg.out_csv, out.csv);
    return report;
}

}  // namespace multipath::cli
