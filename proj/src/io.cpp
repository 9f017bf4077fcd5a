#include "multipath/io.hpp"

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <charconv>
#include <fstream>
#include <system_error>

namespace multipath::io {

Complex complex_from_json(const json& j, const std::string& where) {
    if (j.is_number()) return Complex(j.get<double>(), 0.0);
    if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number()) {
        return Complex(j[0].get<double>(), j[1].get<double>());
    }
    throw Error(ErrorKind::Validation,
                fmt::format("{} must be a number or a [re, im] pair, got {}", where, j.dump()));
}

ComplexVector complex_vector_from_json(const json& j, const std::string& where) {
    if (!j.is_array() || j.empty()) {
        throw Error(ErrorKind::Validation, fmt::format("{} must be a non-empty array", where));
    }
    ComplexVector v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i)
        v(static_cast<Eigen::Index>(i)) = complex_from_json(j[i], fmt::format("{}[{}]", where, i));
    return v;
}

ComplexMatrix complex_matrix_from_json(const json& j, const std::string& where) {
    if (!j.is_array() || j.empty()) {
        throw Error(ErrorKind::Validation,
                    fmt::format("{} must be a non-empty array of rows", where));
    }
    const std::size_t rows = j.size();
    ComplexMatrix m;
    for (std::size_t r = 0; r < rows; ++r) {
        const ComplexVector row = complex_vector_from_json(j[r], fmt::format("{}[{}]", where, r));
        if (r == 0) {
            m.resize(static_cast<Eigen::Index>(rows), row.size());
        } else if (row.size() != m.cols()) {
            throw Error(ErrorKind::DimensionMismatch,
                        fmt::format("{} row {} has {} entries, row 0 has {}", where, r, row.size(),
                                    m.cols()));
        }
        m.row(static_cast<Eigen::Index>(r)) = row.transpose();
    }
    return m;
}

QuantonState state_from_json(const json& j) {
    if (!j.is_object()) {
        throw Error(ErrorKind::Validation, "state must be an object");
    }
    const int sources = static_cast<int>(j.contains("pure")) +
                        static_cast<int>(j.contains("ensemble")) +
                        static_cast<int>(j.contains("density"));
    if (sources != 1) {
        throw Error(ErrorKind::Validation,
                    "state needs exactly one of \"pure\", \"ensemble\", \"density\"");
    }
    if (j.contains("pure")) {
        return density_from_pure(PureQuanton(complex_vector_from_json(j["pure"], "state.pure")));
    }
    if (j.contains("ensemble")) {
        const json& members_json = j["ensemble"];
        if (!members_json.is_array() || members_json.empty()) {
            throw Error(ErrorKind::Validation, "state.ensemble must be a non-empty array");
        }
        std::vector<Ensemble::Member> members;
        for (std::size_t k = 0; k < members_json.size(); ++k) {
            const json& mj = members_json[k];
            if (!mj.is_object() || !mj.contains("weight") || !mj.contains("amplitudes")) {
                throw Error(ErrorKind::Validation,
                            fmt::format("state.ensemble[{}] needs \"weight\" and \"amplitudes\"",
                                        k));
            }
            if (!mj["weight"].is_number()) {
                throw Error(ErrorKind::Validation,
                            fmt::format("state.ensemble[{}].weight must be a number", k));
            }
            members.push_back({mj["weight"].get<double>(),
                               complex_vector_from_json(
                                   mj["amplitudes"], fmt::format("state.ensemble[{}].amplitudes", k))});
        }
        return density_from_ensemble(Ensemble(std::move(members)));
    }
    return QuantonState(complex_matrix_from_json(j["density"], "state.density"));
}

std::optional<PureQuanton> pure_from_state_json(const json& j) {
    if (j.is_object() && j.contains("pure")) {
        return PureQuanton(complex_vector_from_json(j["pure"], "state.pure"));
    }
    return std::nullopt;
}

DetectorGram gram_from_json(const json& j) {
    if (!j.is_object()) {
        throw Error(ErrorKind::Validation, "detector must be an object");
    }
    const int sources =
        static_cast<int>(j.contains("gram")) + static_cast<int>(j.contains("detector_vectors"));
    if (sources != 1) {
        throw Error(ErrorKind::Validation,
                    "detector needs exactly one of \"gram\", \"detector_vectors\"");
    }
    if (j.contains("gram")) {
        return DetectorGram(complex_matrix_from_json(j["gram"], "detector.gram"));
    }
    const json& vecs = j["detector_vectors"];
    if (!vecs.is_array() || vecs.size() < 2) {
        throw Error(ErrorKind::Validation, "detector.detector_vectors needs at least 2 vectors");
    }
    const Eigen::Index n = static_cast<Eigen::Index>(vecs.size());
    std::vector<ComplexVector> v;
    for (Eigen::Index i = 0; i < n; ++i) {
        v.push_back(complex_vector_from_json(vecs[static_cast<std::size_t>(i)],
                                             fmt::format("detector.detector_vectors[{}]", i)));
        if (v.back().size() != v.front().size()) {
            throw Error(ErrorKind::DimensionMismatch,
                        fmt::format("detector vector {} has dimension {}, vector 0 has {}", i,
                                    v.back().size(), v.front().size()));
        }
        const double norm2 = v.back().squaredNorm();
        if (std::abs(norm2 - 1.0) > 1e-9) {
            throw Error(ErrorKind::Validation,
                        fmt::format("detector vector {} has squared norm {:.17g}, must be 1",
                                    i, norm2));
        }
    }
    ComplexMatrix g(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index k = 0; k < n; ++k) g(i, k) = v[i].dot(v[k]);  // conjugates the left factor
    g.diagonal().setOnes();
    return DetectorGram(std::move(g));
}

PhaseVector phases_from_json(const json& j) {
    if (!j.is_array() || j.size() < 2) {
        throw Error(ErrorKind::Validation, "phases_rad must be an array of at least 2 numbers");
    }
    RealVector theta(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) {
            throw Error(ErrorKind::Validation,
                        fmt::format("phases_rad[{}] must be a number", i));
        }
        theta(static_cast<Eigen::Index>(i)) = j[i].get<double>();
    }
    return PhaseVector(std::move(theta));
}

json to_json(const MeasureReport& report) {
    return json{{"visibility", report.visibility},
                {"predictability", report.predictability},
                {"distinguishability", report.distinguishability},
                {"entanglement", report.entanglement},
                {"triality_residual", report.triality_residual},
                {"duality_residual", report.duality_residual}};
}

json to_json(const PairwiseTable& table) {
    json pairs = json::array();
    for (const auto& entry : table.pairs) {
        pairs.push_back(json{{"i", entry.i},
                             {"j", entry.j},
                             {"weight", entry.weight},
                             {"value", entry.value},
                             {"zero_probability", entry.zero_probability}});
    }
    return json{{"measure", std::string(to_string(table.measure))},
                {"paths", table.paths},
                {"pairs", std::move(pairs)}};
}

json to_json(const IntensityScan& scan) {
    return json{{"phi", scan.phi}, {"intensity", scan.intensity}};
}

namespace {

json optional_to_json(const std::optional<double>& value) {
    return value ? json(*value) : json(nullptr);
}

}  // namespace

json to_json(const CampaignRecord& record) {
    json pairs = json::array();
    for (const auto& pair : record.pairs) {
        json p{{"i", pair.i},
               {"j", pair.j},
               {"weight", pair.weight},
               {"zero_probability", pair.zero_probability},
               {"contrast_scan", pair.contrast_scan},
               {"visibility", pair.visibility},
               {"predictability", pair.predictability}};
        p["distinguishability"] = optional_to_json(pair.distinguishability);
        p["concurrence"] = optional_to_json(pair.concurrence);
        pairs.push_back(std::move(p));
    }
    json out{{"paths", record.paths},
             {"scan_grid", record.scan_grid},
             {"pairs", std::move(pairs)},
             {"visibility_table", to_json(record.visibility_table)},
             {"predictability_table", to_json(record.predictability_table)},
             {"global_visibility", record.global_visibility},
             {"global_predictability", record.global_predictability}};
    out["distinguishability_table"] = record.distinguishability_table
                                          ? to_json(*record.distinguishability_table)
                                          : json(nullptr);
    out["concurrence_table"] =
        record.concurrence_table ? to_json(*record.concurrence_table) : json(nullptr);
    out["global_distinguishability"] = optional_to_json(record.global_distinguishability);
    out["global_entanglement"] = optional_to_json(record.global_entanglement);
    out["visibility_residual"] = optional_to_json(record.visibility_residual);
    out["predictability_residual"] = optional_to_json(record.predictability_residual);
    out["distinguishability_residual"] = optional_to_json(record.distinguishability_residual);
    out["concurrence_residual"] = optional_to_json(record.concurrence_residual);
    return out;
}

json to_json(const MeiWeitzReport& report) {
    return json{{"overlap", report.overlap},
                {"contrast_before", report.contrast_before},
                {"contrast_after", report.contrast_after},
                {"visibility_before", report.visibility_before},
                {"visibility_after", report.visibility_after},
                {"contrast_increased", report.contrast_after > report.contrast_before}};
}

json to_json(const MonteCarloEstimate& estimate) {
    return json{{"value", estimate.value},
                {"standard_error", estimate.standard_error},
                {"samples", estimate.samples}};
}

std::string format_double(double value) {
    if (value == 0.0) value = 0.0;  // fold -0 into 0
    char buffer[64];
    const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
    if (ec != std::errc()) {
        throw Error(ErrorKind::Validation, "failed to format a double");
    }
    return std::string(buffer, ptr);
}

void write_text_atomic(const std::filesystem::path& path, const std::string& content) {
    if (path.empty()) {
        throw Error(ErrorKind::Validation, "output path is empty");
    }
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw Error(ErrorKind::Validation,
                        fmt::format("cannot open {} for writing", tmp.string()));
        }
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out.good()) {
            throw Error(ErrorKind::Validation, fmt::format("write to {} failed", tmp.string()));
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        throw Error(ErrorKind::Validation,
                    fmt::format("atomic rename to {} failed: {}", path.string(), ec.message()));
    }
}

}  // namespace multipath::io
