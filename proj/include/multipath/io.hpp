#pragma once

#include <nlohmann/json_fwd.hpp>

#include <filesystem>
#include <string>

#include "multipath/interferometer.hpp"
#include "multipath/measures.hpp"
#include "multipath/states.hpp"

// JSON ingestion of states and detectors, report serialization, and the
// numeric formatting shared by every CSV writer.
namespace multipath::io {

using json = nlohmann::json;

// Accepts a bare number (real) or a [re, im] pair.
Complex complex_from_json(const json& j, const std::string& where);
ComplexVector complex_vector_from_json(const json& j, const std::string& where);
ComplexMatrix complex_matrix_from_json(const json& j, const std::string& where);

// Exactly one of "pure", "ensemble", "density".
QuantonState state_from_json(const json& j);
// The amplitudes behind "pure", when that source was used.
std::optional<PureQuanton> pure_from_state_json(const json& j);
// Exactly one of "gram", "detector_vectors".
DetectorGram gram_from_json(const json& j);
PhaseVector phases_from_json(const json& j);

json to_json(const MeasureReport& report);
json to_json(const PairwiseTable& table);
json to_json(const IntensityScan& scan);
json to_json(const CampaignRecord& record);
json to_json(const MeiWeitzReport& report);
json to_json(const MonteCarloEstimate& estimate);

// Shortest decimal form that round-trips the double (never more than 17
// significant digits).
std::string format_double(double value);

// Write-to-temp-then-rename so readers never observe a partial file.
void write_text_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace multipath::io
