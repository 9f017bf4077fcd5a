#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "multipath/error.hpp"

namespace multipath::cli {

using json = nlohmann::json;

// Raised for malformed configs (unknown keys, wrong types, bad --set syntax);
// the driver maps it to exit code 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Raised by run() when a library error stops the command; carries the process
// exit code the driver should return.
struct CommandError : std::runtime_error {
    CommandError(int code, const std::string& message)
        : std::runtime_error(message), exit_code(code) {}
    int exit_code;
};

struct ProtocolParams {
    int grid = 1024;
    std::uint64_t samples = 100000;
    std::uint64_t seed = 1;
    std::string method = "exact";  // exact | montecarlo | quadrature
    int points = 3;
    double overlap = 0.0;
    int flipped_path = 2;
    int n = 3;
    int n_min = 2;
    int n_max = 4;
    int count = 50;
    int ancilla_dim = 2;   // mixedness knob for random instances
    int detector_dim = 0;  // 0 means: same as the instance's path count
};

struct ScenarioConfig {
    std::string command;
    std::optional<json> state;     // {"pure"|"ensemble"|"density": ...}
    std::optional<json> detector;  // {"gram"|"detector_vectors": ...}
    std::optional<std::vector<double>> phases_rad;
    std::optional<double> amp2;
    ProtocolParams protocol;
    std::string out_json;
    std::string out_csv;

    json resolved() const;  // full canonical config, defaults included
};

// Names of the supported commands, in the order the driver advertises them.
const std::vector<std::string>& command_names();

// Validates keys and types against the command's schema. Throws ConfigError.
ScenarioConfig parse_config(const json& config, const std::string& command);

// Applies one KEY=VALUE override with a dotted path, e.g.
// "protocol.seed=7" or "channel.amp2=0.25". VALUE is parsed as JSON when
// possible and kept as a string otherwise.
void apply_set_override(json& config, const std::string& assignment);

// Executes the scenario, writes any requested outputs, and returns the JSON
// report (version and resolved config embedded).
json run(const ScenarioConfig& config);

// Exit-code mapping for library errors: 4 for dimension mismatches anywhere,
// 3 for invalid inputs, 5 for numeric failures while computing.
enum class RunPhase { Input, Compute };
int exit_code_for(const Error& error, RunPhase phase);

}  // namespace multipath::cli
