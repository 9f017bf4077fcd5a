#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "multipath/cli.hpp"
#include "multipath/error.hpp"
#include "multipath/version.hpp"

namespace {

using multipath::Error;
using nlohmann::json;
namespace cli = multipath::cli;

struct SharedOptions {
    std::string config_path;
    std::vector<std::string> sets;
    std::string out_json;
    std::string out_csv;
    std::optional<std::uint64_t> seed;
};

std::string describe(const std::string& command) {
    if (command == "measures") return "global interference measures of one state";
    if (command == "campaign") return "pairwise opening campaign with fringe scans";
    if (command == "scan") return "intensity versus the ramp phase";
    if (command == "variance") return "phase-averaged intensity variance";
    if (command == "meiweitz") return "selective-decoherence contrast study";
    if (command == "verify") return "identity and oracle residuals of one state";
    return "identity residuals over random states";
}

int run_command(const std::string& command, const SharedOptions& opt) {
    json config = json::object();
    if (!opt.config_path.empty()) {
        std::ifstream in(opt.config_path);
        if (!in) {
            fmt::print(stderr, "config error: cannot open {}\n", opt.config_path);
            return 2;
        }
        try {
            in >> config;
        } catch (const json::parse_error& e) {
            fmt::print(stderr, "config error: {}: {}\n", opt.config_path, e.what());
            return 2;
        }
    }

    try {
        for (const auto& assignment : opt.sets) cli::apply_set_override(config, assignment);
        if (opt.seed) config["protocol"]["seed"] = *opt.seed;
        if (!opt.out_json.empty()) config["output"]["json"] = opt.out_json;
        if (!opt.out_csv.empty()) config["output"]["csv"] = opt.out_csv;

        const cli::ScenarioConfig cfg = cli::parse_config(config, command);
        const json report = cli::run(cfg);
        fmt::print("{}\n", report.dump(2));
        return 0;
    } catch (const cli::ConfigError& e) {
        fmt::print(stderr, "config error: {}\n", e.what());
        return 2;
    } catch (const cli::CommandError& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return e.exit_code;
    } catch (const Error& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return 1;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"numerical laboratory for multipath interference with which-way detection"};
    app.set_version_flag("--version", std::string(multipath::kVersion));
    app.require_subcommand(1);

    SharedOptions opt;
    int exit_code = 0;
    for (const auto& name : cli::command_names()) {
        CLI::App* sub = app.add_subcommand(name, describe(name));
        sub->add_option("--config", opt.config_path, "JSON config file");
        sub->add_option("--set", opt.sets, "override a config entry, DOTTED.PATH=VALUE")
            ->allow_extra_args(false);
        sub->add_option("--out-json", opt.out_json, "write the JSON report here");
        sub->add_option("--out-csv", opt.out_csv, "write the CSV table here");
        sub->add_option("--seed", opt.seed, "override protocol.seed");
        sub->callback([&exit_code, &opt, name] { exit_code = run_command(name, opt); });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }
    return exit_code;
}
