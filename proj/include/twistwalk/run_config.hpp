#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace twistwalk {

// Everything a command needs; resolve_defaults fills suite-dependent values
// so a persisted config replays without consulting defaults again.
struct RunConfig {
    std::string command;  // generate | integrate | diagnose | embed
    std::uint64_t seed = 42;
    std::int64_t seeds = 0;   // ensemble size for suites, 0 = suite default
    int level = -1;           // finest level n, -1 = default
    int m = 3;                // coarse level for embed
    std::vector<int> m_range; // integrate levels or suite levels
    double K = 1.0;
    std::string integrand = "x";
    std::string mode = "ito";
    std::string output;       // empty = stdout
    std::string suite;
    double significance = 0.001;
    double C = 1.5;
    double delta = 0.0;       // 0 = suite default
    double u = 1.0;
    double x = 2.5;
    std::vector<double> h_list;
    std::int64_t probes = 1000;
    std::int64_t stride = 1;
    bool mutate = false;
    unsigned threads = 0;

    bool operator==(const RunConfig&) const = default;
};

nlohmann::json to_json(const RunConfig& c);
RunConfig config_from_json(const nlohmann::json& j);

std::string emit_config(const RunConfig& c);
RunConfig parse_config(const std::string& text);

const std::vector<std::string>& suite_names();

// Throws std::invalid_argument on unknown commands, suites or modes.
void resolve_defaults(RunConfig& c);

// Writes the config under $TWISTWALK_REGISTRY when set; returns the path or "".
std::string persist_config(const RunConfig& c);

}  // namespace twistwalk
