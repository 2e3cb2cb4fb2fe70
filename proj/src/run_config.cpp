#include "twistwalk/run_config.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "twistwalk/rand_source.hpp"

namespace twistwalk {

using nlohmann::json;

json to_json(const RunConfig& c) {
    return json{{"command", c.command},
                {"seed", c.seed},
                {"seeds", c.seeds},
                {"level", c.level},
                {"m", c.m},
                {"m_range", c.m_range},
                {"K", c.K},
                {"integrand", c.integrand},
                {"mode", c.mode},
                {"output", c.output},
                {"suite", c.suite},
                {"significance", c.significance},
                {"C", c.C},
                {"delta", c.delta},
                {"u", c.u},
                {"x", c.x},
                {"h_list", c.h_list},
                {"probes", c.probes},
                {"stride", c.stride},
                {"mutate", c.mutate},
                {"threads", c.threads}};
}

RunConfig config_from_json(const json& j) {
    RunConfig c;
    auto get = [&](const char* key, auto& field) {
        if (j.contains(key)) j.at(key).get_to(field);
    };
    get("command", c.command);
    get("seed", c.seed);
    get("seeds", c.seeds);
    get("level", c.level);
    get("m", c.m);
    get("m_range", c.m_range);
    get("K", c.K);
    get("integrand", c.integrand);
    get("mode", c.mode);
    get("output", c.output);
    get("suite", c.suite);
    get("significance", c.significance);
    get("C", c.C);
    get("delta", c.delta);
    get("u", c.u);
    get("x", c.x);
    get("h_list", c.h_list);
    get("probes", c.probes);
    get("stride", c.stride);
    get("mutate", c.mutate);
    get("threads", c.threads);
    return c;
}

std::string emit_config(const RunConfig& c) { return to_json(c).dump(2); }

RunConfig parse_config(const std::string& text) {
    try {
        return config_from_json(json::parse(text));
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("bad run config: ") + e.what());
    }
}

const std::vector<std::string>& suite_names() {
    static const std::vector<std::string> names = {"clt",         "tails", "variation", "modulus",   "nondiff",
                                                   "convergence", "lags",  "twistlaw",  "marginals", "error_bound"};
    return names;
}

void resolve_defaults(RunConfig& c) {
    auto level_or = [&](int v) {
        if (c.level < 0) c.level = v;
    };
    auto seeds_or = [&](std::int64_t v) {
        if (c.seeds <= 0) c.seeds = v;
    };
    if (c.command == "generate" || c.command == "embed") {
        level_or(10);
    } else if (c.command == "integrate") {
        level_or(12);
        if (c.mode != "ito" && c.mode != "strat") throw std::invalid_argument("mode must be ito or strat");
        if (c.m_range.empty())
            for (int m = std::max(0, c.level - 6); m <= c.level; ++m) c.m_range.push_back(m);
    } else if (c.command == "diagnose") {
        const auto& names = suite_names();
        if (std::find(names.begin(), names.end(), c.suite) == names.end()) {
            std::string known;
            for (const auto& s : names) known += (known.empty() ? "" : ", ") + s;
            throw std::invalid_argument("unknown suite '" + c.suite + "'; known: " + known);
        }
        const std::string& s = c.suite;
        if (s == "clt" || s == "tails") {
            seeds_or(10000);
            level_or(12);
        } else if (s == "variation") {
            seeds_or(1);
            level_or(10);
        } else if (s == "modulus") {
            seeds_or(1000);
            level_or(10);
            if (c.delta <= 0) c.delta = 0.1;
            if (c.h_list.empty()) c.h_list = {0.1, 0.05, 0.02};
        } else if (s == "nondiff") {
            seeds_or(20);
            level_or(12);
            if (c.m_range.empty()) c.m_range = {8, 10};
        } else if (s == "convergence") {
            seeds_or(200);
            if (c.m_range.empty()) c.m_range = {8, 10};
            level_or(*std::max_element(c.m_range.begin(), c.m_range.end()) + 1);
        } else if (s == "lags") {
            seeds_or(200);
            level_or(10);
            if (c.m_range.empty()) c.m_range = {8};
            if (c.delta <= 0) c.delta = 0.25;
        } else if (s == "twistlaw") {
            seeds_or(100000);
            if (c.m_range.empty()) c.m_range = {1, 2, 3};
            level_or(*std::max_element(c.m_range.begin(), c.m_range.end()));
        } else if (s == "marginals") {
            seeds_or(10000);
            level_or(10);
        } else if (s == "error_bound") {
            seeds_or(20);
            level_or(8);
        }
    } else {
        throw std::invalid_argument("unknown command '" + c.command + "'");
    }
    if (c.level < 0 || c.level > 16) throw std::invalid_argument("level must lie in [0, 16]");
    if (!(c.K > 0)) throw std::invalid_argument("horizon K must be positive");
    if (c.stride < 1) throw std::invalid_argument("stride must be >= 1");
}

std::string persist_config(const RunConfig& c) {
    const char* dir = std::getenv("TWISTWALK_REGISTRY");
    if (!dir || !*dir) return "";
    std::string text = emit_config(c);
    std::uint64_t h = 0;
    for (unsigned char ch : text) h = mix64(h ^ ch);
    char name[64];
    std::snprintf(name, sizeof name, "%s-%016llx.json", c.command.c_str(), static_cast<unsigned long long>(h));
    std::filesystem::create_directories(dir);
    auto path = std::filesystem::path(dir) / name;
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write registry entry " + path.string());
    out << text << '\n';
    return path.string();
}

}  // namespace twistwalk
