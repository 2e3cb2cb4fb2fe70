#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "twistwalk/commands.hpp"
#include "twistwalk/error.hpp"
#include "twistwalk/integrand.hpp"
#include "twistwalk/run_config.hpp"

using namespace twistwalk;

namespace {

void common_options(CLI::App* sub, RunConfig& c) {
    sub->add_option("--seed", c.seed, "master seed (decimal)");
    sub->add_option("--level,-n", c.level, "finest level n");
    sub->add_option("--horizon,-K", c.K, "time horizon K");
    sub->add_option("--output,-o", c.output, "output file (default stdout)");
    sub->add_option("--threads", c.threads, "worker threads (default: hardware count)");
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot read config '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"twistwalk: Wiener paths from twisted random walks"};
    app.require_subcommand(0, 1);
    RunConfig c;
    std::string config_path;
    app.add_option("--config", config_path, "replay a persisted run config");

    auto* gen = app.add_subcommand("generate", "write a level-n Wiener path as CSV");
    common_options(gen, c);
    gen->add_option("--stride", c.stride, "emit every stride-th grid point");

    auto* integ = app.add_subcommand("integrate", "Ito / Stratonovich integrals per level as JSON");
    common_options(integ, c);
    integ->add_option("--f", c.integrand, "integrand: x, x2, sin, cos, exp, poly:c0,c1,..., table:<file>");
    integ->add_option("--mode", c.mode, "ito or strat");
    integ->add_option("--levels", c.m_range, "levels m to evaluate (default level-6..level)");

    auto* diag = app.add_subcommand("diagnose", "run a statistical or exact suite, JSON report");
    common_options(diag, c);
    diag->add_option("--suite", c.suite, "suite name")->required();
    diag->add_option("--paths,--seeds", c.seeds, "ensemble size");
    diag->add_option("--significance", c.significance, "significance level");
    diag->add_option("--C", c.C, "constant C of the bounds");
    diag->add_option("--delta", c.delta, "delta");
    diag->add_option("--u", c.u, "modulus threshold u");
    diag->add_option("--x", c.x, "tail threshold x");
    diag->add_option("--window", c.h_list, "modulus window lengths");
    diag->add_option("--probes", c.probes, "probes per seed");
    diag->add_option("--levels", c.m_range, "suite levels");
    diag->add_flag("--mutate", c.mutate, "flip one step of the finest level first");

    auto* emb = app.add_subcommand("embed", "first-passage times of level m inside level n as CSV");
    common_options(emb, c);
    emb->add_option("--m", c.m, "coarse level m");
    emb->add_option("--stride", c.stride, "emit every stride-th passage");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitPass : kExitUsage;
    }

    try {
        if (!config_path.empty()) {
            c = load_config(config_path);
        } else {
            auto subs = app.get_subcommands();
            if (subs.empty()) {
                std::cerr << app.help();
                return kExitUsage;
            }
            c.command = subs.front()->get_name();
        }
        resolve_defaults(c);
        persist_config(c);
        return run_command(c);
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const IoError& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInternal;
    }
}
