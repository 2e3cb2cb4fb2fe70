#include "twistwalk/commands.hpp"

#include <charconv>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>

#include "twistwalk/diagnostics.hpp"
#include "twistwalk/error.hpp"
#include "twistwalk/imbed.hpp"
#include "twistwalk/integrate.hpp"
#include "twistwalk/parallel.hpp"
#include "twistwalk/wiener.hpp"

namespace twistwalk {

using nlohmann::json;

namespace {

class Sink {
public:
    explicit Sink(const std::string& path) {
        if (path.empty()) {
            out_ = &std::cout;
            return;
        }
        file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
        if (!*file_) throw IoError("cannot open output file '" + path + "'");
        out_ = file_.get();
        path_ = path;
    }
    std::ostream& stream() { return *out_; }
    void finish() {
        out_->flush();
        if (!*out_) throw IoError("write failed for '" + (path_.empty() ? std::string("stdout") : path_) + "'");
    }

private:
    std::unique_ptr<std::ofstream> file_;
    std::ostream* out_ = nullptr;
    std::string path_;
};

std::string fmt(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

json level_json(const LevelEstimate& le) {
    json j{{"m", le.m},
           {"terms", le.terms},
           {"endpoint", le.endpoint.to_double()},
           {"value", le.value},
           {"ito", le.ito_value},
           {"strat", le.strat_value},
           {"correction", le.correction},
           {"trapezoid", le.trapezoid},
           {"identity_exact", le.identity_exact},
           {"identity_holds", le.identity_holds},
           {"identity_residual", le.identity_residual},
           {"ds_term", le.ds_term},
           {"formula_residual", le.formula_residual}};
    if (le.linear_closed_form) j["linear_closed_form"] = *le.linear_closed_form;
    return j;
}

}  // namespace

int cmd_generate(const RunConfig& c) {
    WienerGrid g = build_to_level(SeedSpec{c.seed}, c.level, c.K);
    Sink sink(c.output);
    auto& os = sink.stream();
    os << "# seed=" << c.seed << ", level=" << c.level << ", K=" << fmt(c.K) << ", error_bound=" << fmt(g.error_bound())
       << "\n";
    os << "# refinement=" << (g.refinement().ok ? "exact" : "violated") << ", stride=" << c.stride << "\n";
    os << "t,value\n";
    std::string line;
    for (std::int64_t k = 0; k <= g.last_index(); k += c.stride) {
        line = fmt(std::ldexp(static_cast<double>(k), -2 * c.level));
        line += ',';
        line += fmt(g.value(k).to_double());
        line += '\n';
        os << line;
    }
    sink.finish();
    return g.refinement().ok ? kExitPass : kExitInternal;
}

int cmd_integrate(const RunConfig& c) {
    Integrand f = make_integrand(c.integrand);
    for (int m : c.m_range)
        if (m < 0 || m > c.level) throw std::invalid_argument("integration levels must lie in [0, level]");
    WienerGrid g = build_to_level(SeedSpec{c.seed}, c.level, c.K + kIntegrationMargin, {false, false});
    IntegralEstimate est = c.mode == "ito" ? ito_integral(g, f, c.K, c.m_range)
                                           : stratonovich_integral(g, f, c.K, c.m_range);
    ito_formula_residual(est, f, g, c.K);
    bool ok = true;
    json levels = json::array();
    for (const auto& le : est.levels) {
        ok = ok && le.identity_holds && le.linear_closed_form.value_or(true);
        levels.push_back(level_json(le));
    }
    json out{{"seed", c.seed}, {"mode", c.mode}, {"f", f.name}, {"K", c.K},
             {"level", c.level}, {"grid_K", g.K()}, {"W_K", est.W_K}, {"target", est.target},
             {"identities_hold", ok}, {"per_level", levels}};
    Sink sink(c.output);
    sink.stream() << out.dump(2) << "\n";
    sink.finish();
    return ok ? kExitPass : kExitSuiteFailure;
}

int cmd_diagnose(const RunConfig& c) {
    StatReport r;
    if (c.mutate) {
        WienerGrid g = build_to_level(SeedSpec{c.seed}, std::max(c.level, 1), c.K, {true, false});
        auto levels = g.levels();
        TwistedLevel& top = levels.back();
        // negate the closing pair of a middle bridge so the bridge count is unchanged
        std::int64_t at = top.stopping_time(std::max<std::int64_t>(1, top.bridges() / 2));
        top.flip_step(at - 1);
        top.flip_step(at);
        RefinementResult ref = check_refinement(levels, c.K);
        r.suite = "refinement";
        r.first_seed = c.seed;
        r.seeds = 1;
        r.sample_size = ref.checked;
        r.significance = 0;
        r.pass = ref.ok;
        r.details = {{"mutated_level", top.level()}, {"mutated_step", at}};
        if (ref.first_violation)
            r.details["violation"] = {{"level", ref.first_violation->level},
                                      {"k", ref.first_violation->k},
                                      {"fine_sum", ref.first_violation->fine_sum},
                                      {"coarse_sum", ref.first_violation->coarse_sum}};
    }
    if (!c.mutate || r.pass) {
        const std::string& s = c.suite;
        if (s == "clt")
            r = clt_suite(c.seed, c.seeds, std::int64_t{1} << c.level, 10000, c.significance);
        else if (s == "tails")
            r = tails_suite(c.seed, c.seeds, std::int64_t{1} << c.level, 10000, c.x);
        else if (s == "variation")
            r = variation_suite(c.seed, c.level, c.K);
        else if (s == "modulus")
            r = modulus_suite(c.seed, c.seeds, c.level, c.K, c.delta, c.u, c.h_list);
        else if (s == "nondiff")
            r = nondiff_probe(c.seed, c.seeds, c.level, c.m_range, c.probes, c.K);
        else if (s == "convergence")
            r = convergence_suite(c.seed, c.seeds, c.m_range, c.K, c.C);
        else if (s == "lags")
            r = lags_suite(c.seed, c.seeds, c.m_range.front(), c.level, c.K, c.C, c.delta);
        else if (s == "twistlaw")
            r = twistlaw_suite(c.seed, c.seeds, c.m_range, c.significance);
        else if (s == "marginals")
            r = marginals_suite(c.seed, c.seeds, c.level, c.significance);
        else if (s == "error_bound")
            r = error_bound_suite(c.seed, c.seeds, c.level, 14, c.K, c.C);
        else
            throw std::invalid_argument("unknown suite '" + s + "'");
    }
    json out = to_json(r);
    out["config"] = to_json(c);
    Sink sink(c.output);
    sink.stream() << out.dump(2) << "\n";
    sink.finish();
    return r.pass ? kExitPass : kExitSuiteFailure;
}

int cmd_embed(const RunConfig& c) {
    if (c.m < 0 || c.m > c.level) throw std::invalid_argument("embed needs 0 <= m <= level");
    WienerGrid g = build_to_level(SeedSpec{c.seed}, c.level, c.K, {true, false});
    EmbeddingTimes e = first_passage_times(g, c.m);
    EmbeddingCrosscheck x = crosscheck_embedding(g.levels(), c.m, c.level, c.K);
    Sink sink(c.output);
    auto& os = sink.stream();
    os << "# seed=" << c.seed << ", m=" << c.m << ", level=" << c.level << ", K=" << fmt(c.K)
       << ", passages=" << e.count() << ", crosscheck=" << (x.exact ? "exact" : "mismatch") << "\n";
    os << "k,s_mk,value\n";
    for (std::int64_t k = 0; k <= e.count(); k += c.stride)
        os << k << ',' << fmt(e.time(k)) << ',' << fmt(e.value(k).to_double()) << '\n';
    sink.finish();
    return x.exact ? kExitPass : kExitSuiteFailure;
}

int run_command(const RunConfig& c) {
    set_thread_count(c.threads);
    if (c.command == "generate") return cmd_generate(c);
    if (c.command == "integrate") return cmd_integrate(c);
    if (c.command == "diagnose") return cmd_diagnose(c);
    if (c.command == "embed") return cmd_embed(c);
    throw std::invalid_argument("unknown command '" + c.command + "'");
}

}  // namespace twistwalk
