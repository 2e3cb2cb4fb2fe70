#include "twistwalk/diagnostics.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

#include "twistwalk/error.hpp"
#include "twistwalk/imbed.hpp"
#include "twistwalk/parallel.hpp"
#include "twistwalk/rand_source.hpp"
#include "twistwalk/stats.hpp"
#include "twistwalk/twist_shrink.hpp"
#include "twistwalk/wiener.hpp"

namespace twistwalk {

using nlohmann::json;

json to_json(const StatReport& r) {
    return json{{"suite", r.suite},
                {"sample_size", r.sample_size},
                {"statistic", r.statistic},
                {"target", r.target},
                {"pass", r.pass},
                {"significance", r.significance},
                {"first_seed", r.first_seed},
                {"seeds", r.seeds},
                {"details", r.details}};
}

std::int64_t sample_walk_sum(std::uint64_t seed, std::int64_t n) {
    StepSource src(SeedSpec{seed});
    std::uint64_t key = src.level_key(0);
    std::int64_t ups = 0;
    std::int64_t full = n / 64;
    for (std::int64_t i = 0; i < full; ++i) ups += std::popcount(StepSource::word_from_key(key, i));
    if (n % 64) ups += std::popcount(StepSource::word_from_key(key, full) & ((1ULL << (n % 64)) - 1));
    return 2 * ups - n;
}

std::int64_t sample_stopping_time(std::uint64_t seed, std::int64_t k) {
    if (k < 0) throw std::domain_error("k must be >= 0");
    if (k == 0) return 0;
    StepSource src(SeedSpec{seed});
    std::uint64_t key = src.level_key(0);
    std::int64_t seen = 0;
    for (std::uint64_t idx = 0;; ++idx) {
        std::uint64_t eq = change_pair_mask(StepSource::word_from_key(key, idx));
        int c = std::popcount(eq);
        if (seen + c < k) {
            seen += c;
            continue;
        }
        for (std::int64_t i = seen + 1; i < k; ++i) eq &= eq - 1;
        return static_cast<std::int64_t>(idx) * 64 + std::countr_zero(eq) + 2;
    }
}

StatReport clt_suite(std::uint64_t first_seed, std::int64_t paths, std::int64_t n, std::int64_t k, double alpha) {
    std::vector<std::int64_t> sn(static_cast<std::size_t>(paths)), tk(static_cast<std::size_t>(paths));
    parallel_for(sn.size(), [&](std::size_t i) {
        sn[i] = sample_walk_sum(first_seed + i, n);
        tk[i] = sample_stopping_time(first_seed + i, k);
    });
    double rn = std::sqrt(static_cast<double>(n));
    double mk = 4.0 * static_cast<double>(k), sk = std::sqrt(8.0 * static_cast<double>(k));
    KsResult a = ks_test_lattice(sn, 2, [&](double x) { return normal_cdf(x / rn); });
    KsResult b = ks_test_lattice(tk, 2, [&](double x) { return normal_cdf((x - mk) / sk); });
    StatReport r;
    r.suite = "clt";
    r.sample_size = paths;
    r.statistic = std::min(a.p_value, b.p_value);
    r.target = alpha;
    r.significance = alpha;
    r.pass = a.p_value >= alpha && b.p_value >= alpha;
    r.first_seed = first_seed;
    r.seeds = paths;
    r.details = {{"n", n},
                 {"k", k},
                 {"walk_ks", a.statistic},
                 {"walk_p", a.p_value},
                 {"stopping_time_ks", b.statistic},
                 {"stopping_time_p", b.p_value}};
    return r;
}

StatReport tails_suite(std::uint64_t first_seed, std::int64_t paths, std::int64_t n, std::int64_t k, double x) {
    std::vector<char> walk_hit(static_cast<std::size_t>(paths)), tk_hit(static_cast<std::size_t>(paths));
    double rn = std::sqrt(static_cast<double>(n));
    double mk = 4.0 * static_cast<double>(k), sk = std::sqrt(8.0 * static_cast<double>(k));
    parallel_for(walk_hit.size(), [&](std::size_t i) {
        walk_hit[i] = std::abs(static_cast<double>(sample_walk_sum(first_seed + i, n))) / rn >= x;
        tk_hit[i] = std::abs(static_cast<double>(sample_stopping_time(first_seed + i, k)) - mk) / sk >= x;
    });
    double fw = static_cast<double>(std::count(walk_hit.begin(), walk_hit.end(), 1)) / paths;
    double ft = static_cast<double>(std::count(tk_hit.begin(), tk_hit.end(), 1)) / paths;
    double bound = std::exp(-x * x / 2.0);
    double allow = frequency_allowance(bound, paths);
    StatReport r;
    r.suite = "tails";
    r.sample_size = paths;
    r.statistic = std::max(fw, ft);
    r.target = allow;
    r.pass = fw <= allow && ft <= allow;
    r.first_seed = first_seed;
    r.seeds = paths;
    r.details = {{"n", n},
                 {"k", k},
                 {"x", x},
                 {"bound", bound},
                 {"walk_frequency", fw},
                 {"stopping_time_frequency", ft},
                 {"normal_two_sided", 2.0 * (1.0 - normal_cdf(x))}};
    return r;
}

StatReport variation_suite(std::uint64_t seed, int n, double K) {
    WienerGrid grid = build_to_level(SeedSpec{seed}, n, K, {true, false});
    StatReport r;
    r.suite = "variation";
    r.significance = 0;
    r.first_seed = seed;
    r.seeds = 1;
    r.pass = true;
    json rows = json::array();
    DyadicValue prev{};
    for (int m = 0; m <= n; ++m) {
        DyadicValue v = total_variation(grid.level(m), K);
        DyadicValue expect{static_cast<std::int64_t>(std::floor(std::ldexp(K, 2 * m))), m};
        bool ok = v == expect;
        bool doubles = m == 0 || std::floor(K) != K || v == prev + prev;
        r.pass = r.pass && ok && doubles;
        rows.push_back({{"m", m}, {"variation", v.to_double()}, {"expected", expect.to_double()}, {"exact", ok}});
        prev = v;
        r.statistic = v.to_double();
        r.target = expect.to_double();
    }
    r.sample_size = n + 1;
    r.details = {{"n", n}, {"K", K}, {"levels", rows}};
    return r;
}

double max_increment(const std::vector<std::int64_t>& sums, std::int64_t window) {
    std::int64_t N = static_cast<std::int64_t>(sums.size());
    if (N == 0) return 0;
    std::int64_t w = std::min(window + 1, N);
    // van Herk / Gil-Werman block prefix and suffix extrema
    std::vector<std::int64_t> pmax(N), pmin(N), smax(N), smin(N);
    for (std::int64_t i = 0; i < N; ++i) {
        bool start = i % w == 0;
        pmax[i] = start ? sums[i] : std::max(pmax[i - 1], sums[i]);
        pmin[i] = start ? sums[i] : std::min(pmin[i - 1], sums[i]);
    }
    for (std::int64_t i = N - 1; i >= 0; --i) {
        bool end = (i + 1) % w == 0 || i == N - 1;
        smax[i] = end ? sums[i] : std::max(smax[i + 1], sums[i]);
        smin[i] = end ? sums[i] : std::min(smin[i + 1], sums[i]);
    }
    std::int64_t best = 0;
    for (std::int64_t i = 0; i + w <= N; ++i) {
        std::int64_t j = i + w - 1;
        std::int64_t hi = std::max(smax[i], pmax[j]);
        std::int64_t lo = std::min(smin[i], pmin[j]);
        best = std::max(best, hi - lo);
    }
    return static_cast<double>(best);
}

StatReport modulus_suite(std::uint64_t first_seed, std::int64_t seeds, int n, double K, double delta, double u,
                         const std::vector<double>& h_list) {
    if (!(delta > 0 && delta < 1) || !(u > 0)) throw std::domain_error("modulus suite needs 0 < delta < 1, u > 0");
    std::vector<std::vector<double>> incr(static_cast<std::size_t>(seeds));
    parallel_for(incr.size(), [&](std::size_t i) {
        WienerGrid g = build_to_level(SeedSpec{first_seed + i}, n, K, {false, false});
        std::vector<std::int64_t> sums(static_cast<std::size_t>(g.last_index()) + 1);
        for (std::int64_t r = 0; r <= g.last_index(); ++r) sums[r] = g.finest().sum(r);
        for (double h : h_list) {
            auto window = static_cast<std::int64_t>(std::floor(std::ldexp(h, 2 * n)));
            incr[i].push_back(std::ldexp(max_increment(sums, window), -n));
        }
    });
    StatReport r;
    r.suite = "modulus";
    r.sample_size = seeds;
    r.first_seed = first_seed;
    r.seeds = seeds;
    r.pass = true;
    json rows = json::array();
    for (std::size_t j = 0; j < h_list.size(); ++j) {
        double h = h_list[j];
        std::int64_t hits = 0;
        for (std::size_t i = 0; i < incr.size(); ++i) hits += incr[i][j] >= u;
        double freq = static_cast<double>(hits) / seeds;
        double bound = 7.0 * std::exp(-u * u * (1.0 - delta) / (2.0 * h));
        double allow = frequency_allowance(bound, seeds);
        bool ok = freq <= allow;
        r.pass = r.pass && ok;
        r.statistic = std::max(r.statistic, freq - allow);
        rows.push_back({{"h", h}, {"frequency", freq}, {"bound", bound}, {"allowance", allow}, {"pass", ok}});
    }
    r.details = {{"n", n}, {"K", K}, {"delta", delta}, {"u", u}, {"rows", rows}};
    return r;
}

StatReport nondiff_probe(std::uint64_t first_seed, std::int64_t seeds, int n, const std::vector<int>& m_list,
                         std::int64_t probes, double K) {
    std::vector<std::vector<std::int64_t>> hits(static_cast<std::size_t>(seeds)), used(static_cast<std::size_t>(seeds));
    parallel_for(hits.size(), [&](std::size_t i) {
        std::uint64_t seed = first_seed + i;
        WienerGrid g = build_to_level(SeedSpec{seed}, n, K, {false, false});
        for (int m : m_list) {
            EmbeddingTimes e = first_passage_times(g, m);
            double threshold = std::pow(2.0, m / 2.0) / 58.0;
            std::int64_t h = 0, u = 0;
            for (std::int64_t p = 0; p < probes; ++p) {
                std::uint64_t z = mix64(mix64(seed ^ 0xA24BAED4963EE407ULL) + static_cast<std::uint64_t>(p) * kGolden);
                double t = K * (1.0 - std::ldexp(static_cast<double>(z >> 11), -53));
                double x = std::ldexp(t, 2 * n);
                auto it = std::lower_bound(e.grid_index.begin(), e.grid_index.end(), x,
                                           [](std::int64_t a, double b) { return static_cast<double>(a) < b; });
                if (it == e.grid_index.end() || it == e.grid_index.begin()) continue;
                ++u;
                double ds = std::ldexp(static_cast<double>(*it - *(it - 1)), -2 * n);
                double slope = std::ldexp(1.0, -m) / ds;
                h += slope >= threshold;
            }
            hits[i].push_back(h);
            used[i].push_back(u);
        }
    });
    StatReport r;
    r.suite = "nondiff";
    r.first_seed = first_seed;
    r.seeds = seeds;
    r.target = 0.99;
    r.statistic = 1.0;
    r.pass = true;
    json rows = json::array();
    for (std::size_t j = 0; j < m_list.size(); ++j) {
        std::int64_t h = 0, u = 0;
        for (std::size_t i = 0; i < hits.size(); ++i) {
            h += hits[i][j];
            u += used[i][j];
        }
        double frac = u > 0 ? static_cast<double>(h) / u : 0.0;
        bool ok = u > 0 && frac >= 0.99;
        r.pass = r.pass && ok;
        r.statistic = std::min(r.statistic, frac);
        r.sample_size += u;
        rows.push_back({{"m", m_list[j]},
                        {"threshold", std::pow(2.0, m_list[j] / 2.0) / 58.0},
                        {"probes_used", u},
                        {"probes_skipped", seeds * probes - u},
                        {"fraction", frac},
                        {"pass", ok}});
    }
    r.details = {{"n", n}, {"K", K}, {"rows", rows}};
    return r;
}

StatReport convergence_suite(std::uint64_t first_seed, std::int64_t seeds, const std::vector<int>& n_range, double K,
                             double C) {
    ConvergenceReport rep = convergence_report(first_seed, seeds, n_range, K, C);
    StatReport r;
    r.suite = "convergence";
    r.sample_size = seeds;
    r.first_seed = first_seed;
    r.seeds = seeds;
    r.pass = rep.pass;
    json rows = json::array();
    for (const auto& row : rep.rows) {
        r.statistic = std::max(r.statistic, row.frequency);
        r.target = row.allowance;
        rows.push_back({{"n", row.n},
                        {"threshold", row.threshold},
                        {"bound", row.bound},
                        {"allowance", row.allowance},
                        {"exceed", row.exceed},
                        {"frequency", row.frequency},
                        {"wilson_low", row.wilson_low},
                        {"wilson_high", row.wilson_high},
                        {"mean_distance", row.mean_distance},
                        {"max_distance", row.max_distance},
                        {"pass", row.pass}});
    }
    r.details = {{"K", K}, {"C", C}, {"rows", rows}, {"monotone_fraction", rep.monotone_fraction}};
    return r;
}

StatReport error_bound_suite(std::uint64_t first_seed, std::int64_t seeds, int n, int reference_level, double K,
                             double C) {
    if (reference_level <= n) throw std::domain_error("reference level must exceed n");
    std::vector<double> dist(static_cast<std::size_t>(seeds));
    parallel_for(dist.size(), [&](std::size_t i) {
        WienerGrid g = build_to_level(SeedSpec{first_seed + i}, reference_level, K, {true, false});
        dist[i] = sup_distance(g.level(n), g.finest(), K);
    });
    double threshold = error_bound(n);
    double bound = 6.0 * std::pow(std::ldexp(K, 2 * n), 1.0 - C);
    std::int64_t hits = std::count_if(dist.begin(), dist.end(), [&](double d) { return d >= threshold; });
    double freq = static_cast<double>(hits) / seeds;
    StatReport r;
    r.suite = "error_bound";
    r.sample_size = seeds;
    r.first_seed = first_seed;
    r.seeds = seeds;
    r.statistic = freq;
    r.target = frequency_allowance(bound, seeds);
    r.pass = freq <= r.target;
    r.details = {{"n", n},
                 {"reference_level", reference_level},
                 {"threshold", threshold},
                 {"bound", bound},
                 {"max_distance", *std::max_element(dist.begin(), dist.end())}};
    return r;
}

StatReport lags_suite(std::uint64_t first_seed, std::int64_t seeds, int m, int n_max, double K, double C,
                      double delta) {
    if (n_max <= m) throw std::domain_error("lag suite needs n_max > m");
    struct Row {
        bool lag_exceed = false;
        bool diff_exceed = false;
        bool short_horizon = false;
        double max_lag = 0;
        double max_dev = 0;
        double first_diff = 0;
    };
    std::vector<Row> rows(static_cast<std::size_t>(seeds));
    std::int64_t count = static_cast<std::int64_t>(std::floor(std::ldexp(K, 2 * m)));
    double lag_bound = time_lag_bound(m, K, C), lag_budget = time_lag_budget(m, K, C);
    double diff_bound = neighbor_diff_bound(m, delta), diff_budget = neighbor_diff_budget(m, K, delta);
    parallel_for(rows.size(), [&](std::size_t i) {
        StepSource src(SeedSpec{first_seed + i});
        auto levels = build_levels(src, n_max, K * 4.0 / 3.0);
        Row& row = rows[i];
        for (int n = m + 1; n <= n_max; ++n) {
            try {
                ComposedTimes ct = composed_stopping_times(levels, m, n, count);
                LagReport lr = time_lag_report(ct, K, C);
                NeighborDiffReport nr = neighbor_diff_report(ct, K, delta);
                row.lag_exceed = row.lag_exceed || lr.exceeded;
                row.diff_exceed = row.diff_exceed || nr.exceeded;
                row.max_lag = std::max(row.max_lag, lr.max_lag);
                row.max_dev = std::max(row.max_dev, nr.max_dev);
                if (n == n_max) row.first_diff = nr.mean_first;
            } catch (const InsufficientInput&) {
                row.short_horizon = true;
                row.lag_exceed = true;
                row.diff_exceed = true;
            }
        }
    });
    std::int64_t lag_hits = 0, diff_hits = 0, short_hits = 0;
    double max_lag = 0, max_dev = 0;
    std::vector<double> first;
    for (const auto& row : rows) {
        lag_hits += row.lag_exceed;
        diff_hits += row.diff_exceed;
        short_hits += row.short_horizon;
        max_lag = std::max(max_lag, row.max_lag);
        max_dev = std::max(max_dev, row.max_dev);
        if (!row.short_horizon) first.push_back(row.first_diff);
    }
    double lag_freq = static_cast<double>(lag_hits) / seeds;
    double diff_freq = static_cast<double>(diff_hits) / seeds;
    double lag_allow = frequency_allowance(lag_budget, seeds);
    double diff_allow = frequency_allowance(diff_budget, seeds);
    StatReport r;
    r.suite = "lags";
    r.sample_size = seeds;
    r.first_seed = first_seed;
    r.seeds = seeds;
    r.statistic = lag_freq;
    r.target = lag_allow;
    r.pass = lag_freq <= lag_allow && diff_freq <= diff_allow;
    json mean = nullptr;
    if (first.size() >= 2) {
        Moments mo = sample_moments(first);
        mean = {{"mean", mo.mean},
                {"stderr", std::sqrt(mo.variance / first.size())},
                {"expected", std::ldexp(1.0, -2 * m)}};
    }
    r.details = {{"m", m},
                 {"n_max", n_max},
                 {"K", K},
                 {"C", C},
                 {"delta", delta},
                 {"lag_bound", lag_bound},
                 {"lag_budget", lag_budget},
                 {"lag_frequency", lag_freq},
                 {"lag_allowance", lag_allow},
                 {"max_lag", max_lag},
                 {"diff_bound", diff_bound},
                 {"diff_budget", diff_budget},
                 {"diff_frequency", diff_freq},
                 {"diff_allowance", diff_allow},
                 {"max_diff_deviation", max_dev},
                 {"short_horizon", short_hits},
                 {"first_diff_mean", mean}};
    return r;
}

StatReport twistlaw_suite(std::uint64_t first_seed, std::int64_t seeds, const std::vector<int>& levels,
                          double alpha) {
    if (levels.empty()) throw std::domain_error("twistlaw suite needs levels");
    int top = *std::max_element(levels.begin(), levels.end());
    if (*std::min_element(levels.begin(), levels.end()) < 0) throw std::domain_error("levels must be >= 0");
    std::vector<std::vector<int>> pattern(static_cast<std::size_t>(seeds));
    std::vector<char> marginal(static_cast<std::size_t>(seeds));
    int marg_level = std::min(2, top);
    parallel_for(pattern.size(), [&](std::size_t i) {
        StepSource src(SeedSpec{first_seed + i});
        std::vector<std::int64_t> min_steps(static_cast<std::size_t>(top) + 1, 6);
        auto built = build_levels(src, plan_horizon(src, top, min_steps));
        for (int m : levels) {
            int p = 0;
            for (int r = 1; r <= 6; ++r) p |= (built[m].step(r) > 0 ? 1 : 0) << (r - 1);
            pattern[i].push_back(p);
        }
        marginal[i] = built[marg_level].step(5) > 0;
    });
    StatReport r;
    r.suite = "twistlaw";
    r.sample_size = seeds;
    r.first_seed = first_seed;
    r.seeds = seeds;
    r.significance = alpha;
    r.pass = true;
    json rows = json::array();
    for (std::size_t j = 0; j < levels.size(); ++j) {
        std::vector<std::int64_t> counts(64, 0);
        for (const auto& p : pattern) ++counts[p[j]];
        ChiSquareResult c = chi_square_uniform(counts, alpha);
        r.pass = r.pass && c.pass;
        r.statistic = std::max(r.statistic, c.statistic);
        r.target = c.critical;
        rows.push_back({{"m", levels[j]},
                        {"chi_square", c.statistic},
                        {"critical", c.critical},
                        {"p_value", c.p_value},
                        {"pass", c.pass}});
    }
    double pm = static_cast<double>(std::count(marginal.begin(), marginal.end(), 1)) / seeds;
    double sd = std::sqrt(0.25 / seeds);
    bool marg_ok = std::abs(pm - 0.5) <= 3 * sd;
    r.pass = r.pass && marg_ok;
    r.details = {{"rows", rows},
                 {"marginal", {{"level", marg_level}, {"step", 5}, {"frequency", pm}, {"pass", marg_ok}}}};
    return r;
}

StatReport marginals_suite(std::uint64_t first_seed, std::int64_t seeds, int n, double alpha) {
    std::vector<double> w1(static_cast<std::size_t>(seeds)), wh(static_cast<std::size_t>(seeds)),
        inc(static_cast<std::size_t>(seeds));
    std::int64_t one = std::int64_t{1} << (2 * n);
    parallel_for(w1.size(), [&](std::size_t i) {
        WienerGrid g = build_to_level(SeedSpec{first_seed + i}, n, 1.0, {false, false});
        w1[i] = g.value(one).to_double();
        wh[i] = g.value(one / 2).to_double();
        inc[i] = w1[i] - wh[i];
    });
    KsResult ks = ks_test(w1, normal_cdf);
    Moments half = sample_moments(wh);
    double corr = correlation(wh, inc);
    double N = static_cast<double>(seeds);
    bool ks_ok = ks.p_value >= alpha;
    bool var_ok = std::abs(half.variance - 0.5) <= 3 * half.variance_stderr;
    bool corr_ok = std::abs(corr) <= 3 / std::sqrt(N);
    StatReport r;
    r.suite = "marginals";
    r.sample_size = seeds;
    r.first_seed = first_seed;
    r.seeds = seeds;
    r.significance = alpha;
    r.statistic = ks.p_value;
    r.target = alpha;
    r.pass = ks_ok && var_ok && corr_ok;
    r.details = {{"n", n},
                 {"ks_statistic", ks.statistic},
                 {"ks_p", ks.p_value},
                 {"var_half", half.variance},
                 {"var_half_stderr", half.variance_stderr},
                 {"correlation", corr},
                 {"correlation_limit", 3 / std::sqrt(N)},
                 {"ks_pass", ks_ok},
                 {"var_pass", var_ok},
                 {"corr_pass", corr_ok}};
    return r;
}

}  // namespace twistwalk
