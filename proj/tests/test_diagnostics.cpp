#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "twistwalk/diagnostics.hpp"
#include "twistwalk/stats.hpp"
#include "twistwalk/walk.hpp"

using namespace twistwalk;
using Catch::Approx;

namespace {

double ks_oracle(std::vector<double> x, const std::function<double(double)>& cdf) {
    std::sort(x.begin(), x.end());
    double n = static_cast<double>(x.size()), d = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double F = cdf(x[i]);
        d = std::max({d, (i + 1) / n - F, F - i / n});
    }
    return d;
}

double lattice_ks_oracle(const std::vector<std::int64_t>& x, std::int64_t spacing,
                         const std::function<double(double)>& cdf) {
    auto [lo, hi] = std::minmax_element(x.begin(), x.end());
    double d = 0;
    for (std::int64_t s = *lo - spacing; s <= *hi; s += spacing) {
        double emp = static_cast<double>(std::count_if(x.begin(), x.end(), [s](std::int64_t v) { return v <= s; })) /
                     static_cast<double>(x.size());
        d = std::max(d, std::abs(emp - cdf(static_cast<double>(s) + spacing / 2.0)));
    }
    return d;
}

double max_increment_oracle(const std::vector<std::int64_t>& s, std::int64_t window) {
    std::int64_t best = 0, N = static_cast<std::int64_t>(s.size());
    for (std::int64_t i = 0; i < N; ++i)
        for (std::int64_t j = i; j < N && j - i <= window; ++j) best = std::max(best, std::abs(s[j] - s[i]));
    return static_cast<double>(best);
}

}  // namespace

TEST_CASE("normal distribution functions") {
    CHECK(normal_cdf(0.0) == 0.5);
    CHECK(normal_cdf(1.96) == Approx(0.97500210485177956).epsilon(1e-13));
    CHECK(normal_cdf(1.0) == Approx(0.84134474606854294859).epsilon(1e-13));
    CHECK(normal_cdf(0.5) == Approx(0.69146246127401310).epsilon(1e-13));
    CHECK(normal_cdf(2.5) == Approx(0.99379033467422386).epsilon(1e-13));
    CHECK(normal_cdf(-3.0) == Approx(0.0013498980316300945).epsilon(1e-12));
    CHECK(normal_cdf(-5.0) == Approx(2.8665157187919391e-7).epsilon(1e-12));
    CHECK(normal_pdf(0.0) == Approx(1 / std::sqrt(2 * M_PI)));
    CHECK(mills_bound(3.0) == Approx(0.0014772828039793357).epsilon(1e-12));
    CHECK(1 - normal_cdf(3.0) < mills_bound(3.0));
    for (double x = 0.5; x < 8; x += 0.25) CHECK(1 - normal_cdf(x) < mills_bound(x));
}

TEST_CASE("binomial law is close to the normal density") {
    // exhaustive P(S_12 = r) against 2 h phi(r h), h = 1/sqrt(12)
    std::vector<int> count(25, 0);
    for (std::uint64_t mask = 0; mask < 4096; ++mask) ++count[2 * std::popcount(mask) - 12 + 12];
    double h = 1 / std::sqrt(12.0);
    for (int r = -4; r <= 4; r += 2) {
        double p = count[r + 12] / 4096.0;
        double approx = 2 * h * normal_pdf(r * h);
        CHECK(std::abs(p - approx) / p < 0.05);
    }
}

TEST_CASE("kolmogorov distribution") {
    CHECK(kolmogorov_q(0.5) == Approx(0.9639452436648751).epsilon(1e-10));
    CHECK(kolmogorov_q(1.0) == Approx(0.26999967167735456).epsilon(1e-10));
    CHECK(kolmogorov_q(1.36) == Approx(0.049485876755377876).epsilon(1e-10));
    CHECK(kolmogorov_q(1.95) == Approx(0.00099591084288358).epsilon(1e-8));
    CHECK(kolmogorov_q(0.0) == 1.0);
    CHECK(ks_pvalue(0.0, 100) == 1.0);
}

TEST_CASE("ks statistics match brute force") {
    Catch::SimplePcg32 rng(11);
    std::vector<double> u(3000);
    for (auto& v : u) v = rng() / 4294967296.0;
    auto unif = [](double x) { return std::clamp(x, 0.0, 1.0); };
    KsResult r = ks_test(u, unif);
    CHECK(r.statistic == Approx(ks_oracle(u, unif)).margin(1e-15));
    CHECK(r.n == 3000);
    CHECK(r.p_value > 0.001);
    auto shifted = [](double x) { return std::clamp(x - 0.1, 0.0, 1.0); };
    CHECK(ks_test(u, shifted).p_value < 1e-6);

    std::vector<std::int64_t> walks;
    for (std::uint64_t s = 1; s <= 2000; ++s) walks.push_back(sample_walk_sum(s, 64));
    auto model = [](double x) { return normal_cdf(x / 8.0); };
    KsResult lat = ks_test_lattice(walks, 2, model);
    CHECK(lat.statistic == Approx(lattice_ks_oracle(walks, 2, model)).margin(1e-15));
    CHECK(lat.p_value > 0.001);
}

TEST_CASE("chi-square uniformity") {
    std::vector<std::int64_t> flat(64, 1000);
    ChiSquareResult f = chi_square_uniform(flat, 0.001);
    CHECK(f.statistic == 0.0);
    CHECK(f.dof == 63);
    CHECK(f.critical == Approx(103.44237731987324).epsilon(1e-10));
    CHECK(f.pass);
    std::vector<std::int64_t> skew(64, 1000);
    skew[0] = 1400;
    ChiSquareResult s = chi_square_uniform(skew, 0.001);
    CHECK(!s.pass);
    CHECK(s.p_value < 0.001);
}

TEST_CASE("moments, correlation and allowance") {
    Moments m = sample_moments({1, 2, 3, 4});
    CHECK(m.mean == 2.5);
    CHECK(m.variance == Approx(5.0 / 3));
    CHECK(correlation({1, 2, 3}, {2, 4, 6}) == Approx(1.0));
    CHECK(correlation({1, 2, 3}, {3, 2, 1}) == Approx(-1.0));
    CHECK(frequency_allowance(0.01, 100) == Approx(0.01 + 3 * std::sqrt(0.01 * 0.99 / 100)));
    CHECK(frequency_allowance(2.0, 100) == 2.0);
}

TEST_CASE("samplers read the level-0 stream") {
    StepSource src(SeedSpec{42});
    auto steps = src.step_block(0, 1, 4000);
    std::int64_t s = 0;
    for (int i = 0; i < 100; ++i) s += steps[i];
    CHECK(sample_walk_sum(42, 100) == s);
    WaitingTimes w = waiting_times(build_walk(std::span<const std::int8_t>(steps)));
    CHECK(sample_stopping_time(42, 1) == w.stopping_times[0]);
    CHECK(sample_stopping_time(42, 50) == w.stopping_times[49]);
}

TEST_CASE("max increment matches brute force") {
    for (std::uint64_t seed : {1ULL, 2ULL}) {
        StepSource src(SeedSpec{seed});
        auto st = src.step_block(0, 1, 500);
        std::vector<std::int64_t> sums{0};
        for (auto x : st) sums.push_back(sums.back() + x);
        for (std::int64_t w : {0, 1, 7, 8, 63, 200, 500, 900})
            REQUIRE(max_increment(sums, w) == max_increment_oracle(sums, w));
        CHECK(max_increment(sums, 500) >= std::abs(sums.back()));
    }
}

TEST_CASE("small suites pass") {
    StatReport clt = clt_suite(1, 2000, 1024, 1000);
    CHECK(clt.pass);
    CHECK(clt.sample_size == 2000);
    StatReport tails = tails_suite(1, 2000, 1024, 1000, 2.5);
    CHECK(tails.pass);
    CHECK(tails.details["bound"].get<double>() == Approx(std::exp(-3.125)));
    CHECK(tails_suite(1, 100, 256, 100, 0.0).pass);
    StatReport var = variation_suite(42, 6, 1.0);
    CHECK(var.pass);
    CHECK(var.statistic == 64.0);
    CHECK(variation_suite(42, 0, 1.0).statistic == 1.0);
    StatReport mod = modulus_suite(1, 50, 6, 1.0, 0.1, 1.0, {0.1, 0.02});
    CHECK(mod.pass);
    CHECK(mod.details["rows"][0]["bound"].get<double>() == Approx(7 * std::exp(-4.5)));
    CHECK(mod.details["rows"][1]["bound"].get<double>() == Approx(7 * std::exp(-22.5)));
    StatReport nd = nondiff_probe(1, 4, 8, {6, 8}, 200);
    CHECK(nd.pass);
    CHECK(nd.details["rows"][1]["threshold"].get<double>() /
              nd.details["rows"][0]["threshold"].get<double>() ==
          Approx(2.0));
    CHECK(twistlaw_suite(1, 5000, {1, 2}).pass);
    CHECK(marginals_suite(1, 1000, 6).pass);
    CHECK(convergence_suite(1, 20, {4, 6}, 1.0, 1.5).seeds == 20);
    CHECK(error_bound_suite(1, 10, 4, 8, 1.0, 1.5).sample_size == 10);
    CHECK(lags_suite(1, 20, 4, 6, 1.0, 1.5, 0.25).seeds == 20);
    CHECK_THROWS_AS(modulus_suite(1, 5, 4, 1.0, 1.5, 1.0, {0.1}), std::domain_error);
}

TEST_CASE("nondiff threshold") {
    StatReport nd = nondiff_probe(3, 2, 10, {10}, 50);
    CHECK(nd.details["rows"][0]["threshold"].get<double>() == Approx(32.0 / 58));
}

TEST_CASE("suites are deterministic") {
    CHECK(to_json(clt_suite(9, 300, 256, 200)) == to_json(clt_suite(9, 300, 256, 200)));
    CHECK(to_json(twistlaw_suite(9, 500, {1})) == to_json(twistlaw_suite(9, 500, {1})));
    CHECK(to_json(modulus_suite(9, 10, 5, 1.0, 0.1, 1.0, {0.1})) ==
          to_json(modulus_suite(9, 10, 5, 1.0, 0.1, 1.0, {0.1})));
    nlohmann::json j = to_json(variation_suite(1, 3, 1.0));
    CHECK(j["suite"] == "variation");
    CHECK(j["pass"] == true);
}
