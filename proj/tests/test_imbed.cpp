#include <catch_amalgamated.hpp>

#include <cmath>
#include <map>
#include <stdexcept>

#include "twistwalk/error.hpp"
#include "twistwalk/imbed.hpp"

using namespace twistwalk;
using Catch::Approx;

namespace {

EmbeddingTimes passage_oracle(const TwistedLevel& fine, int m, std::int64_t last) {
    int n = fine.level();
    std::int64_t D = std::int64_t{1} << (n - m);
    EmbeddingTimes e;
    e.m = m;
    e.n = n;
    e.grid_index.push_back(0);
    e.value_numerator.push_back(0);
    std::int64_t anchor = 0;
    for (std::int64_t r = 1; r <= last; ++r) {
        if (std::abs(fine.sum(r) - anchor) == D) {
            anchor = fine.sum(r);
            e.grid_index.push_back(r);
            e.value_numerator.push_back(anchor / D);
        }
    }
    return e;
}

std::int64_t composed_oracle(const std::vector<TwistedLevel>& levels, int m, int n, std::int64_t k) {
    for (int j = m + 1; j <= n; ++j) k = levels[j].stopping_time(k);
    return k;
}

}  // namespace

TEST_CASE("first passages match the scan oracle") {
    for (std::uint64_t seed : {1ULL, 42ULL, 99ULL}) {
        WienerGrid g = build_to_level(SeedSpec{seed}, 7, 1.3);
        for (int m = 0; m <= 7; ++m) {
            // D <= 8 uses the byte table, coarser thresholds the span skip
            EmbeddingTimes got = first_passage_times(g, m);
            EmbeddingTimes want = passage_oracle(g.finest(), m, g.last_index());
            REQUIRE(got.grid_index == want.grid_index);
            REQUIRE(got.value_numerator == want.value_numerator);
            for (std::int64_t last : {g.last_index() - 1, g.last_index() - 7, std::int64_t{13}}) {
                REQUIRE(first_passage_times(g.finest(), m, last).grid_index ==
                        passage_oracle(g.finest(), m, last).grid_index);
            }
        }
    }
}

TEST_CASE("passage structure") {
    WienerGrid g = build_to_level(SeedSpec{42}, 6, 1.0);
    EmbeddingTimes same = first_passage_times(g, 6);
    REQUIRE(same.count() == g.last_index());
    for (std::int64_t k = 0; k <= same.count(); ++k) REQUIRE(same.grid_index[k] == k);
    EmbeddingTimes e = first_passage_times(g, 2);
    CHECK(e.grid_index[0] == 0);
    CHECK(e.time(0) == 0.0);
    for (std::int64_t k = 1; k <= e.count(); ++k) {
        REQUIRE(e.grid_index[k] > e.grid_index[k - 1]);
        REQUIRE(std::abs(e.value_numerator[k] - e.value_numerator[k - 1]) == 1);
        REQUIRE(e.value(k).to_double() == g.value(e.grid_index[k]).to_double());
    }
    CHECK(e.time(e.count()) <= 1.0);
    CHECK_THROWS_AS(first_passage_times(g, 7), std::domain_error);
}

TEST_CASE("seed 42 imbedding of level 3 in level 10 recovers B_3") {
    WienerGrid g = build_to_level(SeedSpec{42}, 10, 1.0, {.retain_levels = true, .compute_sup_distances = false});
    auto levels = g.levels();
    EmbeddingTimes e = first_passage_times(g, 3);
    REQUIRE(e.count() >= 1);
    for (std::int64_t k = 0; k <= e.count(); ++k) {
        REQUIRE(e.value(k) == levels[3].shrink_eval(k));
        REQUIRE(e.grid_index[k] == composed_oracle(levels, 3, 10, k));
    }
    CHECK(crosscheck_embedding(levels, 3, 10, 1.0).exact);
}

TEST_CASE("composed stopping times") {
    StepSource src(SeedSpec{42});
    auto levels = build_levels(src, 6, 1.0);
    ComposedTimes one = composed_stopping_times(levels, 2, 3, 16);
    for (std::int64_t k = 0; k <= 16; ++k) CHECK(one.T[k] == levels[3].stopping_time(k));
    for (int m = 0; m < 6; ++m)
        for (int n = m + 1; n <= 6; ++n) {
            ComposedTimes ct = composed_stopping_times(levels, m, n);
            REQUIRE(ct.T[0] == 0);
            CHECK(ct.lag(0) == 0.0);
            for (std::int64_t k = 1; k <= ct.count(); ++k) {
                REQUIRE(ct.T[k] == composed_oracle(levels, m, n, k));
                REQUIRE(ct.diff(k) >= (std::int64_t{1} << (n - m)));
                REQUIRE(levels[n].sum(ct.T[k]) == (levels[m].sum(k) << (n - m)));
            }
            REQUIRE(crosscheck_embedding(levels, m, n, 1.0).exact);
        }
    // seed 42, m = 2, n = 6: passage times equal 4^{-n} T_{2,6}(k)
    ComposedTimes ct = composed_stopping_times(levels, 2, 6);
    EmbeddingTimes fp = first_passage_times(levels[6], 2, 4096);
    for (std::int64_t k = 0; k <= std::min(ct.count(), fp.count()); ++k) REQUIRE(fp.time(k) == std::ldexp(ct.T[k], -12));
    CHECK_THROWS_AS(composed_stopping_times(levels, 3, 3, 4), std::domain_error);
}

TEST_CASE("composition beyond the build is reported") {
    StepSource src(SeedSpec{42});
    auto levels = build_levels(src, 4, 1.0);
    CHECK_THROWS_AS(composed_stopping_times(levels, 1, 4, 1000), InsufficientInput);
    std::vector<std::int64_t> idx{0, 1, levels[2].bridges() + 5};
    try {
        map_stopping_times(levels[2], idx);
        FAIL("expected InsufficientInput");
    } catch (const InsufficientInput& e) {
        CHECK(e.deficit() == 5);
    }
}

TEST_CASE("bound formulas") {
    CHECK(time_lag_bound(8, 1.0, 1.5) == Approx(std::sqrt(27.0 * 8) / 256));
    CHECK(time_lag_bound(8, 1.0, 1.5) == Approx(0.0574).epsilon(1e-3));
    CHECK(time_lag_budget(8, 1.0, 1.5) == Approx(4.0 / 256));
    CHECK(neighbor_diff_bound(8, 0.25) == Approx(28.0 / 4096));
    CHECK(neighbor_diff_bound(8, 0.25) == Approx(0.00684).epsilon(1e-3));
    CHECK(neighbor_diff_budget(2, 1.0, 0.25) == Approx(0.1 * std::pow(2.0, -4.0 * (7.0 / 3 - 2))));
}

TEST_CASE("lag and neighbour reports") {
    StepSource src(SeedSpec{5});
    auto levels = build_levels(src, 8, 4.0 / 3);
    ComposedTimes ct = composed_stopping_times(levels, 4, 8);
    LagReport lr = time_lag_report(ct, 1.0, 1.5);
    CHECK(lr.points == 257);
    double max_lag = 0;
    for (std::int64_t k = 0; k <= 256; ++k)
        max_lag = std::max(max_lag, std::abs(std::ldexp(ct.T[k], -16) - std::ldexp(k, -8)));
    CHECK(lr.max_lag == max_lag);
    CHECK(lr.as_bound == Approx(std::sqrt(27.0 * 4) / 16));
    CHECK(lr.exceeded == (lr.max_lag >= lr.bound));
    NeighborDiffReport nr = neighbor_diff_report(ct, 1.0, 0.25);
    CHECK(nr.points == 256);
    CHECK(nr.mean_all == Approx(std::ldexp(ct.T[256], -16) / 256));
    CHECK(nr.mean_first == std::ldexp(ct.diff(1), -16));
    CHECK_THROWS_AS(time_lag_report(ct, 1.0, 1.0), std::domain_error);
    CHECK_THROWS_AS(neighbor_diff_report(ct, 1.0, 1.0), std::domain_error);
    CHECK_THROWS_AS(time_lag_report(ct, 50.0, 1.5), InsufficientInput);
}

TEST_CASE("neighbour law at m = n - 1 is the doubled geometric") {
    std::map<std::int64_t, std::int64_t> tally;
    std::int64_t total = 0;
    for (std::uint64_t seed = 1; seed <= 400; ++seed) {
        StepSource src(SeedSpec{seed});
        auto levels = build_levels(src, 3, 1.0);
        ComposedTimes ct = composed_stopping_times(levels, 2, 3);
        for (std::int64_t k = 1; k <= ct.count(); ++k, ++total) ++tally[ct.diff(k)];
    }
    for (int j = 1; j <= 5; ++j) {
        double p = std::ldexp(1.0, -j);
        double f = static_cast<double>(tally[2 * j]) / total;
        CHECK(std::abs(f - p) <= 4 * std::sqrt(p * (1 - p) / total));
    }
}

TEST_CASE("mean of the first composed time") {
    // E 4^{-n} tau_{m,n}(1) = 4^{-m}; Var tau = (2/3) D^2 (D^2 - 1) with D = 2^{n-m}
    const int m = 2, n = 5;
    const std::int64_t N = 10000;
    double sum = 0;
    for (std::uint64_t seed = 1; seed <= static_cast<std::uint64_t>(N); ++seed) {
        StepSource src(SeedSpec{seed});
        auto levels = build_levels(src, n, 1.0);
        sum += std::ldexp(static_cast<double>(composed_stopping_times(levels, m, n, 1).T[1]), -2 * n);
    }
    double D2 = 64.0;
    double sd = std::sqrt(2.0 / 3 * D2 * (D2 - 1)) / 1024;
    CHECK(std::abs(sum / N - 1.0 / 16) <= 3 * sd / std::sqrt(static_cast<double>(N)));
}
