#include <catch_amalgamated.hpp>

#include <stdexcept>
#include <vector>

#include "twistwalk/error.hpp"
#include "twistwalk/twist_shrink.hpp"
#include "twistwalk/walk.hpp"

using namespace twistwalk;

namespace {

std::vector<int> steps_of(const TwistedLevel& l) {
    std::vector<int> s(static_cast<std::size_t>(l.steps()));
    for (std::int64_t r = 1; r <= l.steps(); ++r) s[r - 1] = l.step(r);
    return s;
}

std::vector<int> raw_steps(const StepSource& src, int m, std::int64_t count) {
    std::vector<int> s(static_cast<std::size_t>(count));
    for (std::int64_t k = 1; k <= count; ++k) s[k - 1] = src.step(m, k);
    return s;
}

// Scan raw pairs, negate each bridge whose exit disagrees with the previous level.
std::vector<int> twist_oracle(const std::vector<int>& prev, const std::vector<int>& raw, std::int64_t bridges) {
    std::vector<int> out;
    std::size_t start = 0;
    std::int64_t k = 0;
    for (std::size_t i = 0; k < bridges && i + 1 < raw.size(); i += 2) {
        if (raw[i] != raw[i + 1]) continue;
        int sign = raw[i] == prev[static_cast<std::size_t>(k)] ? 1 : -1;
        for (std::size_t j = start; j <= i + 1; ++j) out.push_back(sign * raw[j]);
        start = i + 2;
        ++k;
    }
    if (k < bridges) throw std::logic_error("oracle ran out of raw steps");
    return out;
}

std::vector<std::int64_t> sums_of(const std::vector<int>& s) {
    std::vector<std::int64_t> out{0};
    for (int v : s) out.push_back(out.back() + v);
    return out;
}

}  // namespace

TEST_CASE("twist examples") {
    TwistedLevel up(0, {1ULL}, 1);  // X_0(1) = +1
    // raw bridge -1,-1 exits down and must be negated
    TwistedLevel a = twist(up, std::vector<std::uint64_t>{0b00ULL}, 1);
    REQUIRE(a.steps() == 2);
    CHECK(a.step(1) == 1);
    CHECK(a.step(2) == 1);
    // raw bridge +1,-1,+1,+1 already exits up and is copied
    TwistedLevel b = twist(up, std::vector<std::uint64_t>{0b1101ULL}, 1);
    REQUIRE(b.steps() == 4);
    CHECK(steps_of(b) == std::vector<int>{1, -1, 1, 1});
    TwistedLevel down(0, {0ULL}, 1);
    TwistedLevel c = twist(down, std::vector<std::uint64_t>{0b1101ULL}, 1);
    CHECK(steps_of(c) == std::vector<int>{-1, 1, -1, -1});
}

TEST_CASE("twist matches the brute-force oracle on every 8-step raw word") {
    for (std::uint64_t pm = 0; pm < 16; ++pm) {
        TwistedLevel prev(0, {pm}, 4);
        std::vector<int> ps = steps_of(prev);
        for (std::uint64_t raw = 0; raw < 256; ++raw) {
            std::vector<int> rs;
            for (int i = 0; i < 8; ++i) rs.push_back(((raw >> i) & 1) ? 1 : -1);
            std::int64_t pairs = std::popcount(change_pair_mask(raw) & 0xFFULL);
            for (std::int64_t br = 0; br <= pairs; ++br) {
                TwistedLevel t = twist(prev, std::vector<std::uint64_t>{raw}, br);
                REQUIRE(steps_of(t) == twist_oracle(ps, rs, br));
                REQUIRE(t.bridges() == br);
            }
        }
    }
}

TEST_CASE("twist matches the oracle across word boundaries") {
    for (std::uint64_t seed : {1ULL, 42ULL, 77ULL, 12345ULL}) {
        StepSource src(SeedSpec{seed});
        auto levels = build_levels(src, 4, 2.0);
        for (int m = 1; m <= 4; ++m) {
            const auto& lvl = levels[m];
            std::vector<int> raw = raw_steps(src, m, lvl.steps());
            REQUIRE(steps_of(lvl) == twist_oracle(steps_of(levels[m - 1]), raw, lvl.bridges()));
        }
        // long bridges: only every few words contains a change pair
        std::vector<std::uint64_t> sparse(7, 0xAAAAAAAAAAAAAAAAULL);
        sparse[1] ^= 1ULL << 10;
        sparse[4] ^= 1ULL << 41;
        sparse[5] ^= 0x5ULL << 4;
        sparse[6] ^= 1ULL << 62;
        TwistedLevel prev = raw_level(src, 0, 5);
        std::vector<int> rs;
        for (auto w : sparse)
            for (int i = 0; i < 64; ++i) rs.push_back(((w >> i) & 1) ? 1 : -1);
        std::int64_t pairs = 0;
        for (auto w : sparse) pairs += std::popcount(change_pair_mask(w));
        REQUIRE(pairs == 5);
        REQUIRE(steps_of(twist(prev, sparse, 5)) == twist_oracle(steps_of(prev), rs, 5));
        std::vector<std::uint64_t> barren(40, 0xAAAAAAAAAAAAAAAAULL);
        CHECK_THROWS_AS(twist(prev, barren, 1), HorizonCapExceeded);
    }
}

TEST_CASE("level 0 is the raw walk") {
    StepSource src(SeedSpec{42});
    TwistedLevel l0 = raw_level(src, 0, 1000);
    for (std::int64_t r = 1; r <= 1000; ++r) REQUIRE(l0.step(r) == src.step(0, r));
    auto sums = sums_of(raw_steps(src, 0, 1000));
    for (std::int64_t r = 0; r <= 1000; ++r) REQUIRE(l0.sum(r) == sums[r]);
}

TEST_CASE("seed 42 level 1 refines level 0 for k up to 64") {
    StepSource src(SeedSpec{42});
    TwistedLevel l0 = raw_level(src, 0, 64);
    TwistedLevel l1 = twist(l0, src, 64);
    for (std::int64_t k = 1; k <= 64; ++k) REQUIRE(l1.sum(l1.stopping_time(k)) == 2 * l0.sum(k));
}

TEST_CASE("twisting preserves stopping times") {
    StepSource src(SeedSpec{9});
    auto levels = build_levels(src, 5, 1.0);
    for (int m = 1; m <= 5; ++m) {
        const auto& lvl = levels[m];
        std::vector<int> raw = raw_steps(src, m, lvl.steps());
        WaitingTimes w = waiting_times(build_walk(raw));
        REQUIRE(static_cast<std::int64_t>(w.stopping_times.size()) == lvl.bridges());
        CHECK(lvl.stopping_time(0) == 0);
        for (std::int64_t k = 1; k <= lvl.bridges(); ++k) {
            REQUIRE(lvl.stopping_time(k) == w.stopping_times[k - 1]);
            std::int64_t d = lvl.stopping_time(k) - lvl.stopping_time(k - 1);
            REQUIRE(d >= 2);
            REQUIRE(d % 2 == 0);
            REQUIRE(std::abs(lvl.sum(lvl.stopping_time(k)) - lvl.sum(lvl.stopping_time(k - 1))) == 2);
        }
    }
}

TEST_CASE("stopping time law is geometric at every level over length 8") {
    // P(T(1) = 2j) = 2^{-j}, tallied over every raw 8-step word at each level
    for (int m = 1; m <= 3; ++m) {
        std::vector<int> tally(5, 0);
        TwistedLevel prev(m - 1, {0b1011ULL}, 4);
        for (std::uint64_t raw = 0; raw < 256; ++raw) {
            if (!(change_pair_mask(raw) & 0xFFULL)) continue;
            TwistedLevel t = twist(prev, std::vector<std::uint64_t>{raw}, 1);
            ++tally[t.stopping_time(1) / 2];
        }
        for (int j = 1; j <= 4; ++j) CHECK(tally[j] * (1 << j) == 256);
    }
}

TEST_CASE("check_refinement holds on full builds") {
    for (std::uint64_t seed : {3ULL, 42ULL, 1000ULL}) {
        StepSource src(SeedSpec{seed});
        auto levels = build_levels(src, 6, 1.0);
        RefinementResult r = check_refinement(levels, 1.0);
        CHECK(r.ok);
        CHECK(!r.first_violation);
        CHECK(r.checked > 0);
        // direct recomputation of both sides
        for (int m = 1; m <= 6; ++m)
            for (std::int64_t k = 1; k <= horizon_steps(1.0, m - 1); ++k)
                REQUIRE(levels[m].sum(levels[m].stopping_time(k)) == 2 * levels[m - 1].sum(k));
    }
}

TEST_CASE("check_refinement reports a flipped step") {
    StepSource src(SeedSpec{42});
    auto levels = build_levels(src, 4, 1.0);
    levels[3].flip_step(10);
    RefinementResult r = check_refinement(levels, 1.0);
    REQUIRE(!r.ok);
    REQUIRE(r.first_violation);
    CHECK(r.first_violation->level == 3);
    CHECK(r.first_violation->fine_sum != 2 * r.first_violation->coarse_sum);
    RefinementResult direct = check_refinement(levels[2], levels[3], 1.0);
    CHECK(!direct.ok);
    CHECK(direct.first_violation->k == r.first_violation->k);
}

TEST_CASE("check_refinement needs enough bridges") {
    StepSource src(SeedSpec{42});
    auto levels = build_levels(src, 3, 1.0);
    CHECK_THROWS_AS(check_refinement(levels, 50.0), InsufficientInput);
}

TEST_CASE("twist reports an exhausted previous level") {
    StepSource src(SeedSpec{42});
    TwistedLevel l0 = raw_level(src, 0, 10);
    try {
        (void)twist(l0, src, 13);
        FAIL("expected InsufficientInput");
    } catch (const InsufficientInput& e) {
        CHECK(e.deficit() == 3);
    }
}

TEST_CASE("shrink_eval") {
    StepSource src(SeedSpec{42});
    auto levels = build_levels(src, 3, 1.0);
    for (int m = 0; m <= 3; ++m) CHECK(levels[m].shrink_eval(0) == DyadicValue{0, m});
    const auto& l2 = levels[2];
    auto sums = sums_of(steps_of(l2));
    CHECK(l2.shrink_eval(16) == DyadicValue{sums[16], 2});
    CHECK(l2.shrink_eval(16).to_double() == sums[16] / 4.0);
    for (std::int64_t r = 1; r <= l2.steps(); ++r) {
        DyadicValue d = l2.shrink_eval(r) - l2.shrink_eval(r - 1);
        REQUIRE((d == DyadicValue{1, 2} || d == DyadicValue{-1, 2}));
    }
    CHECK(l2.shrink_eval_linear(16.0 / 16) == sums[16] / 4.0);
    CHECK(l2.shrink_eval_linear(16.5 / 16) == (sums[16] + sums[17]) / 8.0);
    CHECK_THROWS_AS(l2.shrink_eval(l2.steps() + 1), std::domain_error);
}

TEST_CASE("total variation is exact") {
    StepSource src(SeedSpec{42});
    auto levels = build_levels(src, 8, 1.0);
    for (int m = 0; m <= 8; ++m) CHECK(total_variation(levels[m], 1.0) == DyadicValue{std::int64_t{1} << (2 * m), m});
    auto half = build_levels(src, 4, 0.7);
    CHECK(total_variation(half[4], 0.7) == DyadicValue{179, 4});  // floor(0.7 * 256)
}

TEST_CASE("horizon planning") {
    CHECK(horizon_steps(1.0, 3) == 64);
    CHECK(horizon_steps(1.3, 1) == 6);
    CHECK_THROWS_AS(horizon_steps(0.0, 1), std::domain_error);
    StepSource src(SeedSpec{17});
    auto plan = plan_horizon(src, 6, 1.0);
    for (int m = 0; m <= 6; ++m) {
        CHECK(plan[m].steps >= horizon_steps(1.0, m));
        if (m >= 1) {
            CHECK(plan[m].bridges >= horizon_steps(1.0, m - 1));
            CHECK(plan[m - 1].steps >= plan[m].bridges);
        }
    }
    auto levels = build_levels(src, plan);
    for (int m = 1; m <= 6; ++m) {
        CHECK(levels[m].steps() == plan[m].steps);
        CHECK(levels[m].stopping_time(levels[m].bridges()) == levels[m].steps());
    }
    // a finer build reproduces the coarser one as a prefix
    auto deeper = build_levels(src, 7, 1.0);
    for (int m = 0; m <= 6; ++m) {
        std::int64_t common = std::min(levels[m].steps(), deeper[m].steps());
        for (std::int64_t r = 1; r <= common; ++r) REQUIRE(levels[m].step(r) == deeper[m].step(r));
    }
}

TEST_CASE("dyadic values") {
    DyadicValue a{3, 2}, b{6, 3};
    CHECK(a == b);
    CHECK((a <=> b) == std::strong_ordering::equal);
    CHECK(DyadicValue{1, 1} < DyadicValue{3, 2});
    CHECK((a + DyadicValue{1, 3}) == DyadicValue{7, 3});
    CHECK((a - DyadicValue{1, 0}) == DyadicValue{-1, 2});
    CHECK((-a) == DyadicValue{-3, 2});
    CHECK(b.normalized().numerator == 3);
    CHECK(b.normalized().scale == 2);
    CHECK(a.rescaled(5).numerator == 24);
    CHECK_THROWS_AS(DyadicValue({3, 2}).rescaled(1), std::domain_error);
    CHECK_THROWS_AS(DyadicValue({1, 0}).rescaled(70), std::overflow_error);
    CHECK(DyadicValue{5, 2}.to_double() == 1.25);
}
