#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "twistwalk/dyadic.hpp"
#include "twistwalk/rand_source.hpp"

namespace twistwalk {

inline constexpr std::uint64_t kEvenBits = 0x5555555555555555ULL;

// Pairs (2i, 2i+1) whose two steps agree; the mask bit sits at 2i.
inline std::uint64_t change_pair_mask(std::uint64_t w) { return ~(w ^ (w >> 1)) & kEvenBits; }

// A walk stored as packed step bits with per-word prefix sums and per-word
// counts of change pairs, giving O(1) sums and O(log) stopping times.
class TwistedLevel {
public:
    TwistedLevel() = default;
    TwistedLevel(int level, std::vector<std::uint64_t> words, std::int64_t steps);

    int level() const { return level_; }
    std::int64_t steps() const { return steps_; }
    std::int64_t bridges() const { return bridges_; }

    int step(std::int64_t r) const;             // 1 <= r <= steps
    std::int64_t sum(std::int64_t r) const;     // 0 <= r <= steps
    std::int64_t stopping_time(std::int64_t k) const;  // 0 <= k <= bridges

    DyadicValue shrink_eval(std::int64_t r) const;
    double shrink_eval_linear(double t) const;

    const std::vector<std::uint64_t>& words() const { return words_; }

    // Negates one step in place; used to exercise violation reporting.
    void flip_step(std::int64_t r);

private:
    void index();

    int level_ = 0;
    std::int64_t steps_ = 0;
    std::int64_t bridges_ = 0;
    std::vector<std::uint64_t> words_;
    std::vector<std::int64_t> prefix_;
    std::vector<std::uint32_t> pair_prefix_;
};

// Raw (untwisted) level m, first `steps` steps.
TwistedLevel raw_level(const StepSource& src, int m, std::int64_t steps);

// Twists raw level prev.level()+1 using the first `bridges` steps of prev.
TwistedLevel twist(const TwistedLevel& prev, const StepSource& src, std::int64_t bridges);
// Same, reading raw steps of the new level from packed words.
TwistedLevel twist(const TwistedLevel& prev, const std::vector<std::uint64_t>& raw_words, std::int64_t bridges);

struct LevelPlan {
    std::int64_t steps = 0;
    std::int64_t bridges = 0;
};

std::int64_t horizon_steps(double K, int m);

// Works from the finest level down: level m must cover min_steps[m] and feed
// the bridges consumed by level m+1. Each level ends on a bridge boundary.
std::vector<LevelPlan> plan_horizon(const StepSource& src, int n, const std::vector<std::int64_t>& min_steps);
std::vector<LevelPlan> plan_horizon(const StepSource& src, int n, double K);

std::vector<TwistedLevel> build_levels(const StepSource& src, int n, double K);
std::vector<TwistedLevel> build_levels(const StepSource& src, const std::vector<LevelPlan>& plan);

struct RefinementViolation {
    int level = 0;
    std::int64_t k = 0;
    std::int64_t fine_sum = 0;
    std::int64_t coarse_sum = 0;
};

struct RefinementResult {
    bool ok = true;
    std::optional<RefinementViolation> first_violation;
    std::int64_t checked = 0;
};

// Checks 2^{-m} S_m(T_m(k)) = 2^{-(m-1)} S_{m-1}(k) for k 4^{-(m-1)} <= K.
RefinementResult check_refinement(const std::vector<TwistedLevel>& levels, double K);
RefinementResult check_refinement(const TwistedLevel& coarse, const TwistedLevel& fine, double K);

// Sum of |B_m(r) - B_m(r-1)| over the full grid segments in [0, K].
DyadicValue total_variation(const TwistedLevel& level, double K);

}  // namespace twistwalk
