#pragma once

#include <cstdint>
#include <vector>

#include "twistwalk/twist_shrink.hpp"
#include "twistwalk/wiener.hpp"

namespace twistwalk {

struct EmbeddingTimes {
    int m = 0;
    int n = 0;
    std::vector<std::int64_t> grid_index;       // s_m(k) * 4^n
    std::vector<std::int64_t> value_numerator;  // W(s_m(k)) * 2^m

    std::int64_t count() const { return static_cast<std::int64_t>(grid_index.size()) - 1; }
    double time(std::int64_t k) const;
    DyadicValue value(std::int64_t k) const { return {value_numerator.at(k), m}; }
};

// Successive first passages of the level-n path to +-2^{-m} increments,
// restricted to grid indices <= last_index.
EmbeddingTimes first_passage_times(const TwistedLevel& fine, int m, std::int64_t last_index);
EmbeddingTimes first_passage_times(const WienerGrid& grid, int m);

struct ComposedTimes {
    int m = 0;
    int n = 0;
    std::vector<std::int64_t> T;  // T_{m,n}(0..count), units of level-n steps

    std::int64_t count() const { return static_cast<std::int64_t>(T.size()) - 1; }
    double lag(std::int64_t k) const;
    std::int64_t diff(std::int64_t k) const { return T.at(k) - T.at(k - 1); }
};

// Maps increasing indices k to T(k) in place; throws InsufficientInput when
// an index exceeds the level's bridges.
void map_stopping_times(const TwistedLevel& level, std::vector<std::int64_t>& idx);

// levels[j] must be level j. Computes T_{m,n}(k) for k = 0..count.
ComposedTimes composed_stopping_times(const std::vector<TwistedLevel>& levels, int m, int n, std::int64_t count);

// Longest prefix of T_{m,n} that the built levels support.
ComposedTimes composed_stopping_times(const std::vector<TwistedLevel>& levels, int m, int n);

struct EmbeddingCrosscheck {
    bool exact = true;
    std::int64_t compared = 0;
    std::int64_t first_mismatch = -1;
};

// First passages on level n against 4^{-n} T_{m,n}(k) and B_m(k 4^{-m}).
EmbeddingCrosscheck crosscheck_embedding(const std::vector<TwistedLevel>& levels, int m, int n, double K);

struct LagReport {
    int m = 0;
    int n = 0;
    std::int64_t points = 0;
    double max_lag = 0;
    double bound = 0;     // sqrt(18 C K m) 2^{-m}
    double as_bound = 0;  // sqrt(27 K m) 2^{-m}
    double budget = 0;    // 4 (K 4^m)^{1-C}
    bool exceeded = false;
};

double time_lag_bound(int m, double K, double C);    // sqrt(18 C K m) 2^{-m}
double time_lag_budget(int m, double K, double C);   // 4 (K 4^m)^{1-C}
double neighbor_diff_bound(int m, double delta);     // (7/delta) 2^{-2m(1-delta)}
double neighbor_diff_budget(int m, double K, double delta);

// Lags over 0 <= k 4^{-m} <= K.
LagReport time_lag_report(const ComposedTimes& ct, double K, double C);

struct NeighborDiffReport {
    int m = 0;
    int n = 0;
    std::int64_t points = 0;
    double max_dev = 0;
    double bound = 0;   // (7/delta) 2^{-2m(1-delta)}
    double budget = 0;  // (K/10) 2^{-2m(delta C' - 2)}, C' = 7/(3 delta)
    double mean_first = 0;
    double mean_all = 0;
    bool exceeded = false;
};

NeighborDiffReport neighbor_diff_report(const ComposedTimes& ct, double K, double delta);

}  // namespace twistwalk
