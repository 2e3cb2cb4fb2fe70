#pragma once

#include <cstdint>
#include <vector>

#include "twistwalk/dyadic.hpp"
#include "twistwalk/rand_source.hpp"
#include "twistwalk/twist_shrink.hpp"

namespace twistwalk {

struct BuildOptions {
    bool retain_levels = false;
    bool compute_sup_distances = true;
};

class WienerGrid {
public:
    WienerGrid(SeedSpec seed, int n, double K, TwistedLevel finest, std::vector<TwistedLevel> coarser,
               std::vector<double> sup_dists, RefinementResult refinement);

    SeedSpec seed() const { return seed_; }
    int n() const { return n_; }
    double K() const { return K_; }
    std::int64_t last_index() const { return last_index_; }  // floor(K 4^n)

    DyadicValue value(std::int64_t k) const;
    double eval(double t) const;

    const TwistedLevel& finest() const { return finest_; }
    bool has_levels() const { return static_cast<int>(coarser_.size()) == n_; }
    const TwistedLevel& level(int m) const;
    std::vector<TwistedLevel> levels() const;

    const std::vector<double>& sup_distances() const { return sup_dists_; }
    const RefinementResult& refinement() const { return refinement_; }
    double error_bound() const;

private:
    SeedSpec seed_;
    int n_;
    double K_;
    std::int64_t last_index_;
    TwistedLevel finest_;
    std::vector<TwistedLevel> coarser_;
    std::vector<double> sup_dists_;
    RefinementResult refinement_;
};

double error_bound(int n);

WienerGrid build_to_level(SeedSpec seed, int n, double K, BuildOptions opts = {});

// max over [0, K] of |B_b - B_a| for a < b, exact on the level-b grid.
double sup_distance(const TwistedLevel& a, const TwistedLevel& b, double K);

struct ConvergenceRow {
    int n = 0;
    double threshold = 0;  // (1/4) n 2^{-n/2}
    double bound = 0;      // 3 (K 4^n)^{1-C}
    std::int64_t exceed = 0;
    std::int64_t samples = 0;
    double frequency = 0;
    double wilson_low = 0;
    double wilson_high = 0;
    double allowance = 0;  // bound + 3 sigma
    double mean_distance = 0;
    double max_distance = 0;
    bool pass = false;
};

struct ConvergenceReport {
    std::vector<ConvergenceRow> rows;
    double monotone_fraction = 0;  // seeds with d_m decreasing over the range
    bool pass = false;
};

ConvergenceReport convergence_report(std::uint64_t first_seed, std::int64_t seeds, const std::vector<int>& n_range,
                                     double K, double C);

struct Interval {
    double low;
    double high;
};

Interval wilson_interval(std::int64_t hits, std::int64_t n, double z = 3.0);

}  // namespace twistwalk
