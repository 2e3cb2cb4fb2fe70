#pragma once

#include <boost/rational.hpp>

#include <cstdint>
#include <span>
#include <vector>

#include "twistwalk/rand_source.hpp"

namespace twistwalk {

using Rational = boost::rational<std::int64_t>;

struct LatticePath {
    std::vector<std::int8_t> steps;
    std::vector<std::int64_t> sums;  // sums[0] = 0

    std::int64_t length() const { return static_cast<std::int64_t>(steps.size()); }
};

LatticePath build_walk(std::span<const int> steps);
LatticePath build_walk(std::span<const std::int8_t> steps);

// Broken-line extension S(t).
double eval_linear(const LatticePath& path, double t);

struct WaitingTimes {
    std::vector<std::int64_t> taus;
    std::vector<std::int64_t> stopping_times;  // T_1, T_2, ...
    std::vector<int> exits;                    // +2 or -2
};

WaitingTimes waiting_times(const LatticePath& path);

struct MomentEstimate {
    double mean = 0;
    double variance = 0;
    double mean_stderr = 0;
    double variance_stderr = 0;
    std::int64_t samples = 0;
};

// Consecutive waiting times read off one level stream of the source.
MomentEstimate tau_moments(const StepSource& source, std::int64_t samples, int level = 0);

struct HitProbabilities {
    Rational up;                    // P(S(tau) = 2)
    Rational up_given_first_up;     // P(S(tau) = 2 | X_1 = 1)
    Rational down_given_first_up;   // P(S(tau) = -2 | X_1 = 1)
    Rational down_given_first_down; // P(S(tau) = -2 | X_1 = -1)
};

// Enumerates all prefixes of 2*pairs steps; paths unresolved after the
// prefix have returned to 0 and are split evenly by reflection.
HitProbabilities hit_prob_conditional(int pairs = 6);

double mgf_walk(int n, double u);
double mgf_tau(double u);
double mgf_stopping_time(std::int64_t k, double u);
double mgf_stopping_time_centered(std::int64_t k, double u);

struct TailBounds {
    double walk_bound;
    double tk_bound;
};

double walk_tail_bound(int n, double t);
double stopping_time_tail_bound(std::int64_t k, double t);
TailBounds tail_bounds(int n, double t);

struct DeviationBound {
    double threshold;
    double prob_bound;
};

DeviationBound deviation_bound(double N, double C);

}  // namespace twistwalk
