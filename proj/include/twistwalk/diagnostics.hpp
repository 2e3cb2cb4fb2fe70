#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace twistwalk {

// Suites draw seeds first_seed, first_seed + 1, ..., first_seed + seeds - 1.
struct StatReport {
    std::string suite;
    std::int64_t sample_size = 0;
    double statistic = 0;
    double target = 0;
    bool pass = false;
    double significance = 0.001;
    std::uint64_t first_seed = 0;
    std::int64_t seeds = 0;
    nlohmann::json details = nlohmann::json::object();
};

nlohmann::json to_json(const StatReport& r);

// S_n from the first n level-0 steps and T_k from the same stream.
std::int64_t sample_walk_sum(std::uint64_t seed, std::int64_t n);
std::int64_t sample_stopping_time(std::uint64_t seed, std::int64_t k);

StatReport clt_suite(std::uint64_t first_seed, std::int64_t paths, std::int64_t n = 4096, std::int64_t k = 10000,
                     double alpha = 0.001);

StatReport tails_suite(std::uint64_t first_seed, std::int64_t paths, std::int64_t n = 4096, std::int64_t k = 10000,
                       double x = 2.5);

StatReport variation_suite(std::uint64_t seed, int n, double K);

StatReport modulus_suite(std::uint64_t first_seed, std::int64_t seeds, int n, double K, double delta, double u,
                         const std::vector<double>& h_list);

// max over |t - s| <= h (index distance <= floor(h 4^n)) of |W(t) - W(s)|
double max_increment(const std::vector<std::int64_t>& sums, std::int64_t window);

StatReport nondiff_probe(std::uint64_t first_seed, std::int64_t seeds, int n, const std::vector<int>& m_list,
                         std::int64_t probes, double K = 1.0);

StatReport convergence_suite(std::uint64_t first_seed, std::int64_t seeds, const std::vector<int>& n_range, double K,
                             double C);

// Frequency of max |W - B_n| >= n 2^{-n/2} with W taken as the reference level.
StatReport error_bound_suite(std::uint64_t first_seed, std::int64_t seeds, int n, int reference_level, double K,
                             double C);

StatReport lags_suite(std::uint64_t first_seed, std::int64_t seeds, int m, int n_max, double K, double C,
                      double delta);

StatReport twistlaw_suite(std::uint64_t first_seed, std::int64_t seeds, const std::vector<int>& levels,
                          double alpha = 0.001);

StatReport marginals_suite(std::uint64_t first_seed, std::int64_t seeds, int n, double alpha = 0.001);

}  // namespace twistwalk
