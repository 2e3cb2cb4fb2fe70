#pragma once

#include <cstdint>
#include <functional>
#include <vector>

namespace twistwalk {

double normal_cdf(double x);
double normal_pdf(double x);
// phi(x)/x, an upper bound for 1 - Phi(x) when x > 0.
double mills_bound(double x);

// P(sqrt(N) D_N > lambda) in the limit, 2 sum (-1)^{k-1} exp(-2 k^2 lambda^2).
double kolmogorov_q(double lambda);
double ks_pvalue(double D, std::int64_t N);

struct KsResult {
    double statistic = 0;
    double p_value = 1;
    std::int64_t n = 0;
};

KsResult ks_test(std::vector<double> samples, const std::function<double(double)>& cdf);

// Integer data supported on a lattice of the given spacing; the model CDF is
// read half a spacing above each lattice point.
KsResult ks_test_lattice(std::vector<std::int64_t> samples, std::int64_t spacing,
                         const std::function<double(double)>& cdf);

struct ChiSquareResult {
    double statistic = 0;
    int dof = 0;
    double critical = 0;
    double p_value = 1;
    bool pass = false;
};

ChiSquareResult chi_square_uniform(const std::vector<std::int64_t>& counts, double alpha);

struct Moments {
    double mean = 0;
    double variance = 0;  // unbiased
    double variance_stderr = 0;
};

Moments sample_moments(const std::vector<double>& x);
double correlation(const std::vector<double>& x, const std::vector<double>& y);

// bound + 3 sqrt(p(1-p)/N) with p = min(bound, 1)
double frequency_allowance(double bound, std::int64_t n);

}  // namespace twistwalk
