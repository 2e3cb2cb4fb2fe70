#include "twistwalk/stats.hpp"

#include <boost/math/distributions/chi_squared.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace twistwalk {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

double mills_bound(double x) {
    if (!(x > 0)) throw std::domain_error("Mills bound needs x > 0");
    return normal_pdf(x) / x;
}

double kolmogorov_q(double lambda) {
    if (lambda <= 0) return 1.0;
    if (lambda < 1.0) {
        // theta-function form, fast for small lambda
        double s = 0;
        double c = std::numbers::pi * std::numbers::pi / (8.0 * lambda * lambda);
        for (int k = 1; k <= 50; ++k) {
            double term = std::exp(-(2.0 * k - 1) * (2.0 * k - 1) * c);
            s += term;
            if (term < 1e-18) break;
        }
        return std::clamp(1.0 - std::sqrt(2.0 * std::numbers::pi) / lambda * s, 0.0, 1.0);
    }
    double s = 0;
    for (int k = 1; k <= 100; ++k) {
        double term = std::exp(-2.0 * k * k * lambda * lambda);
        s += (k % 2 ? term : -term);
        if (term < 1e-18) break;
    }
    return std::clamp(2.0 * s, 0.0, 1.0);
}

double ks_pvalue(double D, std::int64_t N) {
    if (N <= 0) return 1.0;
    double rn = std::sqrt(static_cast<double>(N));
    return kolmogorov_q((rn + 0.12 + 0.11 / rn) * D);
}

KsResult ks_test(std::vector<double> samples, const std::function<double(double)>& cdf) {
    KsResult r;
    r.n = static_cast<std::int64_t>(samples.size());
    if (samples.empty()) return r;
    std::sort(samples.begin(), samples.end());
    double n = static_cast<double>(samples.size());
    double d = 0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        double F = cdf(samples[i]);
        d = std::max({d, (i + 1) / n - F, F - i / n});
    }
    r.statistic = d;
    r.p_value = ks_pvalue(d, r.n);
    return r;
}

KsResult ks_test_lattice(std::vector<std::int64_t> samples, std::int64_t spacing,
                         const std::function<double(double)>& cdf) {
    if (spacing <= 0) throw std::domain_error("lattice spacing must be positive");
    KsResult r;
    r.n = static_cast<std::int64_t>(samples.size());
    if (samples.empty()) return r;
    std::sort(samples.begin(), samples.end());
    double n = static_cast<double>(samples.size());
    double half = 0.5 * static_cast<double>(spacing);
    double d = 0;
    std::size_t idx = 0;
    for (std::int64_t s = samples.front() - spacing; s <= samples.back(); s += spacing) {
        while (idx < samples.size() && samples[idx] <= s) ++idx;
        double Fn = static_cast<double>(idx) / n;
        d = std::max(d, std::abs(Fn - cdf(static_cast<double>(s) + half)));
    }
    r.statistic = d;
    r.p_value = ks_pvalue(d, r.n);
    return r;
}

ChiSquareResult chi_square_uniform(const std::vector<std::int64_t>& counts, double alpha) {
    if (counts.size() < 2) throw std::domain_error("chi-square needs at least two cells");
    ChiSquareResult r;
    double total = 0;
    for (auto c : counts) total += static_cast<double>(c);
    if (total <= 0) throw std::domain_error("chi-square needs observations");
    double expected = total / static_cast<double>(counts.size());
    for (auto c : counts) {
        double diff = static_cast<double>(c) - expected;
        r.statistic += diff * diff / expected;
    }
    r.dof = static_cast<int>(counts.size()) - 1;
    boost::math::chi_squared dist(r.dof);
    r.critical = boost::math::quantile(boost::math::complement(dist, alpha));
    r.p_value = boost::math::cdf(boost::math::complement(dist, r.statistic));
    r.pass = r.statistic <= r.critical;
    return r;
}

Moments sample_moments(const std::vector<double>& x) {
    Moments m;
    double n = static_cast<double>(x.size());
    if (x.size() < 2) throw std::domain_error("moments need at least two samples");
    for (double v : x) m.mean += v;
    m.mean /= n;
    double m2 = 0, m4 = 0;
    for (double v : x) {
        double d = (v - m.mean) * (v - m.mean);
        m2 += d;
        m4 += d * d;
    }
    m.variance = m2 / (n - 1);
    double pm2 = m2 / n;
    m.variance_stderr = std::sqrt(std::max(0.0, m4 / n - pm2 * pm2) / n);
    return m;
}

double correlation(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw std::domain_error("correlation needs paired samples");
    double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    return sxy / std::sqrt(sxx * syy);
}

double frequency_allowance(double bound, std::int64_t n) {
    double p = std::clamp(bound, 0.0, 1.0);
    return bound + 3.0 * std::sqrt(p * (1.0 - p) / static_cast<double>(std::max<std::int64_t>(n, 1)));
}

}  // namespace twistwalk
