#include "twistwalk/wiener.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "twistwalk/parallel.hpp"

namespace twistwalk {

WienerGrid::WienerGrid(SeedSpec seed, int n, double K, TwistedLevel finest, std::vector<TwistedLevel> coarser,
                       std::vector<double> sup_dists, RefinementResult refinement)
    : seed_(seed),
      n_(n),
      K_(K),
      last_index_(static_cast<std::int64_t>(std::floor(std::ldexp(K, 2 * n)))),
      finest_(std::move(finest)),
      coarser_(std::move(coarser)),
      sup_dists_(std::move(sup_dists)),
      refinement_(refinement) {}

DyadicValue WienerGrid::value(std::int64_t k) const {
    if (k < 0 || k > last_index_) throw std::domain_error("grid index outside [0, K]");
    return finest_.shrink_eval(k);
}

double WienerGrid::eval(double t) const {
    if (!(t >= 0.0) || t > K_) throw std::domain_error("time outside [0, K]");
    return finest_.shrink_eval_linear(t);
}

const TwistedLevel& WienerGrid::level(int m) const {
    if (m == n_) return finest_;
    if (m < 0 || m > n_ || !has_levels()) throw std::out_of_range("level not retained");
    return coarser_[m];
}

std::vector<TwistedLevel> WienerGrid::levels() const {
    if (!has_levels()) throw std::out_of_range("levels not retained");
    std::vector<TwistedLevel> all = coarser_;
    all.push_back(finest_);
    return all;
}

double WienerGrid::error_bound() const { return twistwalk::error_bound(n_); }

double error_bound(int n) {
    if (n < 0) throw std::domain_error("level must be >= 0");
    return n * std::pow(2.0, -n / 2.0);
}

WienerGrid build_to_level(SeedSpec seed, int n, double K, BuildOptions opts) {
    if (n < 0) throw std::domain_error("level must be >= 0");
    if (!(K > 0)) throw std::domain_error("horizon must be positive");
    StepSource src(seed);
    auto plan = plan_horizon(src, n, K);
    std::vector<TwistedLevel> kept;
    std::vector<double> dists;
    RefinementResult refinement;
    TwistedLevel cur = raw_level(src, 0, plan[0].steps);
    for (int m = 1; m <= n; ++m) {
        TwistedLevel next = twist(cur, src, plan[m].bridges);
        RefinementResult r = check_refinement(cur, next, K);
        refinement.checked += r.checked;
        if (!r.ok && refinement.ok) {
            refinement.ok = false;
            refinement.first_violation = r.first_violation;
        }
        if (opts.compute_sup_distances) dists.push_back(sup_distance(cur, next, K));
        if (opts.retain_levels) kept.push_back(std::move(cur));
        cur = std::move(next);
    }
    return WienerGrid(seed, n, K, std::move(cur), std::move(kept), std::move(dists), refinement);
}

double sup_distance(const TwistedLevel& a, const TwistedLevel& b, double K) {
    int la = a.level(), lb = b.level();
    if (la >= lb) throw std::invalid_argument("sup distance needs a coarser first level");
    int gap = lb - la;
    std::int64_t J = static_cast<std::int64_t>(std::floor(std::ldexp(K, 2 * lb)));
    if (J > b.steps()) throw std::domain_error("fine level does not cover the horizon");
    std::int64_t R = std::int64_t{1} << (2 * gap);
    std::int64_t Q = J / R;
    if (Q + (J % R ? 1 : 0) > a.steps()) throw std::domain_error("coarse level does not cover the horizon");
    const auto& bw = b.words();
    std::int64_t sa = 0, sb = 0, best = 0;
    std::int64_t j = 0;
    for (std::int64_t q = 0;; ++q) {
        int x = (q < a.steps()) ? a.step(q + 1) : 0;
        for (std::int64_t rem = 0; rem < R; ++rem, ++j) {
            std::int64_t d = sa * R + rem * x - (sb << gap);
            best = std::max(best, d < 0 ? -d : d);
            if (j == J) goto done;
            sb += ((bw[static_cast<std::size_t>(j >> 6)] >> (j & 63)) & 1ULL) ? 1 : -1;
        }
        sa += x;
    }
done:
    double out = std::ldexp(static_cast<double>(best), -(2 * lb - la));
    if (static_cast<double>(J) != std::ldexp(K, 2 * lb))
        out = std::max(out, std::abs(b.shrink_eval_linear(K) - a.shrink_eval_linear(K)));
    return out;
}

Interval wilson_interval(std::int64_t hits, std::int64_t n, double z) {
    if (n <= 0) return {0.0, 1.0};
    double p = static_cast<double>(hits) / n;
    double z2 = z * z;
    double denom = 1 + z2 / n;
    double centre = (p + z2 / (2.0 * n)) / denom;
    double half = z * std::sqrt(p * (1 - p) / n + z2 / (4.0 * n * n)) / denom;
    return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

ConvergenceReport convergence_report(std::uint64_t first_seed, std::int64_t seeds, const std::vector<int>& n_range,
                                     double K, double C) {
    if (C < 1.5) throw std::domain_error("convergence bound needs C >= 3/2");
    if (n_range.empty() || seeds < 1) throw std::domain_error("empty convergence request");
    int top = *std::max_element(n_range.begin(), n_range.end()) + 1;
    std::vector<std::vector<double>> dists(static_cast<std::size_t>(seeds));
    parallel_for(dists.size(), [&](std::size_t i) {
        dists[i] = build_to_level(SeedSpec{first_seed + i}, top, K).sup_distances();
    });
    ConvergenceReport rep;
    rep.pass = true;
    for (int n : n_range) {
        ConvergenceRow row;
        row.n = n;
        row.threshold = 0.25 * n * std::pow(2.0, -n / 2.0);
        row.bound = 3.0 * std::pow(std::ldexp(K, 2 * n), 1.0 - C);
        row.samples = seeds;
        double sum = 0;
        for (const auto& d : dists) {
            double v = d[static_cast<std::size_t>(n)];
            sum += v;
            row.max_distance = std::max(row.max_distance, v);
            if (v >= row.threshold) ++row.exceed;
        }
        row.mean_distance = sum / seeds;
        row.frequency = static_cast<double>(row.exceed) / seeds;
        Interval ci = wilson_interval(row.exceed, seeds);
        row.wilson_low = ci.low;
        row.wilson_high = ci.high;
        double p = std::min(1.0, row.bound);
        row.allowance = row.bound + 3.0 * std::sqrt(p * (1 - p) / seeds);
        row.pass = row.frequency <= row.allowance;
        rep.pass = rep.pass && row.pass;
        rep.rows.push_back(row);
    }
    int lo = *std::min_element(n_range.begin(), n_range.end());
    std::int64_t mono = 0;
    for (const auto& d : dists) {
        bool dec = true;
        for (int m = lo + 1; m < top; ++m) dec = dec && d[m] < d[m - 1];
        if (dec) ++mono;
    }
    rep.monotone_fraction = static_cast<double>(mono) / seeds;
    return rep;
}

}  // namespace twistwalk
