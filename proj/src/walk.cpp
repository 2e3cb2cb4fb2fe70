#include "twistwalk/walk.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

namespace twistwalk {

namespace {

template <typename T>
LatticePath build_from(std::span<const T> steps) {
    LatticePath p;
    p.steps.reserve(steps.size());
    p.sums.reserve(steps.size() + 1);
    p.sums.push_back(0);
    for (T s : steps) {
        if (s != 1 && s != -1) throw std::domain_error("walk step must be +1 or -1");
        p.steps.push_back(static_cast<std::int8_t>(s));
        p.sums.push_back(p.sums.back() + s);
    }
    return p;
}

}  // namespace

LatticePath build_walk(std::span<const int> steps) { return build_from(steps); }
LatticePath build_walk(std::span<const std::int8_t> steps) { return build_from(steps); }

double eval_linear(const LatticePath& path, double t) {
    double n = static_cast<double>(path.length());
    if (!(t >= 0.0) || t > n) throw std::domain_error("time outside [0, n]");
    auto r = static_cast<std::int64_t>(std::floor(t));
    if (r == path.length()) return static_cast<double>(path.sums.back());
    double frac = t - static_cast<double>(r);
    return static_cast<double>(path.sums[r]) + frac * path.steps[r];
}

WaitingTimes waiting_times(const LatticePath& path) {
    WaitingTimes w;
    std::int64_t last = 0;
    for (std::int64_t i = 0; i + 1 < path.length(); i += 2) {
        if (path.steps[i] == path.steps[i + 1]) {
            std::int64_t t = i + 2;
            w.taus.push_back(t - last);
            w.stopping_times.push_back(t);
            w.exits.push_back(2 * path.steps[i]);
            last = t;
        }
    }
    return w;
}

MomentEstimate tau_moments(const StepSource& source, std::int64_t samples, int level) {
    if (samples < 1) throw std::domain_error("samples must be >= 1");
    std::uint64_t key = source.level_key(level);
    constexpr std::uint64_t kEven = 0x5555555555555555ULL;
    double s1 = 0, s2 = 0, s3 = 0, s4 = 0;
    std::int64_t got = 0;
    std::int64_t run = 0;  // pairs since the last change
    for (std::uint64_t idx = 0; got < samples; ++idx) {
        std::uint64_t w = StepSource::word_from_key(key, idx);
        std::uint64_t eq = ~(w ^ (w >> 1)) & kEven;
        int pos = 0;
        while (eq && got < samples) {
            int bit = std::countr_zero(eq);
            run += (bit - pos) / 2 + 1;
            pos = bit + 2;
            eq &= eq - 1;
            double tau = 2.0 * static_cast<double>(run);
            s1 += tau;
            s2 += tau * tau;
            s3 += tau * tau * tau;
            s4 += tau * tau * tau * tau;
            ++got;
            run = 0;
        }
        run += (64 - pos) / 2;
    }
    double n = static_cast<double>(samples);
    MomentEstimate e;
    e.samples = samples;
    e.mean = s1 / n;
    double m2 = s2 / n - e.mean * e.mean;
    e.variance = samples > 1 ? m2 * n / (n - 1) : 0.0;
    double mu = e.mean;
    double m4 = s4 / n - 4 * mu * s3 / n + 6 * mu * mu * s2 / n - 3 * mu * mu * mu * mu;
    e.mean_stderr = std::sqrt(e.variance / n);
    e.variance_stderr = std::sqrt(std::max(0.0, m4 - m2 * m2) / n);
    return e;
}

HitProbabilities hit_prob_conditional(int pairs) {
    if (pairs < 1 || pairs > 12) throw std::domain_error("pairs must be in [1, 12]");
    int len = 2 * pairs;
    std::int64_t total = std::int64_t{1} << len;
    std::int64_t up = 0, unresolved = 0;
    std::int64_t first_up = 0, up_first_up = 0, down_first_up = 0, unresolved_first_up = 0;
    std::int64_t first_down = 0, down_first_down = 0, unresolved_first_down = 0;
    for (std::int64_t mask = 0; mask < total; ++mask) {
        int exit = 0;
        for (int i = 0; i < len; i += 2) {
            int a = (mask >> i) & 1, b = (mask >> (i + 1)) & 1;
            if (a == b) {
                exit = a ? 2 : -2;
                break;
            }
        }
        bool x1_up = mask & 1;
        if (exit == 2) ++up;
        if (exit == 0) ++unresolved;
        if (x1_up) {
            ++first_up;
            if (exit == 2) ++up_first_up;
            if (exit == -2) ++down_first_up;
            if (exit == 0) ++unresolved_first_up;
        } else {
            ++first_down;
            if (exit == -2) ++down_first_down;
            if (exit == 0) ++unresolved_first_down;
        }
    }
    Rational half(1, 2);
    HitProbabilities h;
    h.up = Rational(up, total) + half * Rational(unresolved, total);
    h.up_given_first_up = Rational(up_first_up, first_up) + half * Rational(unresolved_first_up, first_up);
    h.down_given_first_up = Rational(down_first_up, first_up) + half * Rational(unresolved_first_up, first_up);
    h.down_given_first_down =
        Rational(down_first_down, first_down) + half * Rational(unresolved_first_down, first_down);
    return h;
}

double mgf_walk(int n, double u) {
    if (n < 0) throw std::domain_error("n must be >= 0");
    return std::pow(std::cosh(u), n);
}

double mgf_tau(double u) {
    if (u >= std::log(std::sqrt(2.0))) throw std::domain_error("waiting-time mgf diverges for u >= log sqrt 2");
    return 1.0 / (2.0 * std::exp(-2.0 * u) - 1.0);
}

double mgf_stopping_time(std::int64_t k, double u) {
    if (k < 0) throw std::domain_error("k must be >= 0");
    if (u >= std::log(std::sqrt(2.0))) throw std::domain_error("stopping-time mgf diverges for u >= log sqrt 2");
    return std::pow(2.0 * std::exp(-2.0 * u) - 1.0, -static_cast<double>(k));
}

double mgf_stopping_time_centered(std::int64_t k, double u) {
    if (k < 0) throw std::domain_error("k must be >= 0");
    if (u >= std::sqrt(2.0) * std::log(2.0)) throw std::domain_error("centered mgf diverges for u >= sqrt 2 log 2");
    double base = 2.0 * std::exp(u / std::sqrt(2.0)) - std::exp(u * std::sqrt(2.0));
    return std::pow(base, -static_cast<double>(k));
}

double walk_tail_bound(int n, double t) {
    if (n < 0 || !(t > 0)) throw std::domain_error("walk tail bound needs n >= 0, t > 0");
    return 2.0 * std::ldexp(1.0, n) * std::exp(-t);
}

double stopping_time_tail_bound(std::int64_t k, double t) {
    if (k < 0 || !(t > 0)) throw std::domain_error("stopping-time tail bound needs k >= 0, t > 0");
    return 2.0 * std::pow(2.0, static_cast<double>(k)) * std::exp(-t / 2.0);
}

TailBounds tail_bounds(int n, double t) { return {walk_tail_bound(n, t), stopping_time_tail_bound(n, t)}; }

DeviationBound deviation_bound(double N, double C) {
    if (!(N > 1)) throw std::domain_error("deviation bound needs N > 1");
    if (!(C > 1)) throw std::domain_error("deviation bound needs C > 1");
    return {std::sqrt(2.0 * C * N * std::log(N)), 2.0 * std::pow(N, 1.0 - C)};
}

}  // namespace twistwalk
