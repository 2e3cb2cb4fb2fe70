#include "twistwalk/integrate.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "twistwalk/error.hpp"
#include "twistwalk/imbed.hpp"

namespace twistwalk {

namespace {

using Wide = boost::multiprecision::checked_int128_t;

// Neumaier compensated sum.
struct Accumulator {
    double sum = 0;
    double comp = 0;
    void add(double x) {
        double t = sum + x;
        if (std::abs(sum) >= std::abs(x))
            comp += (sum - t) + x;
        else
            comp += (x - t) + sum;
        sum = t;
    }
    double value() const { return sum + comp; }
};

int sign_of(std::int64_t k) { return (k > 0) - (k < 0); }

// Integer check of both discrete identities for an integer polynomial: with
// F_j = 2^{dm} f(j 2^{-m}) everything is an integer multiple of 2^{-dm-m-1}.
bool exact_identities(const std::vector<std::int64_t>& c, const std::vector<std::int64_t>& j, std::int64_t terms,
                      int m) {
    std::int64_t lo = *std::min_element(j.begin(), j.begin() + terms + 1);
    std::int64_t hi = *std::max_element(j.begin(), j.begin() + terms + 1);
    lo = std::min<std::int64_t>(lo, 0);
    hi = std::max<std::int64_t>(hi, 0);
    int d = static_cast<int>(c.size()) - 1;
    std::vector<Wide> F(static_cast<std::size_t>(hi - lo + 1));
    for (std::int64_t x = lo; x <= hi; ++x) {
        Wide v = 0;
        for (int i = d; i >= 0; --i) v = v * x + Wide(c[i]) * (Wide(1) << ((d - i) * m));
        F[x - lo] = v;
    }
    auto at = [&](std::int64_t x) { return F[x - lo]; };
    Wide ito = 0, corr = 0, strat = 0;
    for (std::int64_t r = 1; r <= terms; ++r) {
        Wide a = at(j[r - 1]), b = at(j[r]);
        if (j[r] > j[r - 1]) {
            ito += 2 * a;
            corr += b - a;
            strat += a + b;
        } else {
            ito -= 2 * a;
            corr -= b - a;
            strat -= a + b;
        }
    }
    std::int64_t k = j[terms];
    int eps = sign_of(k);
    Wide trap = 0;
    if (k != 0) {
        trap = at(0) + at(k);
        for (std::int64_t i = 1; i < std::abs(k); ++i) trap += 2 * at(eps * i);
        if (eps < 0) trap = -trap;
    }
    return trap == ito + corr && trap == strat;
}

IntegralEstimate integrate_levels(const WienerGrid& grid, const Integrand& f, double K, const std::vector<int>& m_range,
                                  Mode mode) {
    if (!(K > 0) || K > grid.K()) throw std::domain_error("integration horizon must lie in (0, grid K]");
    IntegralEstimate est;
    est.mode = mode;
    est.f_name = f.name;
    est.seed = grid.seed().master_seed;
    est.n = grid.n();
    est.K = K;
    est.W_K = grid.eval(K);
    for (int m : m_range) {
        if (m < 0 || m > grid.n()) throw std::domain_error("integration level must satisfy 0 <= m <= n");
        EmbeddingTimes emb = first_passage_times(grid, m);
        std::int64_t terms = static_cast<std::int64_t>(std::floor(std::ldexp(K, 2 * m)));
        if (emb.count() < terms)
            throw InsufficientInput("level " + std::to_string(m) + " embedding found " + std::to_string(emb.count()) +
                                        " of " + std::to_string(terms) + " passages; the level-" +
                                        std::to_string(grid.n()) + " grid needs a horizon beyond K=" +
                                        std::to_string(grid.K()),
                                    terms - emb.count());
        const auto& j = emb.value_numerator;
        double dx = std::ldexp(1.0, -m);
        double dt = dx * dx;
        Accumulator ito, corr, strat;
        double f_prev = f.f(0.0);
        for (std::int64_t r = 1; r <= terms; ++r) {
            double f_cur = f.f(static_cast<double>(j[r]) * dx);
            double dW = static_cast<double>(j[r] - j[r - 1]) * dx;
            ito.add(f_prev * dW);
            corr.add(0.5 * (f_cur - f_prev) / dW * dt);
            strat.add(0.5 * (f_prev + f_cur) * dW);
            f_prev = f_cur;
        }
        LevelEstimate le;
        le.m = m;
        le.terms = terms;
        le.endpoint = emb.value(terms);
        le.ito_value = ito.value();
        le.strat_value = strat.value();
        le.correction = corr.value();
        le.value = mode == Mode::Ito ? le.ito_value : le.strat_value;
        le.trapezoid = trapezoid_dyadic(f.f, le.endpoint, m);
        le.identity_residual = std::max(std::abs(le.trapezoid - (le.ito_value + le.correction)),
                                        std::abs(le.trapezoid - le.strat_value));
        if (f.int_coeffs) {
            try {
                le.identity_holds = exact_identities(*f.int_coeffs, j, terms, m);
                le.identity_exact = true;
            } catch (const std::overflow_error&) {
                le.identity_exact = false;
            }
        }
        if (f.int_coeffs && *f.int_coeffs == std::vector<std::int64_t>{0, 1}) {
            // units of 4^{-m}: sum j_{r-1} dj_r against (j_N^2 - N)/2
            std::int64_t ito2 = 0, strat2 = 0;
            for (std::int64_t r = 1; r <= terms; ++r) {
                std::int64_t dj = j[r] - j[r - 1];
                ito2 += 2 * j[r - 1] * dj;
                strat2 += (j[r - 1] + j[r]) * dj;
            }
            std::int64_t b2 = j[terms] * j[terms];
            le.linear_closed_form = ito2 == b2 - terms && strat2 == b2;
        }
        if (!le.identity_exact) {
            double scale = std::max(1.0, std::abs(le.trapezoid));
            le.identity_holds = le.identity_residual <= 1e-9 * scale * std::max<std::int64_t>(1, terms / 1024);
        }
        est.levels.push_back(le);
    }
    return est;
}

}  // namespace

std::string mode_name(Mode m) { return m == Mode::Ito ? "ito" : "strat"; }

Rational trapezoid_lattice(const LatticeFn& f, std::int64_t k) {
    if (k == 0) return Rational(0);
    int eps = sign_of(k);
    Rational s = Rational(1, 2) * f(0) + Rational(1, 2) * f(k);
    for (std::int64_t j = 1; j < std::abs(k); ++j) s += f(eps * j);
    return eps > 0 ? s : -s;
}

double trapezoid_dyadic(const RealFn& f, DyadicValue a, int m) {
    std::int64_t k = a.rescaled(m).numerator;
    if (k == 0) return 0.0;
    double dx = std::ldexp(1.0, -m);
    int eps = sign_of(k);
    Accumulator s;
    s.add(0.5 * f(0.0));
    s.add(0.5 * f(static_cast<double>(k) * dx));
    for (std::int64_t j = 1; j < std::abs(k); ++j) s.add(f(static_cast<double>(eps * j) * dx));
    return eps * dx * s.value();
}

DiscreteIto discrete_ito(const LatticeFn& f, std::span<const int> steps) {
    DiscreteIto out{Rational(0), Rational(0), Rational(0), Rational(0)};
    std::int64_t s = 0;
    Rational f_prev = f(0);
    for (int x : steps) {
        if (x != 1 && x != -1) throw std::domain_error("walk step must be +1 or -1");
        s += x;
        Rational f_cur = f(s);
        out.ito_sum += f_prev * x;
        out.correction += Rational(1, 2) * (f_cur - f_prev) * x;
        out.strat_sum += Rational(1, 2) * (f_prev + f_cur) * x;
        f_prev = f_cur;
    }
    out.trapezoid = trapezoid_lattice(f, s);
    return out;
}

IntegralEstimate ito_integral(const WienerGrid& grid, const Integrand& f, double K, const std::vector<int>& m_range) {
    return integrate_levels(grid, f, K, m_range, Mode::Ito);
}

IntegralEstimate stratonovich_integral(const WienerGrid& grid, const Integrand& f, double K,
                                       const std::vector<int>& m_range) {
    return integrate_levels(grid, f, K, m_range, Mode::Stratonovich);
}

std::vector<double> ito_formula_residual(IntegralEstimate& est, const Integrand& f, const WienerGrid& grid, double K) {
    est.W_K = grid.eval(K);
    est.target = integral_from_zero(f, est.W_K);
    std::vector<double> out;
    for (auto& le : est.levels) {
        if (f.f_prime) {
            Accumulator ds;
            double dt = std::ldexp(1.0, -2 * le.m);
            std::int64_t stride = std::int64_t{1} << (2 * (grid.n() - le.m));
            for (std::int64_t r = 0; r < le.terms; ++r)
                ds.add((*f.f_prime)(grid.value(r * stride).to_double()) * dt);
            le.ds_term = ds.value();
        } else {
            le.ds_term = 2.0 * le.correction;
        }
        le.formula_residual = std::abs(est.target - (le.ito_value + 0.5 * le.ds_term));
        out.push_back(le.formula_residual);
    }
    return out;
}

double partition_sum_crosscheck(const WienerGrid& grid, const Integrand& f, double K, std::int64_t partitions) {
    if (partitions < 1) throw std::domain_error("partition count must be >= 1");
    if (!(K > 0) || K > grid.K()) throw std::domain_error("partition horizon must lie in (0, grid K]");
    Accumulator s;
    double w_prev = 0.0;
    for (std::int64_t i = 1; i <= partitions; ++i) {
        double t = K * static_cast<double>(i) / static_cast<double>(partitions);
        double w = grid.eval(std::min(t, K));
        s.add(f.f(w_prev) * (w - w_prev));
        w_prev = w;
    }
    return s.value();
}

}  // namespace twistwalk
