#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "twistwalk/dyadic.hpp"
#include "twistwalk/integrand.hpp"
#include "twistwalk/walk.hpp"
#include "twistwalk/wiener.hpp"

namespace twistwalk {

using LatticeFn = std::function<Rational(std::int64_t)>;

// eps_k (f(0)/2 + sum_{j=1}^{|k|-1} f(eps_k j) + f(k)/2)
Rational trapezoid_lattice(const LatticeFn& f, std::int64_t k);

// Same sum on the lattice of spacing 2^{-m}, scaled by 2^{-m}.
double trapezoid_dyadic(const RealFn& f, DyadicValue a, int m);

struct DiscreteIto {
    Rational trapezoid;
    Rational ito_sum;     // sum f(S_{r-1}) X_r
    Rational correction;  // (1/2) sum (f(S_r) - f(S_{r-1})) / X_r
    Rational strat_sum;   // sum (f(S_{r-1}) + f(S_r)) / 2 * X_r
};

DiscreteIto discrete_ito(const LatticeFn& f, std::span<const int> steps);

enum class Mode { Ito, Stratonovich };

std::string mode_name(Mode m);

struct LevelEstimate {
    int m = 0;
    std::int64_t terms = 0;     // floor(K 4^m)
    DyadicValue endpoint;       // W(s_m(terms))
    double value = 0;           // ito or stratonovich sum, per mode
    double ito_value = 0;
    double strat_value = 0;
    double correction = 0;      // (1/2) sum (df/dW) dt
    double trapezoid = 0;       // trapezoid_dyadic at the endpoint
    double identity_residual = 0;  // max of both discrete identities
    bool identity_exact = false;   // checked in integer arithmetic
    bool identity_holds = false;
    // f(x) = x only: ito = B^2/2 - K_m/2 and strat = B^2/2 in integers
    std::optional<bool> linear_closed_form;
    double ds_term = 0;
    double formula_residual = 0;
};

struct IntegralEstimate {
    Mode mode = Mode::Ito;
    std::string f_name;
    std::uint64_t seed = 0;
    int n = 0;
    double K = 0;
    double W_K = 0;
    double target = 0;  // integral of f from 0 to W(K)
    std::vector<LevelEstimate> levels;
};

IntegralEstimate ito_integral(const WienerGrid& grid, const Integrand& f, double K, const std::vector<int>& m_range);
IntegralEstimate stratonovich_integral(const WienerGrid& grid, const Integrand& f, double K,
                                       const std::vector<int>& m_range);

// Fills ds_term, target and formula_residual for every level; returns the residuals.
std::vector<double> ito_formula_residual(IntegralEstimate& est, const Integrand& f, const WienerGrid& grid, double K);

// Left-endpoint sum over the uniform partition of [0, K] into `partitions` pieces.
double partition_sum_crosscheck(const WienerGrid& grid, const Integrand& f, double K, std::int64_t partitions);

}  // namespace twistwalk
