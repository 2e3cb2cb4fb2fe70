#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace twistwalk {

using RealFn = std::function<double(double)>;

struct Integrand {
    std::string name;
    RealFn f;
    std::optional<RealFn> f_prime;
    std::optional<RealFn> antiderivative;  // F with F(0) = 0
    std::optional<std::vector<std::int64_t>> int_coeffs;  // ascending powers
};

// Accepts x, x2, sin, cos, exp, poly:c0,c1,... and table:<csv of x,f rows>.
// Throws std::invalid_argument for unknown names or unreadable tables.
Integrand make_integrand(const std::string& spec);

std::vector<std::string> integrand_registry();

// Closed form when registered, otherwise adaptive Gauss-Kronrod at 1e-10.
double integral_from_zero(const Integrand& f, double a);

// max |(f(x+h) - f(x-h))/(2h) - f'(x)| over an even probe grid on [lo, hi].
double derivative_check(const Integrand& f, double lo, double hi, double h, int probes = 201);

}  // namespace twistwalk
