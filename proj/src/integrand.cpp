#include "twistwalk/integrand.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <memory>
#include <sstream>
#include <stdexcept>

#include "twistwalk/error.hpp"

namespace twistwalk {

namespace {

Integrand polynomial(const std::string& name, std::vector<double> c) {
    Integrand g;
    g.name = name;
    auto coeffs = std::make_shared<const std::vector<double>>(c);
    g.f = [coeffs](double x) {
        double v = 0;
        for (auto it = coeffs->rbegin(); it != coeffs->rend(); ++it) v = v * x + *it;
        return v;
    };
    g.f_prime = [coeffs](double x) {
        double v = 0;
        for (std::size_t i = coeffs->size(); i-- > 1;) v = v * x + static_cast<double>(i) * (*coeffs)[i];
        return v;
    };
    g.antiderivative = [coeffs](double x) {
        double v = 0;
        for (std::size_t i = coeffs->size(); i-- > 0;) v = v * x + (*coeffs)[i] / static_cast<double>(i + 1);
        return v * x;
    };
    std::vector<std::int64_t> ints;
    bool integral = true;
    for (double v : c) {
        if (v != std::trunc(v) || std::abs(v) > 1e15) integral = false;
        ints.push_back(static_cast<std::int64_t>(v));
    }
    if (integral) g.int_coeffs = ints;
    return g;
}

Integrand table(const std::string& name, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot read integrand table '" + path + "'");
    std::vector<std::pair<double, double>> pts;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ls(line);
        double x, y;
        if (!(ls >> x >> y)) {
            if (pts.empty()) continue;  // header row
            throw std::invalid_argument("malformed row in integrand table '" + path + "'");
        }
        pts.emplace_back(x, y);
    }
    if (pts.size() < 2) throw std::invalid_argument("integrand table '" + path + "' needs at least two rows");
    std::sort(pts.begin(), pts.end());
    for (std::size_t i = 1; i < pts.size(); ++i)
        if (pts[i].first == pts[i - 1].first)
            throw std::invalid_argument("duplicate abscissa in integrand table '" + path + "'");
    auto data = std::make_shared<const std::vector<std::pair<double, double>>>(std::move(pts));
    Integrand g;
    g.name = name;
    // linear between rows, extended linearly past both ends
    g.f = [data](double x) {
        const auto& p = *data;
        auto it = std::upper_bound(p.begin(), p.end(), x, [](double v, const auto& e) { return v < e.first; });
        std::size_t i = static_cast<std::size_t>(it - p.begin());
        i = std::clamp<std::size_t>(i, 1, p.size() - 1);
        const auto& a = p[i - 1];
        const auto& b = p[i];
        return a.second + (x - a.first) * (b.second - a.second) / (b.first - a.first);
    };
    return g;
}

std::vector<double> parse_coeffs(const std::string& text) {
    std::vector<double> c;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            c.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw std::invalid_argument("bad polynomial coefficient '" + item + "'");
        }
    }
    if (c.empty()) throw std::invalid_argument("polynomial needs at least one coefficient");
    return c;
}

}  // namespace

std::vector<std::string> integrand_registry() { return {"x", "x2", "sin", "cos", "exp", "poly:<c0,c1,...>", "table:<file>"}; }

Integrand make_integrand(const std::string& spec) {
    if (spec == "x") return polynomial("x", {0, 1});
    if (spec == "x2") return polynomial("x2", {0, 0, 1});
    if (spec == "sin") {
        return Integrand{"sin", [](double x) { return std::sin(x); }, RealFn([](double x) { return std::cos(x); }),
                         RealFn([](double x) { return 1.0 - std::cos(x); }), std::nullopt};
    }
    if (spec == "cos") {
        return Integrand{"cos", [](double x) { return std::cos(x); }, RealFn([](double x) { return -std::sin(x); }),
                         RealFn([](double x) { return std::sin(x); }), std::nullopt};
    }
    if (spec == "exp") {
        return Integrand{"exp", [](double x) { return std::exp(x); }, RealFn([](double x) { return std::exp(x); }),
                         RealFn([](double x) { return std::expm1(x); }), std::nullopt};
    }
    if (spec.rfind("poly:", 0) == 0) return polynomial(spec, parse_coeffs(spec.substr(5)));
    if (spec.rfind("table:", 0) == 0) return table(spec, spec.substr(6));
    std::string known;
    for (const auto& r : integrand_registry()) known += (known.empty() ? "" : ", ") + r;
    throw std::invalid_argument("unknown integrand '" + spec + "'; known: " + known);
}

double integral_from_zero(const Integrand& f, double a) {
    if (f.antiderivative) return (*f.antiderivative)(a);
    if (a == 0.0) return 0.0;
    double err = 0;
    double v = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f.f, 0.0, a, 30, 1e-10, &err);
    if (!std::isfinite(v) || err > 1e-10 * std::max(1.0, std::abs(v)))
        throw QuadratureError("quadrature of '" + f.name + "' did not reach 1e-10 (estimate " + std::to_string(err) +
                              ")");
    return v;
}

double derivative_check(const Integrand& f, double lo, double hi, double h, int probes) {
    if (!f.f_prime) throw std::invalid_argument("integrand has no derivative");
    double worst = 0;
    for (int i = 0; i < probes; ++i) {
        double x = lo + (hi - lo) * i / std::max(1, probes - 1);
        double cd = (f.f(x + h) - f.f(x - h)) / (2 * h);
        worst = std::max(worst, std::abs(cd - (*f.f_prime)(x)));
    }
    return worst;
}

}  // namespace twistwalk
