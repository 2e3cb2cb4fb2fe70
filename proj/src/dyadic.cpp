#include "twistwalk/dyadic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace twistwalk {

namespace {

std::int64_t shift_up(std::int64_t v, int by) {
    if (by == 0 || v == 0) return v;
    if (by >= 63) throw std::overflow_error("dyadic rescale overflow");
    std::int64_t limit = INT64_MAX >> by;
    if (v > limit || v < -limit) throw std::overflow_error("dyadic rescale overflow");
    return v * (std::int64_t{1} << by);
}

}  // namespace

double DyadicValue::to_double() const { return std::ldexp(static_cast<double>(numerator), -scale); }

DyadicValue DyadicValue::rescaled(int new_scale) const {
    if (new_scale >= scale) return {shift_up(numerator, new_scale - scale), new_scale};
    int drop = scale - new_scale;
    std::int64_t mask = (std::int64_t{1} << drop) - 1;
    if ((numerator & mask) != 0) throw std::domain_error("dyadic value not representable at coarser scale");
    return {numerator >> drop, new_scale};
}

DyadicValue DyadicValue::normalized() const {
    DyadicValue v = *this;
    if (v.numerator == 0) return {0, 0};
    while (v.scale > 0 && (v.numerator & 1) == 0) {
        v.numerator >>= 1;
        --v.scale;
    }
    return v;
}

std::string DyadicValue::str() const {
    return std::to_string(numerator) + "/2^" + std::to_string(scale);
}

DyadicValue operator+(const DyadicValue& a, const DyadicValue& b) {
    int s = std::max(a.scale, b.scale);
    return {a.rescaled(s).numerator + b.rescaled(s).numerator, s};
}

DyadicValue operator-(const DyadicValue& a, const DyadicValue& b) { return a + (-b); }

bool operator==(const DyadicValue& a, const DyadicValue& b) {
    int s = std::max(a.scale, b.scale);
    return a.rescaled(s).numerator == b.rescaled(s).numerator;
}

std::strong_ordering operator<=>(const DyadicValue& a, const DyadicValue& b) {
    int s = std::max(a.scale, b.scale);
    return a.rescaled(s).numerator <=> b.rescaled(s).numerator;
}

}  // namespace twistwalk
