#pragma once

#include <compare>
#include <cstdint>
#include <string>

namespace twistwalk {

// numerator * 2^-scale
struct DyadicValue {
    std::int64_t numerator = 0;
    int scale = 0;

    double to_double() const;
    DyadicValue rescaled(int new_scale) const;
    DyadicValue normalized() const;
    std::string str() const;

    friend DyadicValue operator+(const DyadicValue& a, const DyadicValue& b);
    friend DyadicValue operator-(const DyadicValue& a, const DyadicValue& b);
    friend DyadicValue operator-(const DyadicValue& a) { return {-a.numerator, a.scale}; }
    friend bool operator==(const DyadicValue& a, const DyadicValue& b);
    friend std::strong_ordering operator<=>(const DyadicValue& a, const DyadicValue& b);
};

}  // namespace twistwalk
