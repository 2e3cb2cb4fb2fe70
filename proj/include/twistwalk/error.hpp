#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace twistwalk {

class InsufficientInput : public std::runtime_error {
public:
    InsufficientInput(const std::string& what, std::int64_t deficit)
        : std::runtime_error(what + " (deficit " + std::to_string(deficit) + ")"),
          deficit_(deficit) {}
    std::int64_t deficit() const { return deficit_; }

private:
    std::int64_t deficit_;
};

class HorizonCapExceeded : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class QuadratureError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace twistwalk
