#pragma once

#include <cstdint>
#include <vector>

namespace twistwalk {

struct SeedSpec {
    std::uint64_t master_seed = 0;
};

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

inline constexpr std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Steps of level m form an infinite bit string; step k (1-based) is bit
// (k-1)%64 of word (k-1)/64, a set bit meaning +1.
class StepSource {
public:
    explicit StepSource(SeedSpec seed) : seed_(seed) {}

    SeedSpec seed() const { return seed_; }

    std::uint64_t level_key(int m) const {
        return mix64(mix64(seed_.master_seed + 0x2545F4914F6CDD1DULL) ^
                     (static_cast<std::uint64_t>(m) + 1) * kGolden);
    }

    static std::uint64_t word_from_key(std::uint64_t key, std::uint64_t index) {
        return mix64(key + (index + 1) * kGolden);
    }

    std::uint64_t word(int m, std::uint64_t index) const {
        return word_from_key(level_key(m), index);
    }

    int step(int m, std::int64_t k) const;

    std::vector<std::int8_t> step_block(int m, std::int64_t k_from, std::int64_t k_to) const;

private:
    SeedSpec seed_;
};

}  // namespace twistwalk
