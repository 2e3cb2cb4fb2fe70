#include "twistwalk/rand_source.hpp"

#include <stdexcept>

namespace twistwalk {

int StepSource::step(int m, std::int64_t k) const {
    if (k < 1 || m < 0) throw std::domain_error("step index must be >= 1 and level >= 0");
    auto idx = static_cast<std::uint64_t>(k - 1);
    std::uint64_t w = word(m, idx >> 6);
    return ((w >> (idx & 63)) & 1ULL) ? 1 : -1;
}

std::vector<std::int8_t> StepSource::step_block(int m, std::int64_t k_from, std::int64_t k_to) const {
    if (m < 0 || k_from < 1 || k_to < k_from) throw std::domain_error("invalid step range");
    std::uint64_t key = level_key(m);
    std::vector<std::int8_t> out(static_cast<std::size_t>(k_to - k_from + 1));
    auto first = static_cast<std::uint64_t>(k_from - 1);
    std::uint64_t cur_index = first >> 6;
    std::uint64_t w = word_from_key(key, cur_index);
    for (std::size_t i = 0; i < out.size(); ++i) {
        std::uint64_t pos = first + i;
        if ((pos >> 6) != cur_index) {
            cur_index = pos >> 6;
            w = word_from_key(key, cur_index);
        }
        out[i] = ((w >> (pos & 63)) & 1ULL) ? 1 : -1;
    }
    return out;
}

}  // namespace twistwalk
