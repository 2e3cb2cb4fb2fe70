#include "twistwalk/twist_shrink.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

#include "twistwalk/error.hpp"

namespace twistwalk {

namespace {

std::uint64_t low_mask(int bits) {
    if (bits <= 0) return 0;
    if (bits >= 64) return ~0ULL;
    return (1ULL << bits) - 1;
}

// Position of the j-th (1-based) set bit.
int select_bit(std::uint64_t x, std::int64_t j) {
    for (std::int64_t i = 1; i < j; ++i) x &= x - 1;
    return std::countr_zero(x);
}

void xor_range(std::vector<std::uint64_t>& words, std::int64_t from, std::int64_t to) {
    // bits [from, to)
    while (from < to) {
        std::int64_t w = from >> 6;
        int lo = static_cast<int>(from & 63);
        int hi = static_cast<int>(std::min<std::int64_t>(to - (w << 6), 64));
        words[w] ^= low_mask(hi) & ~low_mask(lo);
        from = (w << 6) + hi;
    }
}

}  // namespace

TwistedLevel::TwistedLevel(int level, std::vector<std::uint64_t> words, std::int64_t steps)
    : level_(level), steps_(steps), words_(std::move(words)) {
    if (steps < 0) throw std::domain_error("negative step count");
    words_.resize(static_cast<std::size_t>((steps + 63) / 64));
    if (steps & 63) words_.back() &= low_mask(static_cast<int>(steps & 63));
    index();
}

void TwistedLevel::index() {
    std::size_t nw = words_.size();
    prefix_.assign(nw + 1, 0);
    pair_prefix_.assign(nw + 1, 0);
    for (std::size_t w = 0; w < nw; ++w) {
        int valid = static_cast<int>(std::min<std::int64_t>(steps_ - static_cast<std::int64_t>(w) * 64, 64));
        std::uint64_t bits = words_[w];
        prefix_[w + 1] = prefix_[w] + 2 * std::popcount(bits) - valid;
        std::uint64_t pairs = change_pair_mask(bits) & low_mask(valid & ~1);
        pair_prefix_[w + 1] = pair_prefix_[w] + static_cast<std::uint32_t>(std::popcount(pairs));
    }
    bridges_ = pair_prefix_[nw];
}

int TwistedLevel::step(std::int64_t r) const {
    if (r < 1 || r > steps_) throw std::domain_error("step index outside built horizon");
    std::int64_t i = r - 1;
    return ((words_[i >> 6] >> (i & 63)) & 1ULL) ? 1 : -1;
}

std::int64_t TwistedLevel::sum(std::int64_t r) const {
    if (r < 0 || r > steps_) throw std::domain_error("grid index outside built horizon");
    std::int64_t w = r >> 6;
    int b = static_cast<int>(r & 63);
    if (b == 0) return prefix_[w];
    return prefix_[w] + 2 * std::popcount(words_[w] & low_mask(b)) - b;
}

std::int64_t TwistedLevel::stopping_time(std::int64_t k) const {
    if (k < 0 || k > bridges_) throw std::domain_error("stopping time index outside built horizon");
    if (k == 0) return 0;
    auto it = std::lower_bound(pair_prefix_.begin(), pair_prefix_.end(), static_cast<std::uint32_t>(k));
    std::int64_t w = (it - pair_prefix_.begin()) - 1;
    std::int64_t valid = std::min<std::int64_t>(steps_ - w * 64, 64);
    std::uint64_t pairs = change_pair_mask(words_[w]) & low_mask(static_cast<int>(valid & ~1));
    int bit = select_bit(pairs, k - pair_prefix_[w]);
    return w * 64 + bit + 2;
}

DyadicValue TwistedLevel::shrink_eval(std::int64_t r) const { return {sum(r), level_}; }

double TwistedLevel::shrink_eval_linear(double t) const {
    double x = std::ldexp(t, 2 * level_);
    if (!(x >= 0.0) || x > static_cast<double>(steps_)) throw std::domain_error("time outside built horizon");
    auto r = static_cast<std::int64_t>(std::floor(x));
    double v = static_cast<double>(sum(r));
    if (r < steps_) v += (x - static_cast<double>(r)) * step(r + 1);
    return std::ldexp(v, -level_);
}

void TwistedLevel::flip_step(std::int64_t r) {
    if (r < 1 || r > steps_) throw std::domain_error("step index outside built horizon");
    std::int64_t i = r - 1;
    words_[i >> 6] ^= 1ULL << (i & 63);
    index();
}

TwistedLevel raw_level(const StepSource& src, int m, std::int64_t steps) {
    if (steps < 0) throw std::domain_error("negative step count");
    std::uint64_t key = src.level_key(m);
    std::vector<std::uint64_t> words(static_cast<std::size_t>((steps + 63) / 64));
    for (std::size_t i = 0; i < words.size(); ++i) words[i] = StepSource::word_from_key(key, i);
    return TwistedLevel(m, std::move(words), steps);
}

namespace {

template <typename WordFn>
TwistedLevel twist_impl(const TwistedLevel& prev, WordFn raw_word, std::int64_t bridges) {
    if (bridges < 0) throw std::domain_error("negative bridge count");
    if (prev.steps() < bridges)
        throw InsufficientInput("level " + std::to_string(prev.level()) + " has too few steps to twist level " +
                                    std::to_string(prev.level() + 1),
                                bridges - prev.steps());
    int m = prev.level() + 1;
    const auto& pw = prev.words();
    auto prev_chunk = [&](std::int64_t k) {  // prev bits k, k+1, ... (0-based)
        std::size_t w = static_cast<std::size_t>(k >> 6);
        int sh = static_cast<int>(k & 63);
        std::uint64_t lo = w < pw.size() ? pw[w] >> sh : 0;
        std::uint64_t hi = (sh && w + 1 < pw.size()) ? pw[w + 1] << (64 - sh) : 0;
        return lo | hi;
    };
    std::int64_t cap_words = (16 * 4 * bridges + 64) / 64 + 1;
    std::vector<std::uint64_t> out;
    out.reserve(static_cast<std::size_t>(bridges / 16 + 2));
    std::int64_t k = 0;
    std::int64_t open_from = 0;     // first bit of the bridge still open
    std::uint64_t open_guess = 0;   // flip value already applied to its bits
    std::int64_t steps = 0;
    for (std::uint64_t idx = 0; k < bridges; ++idx) {
        if (static_cast<std::int64_t>(idx) > cap_words)
            throw HorizonCapExceeded("raw level " + std::to_string(m) + " exceeded the step cap");
        std::uint64_t w = raw_word(idx);
        std::uint64_t eq = change_pair_mask(w);
        std::int64_t base = static_cast<std::int64_t>(idx) << 6;
        int c = std::popcount(eq);
        if (c == 0) {
            out.push_back(w ^ (open_guess ? ~0ULL : 0));
            continue;
        }
        if (k + c > bridges) {
            // keep only the pairs that close the remaining bridges
            std::uint64_t keep = eq;
            for (std::int64_t i = 0; i < bridges - k; ++i) keep &= keep - 1;
            eq ^= keep;
            c = static_cast<int>(bridges - k);
        }
        std::uint64_t P = prev_chunk(k);
        std::uint64_t markers = 0, d_prev = 0, d_first = 0;
        int last_end = 0;
        for (int i = 0; i < c; ++i) {
            int b = std::countr_zero(eq);
            eq &= eq - 1;
            std::uint64_t d = ((w >> b) ^ (P >> i)) & 1ULL;
            if (i == 0)
                d_first = d;
            else
                markers |= (d ^ d_prev) << last_end;  // start of bridge i
            d_prev = d;
            last_end = b + 2;
        }
        std::uint64_t flip = markers;
        flip ^= flip << 1;
        flip ^= flip << 2;
        flip ^= flip << 4;
        flip ^= flip << 8;
        flip ^= flip << 16;
        flip ^= flip << 32;
        if (d_first) flip = ~flip;
        // bits of the bridge closed by the first pair that lie in earlier words
        if (open_from < base && d_first != open_guess) xor_range(out, open_from, base);
        out.push_back(w ^ flip);
        k += c;
        open_from = base + last_end;
        open_guess = d_prev;
        steps = base + last_end;
    }
    return TwistedLevel(m, std::move(out), steps);
}

}  // namespace

TwistedLevel twist(const TwistedLevel& prev, const StepSource& src, std::int64_t bridges) {
    std::uint64_t key = src.level_key(prev.level() + 1);
    return twist_impl(prev, [key](std::uint64_t idx) { return StepSource::word_from_key(key, idx); }, bridges);
}

TwistedLevel twist(const TwistedLevel& prev, const std::vector<std::uint64_t>& raw_words, std::int64_t bridges) {
    return twist_impl(
        prev,
        [&raw_words](std::uint64_t idx) {
            if (idx >= raw_words.size()) throw InsufficientInput("raw words exhausted before the last bridge", 1);
            return raw_words[idx];
        },
        bridges);
}

std::int64_t horizon_steps(double K, int m) {
    if (!(K > 0)) throw std::domain_error("horizon must be positive");
    return static_cast<std::int64_t>(std::ceil(std::ldexp(K, 2 * m)));
}

std::vector<LevelPlan> plan_horizon(const StepSource& src, int n, const std::vector<std::int64_t>& min_steps) {
    if (n < 0) throw std::domain_error("level must be >= 0");
    if (static_cast<int>(min_steps.size()) != n + 1) throw std::invalid_argument("min_steps must have n+1 entries");
    std::vector<LevelPlan> plan(static_cast<std::size_t>(n) + 1);
    std::int64_t feed = 0;  // bridges the level above consumes
    for (int m = n; m >= 1; --m) {
        std::int64_t required = std::max(min_steps[m], feed);
        std::int64_t need_bridges = min_steps[m - 1];
        std::int64_t cap = 16 * std::max(required, 4 * need_bridges) + 64;
        std::uint64_t key = src.level_key(m);
        std::int64_t k = 0, end = 0;
        for (std::uint64_t idx = 0;; ++idx) {
            std::int64_t base = static_cast<std::int64_t>(idx) << 6;
            if (base > cap) throw HorizonCapExceeded("raw level " + std::to_string(m) + " exceeded the step cap");
            std::uint64_t eq = change_pair_mask(StepSource::word_from_key(key, idx));
            if (base + 64 < required || k + std::popcount(eq) < need_bridges) {
                k += std::popcount(eq);
                continue;
            }
            bool done = false;
            while (eq) {
                int b = std::countr_zero(eq);
                eq &= eq - 1;
                ++k;
                end = base + b + 2;
                if (end >= required && k >= need_bridges) {
                    done = true;
                    break;
                }
            }
            if (done) break;
        }
        plan[m] = {end, k};
        feed = k;
    }
    plan[0].steps = std::max(min_steps[0], feed);
    return plan;
}

std::vector<LevelPlan> plan_horizon(const StepSource& src, int n, double K) {
    std::vector<std::int64_t> min_steps(static_cast<std::size_t>(n) + 1);
    for (int m = 0; m <= n; ++m) min_steps[m] = horizon_steps(K, m);
    return plan_horizon(src, n, min_steps);
}

std::vector<TwistedLevel> build_levels(const StepSource& src, const std::vector<LevelPlan>& plan) {
    std::vector<TwistedLevel> levels;
    levels.reserve(plan.size());
    levels.push_back(raw_level(src, 0, plan.at(0).steps));
    for (std::size_t m = 1; m < plan.size(); ++m) levels.push_back(twist(levels.back(), src, plan[m].bridges));
    return levels;
}

std::vector<TwistedLevel> build_levels(const StepSource& src, int n, double K) {
    return build_levels(src, plan_horizon(src, n, K));
}

RefinementResult check_refinement(const TwistedLevel& coarse, const TwistedLevel& fine, double K) {
    if (fine.level() != coarse.level() + 1) throw std::invalid_argument("levels must be adjacent");
    RefinementResult res;
    std::int64_t kmax = static_cast<std::int64_t>(std::floor(std::ldexp(K, 2 * coarse.level())));
    if (kmax > fine.bridges() || kmax > coarse.steps())
        throw InsufficientInput("level " + std::to_string(fine.level()) + " does not cover the horizon",
                                kmax - std::min(fine.bridges(), coarse.steps()));
    const auto& fw = fine.words();
    const auto& cw = coarse.words();
    std::int64_t k = 0;
    std::int64_t coarse_sum = 0;
    std::int64_t fine_base = 0;  // fine sum at the start of the word
    for (std::size_t idx = 0; k < kmax; ++idx) {
        std::uint64_t w = fw[idx];
        std::int64_t base = static_cast<std::int64_t>(idx) << 6;
        int valid = static_cast<int>(std::min<std::int64_t>(fine.steps() - base, 64));
        std::uint64_t eq = change_pair_mask(w) & low_mask(valid & ~1);
        std::int64_t bad = -1;
        while (eq && k < kmax) {
            int b = std::countr_zero(eq);
            eq &= eq - 1;
            coarse_sum += ((cw[static_cast<std::size_t>(k >> 6)] >> (k & 63)) & 1ULL) ? 1 : -1;
            ++k;
            std::int64_t fine_sum = fine_base + 2 * std::popcount(w & low_mask(b + 2)) - (b + 2);
            if (fine_sum != 2 * coarse_sum && bad < 0) bad = k;
        }
        if (bad >= 0) {
            res.checked = bad;
            res.ok = false;
            res.first_violation =
                RefinementViolation{fine.level(), bad, fine.sum(fine.stopping_time(bad)), coarse.sum(bad)};
            return res;
        }
        fine_base += 2 * std::popcount(w) - valid;
    }
    res.checked = k;
    return res;
}

RefinementResult check_refinement(const std::vector<TwistedLevel>& levels, double K) {
    RefinementResult total;
    for (std::size_t m = 1; m < levels.size(); ++m) {
        RefinementResult r = check_refinement(levels[m - 1], levels[m], K);
        total.checked += r.checked;
        if (!r.ok) {
            total.ok = false;
            total.first_violation = r.first_violation;
            return total;
        }
    }
    return total;
}

DyadicValue total_variation(const TwistedLevel& level, double K) {
    std::int64_t segments = static_cast<std::int64_t>(std::floor(std::ldexp(K, 2 * level.level())));
    if (segments > level.steps())
        throw InsufficientInput("level does not cover the horizon", segments - level.steps());
    std::int64_t v = 0;
    std::int64_t prev = 0;
    for (std::int64_t r = 1; r <= segments; ++r) {
        std::int64_t cur = level.sum(r);
        v += std::abs(cur - prev);
        prev = cur;
    }
    return {v, level.level()};
}

}  // namespace twistwalk
