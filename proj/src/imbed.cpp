#include "twistwalk/imbed.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <stdexcept>

#include "twistwalk/error.hpp"

namespace twistwalk {

namespace {

struct ByteSpan {
    std::int8_t total;
    std::int8_t high;  // max prefix sum over 1..8 steps
    std::int8_t low;   // min prefix sum
};

const std::array<ByteSpan, 256>& byte_spans() {
    static const std::array<ByteSpan, 256> table = [] {
        std::array<ByteSpan, 256> t{};
        for (int x = 0; x < 256; ++x) {
            int s = 0, hi = -9, lo = 9;
            for (int b = 0; b < 8; ++b) {
                s += ((x >> b) & 1) ? 1 : -1;
                hi = std::max(hi, s);
                lo = std::min(lo, s);
            }
            t[x] = {static_cast<std::int8_t>(s), static_cast<std::int8_t>(hi), static_cast<std::int8_t>(lo)};
        }
        return t;
    }();
    return table;
}

}  // namespace

double EmbeddingTimes::time(std::int64_t k) const {
    return std::ldexp(static_cast<double>(grid_index.at(k)), -2 * n);
}

// For thresholds D <= 8: entry [(o + D - 1) * 256 + x] * 8 + s] describes the
// first passage to +-D within bits s..7 of byte x starting at offset o;
// 0 = none, +e / -e = reached +D / -D after bit e-1.
std::vector<std::int8_t> passage_table(int D) {
    std::vector<std::int8_t> t(static_cast<std::size_t>(2 * D - 1) * 256 * 8, 0);
    for (int o = -D + 1; o < D; ++o)
        for (int x = 0; x < 256; ++x)
            for (int st = 0; st < 8; ++st) {
                int v = o;
                for (int b = st; b < 8; ++b) {
                    v += ((x >> b) & 1) ? 1 : -1;
                    if (v == D || v == -D) {
                        t[(static_cast<std::size_t>(o + D - 1) * 256 + x) * 8 + st] =
                            static_cast<std::int8_t>(v > 0 ? b + 1 : -(b + 1));
                        break;
                    }
                }
            }
    return t;
}

EmbeddingTimes first_passage_times(const TwistedLevel& fine, int m, std::int64_t last_index) {
    int n = fine.level();
    if (m < 0 || m > n) throw std::domain_error("coarse level must satisfy 0 <= m <= n");
    if (last_index > fine.steps()) throw std::domain_error("passage horizon beyond built steps");
    const auto& spans = byte_spans();
    const auto& words = fine.words();
    auto byte_at = [&](std::int64_t r) {  // steps r+1..r+8, r % 8 == 0
        return static_cast<unsigned>((words[static_cast<std::size_t>(r >> 6)] >> (r & 63)) & 0xFF);
    };
    auto bit_at = [&](std::int64_t r) {  // step r+1
        return ((words[static_cast<std::size_t>(r >> 6)] >> (r & 63)) & 1ULL) ? 1 : -1;
    };
    const std::int64_t D = std::int64_t{1} << (n - m);
    EmbeddingTimes e;
    e.m = m;
    e.n = n;
    std::size_t expect = static_cast<std::size_t>(last_index / (D * D)) + 16;
    e.grid_index.reserve(expect + expect / 8);
    e.value_numerator.reserve(expect + expect / 8);
    e.grid_index.push_back(0);
    e.value_numerator.push_back(0);
    auto record = [&](std::int64_t r, std::int64_t v) {
        e.grid_index.push_back(r);
        e.value_numerator.push_back(v >> (n - m));
    };
    std::int64_t r = 0, v = 0, anchor = 0;
    if (D <= 8) {
        const int d = static_cast<int>(D);
        std::vector<std::int8_t> table = passage_table(d);
        while (r < last_index) {
            std::int64_t st = r & 7;
            std::int64_t start = r - st;
            if (start + 8 <= last_index) {
                unsigned x = byte_at(start);
                std::int64_t o = v - anchor;
                std::int8_t ent = table[(static_cast<std::size_t>(o + d - 1) * 256 + x) * 8 + st];
                if (ent == 0) {
                    v += 2 * std::popcount(x >> st) - (8 - st);
                    r = start + 8;
                } else {
                    r = start + (ent > 0 ? ent : -ent);
                    v = anchor + (ent > 0 ? D : -D);
                    anchor = v;
                    record(r, v);
                }
                continue;
            }
            v += bit_at(r);
            ++r;
            if (v == anchor + D || v == anchor - D) {
                anchor = v;
                record(r, v);
            }
        }
        return e;
    }
    while (r < last_index) {
        if ((r & 7) == 0 && r + 8 <= last_index) {
            const ByteSpan& s = spans[byte_at(r)];
            if (v + s.high < anchor + D && v + s.low > anchor - D) {
                v += s.total;
                r += 8;
                continue;
            }
        }
        v += bit_at(r);
        ++r;
        if (v == anchor + D || v == anchor - D) {
            anchor = v;
            record(r, v);
        }
    }
    return e;
}

EmbeddingTimes first_passage_times(const WienerGrid& grid, int m) {
    return first_passage_times(grid.finest(), m, grid.last_index());
}

double ComposedTimes::lag(std::int64_t k) const {
    return std::ldexp(static_cast<double>(T.at(k)), -2 * n) - std::ldexp(static_cast<double>(k), -2 * m);
}

void map_stopping_times(const TwistedLevel& level, std::vector<std::int64_t>& idx) {
    if (idx.empty()) return;
    if (idx.back() > level.bridges())
        throw InsufficientInput("level " + std::to_string(level.level()) + " has too few bridges for composition",
                                idx.back() - level.bridges());
    const auto& words = level.words();
    std::size_t pos = 0;
    while (pos < idx.size() && idx[pos] == 0) ++pos;
    std::int64_t k = 0;
    for (std::size_t w = 0; pos < idx.size(); ++w) {
        std::int64_t base = static_cast<std::int64_t>(w) << 6;
        std::int64_t valid = std::min<std::int64_t>(level.steps() - base, 64);
        std::uint64_t eq = change_pair_mask(words[w]);
        if (valid < 64) eq &= (1ULL << (valid & ~1LL)) - 1;
        while (eq && pos < idx.size()) {
            int b = std::countr_zero(eq);
            eq &= eq - 1;
            ++k;
            while (pos < idx.size() && idx[pos] == k) idx[pos++] = base + b + 2;
        }
    }
}

ComposedTimes composed_stopping_times(const std::vector<TwistedLevel>& levels, int m, int n, std::int64_t count) {
    if (m < 0 || n <= m || n >= static_cast<int>(levels.size()))
        throw std::domain_error("composition needs 0 <= m < n within the built levels");
    if (count < 0) throw std::domain_error("negative count");
    ComposedTimes ct;
    ct.m = m;
    ct.n = n;
    ct.T.resize(static_cast<std::size_t>(count) + 1);
    for (std::int64_t k = 0; k <= count; ++k) ct.T[k] = k;
    for (int j = m + 1; j <= n; ++j) map_stopping_times(levels[j], ct.T);
    return ct;
}

ComposedTimes composed_stopping_times(const std::vector<TwistedLevel>& levels, int m, int n) {
    if (m < 0 || n <= m || n >= static_cast<int>(levels.size()))
        throw std::domain_error("composition needs 0 <= m < n within the built levels");
    ComposedTimes ct;
    ct.m = m;
    ct.n = n;
    std::int64_t count = levels[m + 1].bridges();
    ct.T.resize(static_cast<std::size_t>(count) + 1);
    for (std::int64_t k = 0; k <= count; ++k) ct.T[k] = k;
    for (int j = m + 1; j <= n; ++j) {
        auto cut = std::upper_bound(ct.T.begin(), ct.T.end(), levels[j].bridges());
        ct.T.erase(cut, ct.T.end());
        map_stopping_times(levels[j], ct.T);
    }
    return ct;
}

EmbeddingCrosscheck crosscheck_embedding(const std::vector<TwistedLevel>& levels, int m, int n, double K) {
    EmbeddingCrosscheck res;
    const TwistedLevel& fine = levels.at(n);
    std::int64_t last = static_cast<std::int64_t>(std::floor(std::ldexp(K, 2 * n)));
    EmbeddingTimes fp = first_passage_times(fine, m, std::min(last, fine.steps()));
    if (m == n) {
        for (std::int64_t k = 0; k <= fp.count(); ++k) {
            ++res.compared;
            if (fp.grid_index[k] != k || fp.value_numerator[k] != fine.sum(k)) {
                res.exact = false;
                res.first_mismatch = k;
                return res;
            }
        }
        return res;
    }
    ComposedTimes ct = composed_stopping_times(levels, m, n);
    std::int64_t common = std::min(fp.count(), ct.count());
    for (std::int64_t k = 0; k <= common; ++k) {
        ++res.compared;
        if (fp.grid_index[k] != ct.T[k] || fp.value_numerator[k] != levels[m].sum(k)) {
            res.exact = false;
            res.first_mismatch = k;
            return res;
        }
    }
    // every composed time inside the horizon must have been found as a passage
    if (ct.count() > fp.count() && ct.T[fp.count() + 1] <= last) {
        res.exact = false;
        res.first_mismatch = fp.count() + 1;
    }
    return res;
}

double time_lag_bound(int m, double K, double C) { return std::sqrt(18.0 * C * K * m) * std::ldexp(1.0, -m); }

double time_lag_budget(int m, double K, double C) { return 4.0 * std::pow(std::ldexp(K, 2 * m), 1.0 - C); }

double neighbor_diff_bound(int m, double delta) { return (7.0 / delta) * std::pow(2.0, -2.0 * m * (1.0 - delta)); }

// budget of the probability form with 3C' = 7/delta
double neighbor_diff_budget(int m, double K, double delta) {
    double Cp = 7.0 / (3.0 * delta);
    return (K / 10.0) * std::pow(2.0, -2.0 * m * (delta * Cp - 2.0));
}

LagReport time_lag_report(const ComposedTimes& ct, double K, double C) {
    if (C < 1.5) throw std::domain_error("lag bound needs C >= 3/2");
    LagReport r;
    r.m = ct.m;
    r.n = ct.n;
    std::int64_t kmax = static_cast<std::int64_t>(std::floor(std::ldexp(K, 2 * ct.m)));
    if (kmax > ct.count()) throw InsufficientInput("composed times do not cover the horizon", kmax - ct.count());
    for (std::int64_t k = 0; k <= kmax; ++k) r.max_lag = std::max(r.max_lag, std::abs(ct.lag(k)));
    r.points = kmax + 1;
    r.bound = time_lag_bound(ct.m, K, C);
    r.as_bound = std::sqrt(27.0 * K * ct.m) * std::ldexp(1.0, -ct.m);
    r.budget = time_lag_budget(ct.m, K, C);
    r.exceeded = r.max_lag >= r.bound;
    return r;
}

NeighborDiffReport neighbor_diff_report(const ComposedTimes& ct, double K, double delta) {
    if (!(delta > 0 && delta < 1)) throw std::domain_error("delta must lie in (0, 1)");
    NeighborDiffReport r;
    r.m = ct.m;
    r.n = ct.n;
    std::int64_t kmax = static_cast<std::int64_t>(std::floor(std::ldexp(K, 2 * ct.m)));
    if (kmax > ct.count()) throw InsufficientInput("composed times do not cover the horizon", kmax - ct.count());
    double ideal = std::ldexp(1.0, -2 * ct.m);
    double sum = 0;
    for (std::int64_t k = 1; k <= kmax; ++k) {
        double d = std::ldexp(static_cast<double>(ct.diff(k)), -2 * ct.n);
        sum += d;
        r.max_dev = std::max(r.max_dev, std::abs(d - ideal));
    }
    r.points = kmax;
    r.mean_all = kmax > 0 ? sum / kmax : 0.0;
    r.mean_first = kmax > 0 ? std::ldexp(static_cast<double>(ct.diff(1)), -2 * ct.n) : 0.0;
    r.bound = neighbor_diff_bound(ct.m, delta);
    r.budget = neighbor_diff_budget(ct.m, K, delta);
    r.exceeded = r.max_dev >= r.bound;
    return r;
}

}  // namespace twistwalk
