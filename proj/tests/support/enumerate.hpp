#pragma once

// Exhaustive enumeration of partition systems on tiny schedules, built by
// direct recursion over per-node equal splits (Gosper's hack over bitmasks).
// Deliberately independent of the ranking/unranking path in the library.

#include <cstdint>
#include <vector>

#include "kglab/partition.hpp"
#include "kglab/schedule.hpp"

namespace kglab::testing {

inline std::vector<std::uint64_t> half_masks(std::uint64_t m) {
    const std::uint64_t n = std::uint64_t{1} << m;
    const std::uint64_t k = n / 2;
    std::vector<std::uint64_t> out;
    std::uint64_t mask = (std::uint64_t{1} << k) - 1;
    const std::uint64_t limit = std::uint64_t{1} << n;
    while (mask < limit) {
        out.push_back(mask);
        const std::uint64_t c = mask & (~mask + 1);
        const std::uint64_t r = mask + c;
        if (r >= limit) break;
        mask = (((r ^ mask) >> 2) / c) | r;
    }
    return out;
}

// Builds the system for one explicit choice of split masks, one mask per
// (level, tau) position, without going through build_system.
inline PartitionSystem system_from_masks(const LevelSchedule& s, std::uint64_t h,
                                         const std::vector<std::vector<std::uint64_t>>& masks) {
    PartitionSystem ps;
    ps.schedule = s;
    ps.height = h;
    ps.classes.resize(h + 1);
    ps.classes[0] = {{0}};
    std::vector<std::uint64_t> assign{0};
    for (std::uint64_t n = 0; n < h; ++n) {
        const std::uint64_t ell = s.level(n);
        const std::uint64_t m = s.gap(n);
        ps.classes[n + 1].assign(std::uint64_t{1} << (n + 1), {});
        std::vector<std::uint64_t> next(std::uint64_t{1} << s.level(n + 1));
        for (std::uint64_t tau = 0; tau < (std::uint64_t{1} << ell); ++tau) {
            for (std::uint64_t j = 0; j < (std::uint64_t{1} << m); ++j) {
                const std::uint64_t child = tau << m | j;
                const int bit = (masks[n][tau] >> j & 1) ? 0 : 1;
                const std::uint64_t sig = assign[tau] << 1 | static_cast<std::uint64_t>(bit);
                ps.classes[n + 1][sig].push_back(child);
                next[child] = sig;
            }
        }
        assign = std::move(next);
    }
    return ps;
}

inline std::vector<PartitionSystem> enumerate_systems(const LevelSchedule& s,
                                                      std::uint64_t h) {
    // Odometer over every (level, tau) position's possible half-masks.
    std::vector<std::vector<std::uint64_t>> choices;  // per level: mask menu
    std::vector<std::uint64_t> width;                 // per level: node count
    for (std::uint64_t n = 0; n < h; ++n) {
        choices.push_back(half_masks(s.gap(n)));
        width.push_back(std::uint64_t{1} << s.level(n));
    }
    std::vector<std::vector<std::uint64_t>> idx(h);
    for (std::uint64_t n = 0; n < h; ++n) idx[n].assign(width[n], 0);

    std::vector<PartitionSystem> out;
    for (;;) {
        std::vector<std::vector<std::uint64_t>> masks(h);
        for (std::uint64_t n = 0; n < h; ++n) {
            masks[n].resize(width[n]);
            for (std::uint64_t t = 0; t < width[n]; ++t)
                masks[n][t] = choices[n][idx[n][t]];
        }
        out.push_back(system_from_masks(s, h, masks));
        // advance the odometer
        std::uint64_t n = 0, t = 0;
        for (;;) {
            if (n == h) return out;
            if (++idx[n][t] < choices[n].size()) break;
            idx[n][t] = 0;
            if (++t == width[n]) {
                t = 0;
                ++n;
            }
        }
    }
}

}  // namespace kglab::testing
