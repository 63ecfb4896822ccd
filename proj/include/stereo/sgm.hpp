#pragma once

// Semi-global path aggregation and winner-takes-all extraction.
//
// Along each straight path r the recursion
//
//   L_r(p, d) = S(p, d) + min( L_r(p-r, d),
//                              L_r(p-r, d-1) + P1,
//                              L_r(p-r, d+1) + P1,
//                              min_k L_r(p-r, k) + P2 )
//
// is evaluated, starting with L_r(p, d) = S(p, d) on the first pixel of every
// maximal line. With `normalize` the previous minimum is subtracted at each
// step, which leaves the per-pixel argmin unchanged.

#include <array>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "stereo/core.hpp"
#include "stereo/parallel.hpp"

namespace stereo {

struct PathDirection {
    int dx;
    int dy;
    friend constexpr bool operator==(PathDirection, PathDirection) = default;
};

namespace paths {
inline constexpr PathDirection LR{1, 0};
inline constexpr PathDirection RL{-1, 0};
inline constexpr PathDirection TB{0, 1};
inline constexpr PathDirection BT{0, -1};
inline constexpr PathDirection TLBR{1, 1};
inline constexpr PathDirection TRBL{-1, 1};
inline constexpr PathDirection BLTR{1, -1};
inline constexpr PathDirection BRTL{-1, -1};
} // namespace paths

inline constexpr std::array<PathDirection, 8> kAllPaths{paths::LR,   paths::RL,   paths::TB,   paths::BT,
                                                        paths::TLBR, paths::TRBL, paths::BLTR, paths::BRTL};

/// First `count` canonical directions; 4 selects the horizontal and vertical ones.
inline std::span<const PathDirection> path_set(int count) {
    if (count != 4 && count != 8) throw ContractViolation("path_set: path count must be 4 or 8");
    return std::span(kAllPaths).first(static_cast<std::size_t>(count));
}

struct SgmParams {
    std::uint32_t p1 = 27;
    std::uint32_t p2 = 86;
    bool normalize = true;
};

namespace detail {

inline void check_penalties(const SgmParams& params) {
    if (params.p1 == 0 || params.p1 >= params.p2)
        throw ContractViolation("sgm: penalties must satisfy 0 < p1 < p2");
}

/// Upper bound of any aggregated cell for the given geometry. Each step adds
/// at most max_cell + p2 on top of the previous minimum.
inline std::uint64_t aggregated_bound(const VolumeDims& dims, int path_count, const SgmParams& params) {
    const std::uint64_t step = kMaxCellCost + static_cast<std::uint64_t>(params.p2);
    const std::uint64_t length = params.normalize ? 1 : static_cast<std::uint64_t>(std::max(dims.width, dims.height));
    return static_cast<std::uint64_t>(path_count) * (length + 1) * step;
}

inline void check_headroom(const VolumeDims& dims, int path_count, const SgmParams& params) {
    // Keep every intermediate below 2^31 so that the +P1 / +P2 sentinels cannot wrap.
    if (aggregated_bound(dims, path_count, params) >= (std::uint64_t{1} << 31))
        throw ContractViolation("sgm: aggregated costs could overflow 32-bit cells for these dimensions");
}

inline constexpr std::uint32_t kUnreachable = std::numeric_limits<std::uint32_t>::max() / 2;

/// One recursion step for a single pixel. `prev` is padded with one
/// kUnreachable entry on each side so the d +/- 1 terms vanish at the range
/// ends; `prev_min` is min over prev. Writes the new costs to `next[1..n]`
/// and returns their minimum.
inline std::uint32_t path_step(std::span<const std::uint8_t> cost, const std::uint32_t* prev, std::uint32_t prev_min,
                               std::uint32_t* next, const SgmParams& params) noexcept {
    const int n = static_cast<int>(cost.size());
    const std::uint32_t jump = prev_min + params.p2;
    const std::uint32_t sub = params.normalize ? prev_min : 0;
    std::uint32_t next_min = kUnreachable;
    for (int i = 0; i < n; ++i) {
        const std::uint32_t side = std::min(prev[i], prev[i + 2]) + params.p1;
        const std::uint32_t best = std::min(std::min(prev[i + 1], side), jump);
        const std::uint32_t v = cost[static_cast<std::size_t>(i)] + best - sub;
        next[i + 1] = v;
        next_min = std::min(next_min, v);
    }
    return next_min;
}

inline std::uint32_t path_start(std::span<const std::uint8_t> cost, std::uint32_t* next) noexcept {
    std::uint32_t next_min = kUnreachable;
    for (std::size_t i = 0; i < cost.size(); ++i) {
        next[i + 1] = cost[i];
        next_min = std::min<std::uint32_t>(next_min, cost[i]);
    }
    return next_min;
}

inline void add_into(std::span<std::uint32_t> out, const std::uint32_t* values) noexcept {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += values[i + 1];
}

/// Adds L_r for one direction into `out`. Every pixel lies on exactly one
/// line of the direction, so the line sets handed to different workers write
/// disjoint cells.
inline void accumulate_direction(const CostVolume& cost, PathDirection dir, const SgmParams& params,
                                 AggregatedCostVolume& out, int workers) {
    const int w = cost.width();
    const int h = cost.height();
    const int n = cost.disparities();
    const auto stride = static_cast<std::size_t>(n + 2);

    if (dir.dy == 0) {
        // lines are image rows
        for_each_stripe(h, workers, [&](RowRange rows) {
            std::vector<std::uint32_t> a(stride, kUnreachable), b(stride, kUnreachable);
            for (int y = rows.begin; y < rows.end; ++y) {
                std::uint32_t* prev = a.data();
                std::uint32_t* next = b.data();
                const int x0 = dir.dx > 0 ? 0 : w - 1;
                std::uint32_t prev_min = path_start(cost.pixel(x0, y), prev);
                add_into(out.pixel(x0, y), prev);
                for (int x = x0 + dir.dx; x >= 0 && x < w; x += dir.dx) {
                    prev_min = path_step(cost.pixel(x, y), prev, prev_min, next, params);
                    add_into(out.pixel(x, y), next);
                    std::swap(prev, next);
                }
            }
        });
        return;
    }

    // Sweep rows in the direction of dy. A line keeps key = x - dx*dy*y
    // constant, so a contiguous key range covers a contiguous x range per row.
    const int slope = dir.dx * dir.dy;
    const int key_lo = slope > 0 ? -(h - 1) : 0;
    const int key_hi = slope > 0 ? (w - 1) : (slope < 0 ? (w - 1) + (h - 1) : (w - 1));
    const int key_count = key_hi - key_lo + 1;

    for_each_stripe(key_count, workers, [&](RowRange keys) {
        std::vector<std::uint32_t> prev_buf(stride * static_cast<std::size_t>(keys.size()), kUnreachable);
        std::vector<std::uint32_t> prev_min(static_cast<std::size_t>(keys.size()), 0);
        std::vector<std::uint32_t> next(stride, kUnreachable);
        const int y0 = dir.dy > 0 ? 0 : h - 1;
        for (int step = 0; step < h; ++step) {
            const int y = y0 + step * dir.dy;
            const int offset = slope * y;
            const int x_lo = std::max(0, keys.begin + key_lo + offset);
            const int x_hi = std::min(w - 1, keys.end - 1 + key_lo + offset);
            for (int x = x_lo; x <= x_hi; ++x) {
                const auto slot = static_cast<std::size_t>(x - offset - key_lo - keys.begin);
                std::uint32_t* prev = prev_buf.data() + slot * stride;
                const int px = x - dir.dx;
                const bool start = step == 0 || px < 0 || px >= w;
                if (start) {
                    prev_min[slot] = path_start(cost.pixel(x, y), prev);
                } else {
                    prev_min[slot] = path_step(cost.pixel(x, y), prev, prev_min[slot], next.data(), params);
                    std::copy(next.begin() + 1, next.end() - 1, prev + 1);
                }
                add_into(out.pixel(x, y), prev);
            }
        }
    });
}

} // namespace detail

/// Path cost volume L_r for a single direction.
inline AggregatedCostVolume aggregate_path(const CostVolume& cost, PathDirection dir, const SgmParams& params,
                                           int workers = 1) {
    detail::check_penalties(params);
    if ((dir.dx == 0 && dir.dy == 0) || dir.dx < -1 || dir.dx > 1 || dir.dy < -1 || dir.dy > 1)
        throw ContractViolation("aggregate_path: invalid direction");
    detail::check_headroom(cost.dims(), 1, params);
    AggregatedCostVolume out(cost.dims(), 0);
    detail::accumulate_direction(cost, dir, params, out, workers);
    return out;
}

/// S_bar(p, d) = sum over the selected directions of L_r(p, d), written to `out`.
inline void aggregate_all(const CostVolume& cost, int path_count, const SgmParams& params, AggregatedCostVolume& out,
                          int workers = 1) {
    detail::check_penalties(params);
    const auto dirs = path_set(path_count);
    detail::check_headroom(cost.dims(), path_count, params);
    out.reset(cost.dims(), 0);
    for (auto dir : dirs) detail::accumulate_direction(cost, dir, params, out, workers);
}

inline AggregatedCostVolume aggregate_all(const CostVolume& cost, int path_count, const SgmParams& params,
                                          int workers = 1) {
    AggregatedCostVolume out;
    aggregate_all(cost, path_count, params, out, workers);
    return out;
}

/// Index of the smallest element; ties resolve to the lowest index.
template <typename Cell>
int argmin_index(std::span<const Cell> cells) noexcept {
    int best = 0;
    for (int i = 1; i < static_cast<int>(cells.size()); ++i)
        if (cells[static_cast<std::size_t>(i)] < cells[static_cast<std::size_t>(best)]) best = i;
    return best;
}

/// Winner-takes-all disparity per pixel (all pixels valid).
template <typename Cell>
DisparityMap wta(const Volume<Cell>& volume, int workers = 1) {
    DisparityMap out(volume.width(), volume.height());
    const int dmin = volume.range().min;
    for_each_stripe(volume.height(), workers, [&](RowRange rows) {
        for (int y = rows.begin; y < rows.end; ++y)
            for (int x = 0; x < volume.width(); ++x)
                out.set(x, y, static_cast<float>(dmin + argmin_index(volume.pixel(x, y))));
    });
    return out;
}

} // namespace stereo
