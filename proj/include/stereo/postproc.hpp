#pragma once

// Post-processing, applied in this order by the pipeline:
// subpixel refinement -> left/right consistency -> 3x3 median.

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>

#include "stereo/core.hpp"
#include "stereo/matching.hpp"
#include "stereo/parallel.hpp"
#include "stereo/sgm.hpp"

namespace stereo {

// ---------------------------------------------------------------------------
// Subpixel refinement
// ---------------------------------------------------------------------------

/// Vertex of the parabola through (-1, c_minus), (0, c_center), (+1, c_plus),
/// clamped to [-0.5, 0.5]. A flat or non-convex triple gives 0.
inline double parabola_offset(double c_minus, double c_center, double c_plus) noexcept {
    const double denom = 2.0 * (c_minus - 2.0 * c_center + c_plus);
    if (!(denom > 0.0)) return 0.0;
    const double offset = (c_minus - c_plus) / denom;
    return std::clamp(offset, -0.5, 0.5);
}

/// Refines each valid pixel whose disparity lies strictly inside the range
/// using the aggregated costs of its two disparity neighbors.
inline DisparityMap subpixel_refine(const DisparityMap& disp, const AggregatedCostVolume& aggregated,
                                    int workers = 1) {
    if (disp.width() != aggregated.width() || disp.height() != aggregated.height())
        throw ContractViolation("subpixel_refine: map and volume differ in size");
    DisparityMap out = disp;
    const auto range = aggregated.range();
    for_each_stripe(disp.height(), workers, [&](RowRange rows) {
        for (int y = rows.begin; y < rows.end; ++y) {
            for (int x = 0; x < disp.width(); ++x) {
                const auto v = disp.get(x, y);
                if (!v) continue;
                const int d = static_cast<int>(std::lround(*v));
                if (d <= range.min || d >= range.max) continue;
                const auto cells = aggregated.pixel(x, y);
                const auto i = static_cast<std::size_t>(d - range.min);
                const double offset = parabola_offset(cells[i - 1], cells[i], cells[i + 1]);
                out.set(x, y, static_cast<float>(d + offset));
            }
        }
    });
    return out;
}

// ---------------------------------------------------------------------------
// Right disparity and consistency
// ---------------------------------------------------------------------------

/// Right-image disparity read off the left-referenced aggregated volume:
/// D_R(x, y) = argmin_d S_bar((x + d, y), d) over the d with x + d in the
/// image. Ties go to the smallest d; pixels without a candidate are invalid.
inline DisparityMap approx_right_disparity(const AggregatedCostVolume& aggregated, int workers = 1) {
    const int w = aggregated.width();
    const auto range = aggregated.range();
    DisparityMap out(w, aggregated.height());
    for_each_stripe(aggregated.height(), workers, [&](RowRange rows) {
        for (int y = rows.begin; y < rows.end; ++y) {
            for (int x = 0; x < w; ++x) {
                int best_d = -1;
                std::uint32_t best = 0;
                for (int d = range.min; d <= range.max && x + d < w; ++d) {
                    const auto c = aggregated.pixel(x + d, y)[static_cast<std::size_t>(d - range.min)];
                    if (best_d < 0 || c < best) {
                        best = c;
                        best_d = d;
                    }
                }
                if (best_d >= 0) out.set(x, y, static_cast<float>(best_d));
            }
        }
    });
    return out;
}

/// Keeps D_L(p) iff the matched right pixel (x - round(D_L(p)), y) is inside
/// the image, holds an estimate, and agrees within `threshold` pixels.
inline DisparityMap consistency_check(const DisparityMap& left, const DisparityMap& right, float threshold,
                                      int workers = 1) {
    if (left.width() != right.width() || left.height() != right.height())
        throw ContractViolation("consistency_check: maps differ in size");
    DisparityMap out(left.width(), left.height());
    for_each_stripe(left.height(), workers, [&](RowRange rows) {
        for (int y = rows.begin; y < rows.end; ++y) {
            for (int x = 0; x < left.width(); ++x) {
                const auto dl = left.get(x, y);
                if (!dl) continue;
                const long xr = x - std::lround(*dl);
                if (xr < 0 || xr >= left.width()) continue;
                const auto dr = right.get(static_cast<int>(xr), y);
                if (dr && std::fabs(*dl - *dr) <= threshold) out.set(x, y, *dl);
            }
        }
    });
    return out;
}

/// Right-image disparity computed from scratch: mirror both images, swap
/// their roles, run cost + aggregation + WTA, and mirror the result back.
inline DisparityMap exact_right_disparity(const GrayImage& left, const GrayImage& right, const PipelineConfig& cfg) {
    require_valid(cfg, left, right);
    const GrayImage ref = mirror_horizontal(right);
    const GrayImage match = mirror_horizontal(left);
    CostVolume cost;
    compute_cost_volume(ref, match, cfg.cost_function, cfg.range, cost, cfg.workers);
    AggregatedCostVolume aggregated;
    aggregate_all(cost, cfg.paths, {cfg.p1, cfg.p2, cfg.normalize}, aggregated, cfg.workers);
    return mirror_horizontal(wta(aggregated, cfg.workers));
}

// ---------------------------------------------------------------------------
// Median
// ---------------------------------------------------------------------------

/// First `passes` bubble-sort passes of the 9-wire sorting network. Each pass
/// carries the largest remaining value down to the end, so after five passes
/// positions 4..8 hold the five largest values in order and v[4] is the median.
template <typename T>
constexpr void bubble_passes(std::array<T, 9>& v, int passes = 5) noexcept {
    for (int pass = 0; pass < passes; ++pass) {
        for (int i = 0; i + 1 < 9 - pass; ++i) {
            const T lo = std::min(v[i], v[i + 1]);
            const T hi = std::max(v[i], v[i + 1]);
            v[i] = lo;
            v[i + 1] = hi;
        }
    }
}

template <typename T>
constexpr T median9(std::array<T, 9> v) noexcept {
    bubble_passes(v, 5);
    return v[4];
}

/// 3x3 median over valid pixels. Out-of-image and invalid neighbors enter the
/// network as +inf; if the median lands on one of them the pixel is dropped.
inline DisparityMap median3x3(const DisparityMap& disp, int workers = 1) {
    constexpr float kSentinel = std::numeric_limits<float>::infinity();
    const int w = disp.width();
    const int h = disp.height();
    DisparityMap out(w, h);
    for_each_stripe(h, workers, [&](RowRange rows) {
        std::array<float, 9> window{};
        for (int y = rows.begin; y < rows.end; ++y) {
            for (int x = 0; x < w; ++x) {
                if (!disp.is_valid(x, y)) continue;
                int k = 0;
                for (int dy = -1; dy <= 1; ++dy)
                    for (int dx = -1; dx <= 1; ++dx) {
                        const int nx = x + dx;
                        const int ny = y + dy;
                        const bool inside = nx >= 0 && nx < w && ny >= 0 && ny < h;
                        window[static_cast<std::size_t>(k++)] =
                            inside ? disp.get(nx, ny).value_or(kSentinel) : kSentinel;
                    }
                const float m = median9(window);
                if (m != kSentinel) out.set(x, y, m);
            }
        }
    });
    return out;
}

} // namespace stereo
