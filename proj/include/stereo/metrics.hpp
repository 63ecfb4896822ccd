#pragma once

// Benchmark figures: KITTI-style D1-all, Middlebury-style bad-theta, density,
// background interpolation for the dense ("All") variant, up-scaling of
// low-resolution estimates, and throughput (MDE/s, FPS, FPS/W).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

#include "stereo/core.hpp"

namespace stereo {

enum class Variant { est, all };

/// count / total, with both parts kept so other denominators can be derived.
struct Ratio {
    std::size_t count = 0;
    std::size_t total = 0;

    double value() const noexcept { return total == 0 ? 0.0 : static_cast<double>(count) / static_cast<double>(total); }
};

inline constexpr std::array<double, 4> kBadThresholds{0.5, 1.0, 2.0, 4.0};

struct EvalReport {
    Ratio d1_all_est;
    Ratio d1_all_all;
    std::array<Ratio, 4> bad; // indexed like kBadThresholds
    Ratio density;
    std::size_t gt_pixels = 0;
};

namespace detail {

inline void check_same_size(const DisparityMap& est, const DisparityMap& gt) {
    if (est.width() != gt.width() || est.height() != gt.height())
        throw ContractViolation("metrics: estimate and ground truth differ in size");
}

template <typename IsError>
Ratio error_ratio(const DisparityMap& est, const DisparityMap& gt, IsError&& is_error) {
    check_same_size(est, gt);
    Ratio r;
    const auto ev = est.values();
    const auto eok = est.validity();
    const auto gv = gt.values();
    const auto gok = gt.validity();
    for (std::size_t i = 0; i < gv.size(); ++i) {
        if (!gok[i] || !eok[i]) continue;
        ++r.total;
        if (is_error(std::fabs(static_cast<double>(ev[i]) - static_cast<double>(gv[i])))) ++r.count;
    }
    if (r.total == 0) throw Error("metrics: no pixel has both ground truth and an estimate");
    return r;
}

} // namespace detail

/// Fills every invalid pixel. Within a row each invalid run takes the smaller
/// (background) of its two valid neighbors, or the only one at a row end.
/// Rows without any estimate copy the nearest filled row (upper on ties).
inline DisparityMap background_interpolate(const DisparityMap& est) {
    const int w = est.width();
    const int h = est.height();
    if (est.valid_count() == 0) throw Error("background_interpolate: map has no valid pixel");

    DisparityMap out(w, h);
    std::vector<bool> row_done(static_cast<std::size_t>(h), false);
    for (int y = 0; y < h; ++y) {
        int last = -1;
        for (int x = 0; x <= w; ++x) {
            if (x < w && !est.is_valid(x, y)) continue;
            // [last + 1, x) is an invalid run
            if (x < w) out.set(x, y, *est.get(x, y));
            if (x > last + 1) {
                std::optional<float> fill;
                if (last >= 0 && x < w)
                    fill = std::min(*est.get(last, y), *est.get(x, y));
                else if (last >= 0)
                    fill = *est.get(last, y);
                else if (x < w)
                    fill = *est.get(x, y);
                if (fill)
                    for (int i = last + 1; i < x; ++i) out.set(i, y, *fill);
            }
            if (x < w) {
                last = x;
                row_done[static_cast<std::size_t>(y)] = true;
            }
        }
    }
    for (int y = 0; y < h; ++y) {
        if (row_done[static_cast<std::size_t>(y)]) continue;
        for (int dist = 1;; ++dist) {
            int src = -1;
            if (y - dist >= 0 && row_done[static_cast<std::size_t>(y - dist)]) src = y - dist;
            else if (y + dist < h && row_done[static_cast<std::size_t>(y + dist)]) src = y + dist;
            if (src >= 0) {
                for (int x = 0; x < w; ++x) out.set(x, y, *out.get(x, src));
                break;
            }
        }
    }
    return out;
}

/// Fraction of evaluated pixels with |d - gt| >= 3.
inline Ratio d1_all(const DisparityMap& est, const DisparityMap& gt, Variant variant) {
    const auto is_error = [](double err) { return err >= 3.0; };
    if (variant == Variant::est) return detail::error_ratio(est, gt, is_error);
    detail::check_same_size(est, gt);
    if (gt.valid_count() == 0) throw Error("d1_all: ground truth has no valid pixel");
    return detail::error_ratio(background_interpolate(est), gt, is_error);
}

/// Fraction of evaluated pixels with |d - gt| > theta.
inline Ratio bad_theta(const DisparityMap& est, const DisparityMap& gt, double theta) {
    return detail::error_ratio(est, gt, [theta](double err) { return err > theta; });
}

inline Ratio density(const DisparityMap& est) { return {est.valid_count(), est.size()}; }

/// All figures at once. Est-variant denominators exclude pixels without an
/// estimate; the density says how many those are.
inline EvalReport evaluate(const DisparityMap& est, const DisparityMap& gt) {
    detail::check_same_size(est, gt);
    EvalReport r;
    r.gt_pixels = gt.valid_count();
    r.density = density(est);
    r.d1_all_all = d1_all(est, gt, Variant::all);
    r.d1_all_est = d1_all(est, gt, Variant::est);
    for (std::size_t i = 0; i < kBadThresholds.size(); ++i) r.bad[i] = bad_theta(est, gt, kBadThresholds[i]);
    return r;
}

/// Nearest-neighbor upsampling by an integer factor; disparities scale along.
inline DisparityMap rescale_disparity(const DisparityMap& est, int scale) {
    if (scale < 1) throw ContractViolation("rescale_disparity: scale must be >= 1");
    DisparityMap out(est.width() * scale, est.height() * scale);
    for (int y = 0; y < out.height(); ++y)
        for (int x = 0; x < out.width(); ++x)
            if (auto v = est.get(x / scale, y / scale)) out.set(x, y, *v * static_cast<float>(scale));
    return out;
}

/// Million disparity estimations per second: W * H * |range| / runtime / 1e6.
inline double throughput_mde_s(int width, int height, int disparities, double runtime_s) {
    if (!(runtime_s > 0.0)) throw ContractViolation("throughput_mde_s: runtime must be positive");
    const double work = static_cast<double>(width) * height * disparities;
    return work / runtime_s / 1e6;
}

inline double expected_fps(double mde_per_s, int width, int height, int disparities) {
    if (width < 1 || height < 1 || disparities < 1)
        throw ContractViolation("expected_fps: dimensions must be positive");
    return mde_per_s * 1e6 / (static_cast<double>(width) * height * disparities);
}

inline double fps_per_watt(double fps, double watts) {
    if (!(watts > 0.0)) throw ContractViolation("fps_per_watt: watts must be positive");
    return fps / watts;
}

} // namespace stereo
