#pragma once

#include <chrono>
#include <utility>

#include "stereo/core.hpp"
#include "stereo/matching.hpp"
#include "stereo/metrics.hpp"
#include "stereo/postproc.hpp"
#include "stereo/sgm.hpp"

namespace stereo {

struct PipelineStats {
    double time_cost_s = 0.0;
    double time_aggregate_s = 0.0; // path aggregation and WTA
    double time_post_s = 0.0;
    double time_total_s = 0.0;
    int width = 0;
    int height = 0;
    int disparities = 0;

    double mde_per_s() const { return throughput_mde_s(width, height, disparities, time_total_s); }
    double fps() const { return expected_fps(mde_per_s(), width, height, disparities); }
};

/// Buffers reused across estimate() calls. One caller at a time.
struct Workspace {
    CostVolume cost;
    AggregatedCostVolume aggregated;
};

namespace detail {
using Clock = std::chrono::steady_clock;

inline double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}
} // namespace detail

/// Full disparity pipeline for the left image.
///
/// Stages other than aggregation split the image into row stripes, one per
/// worker; aggregation splits each direction into whole lines. Workers join
/// between stages, and the result does not depend on cfg.workers.
inline std::pair<DisparityMap, PipelineStats> estimate(const GrayImage& left, const GrayImage& right,
                                                       const PipelineConfig& cfg, Workspace& ws) {
    require_valid(cfg, left, right);
    using detail::Clock;
    PipelineStats stats;
    stats.width = left.width();
    stats.height = left.height();
    stats.disparities = cfg.range.count();

    const auto t_start = Clock::now();
    compute_cost_volume(left, right, cfg.cost_function, cfg.range, ws.cost, cfg.workers);
    stats.time_cost_s = detail::seconds_since(t_start);

    const auto t_agg = Clock::now();
    aggregate_all(ws.cost, cfg.paths, {cfg.p1, cfg.p2, cfg.normalize}, ws.aggregated, cfg.workers);
    DisparityMap disp = wta(ws.aggregated, cfg.workers);
    stats.time_aggregate_s = detail::seconds_since(t_agg);

    const auto t_post = Clock::now();
    if (cfg.subpixel) disp = subpixel_refine(disp, ws.aggregated, cfg.workers);
    switch (cfg.consistency) {
    case Consistency::off: break;
    case Consistency::approximate:
        disp = consistency_check(disp, approx_right_disparity(ws.aggregated, cfg.workers), cfg.consistency_threshold,
                                 cfg.workers);
        break;
    case Consistency::exact:
        disp = consistency_check(disp, exact_right_disparity(left, right, cfg), cfg.consistency_threshold,
                                 cfg.workers);
        break;
    }
    if (cfg.median) disp = median3x3(disp, cfg.workers);
    stats.time_post_s = detail::seconds_since(t_post);

    stats.time_total_s = detail::seconds_since(t_start);
    return {std::move(disp), stats};
}

inline std::pair<DisparityMap, PipelineStats> estimate(const GrayImage& left, const GrayImage& right,
                                                       const PipelineConfig& cfg) {
    Workspace ws;
    return estimate(left, right, cfg, ws);
}

} // namespace stereo
