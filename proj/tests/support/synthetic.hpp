#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "stereo/core.hpp"

namespace stereo::synth {

inline GrayImage random_image(int w, int h, std::mt19937& rng, int lo = 0, int hi = 255) {
    std::uniform_int_distribution<int> dist(lo, hi);
    GrayImage img(w, h);
    for (auto& v : img.data()) v = static_cast<std::uint8_t>(dist(rng));
    return img;
}

/// Right view of a fronto-parallel scene at constant disparity k:
/// right(x, y) = left(x + k, y); columns without a source get fresh noise.
inline GrayImage shifted_right(const GrayImage& left, int k, std::mt19937& rng) {
    std::uniform_int_distribution<int> dist(0, 255);
    GrayImage right(left.width(), left.height());
    for (int y = 0; y < left.height(); ++y)
        for (int x = 0; x < left.width(); ++x)
            right(x, y) = x + k < left.width() ? left(x + k, y) : static_cast<std::uint8_t>(dist(rng));
    return right;
}

/// Random cost volume with cells in [0, max_cost].
inline CostVolume random_cost(int w, int h, DisparityRange range, std::mt19937& rng, int max_cost = 255) {
    std::uniform_int_distribution<int> dist(0, max_cost);
    CostVolume v(w, h, range);
    for (auto& c : v.cells()) c = static_cast<std::uint8_t>(dist(rng));
    return v;
}

inline AggregatedCostVolume random_aggregated(int w, int h, DisparityRange range, std::mt19937& rng,
                                              std::uint32_t max_cost = 1000) {
    std::uniform_int_distribution<std::uint32_t> dist(0, max_cost);
    AggregatedCostVolume v(w, h, range);
    for (auto& c : v.cells()) c = dist(rng);
    return v;
}

inline DisparityMap random_disparity(int w, int h, std::mt19937& rng, float max_d, double invalid_fraction) {
    std::uniform_real_distribution<float> val(0.0f, max_d);
    std::bernoulli_distribution drop(invalid_fraction);
    DisparityMap m(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            if (!drop(rng)) m.set(x, y, std::round(val(rng) * 4.0f) / 4.0f);
    return m;
}

inline DisparityMap map_from_rows(const std::vector<std::vector<std::optional<float>>>& rows) {
    DisparityMap m(static_cast<int>(rows.front().size()), static_cast<int>(rows.size()));
    for (int y = 0; y < m.height(); ++y)
        for (int x = 0; x < m.width(); ++x)
            if (auto v = rows[static_cast<std::size_t>(y)][static_cast<std::size_t>(x)]) m.set(x, y, *v);
    return m;
}

} // namespace stereo::synth
