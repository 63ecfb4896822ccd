#pragma once

// Matching-cost computation: census transform + Hamming distance, and the
// inverted/truncated zero-mean NCC. Both use the same zero-margin border
// policy: samples outside the image read as intensity 0.

#include <bit>
#include <cmath>
#include <cstdint>
#include <vector>

#include "stereo/core.hpp"
#include "stereo/parallel.hpp"

namespace stereo {

// ---------------------------------------------------------------------------
// Census
// ---------------------------------------------------------------------------

enum class CensusWindow { w5x5, w9x7 };

constexpr WindowSize census_window_size(CensusWindow w) noexcept {
    return w == CensusWindow::w5x5 ? WindowSize{5, 5} : WindowSize{9, 7};
}

/// Descriptor length: window area without the center pixel (24 or 62).
constexpr int census_bits(CensusWindow w) noexcept {
    const auto s = census_window_size(w);
    return s.width * s.height - 1;
}

/// Per-pixel census descriptors.
///
/// Bit k is set iff the k-th neighbor, counting the window in raster order
/// (top-left to bottom-right) with the center skipped, is strictly darker
/// than the center. Bits at and above census_bits() are always zero.
class CensusImage {
public:
    CensusImage() = default;
    CensusImage(int width, int height, CensusWindow window)
        : width_(width), height_(height), window_(window),
          descriptors_(static_cast<std::size_t>(width) * height, 0) {}

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    CensusWindow window() const noexcept { return window_; }

    std::uint64_t operator()(int x, int y) const noexcept {
        return descriptors_[static_cast<std::size_t>(y) * width_ + x];
    }
    std::uint64_t& operator()(int x, int y) noexcept {
        return descriptors_[static_cast<std::size_t>(y) * width_ + x];
    }
    std::span<const std::uint64_t> descriptors() const noexcept { return descriptors_; }

    friend bool operator==(const CensusImage&, const CensusImage&) = default;

private:
    int width_ = 0;
    int height_ = 0;
    CensusWindow window_ = CensusWindow::w9x7;
    std::vector<std::uint64_t> descriptors_;
};

namespace detail {

/// Copy of `img` surrounded by a zero margin of (rx, ry).
struct PaddedImage {
    int rx, ry, stride;
    std::vector<std::uint8_t> data;

    PaddedImage(const GrayImage& img, int rx_, int ry_)
        : rx(rx_), ry(ry_), stride(img.width() + 2 * rx_),
          data(static_cast<std::size_t>(stride) * (img.height() + 2 * ry_), 0) {
        for (int y = 0; y < img.height(); ++y) {
            const auto src = img.row(y);
            std::copy(src.begin(), src.end(), data.begin() + static_cast<std::ptrdiff_t>(y + ry) * stride + rx);
        }
    }
    // (x, y) in image coordinates, may reach into the margin
    const std::uint8_t* at(int x, int y) const noexcept {
        return data.data() + static_cast<std::ptrdiff_t>(y + ry) * stride + (x + rx);
    }
};

} // namespace detail

inline CensusImage census_transform(const GrayImage& img, CensusWindow window, int workers = 1) {
    const auto win = census_window_size(window);
    if (img.width() < win.width || img.height() < win.height)
        throw ContractViolation("census_transform: window larger than image");
    const int rx = win.radius_x();
    const int ry = win.radius_y();
    const detail::PaddedImage padded(img, rx, ry);

    CensusImage out(img.width(), img.height(), window);
    for_each_stripe(img.height(), workers, [&](RowRange rows) {
        for (int y = rows.begin; y < rows.end; ++y) {
            for (int x = 0; x < img.width(); ++x) {
                const std::uint8_t center = img(x, y);
                std::uint64_t desc = 0;
                int bit = 0;
                for (int dy = -ry; dy <= ry; ++dy) {
                    const std::uint8_t* row = padded.at(x, y + dy);
                    for (int dx = -rx; dx <= rx; ++dx) {
                        if (dx == 0 && dy == 0) continue;
                        desc |= static_cast<std::uint64_t>(row[dx] < center) << bit;
                        ++bit;
                    }
                }
                out(x, y) = desc;
            }
        }
    });
    return out;
}

inline std::uint8_t hamming_distance(std::uint64_t a, std::uint64_t b) noexcept {
    return static_cast<std::uint8_t>(std::popcount(a ^ b));
}

/// S(p, d) = popcount(CT_L(x, y) ^ CT_R(x - d, y)); cells with x - d < 0 hold
/// kMaxCellCost.
inline void hamming_cost_volume(const CensusImage& left, const CensusImage& right, DisparityRange range,
                                CostVolume& out, int workers = 1) {
    if (left.width() != right.width() || left.height() != right.height())
        throw ContractViolation("hamming_cost_volume: census images differ in size");
    if (left.window() != right.window())
        throw ContractViolation("hamming_cost_volume: census windows differ");
    if (!range.is_valid()) throw ContractViolation("hamming_cost_volume: invalid disparity range");

    out.reset({left.width(), left.height(), range});
    const int n = range.count();
    for_each_stripe(left.height(), workers, [&](RowRange rows) {
        for (int y = rows.begin; y < rows.end; ++y) {
            for (int x = 0; x < left.width(); ++x) {
                const auto ref = left(x, y);
                auto cells = out.pixel(x, y);
                for (int i = 0; i < n; ++i) {
                    const int xr = x - (range.min + i);
                    cells[i] = xr < 0 ? kMaxCellCost : hamming_distance(ref, right(xr, y));
                }
            }
        }
    });
}

inline CostVolume hamming_cost_volume(const CensusImage& left, const CensusImage& right, DisparityRange range,
                                      int workers = 1) {
    CostVolume out;
    hamming_cost_volume(left, right, range, out, workers);
    return out;
}

// ---------------------------------------------------------------------------
// NCC
// ---------------------------------------------------------------------------

enum class NccPatch { p5x5, p9x9 };

constexpr WindowSize ncc_patch_size(NccPatch p) noexcept {
    return p == NccPatch::p5x5 ? WindowSize{5, 5} : WindowSize{9, 9};
}

/// Integer patch moments; zero-margin samples count towards the patch area.
struct PatchStats {
    std::int64_t sum = 0;
    std::int64_t sum_sq = 0;
    std::uint8_t center = 0;

    friend bool operator==(const PatchStats&, const PatchStats&) = default;
};

class PatchStatsImage {
public:
    PatchStatsImage() = default;
    PatchStatsImage(int width, int height, NccPatch patch)
        : width_(width), height_(height), patch_(patch), stats_(static_cast<std::size_t>(width) * height) {}

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    NccPatch patch() const noexcept { return patch_; }
    int area() const noexcept {
        const auto s = ncc_patch_size(patch_);
        return s.width * s.height;
    }

    const PatchStats& operator()(int x, int y) const noexcept {
        return stats_[static_cast<std::size_t>(y) * width_ + x];
    }
    PatchStats& operator()(int x, int y) noexcept { return stats_[static_cast<std::size_t>(y) * width_ + x]; }

    double mean(int x, int y) const noexcept {
        return static_cast<double>((*this)(x, y).sum) / area();
    }
    /// Population variance.
    double variance(int x, int y) const noexcept {
        return static_cast<double>(centered_sum_sq(x, y)) / (static_cast<double>(area()) * area());
    }
    /// n * sum(v^2) - sum(v)^2, i.e. n^2 times the population variance. Exact.
    std::int64_t centered_sum_sq(int x, int y) const noexcept {
        const auto& s = (*this)(x, y);
        return area() * s.sum_sq - s.sum * s.sum;
    }

    friend bool operator==(const PatchStatsImage&, const PatchStatsImage&) = default;

private:
    int width_ = 0;
    int height_ = 0;
    NccPatch patch_ = NccPatch::p5x5;
    std::vector<PatchStats> stats_;
};

inline PatchStatsImage patch_stats(const GrayImage& img, NccPatch patch, int workers = 1) {
    const auto win = ncc_patch_size(patch);
    if (img.width() < win.width || img.height() < win.height)
        throw ContractViolation("patch_stats: patch larger than image");
    const int rx = win.radius_x();
    const int ry = win.radius_y();
    const detail::PaddedImage padded(img, rx, ry);

    PatchStatsImage out(img.width(), img.height(), patch);
    for_each_stripe(img.height(), workers, [&](RowRange rows) {
        for (int y = rows.begin; y < rows.end; ++y) {
            for (int x = 0; x < img.width(); ++x) {
                PatchStats s;
                for (int dy = -ry; dy <= ry; ++dy) {
                    const std::uint8_t* row = padded.at(x, y + dy);
                    for (int dx = -rx; dx <= rx; ++dx) {
                        const std::int64_t v = row[dx];
                        s.sum += v;
                        s.sum_sq += v * v;
                    }
                }
                s.center = img(x, y);
                out(x, y) = s;
            }
        }
    });
    return out;
}

/// Quantized inverted/truncated NCC cost from exact integer moments.
///
///   phi  = (n*sum(LR) - sum(L)*sum(R)) / sqrt((n*sum(L^2) - sum(L)^2) * (n*sum(R^2) - sum(R)^2))
///   s    = 1 - max(0, phi)
///   cell = round(255 * s)
///
/// A patch without variance has phi = 0, i.e. the maximal cost.
inline std::uint8_t ncc_cell_cost(std::int64_t cross, std::int64_t var_left, std::int64_t var_right) noexcept {
    if (var_left <= 0 || var_right <= 0) return kMaxCellCost;
    double phi = static_cast<double>(cross) /
                 std::sqrt(static_cast<double>(var_left) * static_cast<double>(var_right));
    phi = std::min(phi, 1.0);
    const double s = 1.0 - std::max(0.0, phi);
    return static_cast<std::uint8_t>(std::lround(255.0 * s));
}

/// Cost volume of the inverted/truncated NCC. Cross terms are box sums of
/// per-disparity products L(u, v) * R(u - d, v), zero outside the image.
inline void ncc_cost_volume(const PatchStatsImage& stats_left, const PatchStatsImage& stats_right,
                            const GrayImage& left, const GrayImage& right, DisparityRange range, CostVolume& out,
                            int workers = 1) {
    const int w = left.width();
    const int h = left.height();
    if (right.width() != w || right.height() != h || stats_left.width() != w || stats_left.height() != h ||
        stats_right.width() != w || stats_right.height() != h)
        throw ContractViolation("ncc_cost_volume: inconsistent dimensions");
    if (stats_left.patch() != stats_right.patch())
        throw ContractViolation("ncc_cost_volume: patch sizes differ");
    if (!range.is_valid()) throw ContractViolation("ncc_cost_volume: invalid disparity range");

    const auto win = ncc_patch_size(stats_left.patch());
    const int rx = win.radius_x();
    const int ry = win.radius_y();
    const std::int64_t area = win.width * win.height;
    const int n = range.count();
    out.reset({w, h, range});

    const detail::PaddedImage pl(left, rx, ry);
    const detail::PaddedImage pr(right, rx, ry);

    for_each_stripe(h, workers, [&](RowRange rows) {
        // column sums of products over the patch rows, one entry per padded column
        std::vector<std::int64_t> column(static_cast<std::size_t>(w + 2 * rx));
        for (int y = rows.begin; y < rows.end; ++y) {
            for (int i = 0; i < n; ++i) {
                const int d = range.min + i;
                for (int u = -rx; u < w + rx; ++u) {
                    // right samples left of the padded margin are zero as well
                    std::int64_t acc = 0;
                    const int ur = u - d;
                    if (ur >= -rx)
                        for (int dy = -ry; dy <= ry; ++dy)
                            acc += static_cast<std::int64_t>(*pl.at(u, y + dy)) * *pr.at(ur, y + dy);
                    column[static_cast<std::size_t>(u + rx)] = acc;
                }
                std::int64_t box = 0;
                for (int u = -rx; u <= rx; ++u) box += column[static_cast<std::size_t>(u + rx)];
                for (int x = 0; x < w; ++x) {
                    if (x > 0)
                        box += column[static_cast<std::size_t>(x + 2 * rx)] -
                               column[static_cast<std::size_t>(x - 1)];
                    auto& cell = out.pixel(x, y)[static_cast<std::size_t>(i)];
                    const int xr = x - d;
                    if (xr < 0) {
                        cell = kMaxCellCost;
                        continue;
                    }
                    const auto& sl = stats_left(x, y);
                    const auto& sr = stats_right(xr, y);
                    const std::int64_t cross = area * box - sl.sum * sr.sum;
                    cell = ncc_cell_cost(cross, stats_left.centered_sum_sq(x, y), stats_right.centered_sum_sq(xr, y));
                }
            }
        }
    });
}

inline CostVolume ncc_cost_volume(const PatchStatsImage& stats_left, const PatchStatsImage& stats_right,
                                  const GrayImage& left, const GrayImage& right, DisparityRange range,
                                  int workers = 1) {
    CostVolume out;
    ncc_cost_volume(stats_left, stats_right, left, right, range, out, workers);
    return out;
}

// ---------------------------------------------------------------------------
// Dispatch
// ---------------------------------------------------------------------------

/// Cost volume of `left` against `right` for the configured cost function.
inline void compute_cost_volume(const GrayImage& left, const GrayImage& right, CostFunction function,
                                DisparityRange range, CostVolume& out, int workers = 1) {
    switch (function) {
    case CostFunction::census5x5:
    case CostFunction::census9x7: {
        const auto window = function == CostFunction::census5x5 ? CensusWindow::w5x5 : CensusWindow::w9x7;
        hamming_cost_volume(census_transform(left, window, workers), census_transform(right, window, workers),
                            range, out, workers);
        return;
    }
    case CostFunction::ncc5x5:
    case CostFunction::ncc9x9: {
        const auto patch = function == CostFunction::ncc5x5 ? NccPatch::p5x5 : NccPatch::p9x9;
        ncc_cost_volume(patch_stats(left, patch, workers), patch_stats(right, patch, workers), left, right, range,
                        out, workers);
        return;
    }
    }
}

} // namespace stereo
