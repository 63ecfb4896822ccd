#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace stereo {

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

/// Raised when a caller breaks a documented precondition (bad index, wrong dims).
class ContractViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Runtime failure that is not the caller's fault in the contract sense
/// (I/O, malformed files, empty metric denominators).
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// GrayImage
// ---------------------------------------------------------------------------

/// 8-bit rectified grayscale frame, row-major.
class GrayImage {
public:
    GrayImage() = default;

    GrayImage(int width, int height, std::uint8_t fill = 0)
        : GrayImage(width, height, std::vector<std::uint8_t>(checked_area(width, height), fill)) {}

    GrayImage(int width, int height, std::vector<std::uint8_t> data)
        : width_(width), height_(height), data_(std::move(data)) {
        if (data_.size() != checked_area(width, height))
            throw ContractViolation("GrayImage: data length does not match width x height");
    }

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    bool empty() const noexcept { return data_.empty(); }

    std::uint8_t operator()(int x, int y) const noexcept {
        return data_[static_cast<std::size_t>(y) * width_ + x];
    }
    std::uint8_t& operator()(int x, int y) noexcept {
        return data_[static_cast<std::size_t>(y) * width_ + x];
    }

    std::span<const std::uint8_t> data() const noexcept { return data_; }
    std::span<std::uint8_t> data() noexcept { return data_; }
    std::span<const std::uint8_t> row(int y) const noexcept {
        return std::span(data_).subspan(static_cast<std::size_t>(y) * width_, width_);
    }

    friend bool operator==(const GrayImage&, const GrayImage&) = default;

private:
    static std::size_t checked_area(int width, int height) {
        if (width < 1 || height < 1)
            throw ContractViolation("GrayImage: width and height must be >= 1");
        return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> data_;
};

/// Horizontal mirror; applying it twice is the identity.
inline GrayImage mirror_horizontal(const GrayImage& img) {
    GrayImage out(img.width(), img.height());
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x)
            out(img.width() - 1 - x, y) = img(x, y);
    return out;
}

// ---------------------------------------------------------------------------
// DisparityRange
// ---------------------------------------------------------------------------

inline constexpr int kMaxDisparityCount = 256;

/// Inclusive disparity search interval [min, max].
struct DisparityRange {
    int min = 0;
    int max = 0;

    constexpr int count() const noexcept { return max - min + 1; }
    constexpr bool contains(int d) const noexcept { return d >= min && d <= max; }
    constexpr bool is_valid() const noexcept {
        return min >= 0 && min <= max && count() <= kMaxDisparityCount;
    }

    friend constexpr bool operator==(DisparityRange, DisparityRange) = default;
};

// ---------------------------------------------------------------------------
// Volumes
// ---------------------------------------------------------------------------

struct VolumeDims {
    int width = 0;
    int height = 0;
    DisparityRange range;

    std::size_t cells() const noexcept {
        return static_cast<std::size_t>(width) * height * range.count();
    }
    friend constexpr bool operator==(const VolumeDims&, const VolumeDims&) = default;
};

/// Linear index of (x, y, d) in a (y, x, d) volume with d fastest-varying.
inline std::size_t cell_index(int x, int y, int d, const VolumeDims& dims) {
    if (x < 0 || x >= dims.width || y < 0 || y >= dims.height || !dims.range.contains(d))
        throw ContractViolation("cell_index: coordinate outside volume");
    const std::size_t n = static_cast<std::size_t>(dims.range.count());
    return (static_cast<std::size_t>(y) * dims.width + x) * n + static_cast<std::size_t>(d - dims.range.min);
}

/// Dense (y, x, d) volume. Rows of `count()` cells belong to one pixel.
template <typename Cell>
class Volume {
public:
    using cell_type = Cell;

    Volume() = default;
    explicit Volume(const VolumeDims& dims, Cell fill = Cell{}) : dims_(dims) {
        if (dims.width < 1 || dims.height < 1 || !dims.range.is_valid())
            throw ContractViolation("Volume: invalid dimensions");
        cells_.assign(dims.cells(), fill);
    }
    Volume(int width, int height, DisparityRange range, Cell fill = Cell{})
        : Volume(VolumeDims{width, height, range}, fill) {}

    const VolumeDims& dims() const noexcept { return dims_; }
    int width() const noexcept { return dims_.width; }
    int height() const noexcept { return dims_.height; }
    DisparityRange range() const noexcept { return dims_.range; }
    int disparities() const noexcept { return dims_.range.count(); }

    /// Checked access by absolute disparity.
    Cell at(int x, int y, int d) const { return cells_[cell_index(x, y, d, dims_)]; }
    Cell& at(int x, int y, int d) { return cells_[cell_index(x, y, d, dims_)]; }

    /// All disparity cells of one pixel, indexed by d - range().min.
    std::span<const Cell> pixel(int x, int y) const noexcept {
        return std::span(cells_).subspan(pixel_offset(x, y), disparities());
    }
    std::span<Cell> pixel(int x, int y) noexcept {
        return std::span(cells_).subspan(pixel_offset(x, y), disparities());
    }

    std::span<const Cell> cells() const noexcept { return cells_; }
    std::span<Cell> cells() noexcept { return cells_; }

    void fill(Cell value) { std::fill(cells_.begin(), cells_.end(), value); }

    /// Re-shapes in place, reusing the allocation when large enough.
    void reset(const VolumeDims& dims, Cell fill = Cell{}) {
        if (dims.width < 1 || dims.height < 1 || !dims.range.is_valid())
            throw ContractViolation("Volume: invalid dimensions");
        dims_ = dims;
        cells_.assign(dims.cells(), fill);
    }

    friend bool operator==(const Volume&, const Volume&) = default;

private:
    std::size_t pixel_offset(int x, int y) const noexcept {
        return (static_cast<std::size_t>(y) * dims_.width + x) * static_cast<std::size_t>(disparities());
    }

    VolumeDims dims_;
    std::vector<Cell> cells_;
};

/// Matching cost S(p, d); every cell <= kMaxCellCost.
using CostVolume = Volume<std::uint8_t>;
/// Sum of path costs; 32-bit accumulators.
using AggregatedCostVolume = Volume<std::uint32_t>;

inline constexpr std::uint8_t kMaxCellCost = 255;

// ---------------------------------------------------------------------------
// DisparityMap
// ---------------------------------------------------------------------------

/// Per-pixel disparity with an explicit validity flag. New maps are all invalid.
class DisparityMap {
public:
    DisparityMap() = default;
    DisparityMap(int width, int height) : width_(width), height_(height) {
        if (width < 1 || height < 1)
            throw ContractViolation("DisparityMap: width and height must be >= 1");
        const auto n = static_cast<std::size_t>(width) * height;
        values_.assign(n, 0.0f);
        valid_.assign(n, 0);
    }

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    std::size_t size() const noexcept { return values_.size(); }

    bool is_valid(int x, int y) const noexcept { return valid_[index(x, y)] != 0; }

    /// Value if the pixel holds an estimate.
    std::optional<float> get(int x, int y) const noexcept {
        const auto i = index(x, y);
        if (!valid_[i]) return std::nullopt;
        return values_[i];
    }

    void set(int x, int y, float value) noexcept {
        const auto i = index(x, y);
        values_[i] = value;
        valid_[i] = 1;
    }

    void invalidate(int x, int y) noexcept {
        const auto i = index(x, y);
        values_[i] = 0.0f;
        valid_[i] = 0;
    }

    // Bulk access for kernels. Values under a cleared flag are meaningless.
    std::span<const float> values() const noexcept { return values_; }
    std::span<float> values() noexcept { return values_; }
    std::span<const std::uint8_t> validity() const noexcept { return valid_; }
    std::span<std::uint8_t> validity() noexcept { return valid_; }

    std::size_t valid_count() const noexcept {
        std::size_t n = 0;
        for (auto v : valid_) n += v != 0;
        return n;
    }

    /// Same validity mask, same values on valid pixels (invalid payloads ignored).
    friend bool operator==(const DisparityMap& a, const DisparityMap& b) noexcept {
        if (a.width_ != b.width_ || a.height_ != b.height_ || a.valid_ != b.valid_) return false;
        for (std::size_t i = 0; i < a.values_.size(); ++i)
            if (a.valid_[i] && a.values_[i] != b.values_[i]) return false;
        return true;
    }

private:
    std::size_t index(int x, int y) const noexcept { return static_cast<std::size_t>(y) * width_ + x; }

    int width_ = 0;
    int height_ = 0;
    std::vector<float> values_;
    std::vector<std::uint8_t> valid_;
};

inline DisparityMap mirror_horizontal(const DisparityMap& map) {
    DisparityMap out(map.width(), map.height());
    for (int y = 0; y < map.height(); ++y)
        for (int x = 0; x < map.width(); ++x)
            if (auto v = map.get(x, y)) out.set(map.width() - 1 - x, y, *v);
    return out;
}

// ---------------------------------------------------------------------------
// PipelineConfig
// ---------------------------------------------------------------------------

enum class CostFunction { census5x5, census9x7, ncc5x5, ncc9x9 };
enum class Consistency { off, approximate, exact };

struct WindowSize {
    int width;
    int height;
    int radius_x() const noexcept { return width / 2; }
    int radius_y() const noexcept { return height / 2; }
};

constexpr WindowSize window_size(CostFunction f) noexcept {
    switch (f) {
    case CostFunction::census5x5: return {5, 5};
    case CostFunction::census9x7: return {9, 7};
    case CostFunction::ncc5x5: return {5, 5};
    case CostFunction::ncc9x9: return {9, 9};
    }
    return {0, 0};
}

constexpr bool is_census(CostFunction f) noexcept {
    return f == CostFunction::census5x5 || f == CostFunction::census9x7;
}

struct Penalties {
    std::uint32_t p1;
    std::uint32_t p2;
};

/// Tuned SGM penalties per cost function. NCC values are on the 0..255 cell scale.
constexpr Penalties default_penalties(CostFunction f) noexcept {
    switch (f) {
    case CostFunction::census9x7: return {27, 86};
    case CostFunction::census5x5: return {11, 39};
    case CostFunction::ncc5x5:
    case CostFunction::ncc9x9: return {23, 224};
    }
    return {27, 86};
}

struct PipelineConfig {
    CostFunction cost_function = CostFunction::census9x7;
    DisparityRange range{0, 127};
    std::uint32_t p1 = 27;
    std::uint32_t p2 = 86;
    int paths = 8;
    bool normalize = true;
    bool subpixel = true;
    Consistency consistency = Consistency::approximate;
    float consistency_threshold = 1.0f;
    bool median = true;
    int workers = 1;

    /// Defaults with the penalties tuned for `f`.
    static PipelineConfig for_cost(CostFunction f, DisparityRange range = {0, 127}) {
        PipelineConfig cfg;
        cfg.cost_function = f;
        cfg.range = range;
        const auto pen = default_penalties(f);
        cfg.p1 = pen.p1;
        cfg.p2 = pen.p2;
        return cfg;
    }
};

enum class ConfigIssue {
    dimension_mismatch,
    empty_image,
    invalid_range,
    range_too_large,
    penalty_order,
    window_exceeds_image,
    invalid_paths,
    invalid_workers,
    invalid_threshold,
};

inline const char* to_string(ConfigIssue issue) noexcept {
    switch (issue) {
    case ConfigIssue::dimension_mismatch: return "left and right images differ in size";
    case ConfigIssue::empty_image: return "input image is empty";
    case ConfigIssue::invalid_range: return "disparity range must satisfy 0 <= min <= max";
    case ConfigIssue::range_too_large: return "disparity range exceeds 256 values";
    case ConfigIssue::penalty_order: return "penalties must satisfy 0 < p1 < p2";
    case ConfigIssue::window_exceeds_image: return "image is smaller than the matching window";
    case ConfigIssue::invalid_paths: return "path count must be 4 or 8";
    case ConfigIssue::invalid_workers: return "worker count must be >= 1";
    case ConfigIssue::invalid_threshold: return "consistency threshold must be >= 0";
    }
    return "unknown";
}

class ConfigError : public ContractViolation {
public:
    explicit ConfigError(std::vector<ConfigIssue> issues)
        : ContractViolation(describe(issues)), issues_(std::move(issues)) {}

    const std::vector<ConfigIssue>& issues() const noexcept { return issues_; }

private:
    static std::string describe(const std::vector<ConfigIssue>& issues) {
        std::string msg = "invalid configuration:";
        for (auto i : issues) {
            msg += ' ';
            msg += to_string(i);
            msg += ';';
        }
        return msg;
    }
    std::vector<ConfigIssue> issues_;
};

/// Issues detectable without the images.
inline std::vector<ConfigIssue> validate_parameters(const PipelineConfig& cfg) {
    std::vector<ConfigIssue> issues;
    if (cfg.range.min < 0 || cfg.range.min > cfg.range.max)
        issues.push_back(ConfigIssue::invalid_range);
    else if (cfg.range.count() > kMaxDisparityCount)
        issues.push_back(ConfigIssue::range_too_large);
    if (cfg.p1 == 0 || cfg.p1 >= cfg.p2) issues.push_back(ConfigIssue::penalty_order);
    if (cfg.paths != 4 && cfg.paths != 8) issues.push_back(ConfigIssue::invalid_paths);
    if (cfg.workers < 1) issues.push_back(ConfigIssue::invalid_workers);
    if (!(cfg.consistency_threshold >= 0.0f)) issues.push_back(ConfigIssue::invalid_threshold);
    return issues;
}

/// Every reason the config cannot run on this pair; empty means ok.
inline std::vector<ConfigIssue> validate_config(const PipelineConfig& cfg, const GrayImage& left,
                                                const GrayImage& right) {
    std::vector<ConfigIssue> issues;
    if (left.empty() || right.empty()) {
        issues.push_back(ConfigIssue::empty_image);
    } else {
        if (left.width() != right.width() || left.height() != right.height())
            issues.push_back(ConfigIssue::dimension_mismatch);
        const auto win = window_size(cfg.cost_function);
        if (left.width() < win.width || left.height() < win.height || right.width() < win.width ||
            right.height() < win.height)
            issues.push_back(ConfigIssue::window_exceeds_image);
    }
    const auto rest = validate_parameters(cfg);
    issues.insert(issues.end(), rest.begin(), rest.end());
    return issues;
}

inline void require_valid(const PipelineConfig& cfg, const GrayImage& left, const GrayImage& right) {
    auto issues = validate_config(cfg, left, right);
    if (!issues.empty()) throw ConfigError(std::move(issues));
}

} // namespace stereo
