#pragma once

// Binary PGM (P5, 8- and 16-bit) and grayscale PFM (Pf) containers, plus the
// two dataset layouts understood by the benchmark tooling.
//
// Disparity encodings:
//   fixed256_16bit  16-bit P5, sample = round(256 * d), 0 = no estimate
//   float_map       PFM, little-endian (negative scale), +inf = no estimate

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "stereo/core.hpp"

namespace stereo {

enum class DisparityEncoding { fixed256_16bit, float_map };

/// Largest disparity representable with fixed256_16bit.
inline constexpr double kMaxFixed256 = 65535.0 / 256.0;

namespace detail {

inline std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path.string() + "'");
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(const std::filesystem::path& path, const std::string& header,
                       const std::vector<std::uint8_t>& payload) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open '" + path.string() + "' for writing");
    out.write(header.data(), static_cast<std::streamsize>(header.size()));
    out.write(reinterpret_cast<const char*>(payload.data()), static_cast<std::streamsize>(payload.size()));
    if (!out) throw Error("write failed for '" + path.string() + "'");
}

/// Netpbm header tokenizer: whitespace separated, '#' comments to end of line.
class HeaderReader {
public:
    HeaderReader(const std::vector<std::uint8_t>& bytes, std::string source)
        : bytes_(bytes), source_(std::move(source)) {}

    std::string token() {
        skip_space_and_comments();
        std::string tok;
        while (pos_ < bytes_.size() && !std::isspace(bytes_[pos_]) && bytes_[pos_] != '#')
            tok.push_back(static_cast<char>(bytes_[pos_++]));
        if (tok.empty()) fail("unexpected end of header");
        return tok;
    }

    long number(long lo, long hi) {
        const auto tok = token();
        if (tok.size() > 9 || !std::all_of(tok.begin(), tok.end(), [](char c) { return c >= '0' && c <= '9'; }))
            fail("expected a number, got '" + tok + "'");
        const long v = std::stol(tok);
        if (v < lo || v > hi) fail("header value " + tok + " out of range");
        return v;
    }

    /// Exactly one whitespace byte separates the header from the raster.
    std::size_t raster_offset() {
        if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) fail("missing separator before raster");
        return pos_ + 1;
    }

    /// PFM header lines are newline-terminated rather than token-separated.
    std::string line() {
        std::string out;
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') out.push_back(static_cast<char>(bytes_[pos_++]));
        if (pos_ >= bytes_.size()) fail("unexpected end of header");
        ++pos_;
        return out;
    }
    std::size_t position() const noexcept { return pos_; }

    [[noreturn]] void fail(const std::string& what) const { throw Error("malformed '" + source_ + "': " + what); }

private:
    void skip_space_and_comments() {
        while (pos_ < bytes_.size()) {
            if (std::isspace(bytes_[pos_])) {
                ++pos_;
            } else if (bytes_[pos_] == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
            } else {
                break;
            }
        }
    }

    const std::vector<std::uint8_t>& bytes_;
    std::string source_;
    std::size_t pos_ = 0;
};

struct PgmRaster {
    int width = 0;
    int height = 0;
    int maxval = 0;
    std::vector<std::uint16_t> samples;
};

inline PgmRaster parse_pgm(const std::vector<std::uint8_t>& bytes, const std::string& source) {
    HeaderReader header(bytes, source);
    if (bytes.size() < 2 || bytes[0] != 'P') header.fail("not a Netpbm file");
    const auto magic = header.token();
    if (magic != "P5") throw Error("unsupported format '" + magic + "' in '" + source + "' (expected binary P5)");
    PgmRaster r;
    r.width = static_cast<int>(header.number(1, 1 << 20));
    r.height = static_cast<int>(header.number(1, 1 << 20));
    r.maxval = static_cast<int>(header.number(1, 65535));
    const std::size_t offset = header.raster_offset();
    const std::size_t bytes_per_sample = r.maxval > 255 ? 2 : 1;
    const std::size_t n = static_cast<std::size_t>(r.width) * r.height;
    if (bytes.size() - offset < n * bytes_per_sample) header.fail("truncated raster");
    r.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t at = offset + i * bytes_per_sample;
        r.samples[i] = bytes_per_sample == 2 ? static_cast<std::uint16_t>((bytes[at] << 8) | bytes[at + 1])
                                             : bytes[at];
    }
    return r;
}

inline std::uint32_t to_little_endian(std::uint32_t v) noexcept {
    if constexpr (std::endian::native == std::endian::big)
        v = ((v & 0xFFu) << 24) | ((v & 0xFF00u) << 8) | ((v >> 8) & 0xFF00u) | (v >> 24);
    return v;
}

} // namespace detail

/// Parses an 8-bit binary PGM held in memory.
inline GrayImage decode_gray_pgm(const std::vector<std::uint8_t>& bytes, const std::string& source = "<memory>") {
    const auto r = detail::parse_pgm(bytes, source);
    if (r.maxval != 255)
        throw Error("unsupported maxval " + std::to_string(r.maxval) + " in '" + source + "' (expected 255)");
    std::vector<std::uint8_t> data(r.samples.begin(), r.samples.end());
    return GrayImage(r.width, r.height, std::move(data));
}

inline GrayImage read_gray(const std::filesystem::path& path) {
    return decode_gray_pgm(detail::read_file(path), path.string());
}

inline void write_gray(const GrayImage& img, const std::filesystem::path& path) {
    const std::string header = "P5\n" + std::to_string(img.width()) + " " + std::to_string(img.height()) + "\n255\n";
    detail::write_file(path, header, {img.data().begin(), img.data().end()});
}

inline std::uint16_t encode_fixed256(float d) {
    if (!(d >= 0.0f) || d > kMaxFixed256)
        throw ContractViolation("fixed256: disparity " + std::to_string(d) + " outside [0, 255.996]");
    // a valid estimate must not collide with the "no estimate" sample
    return static_cast<std::uint16_t>(std::max(1L, std::lround(static_cast<double>(d) * 256.0)));
}

inline void write_disparity(const DisparityMap& map, const std::filesystem::path& path, DisparityEncoding enc) {
    const auto values = map.values();
    const auto valid = map.validity();
    if (enc == DisparityEncoding::fixed256_16bit) {
        std::vector<std::uint8_t> payload(values.size() * 2);
        for (std::size_t i = 0; i < values.size(); ++i) {
            const std::uint16_t s = valid[i] ? encode_fixed256(values[i]) : 0;
            payload[2 * i] = static_cast<std::uint8_t>(s >> 8);
            payload[2 * i + 1] = static_cast<std::uint8_t>(s & 0xFF);
        }
        const std::string header =
            "P5\n" + std::to_string(map.width()) + " " + std::to_string(map.height()) + "\n65535\n";
        detail::write_file(path, header, payload);
        return;
    }

    // PFM stores rows bottom to top.
    const std::string header = "Pf\n" + std::to_string(map.width()) + " " + std::to_string(map.height()) + "\n-1.0\n";
    std::vector<std::uint8_t> payload(values.size() * 4);
    std::size_t out = 0;
    for (int y = map.height() - 1; y >= 0; --y) {
        for (int x = 0; x < map.width(); ++x) {
            const auto i = static_cast<std::size_t>(y) * map.width() + x;
            const float v = valid[i] ? values[i] : std::numeric_limits<float>::infinity();
            const auto bits = detail::to_little_endian(std::bit_cast<std::uint32_t>(v));
            std::memcpy(payload.data() + out, &bits, 4);
            out += 4;
        }
    }
    detail::write_file(path, header, payload);
}

inline DisparityMap decode_disparity(const std::vector<std::uint8_t>& bytes, DisparityEncoding enc,
                                     const std::string& source = "<memory>") {
    if (enc == DisparityEncoding::fixed256_16bit) {
        const auto r = detail::parse_pgm(bytes, source);
        if (r.maxval <= 255) throw Error("'" + source + "' is not a 16-bit PGM");
        DisparityMap map(r.width, r.height);
        for (int y = 0; y < r.height; ++y)
            for (int x = 0; x < r.width; ++x) {
                const auto s = r.samples[static_cast<std::size_t>(y) * r.width + x];
                if (s != 0) map.set(x, y, static_cast<float>(s) / 256.0f);
            }
        return map;
    }

    detail::HeaderReader header(bytes, source);
    if (header.line() != "Pf") throw Error("unsupported format in '" + source + "' (expected grayscale PFM 'Pf')");
    std::istringstream dims(header.line());
    long w = 0, h = 0;
    if (!(dims >> w >> h) || w < 1 || h < 1 || w > (1 << 20) || h > (1 << 20)) header.fail("bad dimensions");
    std::istringstream scale_line(header.line());
    double scale = 0.0;
    if (!(scale_line >> scale) || scale == 0.0 || !std::isfinite(scale)) header.fail("bad scale");
    const bool little = scale < 0.0;
    const std::size_t offset = header.position();
    const std::size_t n = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
    if (bytes.size() - offset < n * 4) header.fail("truncated raster");

    DisparityMap map(static_cast<int>(w), static_cast<int>(h));
    std::size_t at = offset;
    for (long y = h - 1; y >= 0; --y) {
        for (long x = 0; x < w; ++x, at += 4) {
            std::uint32_t bits = little ? (std::uint32_t{bytes[at]} | std::uint32_t{bytes[at + 1]} << 8 |
                                           std::uint32_t{bytes[at + 2]} << 16 | std::uint32_t{bytes[at + 3]} << 24)
                                        : (std::uint32_t{bytes[at]} << 24 | std::uint32_t{bytes[at + 1]} << 16 |
                                           std::uint32_t{bytes[at + 2]} << 8 | std::uint32_t{bytes[at + 3]});
            const float v = std::bit_cast<float>(bits);
            if (std::isfinite(v)) map.set(static_cast<int>(x), static_cast<int>(y), v);
        }
    }
    return map;
}

inline DisparityMap read_disparity(const std::filesystem::path& path, DisparityEncoding enc) {
    return decode_disparity(detail::read_file(path), enc, path.string());
}

/// Encoding implied by a file extension: .pfm is float_map, anything else fixed256.
inline DisparityEncoding encoding_for(const std::filesystem::path& path) {
    auto ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    return ext == ".pfm" ? DisparityEncoding::float_map : DisparityEncoding::fixed256_16bit;
}

// ---------------------------------------------------------------------------
// Dataset layouts
// ---------------------------------------------------------------------------

enum class DatasetLayout { pairs, kitti_like };

struct DatasetEntry {
    std::string name;
    std::filesystem::path left;
    std::filesystem::path right;
    std::optional<std::filesystem::path> gt;
};

struct DatasetScan {
    std::vector<DatasetEntry> entries; // sorted by name
    std::vector<std::string> warnings; // orphan files
};

namespace detail {

inline std::vector<std::filesystem::path> regular_files(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::directory_iterator it(dir, ec);
    if (ec) throw Error("cannot read directory '" + dir.string() + "': " + ec.message());
    std::vector<std::filesystem::path> files;
    for (const auto& e : it)
        if (e.is_regular_file()) files.push_back(e.path());
    std::sort(files.begin(), files.end());
    return files;
}

inline bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

} // namespace detail

/// pairs:      <name>_L.pgm, <name>_R.pgm, optional <name>_gt.<ext>
/// kitti_like: image_2/<id>.<ext>, image_3/<id>.<ext>, optional disp_occ_0/<id>.<ext>
inline DatasetScan scan_dataset(const std::filesystem::path& root, DatasetLayout layout) {
    struct Parts {
        std::optional<std::filesystem::path> left, right, gt;
    };
    std::map<std::string, Parts> by_name;
    DatasetScan scan;

    if (layout == DatasetLayout::pairs) {
        for (const auto& f : detail::regular_files(root)) {
            const auto file = f.filename().string();
            const auto stem = f.stem().string();
            if (file.size() > 6 && detail::ends_with(file, "_L.pgm"))
                by_name[file.substr(0, file.size() - 6)].left = f;
            else if (file.size() > 6 && detail::ends_with(file, "_R.pgm"))
                by_name[file.substr(0, file.size() - 6)].right = f;
            else if (stem.size() > 3 && detail::ends_with(stem, "_gt"))
                by_name[stem.substr(0, stem.size() - 3)].gt = f;
            else
                scan.warnings.push_back("ignoring unrecognized file " + f.string());
        }
    } else {
        const auto collect = [&](const char* sub, auto member, bool required) {
            const auto dir = root / sub;
            if (!std::filesystem::is_directory(dir)) {
                if (required) throw Error("missing directory '" + dir.string() + "'");
                return;
            }
            for (const auto& f : detail::regular_files(dir)) by_name[f.stem().string()].*member = f;
        };
        collect("image_2", &Parts::left, true);
        collect("image_3", &Parts::right, true);
        collect("disp_occ_0", &Parts::gt, false);
    }

    for (auto& [name, parts] : by_name) {
        if (parts.left && parts.right) {
            scan.entries.push_back({name, *parts.left, *parts.right, parts.gt});
        } else {
            for (const auto* p : {&parts.left, &parts.right, &parts.gt})
                if (*p) scan.warnings.push_back("orphan file " + (*p)->string() + " (no complete pair)");
        }
    }
    return scan;
}

} // namespace stereo
