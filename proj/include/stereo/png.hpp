#pragma once

// PNG decoding through libpng, for datasets distributed as PNG (KITTI).
// Only compiled in when STEREO_WITH_PNG is defined; link against PNG::PNG.

#include <filesystem>
#include <string>

#include "stereo/core.hpp"
#include "stereo/imgio.hpp"

#ifdef STEREO_WITH_PNG
#include <csetjmp>
#include <cstdio>
#include <memory>
#include <png.h>
#endif

namespace stereo {

inline constexpr bool kHavePng =
#ifdef STEREO_WITH_PNG
    true;
#else
    false;
#endif

#ifdef STEREO_WITH_PNG
namespace detail {

struct PngRaster {
    int width = 0;
    int height = 0;
    int bit_depth = 8;
    std::vector<std::uint16_t> samples;
};

/// Decodes to one gray channel; color input is converted with libpng's
/// default luma weights, alpha is dropped.
inline PngRaster decode_png_gray(const std::filesystem::path& path) {
    std::unique_ptr<std::FILE, int (*)(std::FILE*)> file(std::fopen(path.c_str(), "rb"), &std::fclose);
    if (!file) throw Error("cannot open '" + path.string() + "'");

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw Error("libpng initialisation failed");
    }
    PngRaster r;
    std::vector<png_bytep> rows;
    std::vector<std::uint8_t> buffer;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw Error("malformed PNG '" + path.string() + "'");
    }
    png_init_io(png, file.get());
    png_read_info(png, info);
    const auto color = png_get_color_type(png, info);
    const int depth = png_get_bit_depth(png, info);
    if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
    if (color == PNG_COLOR_TYPE_RGB || color == PNG_COLOR_TYPE_RGB_ALPHA || color == PNG_COLOR_TYPE_PALETTE)
        png_set_rgb_to_gray_fixed(png, 1, -1, -1);
    png_read_update_info(png, info);

    r.width = static_cast<int>(png_get_image_width(png, info));
    r.height = static_cast<int>(png_get_image_height(png, info));
    r.bit_depth = png_get_bit_depth(png, info);
    const auto rowbytes = png_get_rowbytes(png, info);
    if (png_get_channels(png, info) != 1) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw Error("unsupported PNG channel layout in '" + path.string() + "'");
    }
    buffer.resize(rowbytes * static_cast<std::size_t>(r.height));
    rows.resize(static_cast<std::size_t>(r.height));
    for (int y = 0; y < r.height; ++y) rows[static_cast<std::size_t>(y)] = buffer.data() + rowbytes * y;
    png_read_image(png, rows.data());
    png_destroy_read_struct(&png, &info, nullptr);

    r.samples.resize(static_cast<std::size_t>(r.width) * r.height);
    for (std::size_t i = 0; i < r.samples.size(); ++i)
        r.samples[i] = r.bit_depth == 16 ? static_cast<std::uint16_t>(buffer[2 * i] << 8 | buffer[2 * i + 1])
                                         : buffer[i];
    return r;
}

} // namespace detail
#endif

inline bool is_png(const std::filesystem::path& path) {
    auto ext = path.extension().string();
    for (auto& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return ext == ".png";
}

/// read_gray plus PNG input (8-bit; color is converted to gray).
inline GrayImage load_gray(const std::filesystem::path& path) {
    if (!is_png(path)) return read_gray(path);
#ifdef STEREO_WITH_PNG
    auto r = detail::decode_png_gray(path);
    if (r.bit_depth != 8) throw Error("expected an 8-bit PNG in '" + path.string() + "'");
    return GrayImage(r.width, r.height, std::vector<std::uint8_t>(r.samples.begin(), r.samples.end()));
#else
    throw Error("PNG support not compiled in; cannot read '" + path.string() + "'");
#endif
}

/// read_disparity plus 16-bit PNG input with the fixed256 convention.
inline DisparityMap load_disparity(const std::filesystem::path& path) {
    if (!is_png(path)) return read_disparity(path, encoding_for(path));
#ifdef STEREO_WITH_PNG
    auto r = detail::decode_png_gray(path);
    if (r.bit_depth != 16) throw Error("expected a 16-bit PNG disparity map in '" + path.string() + "'");
    DisparityMap map(r.width, r.height);
    for (int y = 0; y < r.height; ++y)
        for (int x = 0; x < r.width; ++x)
            if (auto s = r.samples[static_cast<std::size_t>(y) * r.width + x]) map.set(x, y, s / 256.0f);
    return map;
#else
    throw Error("PNG support not compiled in; cannot read '" + path.string() + "'");
#endif
}

} // namespace stereo
