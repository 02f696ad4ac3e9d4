#pragma once

// PNG codecs for images, blindness maps, depth, and flow dumps.

#include <png.h>

#include <cmath>
#include <csetjmp>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "blindsynth/core/depth.hpp"
#include "blindsynth/core/error.hpp"
#include "blindsynth/core/grid.hpp"

namespace blindsynth {

/// Raw decoded PNG: samples are the stored integers, interleaved, row-major.
struct PngPixels {
    int height = 0;
    int width = 0;
    int channels = 0;
    int bit_depth = 0;
    std::vector<std::uint16_t> samples;
};

namespace detail {

struct PngErrorState {
    char message[256] = {};
};

extern "C" inline void png_error_to_state(png_structp png, png_const_charp msg) {
    auto* state = static_cast<PngErrorState*>(png_get_error_ptr(png));
    if (state != nullptr) {
        std::snprintf(state->message, sizeof(state->message), "%s", msg != nullptr ? msg : "libpng error");
    }
    png_longjmp(png, 1);
}

extern "C" inline void png_ignore_warning(png_structp, png_const_charp) {}

struct FileCloser {
    void operator()(std::FILE* f) const noexcept {
        if (f != nullptr) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

}  // namespace detail

/// Decodes any non-palette 8/16-bit PNG. Channel-count policy is left to callers.
inline PngPixels read_png(const std::filesystem::path& path) {
    std::error_code ec;
    if (!std::filesystem::is_regular_file(path, ec)) {
        throw MissingFileError("no such file: " + path.string());
    }
    detail::FilePtr fp(std::fopen(path.c_str(), "rb"));
    if (!fp) {
        throw MissingFileError("cannot open: " + path.string());
    }
    unsigned char signature[8];
    if (std::fread(signature, 1, 8, fp.get()) != 8 || png_sig_cmp(signature, 0, 8) != 0) {
        throw CorruptStreamError("not a PNG stream: " + path.string());
    }

    // Everything with a destructor lives before setjmp.
    PngPixels out;
    std::vector<png_bytep> rows;
    std::vector<unsigned char> buffer;
    detail::PngErrorState err;

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &err, detail::png_error_to_state,
                                             detail::png_ignore_warning);
    if (png == nullptr) throw IoError("png_create_read_struct failed");
    png_infop info = png_create_info_struct(png);
    if (info == nullptr) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw IoError("png_create_info_struct failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw CorruptStreamError("corrupt PNG " + path.string() + ": " + err.message);
    }
    png_init_io(png, fp.get());
    png_set_sig_bytes(png, 8);
    png_read_info(png, info);

    const png_uint_32 width = png_get_image_width(png, info);
    const png_uint_32 height = png_get_image_height(png, info);
    const int bit_depth = png_get_bit_depth(png, info);
    const int color_type = png_get_color_type(png, info);
    int channels = 0;
    switch (color_type) {
        case PNG_COLOR_TYPE_GRAY: channels = 1; break;
        case PNG_COLOR_TYPE_GRAY_ALPHA: channels = 2; break;
        case PNG_COLOR_TYPE_RGB: channels = 3; break;
        case PNG_COLOR_TYPE_RGB_ALPHA: channels = 4; break;
        default: channels = 0; break;
    }
    if (channels == 0 || (bit_depth != 8 && bit_depth != 16)) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw UnsupportedFormatError("unsupported PNG layout (palette or bit depth " + std::to_string(bit_depth) +
                                     "): " + path.string());
    }
    if (png_get_interlace_type(png, info) != PNG_INTERLACE_NONE) {
        png_set_interlace_handling(png);
    }
    png_read_update_info(png, info);
    const std::size_t row_bytes = png_get_rowbytes(png, info);
    buffer.resize(row_bytes * height);
    rows.resize(height);
    for (png_uint_32 y = 0; y < height; ++y) rows[y] = buffer.data() + y * row_bytes;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    out.height = static_cast<int>(height);
    out.width = static_cast<int>(width);
    out.channels = channels;
    out.bit_depth = bit_depth;
    const std::size_t n = static_cast<std::size_t>(height) * width * channels;
    out.samples.resize(n);
    if (bit_depth == 8) {
        for (std::size_t i = 0; i < n; ++i) out.samples[i] = buffer[i];
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            out.samples[i] = static_cast<std::uint16_t>((buffer[2 * i] << 8) | buffer[2 * i + 1]);
        }
    }
    return out;
}

inline void write_png(const std::filesystem::path& path, const PngPixels& px) {
    if (px.bit_depth != 8 && px.bit_depth != 16) throw std::invalid_argument("write_png: bit depth must be 8 or 16");
    int color_type = 0;
    switch (px.channels) {
        case 1: color_type = PNG_COLOR_TYPE_GRAY; break;
        case 2: color_type = PNG_COLOR_TYPE_GRAY_ALPHA; break;
        case 3: color_type = PNG_COLOR_TYPE_RGB; break;
        case 4: color_type = PNG_COLOR_TYPE_RGB_ALPHA; break;
        default: throw std::invalid_argument("write_png: channels must be 1..4");
    }
    if (px.height < 1 || px.width < 1) throw std::invalid_argument("write_png: empty image");

    const int bytes_per_sample = px.bit_depth / 8;
    const std::size_t row_bytes = static_cast<std::size_t>(px.width) * px.channels * bytes_per_sample;
    std::vector<unsigned char> buffer(row_bytes * px.height);
    for (std::size_t i = 0; i < px.samples.size(); ++i) {
        if (bytes_per_sample == 1) {
            buffer[i] = static_cast<unsigned char>(px.samples[i]);
        } else {
            buffer[2 * i] = static_cast<unsigned char>(px.samples[i] >> 8);
            buffer[2 * i + 1] = static_cast<unsigned char>(px.samples[i] & 0xff);
        }
    }
    std::vector<png_bytep> rows(px.height);
    for (int y = 0; y < px.height; ++y) rows[y] = buffer.data() + y * row_bytes;

    detail::FilePtr fp(std::fopen(path.c_str(), "wb"));
    if (!fp) throw UnwritablePathError("cannot write: " + path.string());
    detail::PngErrorState err;
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &err, detail::png_error_to_state,
                                              detail::png_ignore_warning);
    if (png == nullptr) throw IoError("png_create_write_struct failed");
    png_infop info = png_create_info_struct(png);
    if (info == nullptr) {
        png_destroy_write_struct(&png, nullptr);
        throw IoError("png_create_info_struct failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw UnwritablePathError("failed writing " + path.string() + ": " + err.message);
    }
    png_init_io(png, fp.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(px.width), static_cast<png_uint_32>(px.height), px.bit_depth,
                 color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    if (std::fflush(fp.get()) != 0) throw UnwritablePathError("flush failed: " + path.string());
}

/// 8- or 16-bit PNG with 1 or 3 channels; pixel p maps to p / (2^bits - 1).
inline RasterImage load_image(const std::filesystem::path& path) {
    const PngPixels px = read_png(path);
    if (px.channels != 1 && px.channels != 3) {
        throw UnsupportedFormatError("expected 1 or 3 channels, got " + std::to_string(px.channels) + ": " +
                                     path.string());
    }
    const double scale = px.bit_depth == 8 ? 255.0 : 65535.0;
    RasterImage img(px.height, px.width, px.channels);
    auto dst = img.values();
    for (std::size_t i = 0; i < px.samples.size(); ++i) {
        dst[i] = static_cast<float>(px.samples[i] / scale);
    }
    return img;
}

namespace detail {

template <typename Tag>
PngPixels quantize(const Grid<float, Tag>& g, int bit_depth) {
    const double maxv = bit_depth == 8 ? 255.0 : 65535.0;
    PngPixels px{g.height(), g.width(), g.channels(), bit_depth, {}};
    px.samples.resize(g.values().size());
    auto src = g.values();
    for (std::size_t i = 0; i < src.size(); ++i) {
        const double v = std::clamp(static_cast<double>(src[i]), 0.0, 1.0);
        px.samples[i] = static_cast<std::uint16_t>(std::lround(v * maxv));
    }
    return px;
}

}  // namespace detail

inline void save_image(const RasterImage& img, const std::filesystem::path& path, int bit_depth = 8) {
    if (img.channels() != 1 && img.channels() != 3) {
        throw std::invalid_argument("save_image: expected 1 or 3 channels");
    }
    require_unit_range(img, "save_image");
    write_png(path, detail::quantize(img, bit_depth));
}

/// Single-channel 16-bit PNG, stored = round(amount * 65535).
inline void save_blindness_map(const BlindnessMap& map, const std::filesystem::path& path) {
    if (map.channels() != 1) throw std::invalid_argument("save_blindness_map: expected a single channel");
    require_unit_range(map, "save_blindness_map");
    write_png(path, detail::quantize(map, 16));
}

/// Accepts any single-channel 8/16-bit PNG and normalizes it to [0,1].
inline BlindnessMap load_blindness_map(const std::filesystem::path& path) {
    const RasterImage img = load_image(path);
    if (img.channels() != 1) {
        throw UnsupportedFormatError("blindness map must be single-channel: " + path.string());
    }
    return retag<BlindnessTag>(img);
}

inline void save_binary_map(const BinaryMap& map, const std::filesystem::path& path) {
    BlindnessMap m(map.height(), map.width());
    for (std::size_t i = 0; i < map.values().size(); ++i) m.values()[i] = map.values()[i] != 0 ? 1.0f : 0.0f;
    save_blindness_map(m, path);
}

/// Single-channel 16-bit PNG; depth = stored / 256 m, stored 0 = invalid.
inline DepthMap load_depth(const std::filesystem::path& path) {
    const PngPixels px = read_png(path);
    if (px.channels != 1 || px.bit_depth != 16) {
        throw UnsupportedFormatError("depth PNG must be single-channel 16-bit: " + path.string());
    }
    DepthMap depth(px.height, px.width);
    for (int y = 0; y < px.height; ++y) {
        for (int x = 0; x < px.width; ++x) {
            const std::uint16_t s = px.samples[static_cast<std::size_t>(y) * px.width + x];
            if (s != 0) depth.set(y, x, static_cast<float>(s / 256.0));
        }
    }
    return depth;
}

inline void save_depth(const DepthMap& depth, const std::filesystem::path& path) {
    PngPixels px{depth.height(), depth.width(), 1, 16, {}};
    px.samples.resize(depth.pixel_count());
    for (int y = 0; y < depth.height(); ++y) {
        for (int x = 0; x < depth.width(); ++x) {
            const std::size_t i = static_cast<std::size_t>(y) * depth.width() + x;
            if (!depth.valid(y, x)) continue;
            const long s = std::lround(static_cast<double>(depth.depth(y, x)) * 256.0);
            px.samples[i] = static_cast<std::uint16_t>(std::clamp(s, 1L, 65535L));
        }
    }
    write_png(path, px);
}

/// Debug dump: two-plane 16-bit PNG, value = round((component + 512) * 64).
inline void save_flow_png(const FlowField& flow, const std::filesystem::path& path) {
    if (flow.channels() != 2) throw std::invalid_argument("save_flow_png: flow must have 2 channels");
    PngPixels px{flow.height(), flow.width(), 2, 16, {}};
    px.samples.resize(flow.values().size());
    for (std::size_t i = 0; i < px.samples.size(); ++i) {
        const long s = std::lround((static_cast<double>(flow.values()[i]) + 512.0) * 64.0);
        px.samples[i] = static_cast<std::uint16_t>(std::clamp(s, 0L, 65535L));
    }
    write_png(path, px);
}

inline FlowField load_flow_png(const std::filesystem::path& path) {
    const PngPixels px = read_png(path);
    if (px.channels != 2 || px.bit_depth != 16) {
        throw UnsupportedFormatError("flow PNG must be two-plane 16-bit: " + path.string());
    }
    FlowField flow(px.height, px.width, 2);
    for (std::size_t i = 0; i < px.samples.size(); ++i) {
        flow.values()[i] = static_cast<float>(px.samples[i] / 64.0 - 512.0);
    }
    return flow;
}

}  // namespace blindsynth
