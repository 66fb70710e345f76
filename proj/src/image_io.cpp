#include "dih/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <memory>
#include <vector>

#include "dih/error.hpp"

namespace dih {
namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_for_read(const std::string& path) {
    if (!std::filesystem::exists(path)) fail(Status::NotFound, "file not found: " + path);
    FilePtr f(std::fopen(path.c_str(), "rb"));
    if (!f) fail(Status::Io, "cannot open for reading: " + path);
    return f;
}

FilePtr open_for_write(const std::string& path) {
    FilePtr f(std::fopen(path.c_str(), "wb"));
    if (!f) fail(Status::Io, "cannot open for writing: " + path);
    return f;
}

std::uint8_t to_byte(float v) {
    const float clamped = std::clamp(v, 0.0f, 1.0f);
    return static_cast<std::uint8_t>(std::lround(clamped * 255.0f));
}

bool has_png_signature(std::FILE* f) {
    unsigned char sig[8];
    const size_t got = std::fread(sig, 1, 8, f);
    std::rewind(f);
    return got == 8 && png_sig_cmp(sig, 0, 8) == 0;
}

// Decodes any PNG libpng can expand to 8-bit gray or RGB. `channels` is the
// desired sample count (1 or 3).
std::vector<std::uint8_t> read_png(std::FILE* f, const std::string& path, int channels,
                                   int& width, int& height) {
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) fail(Status::Runtime, "libpng init failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        fail(Status::Runtime, "libpng init failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        fail(Status::CorruptData, "corrupt PNG data: " + path);
    }
    png_init_io(png, f);
    png_read_info(png, info);

    width = static_cast<int>(png_get_image_width(png, info));
    height = static_cast<int>(png_get_image_height(png, info));
    const png_byte color_type = png_get_color_type(png, info);
    const png_byte bit_depth = png_get_bit_depth(png, info);

    if (bit_depth == 16) png_set_strip_16(png);
    if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    if (color_type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
    if (channels == 3 && (color_type == PNG_COLOR_TYPE_GRAY || color_type == PNG_COLOR_TYPE_GRAY_ALPHA)) {
        png_set_gray_to_rgb(png);
    }
    if (channels == 1 && (color_type == PNG_COLOR_TYPE_RGB || color_type == PNG_COLOR_TYPE_RGB_ALPHA ||
                          color_type == PNG_COLOR_TYPE_PALETTE)) {
        png_set_rgb_to_gray_fixed(png, 1, -1, -1);
    }
    png_read_update_info(png, info);

    if (png_get_channels(png, info) != static_cast<png_byte>(channels)) {
        png_destroy_read_struct(&png, &info, nullptr);
        fail(Status::UnsupportedFormat, "unsupported PNG layout: " + path);
    }

    std::vector<std::uint8_t> pixels(static_cast<size_t>(width) * height * channels);
    std::vector<png_bytep> rows(height);
    for (int y = 0; y < height; ++y) rows[y] = pixels.data() + static_cast<size_t>(y) * width * channels;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return pixels;
}

void write_png(std::FILE* f, const std::string& path, const std::uint8_t* pixels, int width,
               int height, int channels) {
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) fail(Status::Runtime, "libpng init failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        fail(Status::Runtime, "libpng init failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        fail(Status::Io, "PNG write failed: " + path);
    }
    png_init_io(png, f);
    png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), 8,
                 channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    std::vector<png_bytep> rows(height);
    for (int y = 0; y < height; ++y) {
        rows[y] = const_cast<png_bytep>(pixels + static_cast<size_t>(y) * width * channels);
    }
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

// Binary PPM (P6) / PGM (P5), maxval 255.
std::vector<std::uint8_t> read_pnm(std::FILE* f, const std::string& path, int channels,
                                   int& width, int& height) {
    char magic[3] = {0, 0, 0};
    if (std::fread(magic, 1, 2, f) != 2) fail(Status::CorruptData, "truncated PNM header: " + path);
    const char expected = channels == 3 ? '6' : '5';
    if (magic[0] != 'P' || magic[1] != expected) {
        fail(Status::UnsupportedFormat, "unsupported PNM type for this raster: " + path);
    }

    auto next_int = [&]() -> int {
        int c;
        // skip whitespace and comments
        for (;;) {
            c = std::fgetc(f);
            if (c == '#') {
                while (c != '\n' && c != EOF) c = std::fgetc(f);
            } else if (!std::isspace(c)) {
                break;
            }
        }
        if (c == EOF) fail(Status::CorruptData, "truncated PNM header: " + path);
        int value = 0;
        while (std::isdigit(c)) {
            value = value * 10 + (c - '0');
            c = std::fgetc(f);
        }
        return value;
    };

    width = next_int();
    height = next_int();
    const int maxval = next_int();
    if (width < 1 || height < 1) fail(Status::CorruptData, "bad PNM dimensions: " + path);
    if (maxval != 255) fail(Status::UnsupportedFormat, "PNM maxval must be 255: " + path);

    std::vector<std::uint8_t> pixels(static_cast<size_t>(width) * height * channels);
    if (std::fread(pixels.data(), 1, pixels.size(), f) != pixels.size()) {
        fail(Status::CorruptData, "truncated PNM data: " + path);
    }
    return pixels;
}

void write_pnm(std::FILE* f, const std::string& path, const std::uint8_t* pixels, int width,
               int height, int channels) {
    char header[64];
    const int len = std::snprintf(header, sizeof(header), "P%c\n%d %d\n255\n",
                                  channels == 3 ? '6' : '5', width, height);
    const size_t n = static_cast<size_t>(width) * height * channels;
    if (std::fwrite(header, 1, static_cast<size_t>(len), f) != static_cast<size_t>(len) ||
        std::fwrite(pixels, 1, n, f) != n) {
        fail(Status::Io, "PNM write failed: " + path);
    }
}

enum class Format { Png, Ppm, Pgm };

Format sniff_format(const std::string& path, std::FILE* f) {
    if (has_png_signature(f)) return Format::Png;
    char magic[2] = {0, 0};
    const size_t got = std::fread(magic, 1, 2, f);
    std::rewind(f);
    if (got == 2 && magic[0] == 'P' && magic[1] == '6') return Format::Ppm;
    if (got == 2 && magic[0] == 'P' && magic[1] == '5') return Format::Pgm;
    fail(Status::UnsupportedFormat, "unsupported raster format: " + path);
}

bool wants_pnm(const std::string& path) {
    const auto ext = std::filesystem::path(path).extension().string();
    return ext == ".ppm" || ext == ".pgm";
}

std::vector<std::uint8_t> load_raster(const std::string& path, int channels, int& width, int& height) {
    FilePtr f = open_for_read(path);
    switch (sniff_format(path, f.get())) {
        case Format::Png:
            return read_png(f.get(), path, channels, width, height);
        case Format::Ppm:
        case Format::Pgm:
            return read_pnm(f.get(), path, channels, width, height);
    }
    fail(Status::UnsupportedFormat, "unsupported raster format: " + path);
}

void save_raster(const std::string& path, const std::uint8_t* pixels, int width, int height,
                 int channels) {
    FilePtr f = open_for_write(path);
    if (wants_pnm(path)) {
        write_pnm(f.get(), path, pixels, width, height, channels);
    } else {
        write_png(f.get(), path, pixels, width, height, channels);
    }
    if (std::fflush(f.get()) != 0) fail(Status::Io, "flush failed: " + path);
}

} // namespace

Image load_image(const std::string& path) {
    int width = 0, height = 0;
    const auto pixels = load_raster(path, 3, width, height);
    Image image(width, height);
    for (size_t i = 0; i < pixels.size(); ++i) image.data[i] = pixels[i] / 255.0f;
    return image;
}

void save_image(const Image& image, const std::string& path) {
    if (image.width < 1 || image.height < 1) fail(Status::InvalidArgument, "cannot save empty image");
    std::vector<std::uint8_t> pixels(image.data.size());
    for (size_t i = 0; i < pixels.size(); ++i) pixels[i] = to_byte(image.data[i]);
    save_raster(path, pixels.data(), image.width, image.height, 3);
}

Mask load_mask(const std::string& path) {
    int width = 0, height = 0;
    const auto pixels = load_raster(path, 1, width, height);
    Mask mask(width, height);
    for (size_t i = 0; i < pixels.size(); ++i) mask.data[i] = pixels[i] >= 128 ? 1 : 0;
    return mask;
}

void save_mask(const Mask& mask, const std::string& path) {
    if (mask.width < 1 || mask.height < 1) fail(Status::InvalidArgument, "cannot save empty mask");
    std::vector<std::uint8_t> pixels(mask.data.size());
    for (size_t i = 0; i < pixels.size(); ++i) pixels[i] = mask.data[i] ? 255 : 0;
    save_raster(path, pixels.data(), mask.width, mask.height, 1);
}

LabelMap load_labelmap(const std::string& path) {
    int width = 0, height = 0;
    const auto pixels = load_raster(path, 1, width, height);
    LabelMap labels(width, height);
    labels.data.assign(pixels.begin(), pixels.end());
    return labels;
}

void save_labelmap(const LabelMap& labels, const std::string& path) {
    if (labels.width < 1 || labels.height < 1) fail(Status::InvalidArgument, "cannot save empty label map");
    save_raster(path, labels.data.data(), labels.width, labels.height, 1);
}

} // namespace dih
