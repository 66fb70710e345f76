#pragma once

#include <cstdint>
#include <vector>

namespace dih {

// RGB raster, float per channel in [0,1], row-major, interleaved channels.
struct Image {
    int width = 0;
    int height = 0;
    std::vector<float> data; // height * width * 3

    Image() = default;
    Image(int w, int h, float fill = 0.0f)
        : width(w), height(h), data(static_cast<size_t>(w) * h * 3, fill) {}

    float& at(int y, int x, int c) { return data[(static_cast<size_t>(y) * width + x) * 3 + c]; }
    float at(int y, int x, int c) const { return data[(static_cast<size_t>(y) * width + x) * 3 + c]; }
    size_t pixel_count() const { return static_cast<size_t>(width) * height; }
    bool same_size(const Image& o) const { return width == o.width && height == o.height; }
};

// Binary foreground indicator, one byte per pixel, values strictly {0,1}.
struct Mask {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> data;

    Mask() = default;
    Mask(int w, int h, std::uint8_t fill = 0)
        : width(w), height(h), data(static_cast<size_t>(w) * h, fill) {}

    std::uint8_t& at(int y, int x) { return data[static_cast<size_t>(y) * width + x]; }
    std::uint8_t at(int y, int x) const { return data[static_cast<size_t>(y) * width + x]; }
    size_t pixel_count() const { return static_cast<size_t>(width) * height; }
    size_t foreground_count() const {
        size_t n = 0;
        for (auto v : data) n += v;
        return n;
    }
};

// Per-pixel class indices in [0, num_classes).
struct LabelMap {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> data;

    LabelMap() = default;
    LabelMap(int w, int h, std::uint8_t fill = 0)
        : width(w), height(h), data(static_cast<size_t>(w) * h, fill) {}

    std::uint8_t& at(int y, int x) { return data[static_cast<size_t>(y) * width + x]; }
    std::uint8_t at(int y, int x) const { return data[static_cast<size_t>(y) * width + x]; }
    size_t pixel_count() const { return static_cast<size_t>(width) * height; }
};

// CIE L*a*b*: L in [0,100], a/b roughly in [-128,127]. Interleaved L,a,b.
struct LabImage {
    int width = 0;
    int height = 0;
    std::vector<float> data;

    LabImage() = default;
    LabImage(int w, int h) : width(w), height(h), data(static_cast<size_t>(w) * h * 3, 0.0f) {}

    float& at(int y, int x, int c) { return data[(static_cast<size_t>(y) * width + x) * 3 + c]; }
    float at(int y, int x, int c) const { return data[(static_cast<size_t>(y) * width + x) * 3 + c]; }
};

// Foreground where mask=1, background where mask=0. All inputs share dimensions.
Image composite(const Image& foreground, const Image& background, const Mask& mask);

// Bilinear resample to new dimensions (used when feeding arbitrary-size
// images to a fixed-resolution model).
Image resize_bilinear(const Image& src, int new_width, int new_height);

// Nearest-neighbour resample; keeps values strictly binary.
Mask resize_nearest(const Mask& src, int new_width, int new_height);

} // namespace dih
