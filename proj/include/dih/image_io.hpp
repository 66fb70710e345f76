#pragma once

#include <string>

#include "dih/image.hpp"

namespace dih {

// 8-bit file I/O. Formats: PNG (RGB images, grayscale masks and label maps)
// and binary PPM/PGM with maxval 255 as the dependency-free fallback.
// Loading maps 8-bit value v to v/255; saving rounds to the nearest 8-bit
// value, so a save/load round trip is exact to within 1/255 per channel.

Image load_image(const std::string& path);
void save_image(const Image& image, const std::string& path);

// Grayscale; thresholded at 128/255 to strictly binary values.
Mask load_mask(const std::string& path);
void save_mask(const Mask& mask, const std::string& path);

// Grayscale; the stored pixel value is the class index.
LabelMap load_labelmap(const std::string& path);
void save_labelmap(const LabelMap& labels, const std::string& path);

} // namespace dih
