#pragma once

#include "dih/image.hpp"

namespace dih {

// Joint bilateral upsampling parameters. Spatial sigma is measured in
// low-resolution pixels, range sigma in [0,1] guide-intensity units.
struct BilateralParams {
    double sigma_spatial = 2.0;
    double sigma_range = 0.1;
    int radius = 6; // low-res pixels; default 3 * sigma_spatial

    void validate() const;
};

// Upsamples `low` to the guide's resolution. Each output pixel is a
// normalized sum over low-res neighbours weighted by a spatial Gaussian (in
// low-res coordinates) times a range Gaussian on the Euclidean RGB distance
// between the guide pixel and the guide box-downsampled at the neighbour.
// Guide dimensions must be integer multiples of the low-res dimensions.
Image joint_bilateral_upsample(const Image& low, const Image& guide, const BilateralParams& params);

} // namespace dih
