#pragma once

#include "dih/image.hpp"

namespace dih {

// sRGB (D65) <-> CIE L*a*b* conversion. Per-pixel math runs in double
// precision; L is used downstream as the luminance statistic and b as the
// blue-yellow (color temperature) axis.

void srgb_to_lab(double r, double g, double b, double& L, double& a, double& bb);

// Out-of-gamut results are clamped to [0,1].
void lab_to_srgb(double L, double a, double bb, double& r, double& g, double& b);

LabImage rgb_to_lab(const Image& image);
Image lab_to_rgb(const LabImage& lab);

} // namespace dih
