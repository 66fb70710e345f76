#pragma once

#include "dih/image.hpp"

namespace dih {

// Transfers luminance (Lab L) and color-temperature (Lab b) statistics from
// the reference region onto the target region via histogram matching, then
// blends: out = (1-strength)*original + strength*matched, inside
// target_mask only. Pixels outside the mask are bit-identical to the input;
// the a channel is never touched.
Image color_transfer(const Image& target, const Mask& target_mask, const Image& reference,
                     const Mask& reference_mask, double strength);

} // namespace dih
