#include "dih/image.hpp"

#include <algorithm>
#include <cmath>

#include "dih/error.hpp"

namespace dih {

Image composite(const Image& foreground, const Image& background, const Mask& mask) {
    if (!foreground.same_size(background) || foreground.width != mask.width ||
        foreground.height != mask.height) {
        fail(Status::DimensionMismatch, "composite: foreground, background and mask must share dimensions");
    }
    Image out = background;
    const size_t n = mask.pixel_count();
    for (size_t i = 0; i < n; ++i) {
        if (mask.data[i]) {
            out.data[i * 3 + 0] = foreground.data[i * 3 + 0];
            out.data[i * 3 + 1] = foreground.data[i * 3 + 1];
            out.data[i * 3 + 2] = foreground.data[i * 3 + 2];
        }
    }
    return out;
}

Image resize_bilinear(const Image& src, int new_width, int new_height) {
    if (new_width < 1 || new_height < 1) fail(Status::InvalidArgument, "resize: target dimensions must be >= 1");
    if (new_width == src.width && new_height == src.height) return src;
    Image out(new_width, new_height);
    const double sx = static_cast<double>(src.width) / new_width;
    const double sy = static_cast<double>(src.height) / new_height;
    for (int y = 0; y < new_height; ++y) {
        double fy = (y + 0.5) * sy - 0.5;
        fy = std::clamp(fy, 0.0, static_cast<double>(src.height - 1));
        const int y0 = static_cast<int>(fy);
        const int y1 = std::min(y0 + 1, src.height - 1);
        const double ty = fy - y0;
        for (int x = 0; x < new_width; ++x) {
            double fx = (x + 0.5) * sx - 0.5;
            fx = std::clamp(fx, 0.0, static_cast<double>(src.width - 1));
            const int x0 = static_cast<int>(fx);
            const int x1 = std::min(x0 + 1, src.width - 1);
            const double tx = fx - x0;
            for (int c = 0; c < 3; ++c) {
                const double top = src.at(y0, x0, c) * (1.0 - tx) + src.at(y0, x1, c) * tx;
                const double bot = src.at(y1, x0, c) * (1.0 - tx) + src.at(y1, x1, c) * tx;
                out.at(y, x, c) = static_cast<float>(top * (1.0 - ty) + bot * ty);
            }
        }
    }
    return out;
}

Mask resize_nearest(const Mask& src, int new_width, int new_height) {
    if (new_width < 1 || new_height < 1) fail(Status::InvalidArgument, "resize: target dimensions must be >= 1");
    if (new_width == src.width && new_height == src.height) return src;
    Mask out(new_width, new_height);
    for (int y = 0; y < new_height; ++y) {
        int sy = static_cast<int>((y + 0.5) * src.height / new_height);
        sy = std::min(sy, src.height - 1);
        for (int x = 0; x < new_width; ++x) {
            int sx = static_cast<int>((x + 0.5) * src.width / new_width);
            sx = std::min(sx, src.width - 1);
            out.at(y, x) = src.at(sy, sx);
        }
    }
    return out;
}

} // namespace dih
