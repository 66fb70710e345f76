#include "dih/bilateral.hpp"

#include <cmath>
#include <vector>

#include "dih/error.hpp"

namespace dih {

void BilateralParams::validate() const {
    if (sigma_spatial <= 0.0 || sigma_range <= 0.0) {
        fail(Status::InvalidArgument, "bilateral: sigmas must be > 0");
    }
    if (radius < 1) fail(Status::InvalidArgument, "bilateral: radius must be >= 1");
}

namespace {

// Box average of the guide over scale x scale blocks.
std::vector<double> downsample_guide(const Image& guide, int lw, int lh, int sx, int sy) {
    std::vector<double> down(static_cast<size_t>(lw) * lh * 3, 0.0);
    for (int y = 0; y < lh; ++y) {
        for (int x = 0; x < lw; ++x) {
            double acc[3] = {0.0, 0.0, 0.0};
            for (int dy = 0; dy < sy; ++dy) {
                for (int dx = 0; dx < sx; ++dx) {
                    for (int c = 0; c < 3; ++c) acc[c] += guide.at(y * sy + dy, x * sx + dx, c);
                }
            }
            const double inv = 1.0 / (sx * sy);
            for (int c = 0; c < 3; ++c) down[(static_cast<size_t>(y) * lw + x) * 3 + c] = acc[c] * inv;
        }
    }
    return down;
}

} // namespace

Image joint_bilateral_upsample(const Image& low, const Image& guide, const BilateralParams& params) {
    params.validate();
    if (low.width < 1 || low.height < 1) fail(Status::InvalidArgument, "bilateral: empty input");
    if (guide.width % low.width != 0 || guide.height % low.height != 0) {
        fail(Status::DimensionMismatch, "bilateral: guide dimensions must be integer multiples of the input's");
    }
    const int sx = guide.width / low.width;
    const int sy = guide.height / low.height;

    const auto guide_low = downsample_guide(guide, low.width, low.height, sx, sy);

    const double inv2ss = 1.0 / (2.0 * params.sigma_spatial * params.sigma_spatial);
    const double inv2sr = 1.0 / (2.0 * params.sigma_range * params.sigma_range);
    const int r = params.radius;

    Image out(guide.width, guide.height);
    for (int gy = 0; gy < guide.height; ++gy) {
        // low-res coordinates of this output pixel (center-aligned)
        const double py = (gy + 0.5) / sy - 0.5;
        const int cy = static_cast<int>(std::floor(py + 0.5));
        for (int gx = 0; gx < guide.width; ++gx) {
            const double px = (gx + 0.5) / sx - 0.5;
            const int cx = static_cast<int>(std::floor(px + 0.5));

            const double g0 = guide.at(gy, gx, 0);
            const double g1 = guide.at(gy, gx, 1);
            const double g2 = guide.at(gy, gx, 2);

            double wsum = 0.0;
            double acc[3] = {0.0, 0.0, 0.0};
            for (int ny = cy - r; ny <= cy + r; ++ny) {
                if (ny < 0 || ny >= low.height) continue;
                for (int nx = cx - r; nx <= cx + r; ++nx) {
                    if (nx < 0 || nx >= low.width) continue;
                    const double dsp = (ny - py) * (ny - py) + (nx - px) * (nx - px);
                    const size_t gi = (static_cast<size_t>(ny) * low.width + nx) * 3;
                    const double d0 = g0 - guide_low[gi + 0];
                    const double d1 = g1 - guide_low[gi + 1];
                    const double d2 = g2 - guide_low[gi + 2];
                    const double drange = d0 * d0 + d1 * d1 + d2 * d2;
                    const double w = std::exp(-dsp * inv2ss - drange * inv2sr);
                    wsum += w;
                    acc[0] += w * low.at(ny, nx, 0);
                    acc[1] += w * low.at(ny, nx, 1);
                    acc[2] += w * low.at(ny, nx, 2);
                }
            }
            for (int c = 0; c < 3; ++c) {
                out.at(gy, gx, c) = static_cast<float>(acc[c] / wsum);
            }
        }
    }
    return out;
}

} // namespace dih
