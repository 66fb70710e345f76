#include "dih/color_transfer.hpp"

#include <cmath>
#include <vector>

#include "dih/color.hpp"
#include "dih/error.hpp"
#include "dih/histogram.hpp"

namespace dih {
namespace {

constexpr int kBins = 256;
constexpr double kLumLo = 0.0, kLumHi = 100.0;
constexpr double kTempLo = -128.0, kTempHi = 127.0;

struct RegionLab {
    std::vector<size_t> indices; // pixel offsets inside the mask
    std::vector<double> L, a, b;
};

RegionLab collect_region(const Image& image, const Mask& mask) {
    RegionLab region;
    const size_t n = mask.pixel_count();
    for (size_t i = 0; i < n; ++i) {
        if (!mask.data[i]) continue;
        double L, a, b;
        srgb_to_lab(image.data[i * 3 + 0], image.data[i * 3 + 1], image.data[i * 3 + 2], L, a, b);
        region.indices.push_back(i);
        region.L.push_back(L);
        region.a.push_back(a);
        region.b.push_back(b);
    }
    return region;
}

} // namespace

Image color_transfer(const Image& target, const Mask& target_mask, const Image& reference,
                     const Mask& reference_mask, double strength) {
    if (target.width != target_mask.width || target.height != target_mask.height) {
        fail(Status::DimensionMismatch, "color_transfer: target and its mask must share dimensions");
    }
    if (reference.width != reference_mask.width || reference.height != reference_mask.height) {
        fail(Status::DimensionMismatch, "color_transfer: reference and its mask must share dimensions");
    }
    if (strength < 0.0 || strength > 1.0) {
        fail(Status::InvalidArgument, "color_transfer: strength must be in [0,1]");
    }

    Image out = target;
    if (strength == 0.0) return out;

    const RegionLab src = collect_region(target, target_mask);
    const RegionLab ref = collect_region(reference, reference_mask);
    if (src.indices.empty() || ref.indices.empty()) {
        fail(Status::EmptyRegion, "color_transfer: both mask regions must be non-empty");
    }

    const Histogram src_l = build_histogram(src.L, kBins, kLumLo, kLumHi);
    const Histogram ref_l = build_histogram(ref.L, kBins, kLumLo, kLumHi);
    const Histogram src_b = build_histogram(src.b, kBins, kTempLo, kTempHi);
    const Histogram ref_b = build_histogram(ref.b, kBins, kTempLo, kTempHi);

    const TransferLUT lut_l = match_histograms(src_l, ref_l);
    const TransferLUT lut_b = match_histograms(src_b, ref_b);

    for (size_t k = 0; k < src.indices.size(); ++k) {
        const double L = src.L[k];
        const double b = src.b[k];
        const double L_out = (1.0 - strength) * L + strength * lut_l.apply(L);
        const double b_out = (1.0 - strength) * b + strength * lut_b.apply(b);
        double r, g, bl;
        lab_to_srgb(L_out, src.a[k], b_out, r, g, bl);
        const size_t i = src.indices[k];
        out.data[i * 3 + 0] = static_cast<float>(r);
        out.data[i * 3 + 1] = static_cast<float>(g);
        out.data[i * 3 + 2] = static_cast<float>(bl);
    }
    return out;
}

} // namespace dih
