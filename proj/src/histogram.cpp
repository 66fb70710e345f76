#include "dih/histogram.hpp"

#include <algorithm>
#include <cmath>

#include "dih/error.hpp"

namespace dih {

int Histogram::bin_index(double value) const {
    const double t = (value - range_lo) / (range_hi - range_lo);
    const int i = static_cast<int>(std::floor(t * bins));
    return std::clamp(i, 0, bins - 1);
}

double Histogram::bin_center(int index) const {
    return range_lo + (index + 0.5) * (range_hi - range_lo) / bins;
}

void Histogram::add(double value, double weight) {
    counts[bin_index(value)] += weight;
    total += weight;
}

Histogram build_histogram(std::span<const double> values, int bins, double lo, double hi) {
    Histogram h(bins, lo, hi);
    for (double v : values) h.add(v);
    return h;
}

double TransferLUT::apply(double v) const {
    const int n = static_cast<int>(values.size());
    const double bin_width = (range_hi - range_lo) / n;
    const double first_center = range_lo + 0.5 * bin_width;
    // position in units of bin centers
    const double t = (v - first_center) / bin_width;
    if (t <= 0.0) return values.front();
    if (t >= n - 1) return values.back();
    const int i = static_cast<int>(t);
    const double frac = t - i;
    return values[i] * (1.0 - frac) + values[i + 1] * frac;
}

bool TransferLUT::is_monotone() const {
    for (size_t i = 1; i < values.size(); ++i) {
        if (values[i] < values[i - 1]) return false;
    }
    return true;
}

TransferLUT match_histograms(const Histogram& source, const Histogram& reference) {
    if (source.total <= 0.0 || reference.total <= 0.0) {
        fail(Status::EmptyRegion, "histogram matching requires non-empty histograms");
    }
    if (!source.same_layout(reference)) {
        fail(Status::InvalidArgument, "histogram matching requires identical bin layouts");
    }

    const int n = source.bins;

    // CDF evaluated at bin centers (mass midpoint rule), so that matching a
    // histogram against itself is the exact identity at every occupied bin.
    std::vector<double> q_src(n);
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
        q_src[i] = (acc + 0.5 * source.counts[i]) / source.total;
        acc += source.counts[i];
    }

    // reference quantile function: piecewise linear through the occupied
    // bins' (midpoint CDF, bin center) points, clamped at the ends
    std::vector<double> qr, cr;
    acc = 0.0;
    for (int j = 0; j < n; ++j) {
        if (reference.counts[j] > 0.0) {
            qr.push_back((acc + 0.5 * reference.counts[j]) / reference.total);
            cr.push_back(reference.bin_center(j));
        }
        acc += reference.counts[j];
    }

    TransferLUT lut;
    lut.range_lo = source.range_lo;
    lut.range_hi = source.range_hi;
    lut.values.resize(n);
    size_t j = 0;
    for (int i = 0; i < n; ++i) {
        const double q = q_src[i];
        while (j + 1 < qr.size() && qr[j + 1] < q) ++j;
        if (q <= qr.front()) {
            lut.values[i] = cr.front();
        } else if (q >= qr.back()) {
            lut.values[i] = cr.back();
        } else {
            const double span = qr[j + 1] - qr[j];
            const double t = span > 0.0 ? (q - qr[j]) / span : 0.0;
            lut.values[i] = cr[j] + t * (cr[j + 1] - cr[j]);
        }
    }
    return lut;
}

} // namespace dih
