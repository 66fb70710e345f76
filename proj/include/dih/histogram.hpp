#pragma once

#include <span>
#include <vector>

namespace dih {

// Fixed-layout channel histogram: `bins` equal-width bins covering
// [range_lo, range_hi]. 256 bins matches 8-bit source precision.
struct Histogram {
    int bins = 256;
    double range_lo = 0.0;
    double range_hi = 1.0;
    std::vector<double> counts;
    double total = 0.0;

    Histogram() = default;
    Histogram(int bin_count, double lo, double hi)
        : bins(bin_count), range_lo(lo), range_hi(hi), counts(bin_count, 0.0) {}

    int bin_index(double value) const;
    double bin_center(int index) const;
    void add(double value, double weight = 1.0);
    bool same_layout(const Histogram& o) const {
        return bins == o.bins && range_lo == o.range_lo && range_hi == o.range_hi;
    }
};

Histogram build_histogram(std::span<const double> values, int bins, double lo, double hi);

// Monotone non-decreasing value mapping sampled at bin centers. Applied
// with linear interpolation between centers (clamped at the ends).
struct TransferLUT {
    double range_lo = 0.0;
    double range_hi = 1.0;
    std::vector<double> values; // one entry per source bin center

    double apply(double v) const;
    bool is_monotone() const;
};

// Classic monotone histogram specification: maps the source CDF onto the
// reference CDF. Both histograms must be non-empty with identical layout.
TransferLUT match_histograms(const Histogram& source, const Histogram& reference);

} // namespace dih
