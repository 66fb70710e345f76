#pragma once

#include <vector>

#include "dih/image.hpp"

namespace dih {

// Multi-resolution grid of normalized label histograms used as a global
// scene descriptor for retrieval. Level l splits the map into 2^l x 2^l
// cells; level weights are w_0 = 2^-L and w_l = 2^(l-L-1), summing to 1.
struct PyramidHistogram {
    int levels = 0;      // highest level index L
    int num_classes = 0;
    // cells[l] holds 4^l histograms of num_classes entries, row-major cells.
    std::vector<std::vector<std::vector<double>>> cells;
    std::vector<double> weights; // per level, sums to 1

    bool same_shape(const PyramidHistogram& o) const {
        return levels == o.levels && num_classes == o.num_classes;
    }
};

PyramidHistogram spatial_pyramid_histogram(const LabelMap& labels, int levels, int num_classes);

// Weighted histogram-intersection distance in [0,1]; 0 for identical
// pyramids (empty cells contribute nothing).
double pyramid_distance(const PyramidHistogram& a, const PyramidHistogram& b);

// Ids sorted ascending by distance to the query, ties broken by id.
std::vector<int> retrieve_reference(const PyramidHistogram& query,
                                    const std::vector<std::pair<int, PyramidHistogram>>& corpus);

} // namespace dih
