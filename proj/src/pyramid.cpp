#include "dih/pyramid.hpp"

#include <algorithm>
#include <cmath>

#include "dih/error.hpp"

namespace dih {

PyramidHistogram spatial_pyramid_histogram(const LabelMap& labels, int levels, int num_classes) {
    if (levels < 0) fail(Status::InvalidArgument, "pyramid levels must be >= 0");
    if (num_classes < 1) fail(Status::InvalidArgument, "num_classes must be >= 1");
    for (auto v : labels.data) {
        if (v >= num_classes) fail(Status::InvalidArgument, "label index out of range");
    }

    PyramidHistogram p;
    p.levels = levels;
    p.num_classes = num_classes;
    p.cells.resize(levels + 1);
    p.weights.resize(levels + 1);
    p.weights[0] = std::ldexp(1.0, -levels); // 2^-L
    for (int l = 1; l <= levels; ++l) p.weights[l] = std::ldexp(1.0, l - levels - 1);

    for (int l = 0; l <= levels; ++l) {
        const int n = 1 << l;
        p.cells[l].assign(static_cast<size_t>(n) * n, std::vector<double>(num_classes, 0.0));
        for (int cy = 0; cy < n; ++cy) {
            const int y0 = cy * labels.height / n;
            const int y1 = (cy + 1) * labels.height / n;
            for (int cx = 0; cx < n; ++cx) {
                const int x0 = cx * labels.width / n;
                const int x1 = (cx + 1) * labels.width / n;
                auto& hist = p.cells[l][static_cast<size_t>(cy) * n + cx];
                double total = 0.0;
                for (int y = y0; y < y1; ++y) {
                    for (int x = x0; x < x1; ++x) {
                        hist[labels.at(y, x)] += 1.0;
                        total += 1.0;
                    }
                }
                if (total > 0.0) {
                    for (auto& v : hist) v /= total;
                }
            }
        }
    }
    return p;
}

double pyramid_distance(const PyramidHistogram& a, const PyramidHistogram& b) {
    if (!a.same_shape(b)) fail(Status::DimensionMismatch, "pyramid shapes must match");
    double similarity = 0.0;
    for (int l = 0; l <= a.levels; ++l) {
        const size_t cells = a.cells[l].size();
        double level_sim = 0.0;
        for (size_t c = 0; c < cells; ++c) {
            const auto& ha = a.cells[l][c];
            const auto& hb = b.cells[l][c];
            for (int k = 0; k < a.num_classes; ++k) level_sim += std::min(ha[k], hb[k]);
        }
        // mean over cells so each level's intersection lies in [0,1]
        similarity += a.weights[l] * level_sim / static_cast<double>(cells);
    }
    return std::max(0.0, 1.0 - similarity);
}

std::vector<int> retrieve_reference(const PyramidHistogram& query,
                                    const std::vector<std::pair<int, PyramidHistogram>>& corpus) {
    if (corpus.empty()) fail(Status::InvalidArgument, "retrieval corpus must be non-empty");
    std::vector<std::pair<double, int>> ranked;
    ranked.reserve(corpus.size());
    for (const auto& [id, pyramid] : corpus) {
        ranked.emplace_back(pyramid_distance(query, pyramid), id);
    }
    std::sort(ranked.begin(), ranked.end());
    std::vector<int> ids;
    ids.reserve(ranked.size());
    for (const auto& [d, id] : ranked) ids.push_back(id);
    return ids;
}

} // namespace dih
