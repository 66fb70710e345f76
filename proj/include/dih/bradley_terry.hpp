#pragma once

#include <string>
#include <vector>

namespace dih {

// Win-count matrix for pairwise comparisons: counts[i][j] is the number of
// times method i was preferred over method j. Zero diagonal; the comparison
// graph must be connected for fitting.
struct PairwiseCounts {
    std::vector<std::string> ids;
    std::vector<std::vector<double>> counts;

    explicit PairwiseCounts(std::vector<std::string> method_ids = {});
    int index_of(const std::string& id); // appends unknown ids
    void add_outcome(const std::string& winner, const std::string& loser, double weight = 1.0);
    int size() const { return static_cast<int>(ids.size()); }
};

struct BtResult {
    std::vector<std::string> ids;
    std::vector<double> scores;          // normalized to mean 1
    std::vector<double> log_likelihoods; // one entry per MM iteration
    int iterations = 0;
};

// Maximum-likelihood Bradley-Terry strengths via the minorize-maximize
// fixed point p_i <- W_i / sum_{j != i} m_ij / (p_i + p_j), iterated until
// the largest relative change drops below `tolerance`. Scores are
// normalized so their mean is 1. The log-likelihood is recorded every
// iteration and is non-decreasing.
BtResult bt_scores(const PairwiseCounts& counts, double tolerance = 1e-9, int max_iters = 10000);

// One `winner_id,loser_id` row per judgment.
PairwiseCounts load_pairwise_csv(const std::string& path);

} // namespace dih
