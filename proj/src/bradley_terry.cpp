#include "dih/bradley_terry.hpp"

#include <cmath>
#include <fstream>

#include "dih/error.hpp"

namespace dih {

PairwiseCounts::PairwiseCounts(std::vector<std::string> method_ids) : ids(std::move(method_ids)) {
    counts.assign(ids.size(), std::vector<double>(ids.size(), 0.0));
}

int PairwiseCounts::index_of(const std::string& id) {
    for (size_t i = 0; i < ids.size(); ++i) {
        if (ids[i] == id) return static_cast<int>(i);
    }
    ids.push_back(id);
    for (auto& row : counts) row.push_back(0.0);
    counts.emplace_back(ids.size(), 0.0);
    return static_cast<int>(ids.size()) - 1;
}

void PairwiseCounts::add_outcome(const std::string& winner, const std::string& loser, double weight) {
    if (winner == loser) fail(Status::InvalidArgument, "pairwise outcome needs two distinct methods");
    const int w = index_of(winner);
    const int l = index_of(loser);
    counts[w][l] += weight;
}

namespace {

void check_connected(const PairwiseCounts& c) {
    const int n = c.size();
    std::vector<char> seen(n, 0);
    std::vector<int> stack = {0};
    seen[0] = 1;
    while (!stack.empty()) {
        const int i = stack.back();
        stack.pop_back();
        for (int j = 0; j < n; ++j) {
            if (!seen[j] && (c.counts[i][j] > 0.0 || c.counts[j][i] > 0.0)) {
                seen[j] = 1;
                stack.push_back(j);
            }
        }
    }
    for (int i = 0; i < n; ++i) {
        if (!seen[i]) fail(Status::DisconnectedGraph, "comparison graph is not connected");
    }
}

double log_likelihood(const PairwiseCounts& c, const std::vector<double>& p) {
    double ll = 0.0;
    const int n = c.size();
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (i == j || c.counts[i][j] <= 0.0) continue;
            ll += c.counts[i][j] * (std::log(p[i]) - std::log(p[i] + p[j]));
        }
    }
    return ll;
}

} // namespace

BtResult bt_scores(const PairwiseCounts& counts, double tolerance, int max_iters) {
    const int n = counts.size();
    if (n < 2) fail(Status::InvalidArgument, "need at least two methods to rank");
    for (int i = 0; i < n; ++i) {
        if (counts.counts[i][i] != 0.0) fail(Status::InvalidArgument, "diagonal win counts must be zero");
        double wins = 0.0, losses = 0.0;
        for (int j = 0; j < n; ++j) {
            wins += counts.counts[i][j];
            losses += counts.counts[j][i];
        }
        if (wins == 0.0 && losses == 0.0) {
            fail(Status::InvalidArgument, "method without any comparisons: " + counts.ids[i]);
        }
    }
    check_connected(counts);

    std::vector<double> wins(n, 0.0);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) wins[i] += counts.counts[i][j];
    }

    BtResult res;
    res.ids = counts.ids;
    std::vector<double> p(n, 1.0);
    std::vector<double> next(n);

    for (int it = 0; it < max_iters; ++it) {
        double max_rel_change = 0.0;
        for (int i = 0; i < n; ++i) {
            double denom = 0.0;
            for (int j = 0; j < n; ++j) {
                if (j == i) continue;
                const double m = counts.counts[i][j] + counts.counts[j][i];
                if (m > 0.0) denom += m / (p[i] + p[j]);
            }
            // zero wins pins the strength to the boundary
            next[i] = denom > 0.0 ? wins[i] / denom : 0.0;
        }
        // normalize to mean 1
        double mean = 0.0;
        for (double v : next) mean += v;
        mean /= n;
        if (mean <= 0.0) fail(Status::Runtime, "bt_scores: degenerate strengths");
        for (auto& v : next) v /= mean;

        for (int i = 0; i < n; ++i) {
            const double denom = std::max({p[i], next[i], 1e-12});
            max_rel_change = std::max(max_rel_change, std::abs(next[i] - p[i]) / denom);
        }
        p = next;
        res.log_likelihoods.push_back(log_likelihood(counts, p));
        res.iterations = it + 1;
        if (max_rel_change < tolerance) break;
    }

    res.scores = p;
    return res;
}

PairwiseCounts load_pairwise_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(Status::NotFound, "cannot open pairwise csv: " + path);
    PairwiseCounts counts;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const size_t comma = line.find(',');
        if (comma == std::string::npos || comma == 0 || comma + 1 >= line.size()) {
            fail(Status::CorruptData, "pairwise csv line " + std::to_string(line_no) +
                                          ": expected winner_id,loser_id");
        }
        const std::string winner = line.substr(0, comma);
        const std::string loser = line.substr(comma + 1);
        if (line_no == 1 && winner == "winner_id") continue; // optional header
        counts.add_outcome(winner, loser);
    }
    if (counts.size() == 0) fail(Status::CorruptData, "pairwise csv is empty: " + path);
    return counts;
}

} // namespace dih
