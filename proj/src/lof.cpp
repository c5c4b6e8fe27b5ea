#include "fedsim/lof.hpp"

#include <algorithm>
#include <cmath>

#include "fedsim/errors.hpp"

namespace fedsim {

namespace {

constexpr double kDensityGuard = 1e-12;

double euclidean(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

// k-th smallest of `values` with k clamped to the available count.
double kth_smallest(std::vector<double> values, int k) {
    const int idx = std::min<int>(k, static_cast<int>(values.size())) - 1;
    std::nth_element(values.begin(), values.begin() + idx, values.end());
    return values[idx];
}

}  // namespace

double lof_score(std::span<const double> query,
                 const std::vector<std::vector<double>>& neighbors, int k) {
    const int n = static_cast<int>(neighbors.size());
    if (n < 2) throw ConfigError("lof_score: need at least 2 neighbors");
    if (k < 1 || k > n) throw ConfigError("lof_score: k out of range");
    for (const auto& p : neighbors)
        if (p.size() != query.size()) throw InputError("lof_score: dimension mismatch");

    // pairwise distances within the reference set
    std::vector<std::vector<double>> dist(n, std::vector<double>(n, 0.0));
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            dist[i][j] = dist[j][i] = euclidean(neighbors[i], neighbors[j]);

    // k-dist of each reference point over the others
    std::vector<double> kdist(n);
    for (int i = 0; i < n; ++i) {
        std::vector<double> others;
        others.reserve(n - 1);
        for (int j = 0; j < n; ++j)
            if (j != i) others.push_back(dist[i][j]);
        kdist[i] = kth_smallest(std::move(others), k);
    }

    // local reachability density of each reference point
    std::vector<double> lrd(n);
    for (int i = 0; i < n; ++i) {
        double reach_sum = 0.0;
        int count = 0;
        for (int j = 0; j < n; ++j) {
            if (j == i || dist[i][j] > kdist[i]) continue;
            reach_sum += std::max(kdist[j], dist[i][j]);
            ++count;
        }
        lrd[i] = 1.0 / std::max(reach_sum / count, kDensityGuard);
    }

    // query side: neighborhood and density over the reference set
    std::vector<double> qdist(n);
    for (int i = 0; i < n; ++i) qdist[i] = euclidean(query, neighbors[i]);
    const double q_kdist = kth_smallest(qdist, k);

    double reach_sum = 0.0, ratio_sum = 0.0;
    int count = 0;
    for (int i = 0; i < n; ++i) {
        if (qdist[i] > q_kdist) continue;
        reach_sum += std::max(kdist[i], qdist[i]);
        ++count;
    }
    const double lrd_query = 1.0 / std::max(reach_sum / count, kDensityGuard);
    for (int i = 0; i < n; ++i) {
        if (qdist[i] > q_kdist) continue;
        ratio_sum += lrd[i] / lrd_query;
    }
    return ratio_sum / count;
}

}  // namespace fedsim
