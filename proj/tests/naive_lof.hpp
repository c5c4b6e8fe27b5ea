#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

// Naive reference LOF, written independently of the library version:
// every quantity is recomputed from fully sorted distance lists, with the
// query treated as point index n. Test-only oracle.
inline double naive_lof(const std::vector<double>& query,
                        const std::vector<std::vector<double>>& neighbors, int k) {
    const int n = static_cast<int>(neighbors.size());
    auto point = [&](int i) -> const std::vector<double>& {
        return i == n ? query : neighbors[i];
    };
    auto dist = [&](int a, int b) {
        double s = 0.0;
        for (std::size_t j = 0; j < query.size(); ++j) {
            const double d = point(a)[j] - point(b)[j];
            s += d * d;
        }
        return std::sqrt(s);
    };
    auto kdist = [&](int i) {
        std::vector<double> ds;
        for (int j = 0; j < n; ++j)
            if (j != i) ds.push_back(dist(i, j));
        std::sort(ds.begin(), ds.end());
        const int kk = std::min<int>(k, static_cast<int>(ds.size()));
        return ds[kk - 1];
    };
    auto neighborhood = [&](int i) {
        const double kd = kdist(i);
        std::vector<int> ids;
        for (int j = 0; j < n; ++j)
            if (j != i && dist(i, j) <= kd) ids.push_back(j);
        return ids;
    };
    auto lrd = [&](int i) {
        double sum = 0.0;
        const std::vector<int> nb = neighborhood(i);
        for (int j : nb) sum += std::max(kdist(j), dist(i, j));
        return 1.0 / std::max(sum / static_cast<double>(nb.size()), 1e-12);
    };
    const std::vector<int> nb = neighborhood(n);
    double ratio = 0.0;
    for (int j : nb) ratio += lrd(j) / lrd(n);
    return ratio / static_cast<double>(nb.size());
}
