#pragma once

#include <span>
#include <vector>

namespace fedsim {

/// Local Outlier Factor of `query` against a reference set.
///
/// Distances are Euclidean. k-dist of a point p over a set S is the
/// distance to its k-th nearest neighbor in S excluding p (clamped to
/// |S|-1 when S is too small); the k-neighborhood includes every point at
/// distance <= k-dist, ties included. Reachability distance of p from o is
/// max(k-dist(o), d(p,o)); local reachability density is the inverse mean
/// reachability, guarded below by 1e-12 so coincident points score 1.
/// The query's neighborhood is drawn from `neighbors`; each neighbor's
/// density is computed within `neighbors` alone. Values above 1 mean the
/// query is less dense than its neighborhood.
///
/// Requires 1 <= k <= |neighbors| and |neighbors| >= 2.
double lof_score(std::span<const double> query,
                 const std::vector<std::vector<double>>& neighbors, int k);

}  // namespace fedsim
