#pragma once

#include <cstddef>
#include <vector>

namespace curator {

// Agglomerative clustering with average linkage (UPGMA), merged greedily:
// always the globally lowest-linkage pair, exact-distance ties resolved
// toward the pair whose (sorted) smallest member indices compare lower.
// Returns one cluster id per point; ids are the smallest member index of
// the cluster, so labels are deterministic and stable across runs.
//
// Points are row vectors of equal dimension. Stops when `target_clusters`
// remain (or when every point is a singleton if target >= n).
std::vector<std::size_t> cluster_average_linkage(
    const std::vector<std::vector<double>>& points, std::size_t target_clusters);

}  // namespace curator
