#pragma once

#include <cstdint>
#include <vector>

#include "levelset/dbscan.hpp"
#include "levelset/geometry.hpp"

namespace levelset {

/// Result of the false-cluster removal pass.
struct PrunedClustering {
  Clustering clustering;              // merged labels, radius eps
  std::vector<std::int32_t> merge_map;  // original cluster id -> merged id
  double eps = 0.0;
  double eps_tilde = 0.0;
  std::size_t original_count = 0;
};

/// Clusters at (k, eps) are merged whenever their core points fall in the same
/// cluster of a second run at (k, eps_tilde). Requires eps_tilde >= eps.
PrunedClustering prune_false_clusters(const NeighborIndex& index, std::size_t k, double eps,
                                      double eps_tilde);

/// The merge step alone: groups the clusters of `fine` by the `coarse` label of
/// their core points. Every fine core point must be a coarse core point.
PrunedClustering merge_by_coarse(const NeighborIndex& index, const Clustering& fine,
                                 const Clustering& coarse);

}  // namespace levelset
