#include "levelset/pruning.hpp"

#include <string>

#include "levelset/error.hpp"

namespace levelset {

PrunedClustering merge_by_coarse(const NeighborIndex& index, const Clustering& fine,
                                 const Clustering& coarse) {
  const std::size_t n = index.size();
  if (fine.labels.size() != n || coarse.labels.size() != n) {
    throw Error(ErrorCode::InvalidArgument, "clusterings do not match the index");
  }
  if (coarse.eps < fine.eps) {
    throw Error(ErrorCode::EpsOrderViolation, "coarse radius is smaller than the fine radius");
  }

  // coarse label carried by each fine cluster's core points
  std::vector<std::int32_t> group(fine.cluster_count, kNoise);
  for (std::size_t i = 0; i < n; ++i) {
    if (!fine.core[i]) continue;
    if (!coarse.core[i]) {
      throw Error(ErrorCode::InternalInvariant,
                  "point " + std::to_string(i) + " is core at eps but not at eps_tilde");
    }
    const auto c = static_cast<std::size_t>(fine.labels[i]);
    if (group[c] == kNoise) {
      group[c] = coarse.labels[i];
    } else if (group[c] != coarse.labels[i]) {
      throw Error(ErrorCode::InternalInvariant,
                  "cluster " + std::to_string(c) + " spans several coarse clusters");
    }
  }

  // Each border point keeps its nearest core point, so re-deriving borders
  // against the merged core sets is a relabelling of the fine clustering.
  PrunedClustering out;
  out.eps = fine.eps;
  out.eps_tilde = coarse.eps;
  out.original_count = fine.cluster_count;
  out.clustering = fine;
  for (auto& l : out.clustering.labels) {
    if (l != kNoise) l = group[static_cast<std::size_t>(l)];
  }
  out.clustering.cluster_count = canonicalize_labels(out.clustering.labels);

  out.merge_map.assign(fine.cluster_count, kNoise);
  for (std::size_t i = 0; i < n; ++i) {
    if (fine.labels[i] != kNoise) {
      out.merge_map[static_cast<std::size_t>(fine.labels[i])] = out.clustering.labels[i];
    }
  }
  return out;
}

PrunedClustering prune_false_clusters(const NeighborIndex& index, std::size_t k, double eps,
                                      double eps_tilde) {
  if (eps_tilde < eps) {
    throw Error(ErrorCode::EpsOrderViolation, "eps_tilde " + std::to_string(eps_tilde) +
                                                  " is smaller than eps " + std::to_string(eps));
  }
  const Clustering fine = dbscan_cluster(index, k, eps);
  const Clustering coarse = eps_tilde == eps ? fine : dbscan_cluster(index, k, eps_tilde);
  return merge_by_coarse(index, fine, coarse);
}

}  // namespace levelset
