#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "levelset/geometry.hpp"

namespace levelset {

inline constexpr std::int32_t kNoise = -1;

/// G(k, eps): vertices are the samples with r_k <= eps; an edge joins two
/// vertices at distance <= eps. Edges are never materialized.
struct LevelGraph {
  std::vector<std::size_t> vertices;  // ascending ids
  std::vector<std::uint8_t> is_vertex;  // per point
  std::size_t k = 0;
  double eps = 0.0;
};

/// DBSCAN output. Labels are cluster ids 0..cluster_count-1 or kNoise; ids are
/// ordered by the smallest member point id.
struct Clustering {
  std::vector<std::int32_t> labels;
  std::vector<std::uint8_t> core;
  std::size_t min_pts = 0;
  double eps = 0.0;
  std::size_t cluster_count = 0;

  std::vector<std::vector<std::size_t>> members() const;
  std::size_t noise_count() const;
  friend bool operator==(const Clustering&, const Clustering&) = default;
};

LevelGraph build_level_graph(const NeighborIndex& index, std::size_t k, double eps);

/// Component label for each entry of graph.vertices (same order).
std::vector<std::int32_t> connected_components(const LevelGraph& graph, const NeighborIndex& index);

Clustering dbscan_cluster(const NeighborIndex& index, std::size_t min_pts, double eps);

/// Attaches every non-core point to the component of its nearest core point
/// within eps (distance ties go to the smaller core id); others become noise.
/// `core_component` is indexed by point id and ignored for non-core points.
/// Labels are renumbered by smallest member id.
Clustering assign_border_points(const NeighborIndex& index, std::vector<std::uint8_t> core,
                                const std::vector<std::int32_t>& core_component,
                                std::size_t min_pts, double eps);

/// Renumbers non-noise labels so ids increase with each cluster's smallest
/// member id. Returns the number of clusters.
std::size_t canonicalize_labels(std::vector<std::int32_t>& labels);

}  // namespace levelset
