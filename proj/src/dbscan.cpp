#include "levelset/dbscan.hpp"

#include <limits>
#include <string>

#include "levelset/density.hpp"
#include "levelset/error.hpp"
#include "levelset/parallel.hpp"
#include "levelset/union_find.hpp"

namespace levelset {
namespace {

void check_level_params(const NeighborIndex& index, std::size_t k, double eps) {
  if (k == 0) throw Error(ErrorCode::InvalidArgument, "k must be positive");
  if (k > index.size()) {
    throw Error(ErrorCode::KTooLarge,
                "k = " + std::to_string(k) + " exceeds n = " + std::to_string(index.size()));
  }
  if (!(eps > 0.0)) throw Error(ErrorCode::InvalidRadius, "eps must be positive");
}

}  // namespace

std::vector<std::vector<std::size_t>> Clustering::members() const {
  std::vector<std::vector<std::size_t>> out(cluster_count);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != kNoise) out[static_cast<std::size_t>(labels[i])].push_back(i);
  }
  return out;
}

std::size_t Clustering::noise_count() const {
  std::size_t c = 0;
  for (auto l : labels) c += (l == kNoise);
  return c;
}

std::size_t canonicalize_labels(std::vector<std::int32_t>& labels) {
  std::vector<std::int32_t> remap;
  std::int32_t next = 0;
  for (auto& l : labels) {
    if (l == kNoise) continue;
    const auto old = static_cast<std::size_t>(l);
    if (old >= remap.size()) remap.resize(old + 1, kNoise);
    if (remap[old] == kNoise) remap[old] = next++;
    l = remap[old];
  }
  return static_cast<std::size_t>(next);
}

LevelGraph build_level_graph(const NeighborIndex& index, std::size_t k, double eps) {
  check_level_params(index, k, eps);
  const auto radii = knn_radius_all(index, k);
  LevelGraph g;
  g.k = k;
  g.eps = eps;
  g.is_vertex.assign(index.size(), 0);
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (radii[i] <= eps) {
      g.is_vertex[i] = 1;
      g.vertices.push_back(i);
    }
  }
  return g;
}

std::vector<std::int32_t> connected_components(const LevelGraph& graph, const NeighborIndex& index) {
  if (graph.is_vertex.size() != index.size()) {
    throw Error(ErrorCode::InvalidArgument, "graph does not belong to this index");
  }
  DisjointSets sets(index.size());
  for (std::size_t i : graph.vertices) {
    index.for_each_in_ball(index.cloud().point(i), graph.eps, [&](std::size_t j, double) {
      if (j > i && graph.is_vertex[j]) sets.unite(i, j);
    });
  }
  std::vector<std::int32_t> root_label(index.size(), kNoise);
  std::vector<std::int32_t> out;
  out.reserve(graph.vertices.size());
  std::int32_t next = 0;
  for (std::size_t i : graph.vertices) {
    const std::size_t root = sets.find(i);
    if (root_label[root] == kNoise) root_label[root] = next++;
    out.push_back(root_label[root]);
  }
  return out;
}

Clustering assign_border_points(const NeighborIndex& index, std::vector<std::uint8_t> core,
                                const std::vector<std::int32_t>& core_component,
                                std::size_t min_pts, double eps) {
  const std::size_t n = index.size();
  Clustering c;
  c.min_pts = min_pts;
  c.eps = eps;
  c.labels.assign(n, kNoise);
  parallel_for(n, [&](std::size_t i) {
    if (core[i]) {
      c.labels[i] = core_component[i];
      return;
    }
    double best_d = std::numeric_limits<double>::infinity();
    std::size_t best_j = n;
    index.for_each_in_ball(index.cloud().point(i), eps, [&](std::size_t j, double d) {
      if (!core[j]) return;
      if (d < best_d || (d == best_d && j < best_j)) {
        best_d = d;
        best_j = j;
      }
    });
    if (best_j < n) c.labels[i] = core_component[best_j];
  });
  c.core = std::move(core);
  c.cluster_count = canonicalize_labels(c.labels);
  return c;
}

Clustering dbscan_cluster(const NeighborIndex& index, std::size_t min_pts, double eps) {
  const LevelGraph graph = build_level_graph(index, min_pts, eps);
  const auto comp = connected_components(graph, index);
  std::vector<std::int32_t> core_component(index.size(), kNoise);
  for (std::size_t v = 0; v < graph.vertices.size(); ++v) core_component[graph.vertices[v]] = comp[v];
  return assign_border_points(index, graph.is_vertex, core_component, min_pts, eps);
}

}  // namespace levelset
