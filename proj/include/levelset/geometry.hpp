#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace levelset {

/// n points in R^D, stored row-major. Coordinates are always finite.
class PointCloud {
 public:
  PointCloud() = default;

  /// `coords` holds n*dim values, point i at [i*dim, (i+1)*dim).
  PointCloud(std::size_t dim, std::vector<double> coords);

  static PointCloud from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t size() const noexcept { return dim_ == 0 ? 0 : coords_.size() / dim_; }
  std::size_t dim() const noexcept { return dim_; }
  bool empty() const noexcept { return coords_.empty(); }

  std::span<const double> point(std::size_t i) const noexcept {
    return {coords_.data() + i * dim_, dim_};
  }
  std::span<const double> data() const noexcept { return coords_; }

  /// Subset in the given id order.
  PointCloud select(std::span<const std::size_t> ids) const;

  friend bool operator==(const PointCloud&, const PointCloud&) = default;

 private:
  std::size_t dim_ = 0;
  std::vector<double> coords_;
};

/// Euclidean distance, summed in coordinate order. Every query of the index is
/// defined in terms of this function, so results match a linear scan bit for bit.
double distance(std::span<const double> a, std::span<const double> b) noexcept;
double squared_distance(std::span<const double> a, std::span<const double> b) noexcept;

/// Exact k-NN and closed-ball queries over an owned, immutable PointCloud.
/// Backed by a kd-tree; const member functions are safe to call concurrently.
class NeighborIndex {
 public:
  explicit NeighborIndex(PointCloud cloud);

  const PointCloud& cloud() const noexcept { return cloud_; }
  std::size_t size() const noexcept { return cloud_.size(); }
  std::size_t dim() const noexcept { return cloud_.dim(); }

  /// r_k(q): the k-th smallest of the n distances |q - x_i| (duplicates kept).
  double kth_neighbor_distance(std::span<const double> q, std::size_t k) const;

  /// The k smallest distances from q, ascending.
  std::vector<double> knn_distances(std::span<const double> q, std::size_t k) const;

  /// Ids with |q - x_i| <= eps, ascending.
  std::vector<std::size_t> radius_neighbors(std::span<const double> q, double eps) const;

  /// Calls visit(id, distance) for every point with |q - x_i| <= eps, in tree order.
  template <typename Visit>
  void for_each_in_ball(std::span<const double> q, double eps, Visit&& visit) const;

  /// Per-node maxima of `values` (indexed by point id), for ball_max.
  std::vector<double> subtree_maxima(std::span<const double> values) const;

  /// Largest values[i] over points with |q - x_i| <= r. Returns as soon as a
  /// value >= stop_at is found; the exact maximum is returned when it is below
  /// stop_at. Returns -infinity for an empty ball.
  double ball_max(std::span<const double> q, double r, std::span<const double> values,
                  std::span<const double> subtree_max, double stop_at) const;

 private:
  struct Node {
    std::uint32_t begin = 0;
    std::uint32_t end = 0;
    std::int32_t left = -1;
    std::int32_t right = -1;
  };

  std::int32_t build(std::uint32_t begin, std::uint32_t end);
  double box_squared_distance(std::size_t node, std::span<const double> q) const noexcept;
  void check_query(std::span<const double> q) const;
  // Sorted k smallest squared distances, or just the k-th when !sorted.
  std::vector<double> knn_squared(std::span<const double> q, std::size_t k, bool sorted) const;
  void ball_max_rec(std::size_t node, std::span<const double> q, double r, double r2_prune,
                    std::span<const double> values, std::span<const double> subtree_max,
                    double stop_at, double& best) const;

  template <typename Visit>
  void ball_rec(std::size_t node, std::span<const double> q, double eps, double r2_prune,
                Visit& visit) const;

  PointCloud cloud_;
  std::vector<std::uint32_t> perm_;
  std::vector<Node> nodes_;
  std::vector<double> box_lo_;  // nodes_.size() * dim
  std::vector<double> box_hi_;
};

NeighborIndex build_index(PointCloud cloud);
double kth_neighbor_distance(const NeighborIndex& index, std::span<const double> q, std::size_t k);
std::vector<std::size_t> radius_neighbors(const NeighborIndex& index, std::span<const double> q,
                                          double eps);

// Squared-distance pruning keeps a relative margin so that box bounds never
// exclude a point the exact distance test would accept.
inline double pruning_radius_squared(double r) noexcept { return r * r * (1.0 + 1e-12) + 1e-300; }

template <typename Visit>
void NeighborIndex::for_each_in_ball(std::span<const double> q, double eps, Visit&& visit) const {
  check_query(q);
  if (nodes_.empty()) return;
  ball_rec(0, q, eps, pruning_radius_squared(eps), visit);
}

template <typename Visit>
void NeighborIndex::ball_rec(std::size_t node, std::span<const double> q, double eps,
                             double r2_prune, Visit& visit) const {
  if (box_squared_distance(node, q) > r2_prune) return;
  const Node& nd = nodes_[node];
  if (nd.left < 0) {
    for (std::uint32_t p = nd.begin; p < nd.end; ++p) {
      const std::size_t id = perm_[p];
      const double d = distance(q, cloud_.point(id));
      if (d <= eps) visit(id, d);
    }
    return;
  }
  ball_rec(static_cast<std::size_t>(nd.left), q, eps, r2_prune, visit);
  ball_rec(static_cast<std::size_t>(nd.right), q, eps, r2_prune, visit);
}

}  // namespace levelset
