#include "levelset/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <string>

#include "levelset/error.hpp"

namespace levelset {
namespace {
constexpr std::uint32_t kLeafSize = 16;
}

PointCloud::PointCloud(std::size_t dim, std::vector<double> coords)
    : dim_(dim), coords_(std::move(coords)) {
  if (dim_ == 0) throw Error(ErrorCode::InvalidDimension, "point dimension must be positive");
  if (coords_.size() % dim_ != 0) {
    throw Error(ErrorCode::InvalidPoint, "coordinate count " + std::to_string(coords_.size()) +
                                             " is not a multiple of dimension " +
                                             std::to_string(dim_));
  }
  for (std::size_t i = 0; i < coords_.size(); ++i) {
    if (!std::isfinite(coords_[i])) {
      throw Error(ErrorCode::InvalidPoint,
                  "non-finite coordinate at point " + std::to_string(i / dim_));
    }
  }
}

PointCloud PointCloud::from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) throw Error(ErrorCode::EmptyCloud, "no rows");
  const std::size_t dim = rows.front().size();
  std::vector<double> coords;
  coords.reserve(rows.size() * dim);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != dim) {
      throw Error(ErrorCode::InvalidPoint, "row " + std::to_string(i) + " has " +
                                               std::to_string(rows[i].size()) +
                                               " coordinates, expected " + std::to_string(dim));
    }
    coords.insert(coords.end(), rows[i].begin(), rows[i].end());
  }
  return PointCloud(dim, std::move(coords));
}

PointCloud PointCloud::select(std::span<const std::size_t> ids) const {
  std::vector<double> coords;
  coords.reserve(ids.size() * dim_);
  for (std::size_t id : ids) {
    auto p = point(id);
    coords.insert(coords.end(), p.begin(), p.end());
  }
  PointCloud out;
  out.dim_ = dim_;
  out.coords_ = std::move(coords);
  return out;
}

double squared_distance(std::span<const double> a, std::span<const double> b) noexcept {
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double t = a[j] - b[j];
    s += t * t;
  }
  return s;
}

double distance(std::span<const double> a, std::span<const double> b) noexcept {
  return std::sqrt(squared_distance(a, b));
}

NeighborIndex::NeighborIndex(PointCloud cloud) : cloud_(std::move(cloud)) {
  if (cloud_.empty()) throw Error(ErrorCode::EmptyCloud, "cannot index an empty cloud");
  if (cloud_.size() > std::numeric_limits<std::uint32_t>::max() / 2) {
    throw Error(ErrorCode::InvalidArgument, "cloud too large for index");
  }
  perm_.resize(cloud_.size());
  std::iota(perm_.begin(), perm_.end(), 0u);
  nodes_.reserve(2 * cloud_.size() / kLeafSize + 2);
  build(0, static_cast<std::uint32_t>(cloud_.size()));
}

std::int32_t NeighborIndex::build(std::uint32_t begin, std::uint32_t end) {
  const std::size_t dim = cloud_.dim();
  const auto id = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back({begin, end, -1, -1});
  box_lo_.resize(nodes_.size() * dim, std::numeric_limits<double>::infinity());
  box_hi_.resize(nodes_.size() * dim, -std::numeric_limits<double>::infinity());
  double* lo = box_lo_.data() + static_cast<std::size_t>(id) * dim;
  double* hi = box_hi_.data() + static_cast<std::size_t>(id) * dim;
  for (std::uint32_t p = begin; p < end; ++p) {
    auto x = cloud_.point(perm_[p]);
    for (std::size_t j = 0; j < dim; ++j) {
      lo[j] = std::min(lo[j], x[j]);
      hi[j] = std::max(hi[j], x[j]);
    }
  }
  if (end - begin <= kLeafSize) return id;

  std::size_t split_dim = 0;
  double widest = -1.0;
  for (std::size_t j = 0; j < dim; ++j) {
    if (hi[j] - lo[j] > widest) {
      widest = hi[j] - lo[j];
      split_dim = j;
    }
  }
  if (widest <= 0.0) return id;  // all points identical

  const std::uint32_t mid = begin + (end - begin) / 2;
  std::nth_element(perm_.begin() + begin, perm_.begin() + mid, perm_.begin() + end,
                   [&](std::uint32_t a, std::uint32_t b) {
                     const double xa = cloud_.point(a)[split_dim];
                     const double xb = cloud_.point(b)[split_dim];
                     return xa < xb || (xa == xb && a < b);
                   });
  const std::int32_t left = build(begin, mid);
  const std::int32_t right = build(mid, end);
  nodes_[static_cast<std::size_t>(id)].left = left;
  nodes_[static_cast<std::size_t>(id)].right = right;
  return id;
}

double NeighborIndex::box_squared_distance(std::size_t node,
                                           std::span<const double> q) const noexcept {
  const std::size_t dim = cloud_.dim();
  const double* lo = box_lo_.data() + node * dim;
  const double* hi = box_hi_.data() + node * dim;
  double s = 0.0;
  for (std::size_t j = 0; j < dim; ++j) {
    double t = 0.0;
    if (q[j] < lo[j]) {
      t = lo[j] - q[j];
    } else if (q[j] > hi[j]) {
      t = q[j] - hi[j];
    }
    s += t * t;
  }
  return s;
}

void NeighborIndex::check_query(std::span<const double> q) const {
  if (q.size() != cloud_.dim()) {
    throw Error(ErrorCode::InvalidPoint, "query has " + std::to_string(q.size()) +
                                             " coordinates, index dimension is " +
                                             std::to_string(cloud_.dim()));
  }
}

std::vector<double> NeighborIndex::knn_squared(std::span<const double> q, std::size_t k,
                                              bool sorted) const {
  check_query(q);
  const std::size_t n = cloud_.size();
  if (k == 0) throw Error(ErrorCode::InvalidArgument, "k must be positive");
  if (k > n) {
    throw Error(ErrorCode::KTooLarge,
                "k = " + std::to_string(k) + " exceeds n = " + std::to_string(n));
  }

  // A linear scan beats the tree once k is a sizeable fraction of n.
  if (k * 32 >= n) {
    std::vector<double> all(n);
    for (std::size_t i = 0; i < n; ++i) all[i] = squared_distance(q, cloud_.point(i));
    std::nth_element(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k - 1), all.end());
    if (!sorted) return {all[k - 1]};
    all.resize(k);
    std::sort(all.begin(), all.end());
    return all;
  }

  std::priority_queue<double> heap;
  auto worst = [&] {
    return heap.size() < k ? std::numeric_limits<double>::infinity()
                           : heap.top() * (1.0 + 1e-12) + 1e-300;
  };
  // Iterative descent, nearer child first.
  std::vector<std::pair<double, std::size_t>> stack;
  stack.emplace_back(0.0, 0);
  while (!stack.empty()) {
    auto [bound, node] = stack.back();
    stack.pop_back();
    if (bound > worst()) continue;
    const Node& nd = nodes_[node];
    if (nd.left < 0) {
      for (std::uint32_t p = nd.begin; p < nd.end; ++p) {
        const double d2 = squared_distance(q, cloud_.point(perm_[p]));
        if (heap.size() < k) {
          heap.push(d2);
        } else if (d2 < heap.top()) {
          heap.pop();
          heap.push(d2);
        }
      }
      continue;
    }
    const auto l = static_cast<std::size_t>(nd.left);
    const auto r = static_cast<std::size_t>(nd.right);
    const double dl = box_squared_distance(l, q);
    const double dr = box_squared_distance(r, q);
    if (dl <= dr) {
      stack.emplace_back(dr, r);
      stack.emplace_back(dl, l);
    } else {
      stack.emplace_back(dl, l);
      stack.emplace_back(dr, r);
    }
  }
  if (!sorted) return {heap.top()};
  std::vector<double> out(heap.size());
  for (std::size_t i = out.size(); i-- > 0;) {
    out[i] = heap.top();
    heap.pop();
  }
  return out;
}

double NeighborIndex::kth_neighbor_distance(std::span<const double> q, std::size_t k) const {
  return std::sqrt(knn_squared(q, k, false).back());
}

std::vector<double> NeighborIndex::knn_distances(std::span<const double> q, std::size_t k) const {
  auto out = knn_squared(q, k, true);
  for (double& v : out) v = std::sqrt(v);
  return out;
}

std::vector<std::size_t> NeighborIndex::radius_neighbors(std::span<const double> q,
                                                         double eps) const {
  if (!(eps >= 0.0)) throw Error(ErrorCode::InvalidRadius, "radius must be nonnegative");
  std::vector<std::size_t> ids;
  for_each_in_ball(q, eps, [&](std::size_t id, double) { ids.push_back(id); });
  std::sort(ids.begin(), ids.end());
  return ids;
}

std::vector<double> NeighborIndex::subtree_maxima(std::span<const double> values) const {
  if (values.size() != cloud_.size()) {
    throw Error(ErrorCode::InvalidArgument, "one value per point required");
  }
  std::vector<double> out(nodes_.size(), -std::numeric_limits<double>::infinity());
  // Children always have larger ids than their parent.
  for (std::size_t node = nodes_.size(); node-- > 0;) {
    const Node& nd = nodes_[node];
    if (nd.left < 0) {
      for (std::uint32_t p = nd.begin; p < nd.end; ++p) out[node] = std::max(out[node], values[perm_[p]]);
    } else {
      out[node] = std::max(out[static_cast<std::size_t>(nd.left)],
                           out[static_cast<std::size_t>(nd.right)]);
    }
  }
  return out;
}

double NeighborIndex::ball_max(std::span<const double> q, double r, std::span<const double> values,
                               std::span<const double> subtree_max, double stop_at) const {
  check_query(q);
  if (!(r >= 0.0)) throw Error(ErrorCode::InvalidRadius, "radius must be nonnegative");
  double best = -std::numeric_limits<double>::infinity();
  ball_max_rec(0, q, r, pruning_radius_squared(r), values, subtree_max, stop_at, best);
  return best;
}

void NeighborIndex::ball_max_rec(std::size_t node, std::span<const double> q, double r,
                                 double r2_prune, std::span<const double> values,
                                 std::span<const double> subtree_max, double stop_at,
                                 double& best) const {
  if (best >= stop_at || subtree_max[node] <= best) return;
  if (box_squared_distance(node, q) > r2_prune) return;
  const Node& nd = nodes_[node];
  if (nd.left < 0) {
    for (std::uint32_t p = nd.begin; p < nd.end; ++p) {
      const std::size_t id = perm_[p];
      if (values[id] > best && distance(q, cloud_.point(id)) <= r) {
        best = values[id];
        if (best >= stop_at) return;
      }
    }
    return;
  }
  auto l = static_cast<std::size_t>(nd.left);
  auto rr = static_cast<std::size_t>(nd.right);
  if (subtree_max[rr] > subtree_max[l]) std::swap(l, rr);
  ball_max_rec(l, q, r, r2_prune, values, subtree_max, stop_at, best);
  ball_max_rec(rr, q, r, r2_prune, values, subtree_max, stop_at, best);
}

NeighborIndex build_index(PointCloud cloud) { return NeighborIndex(std::move(cloud)); }

double kth_neighbor_distance(const NeighborIndex& index, std::span<const double> q, std::size_t k) {
  return index.kth_neighbor_distance(q, k);
}

std::vector<std::size_t> radius_neighbors(const NeighborIndex& index, std::span<const double> q,
                                          double eps) {
  return index.radius_neighbors(q, eps);
}

}  // namespace levelset
