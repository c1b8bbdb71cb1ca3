// Brute-force reference implementations used as test oracles. They follow the
// textbook definitions directly and share no code with the library.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <vector>

#include "levelset/geometry.hpp"

namespace oracle {

using Points = std::vector<std::vector<double>>;

inline double dist(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) s += (a[j] - b[j]) * (a[j] - b[j]);
  return std::sqrt(s);
}

inline levelset::PointCloud cloud(const Points& p) { return levelset::PointCloud::from_rows(p); }

inline std::vector<double> sorted_distances(const Points& x, const std::vector<double>& q) {
  std::vector<double> d;
  for (const auto& p : x) d.push_back(dist(p, q));
  std::sort(d.begin(), d.end());
  return d;
}

inline double kth(const Points& x, const std::vector<double>& q, std::size_t k) {
  return sorted_distances(x, q)[k - 1];
}

inline std::vector<std::size_t> ball(const Points& x, const std::vector<double>& q, double eps) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (dist(x[i], q) <= eps) out.push_back(i);
  return out;
}

/// DBSCAN straight from the definitions: core points have at least min_pts
/// samples in the closed eps-ball; clusters are the density-reachability
/// closures of core points.
struct Dbscan {
  std::vector<bool> core;
  std::vector<std::set<std::size_t>> core_partition;  // sorted by smallest id
  std::vector<int> core_cluster;                     // per point, -1 if not core
};

inline Dbscan dbscan(const Points& x, std::size_t min_pts, double eps) {
  const std::size_t n = x.size();
  Dbscan out;
  out.core.assign(n, false);
  out.core_cluster.assign(n, -1);
  for (std::size_t i = 0; i < n; ++i) out.core[i] = ball(x, x[i], eps).size() >= min_pts;
  for (std::size_t s = 0; s < n; ++s) {
    if (!out.core[s] || out.core_cluster[s] >= 0) continue;
    const int id = static_cast<int>(out.core_partition.size());
    std::set<std::size_t> members;
    std::vector<std::size_t> frontier{s};
    out.core_cluster[s] = id;
    while (!frontier.empty()) {
      const std::size_t p = frontier.back();
      frontier.pop_back();
      members.insert(p);
      for (std::size_t q = 0; q < n; ++q) {
        if (out.core[q] && out.core_cluster[q] < 0 && dist(x[p], x[q]) <= eps) {
          out.core_cluster[q] = id;
          frontier.push_back(q);
        }
      }
    }
    out.core_partition.push_back(std::move(members));
  }
  return out;
}

inline double directed_hausdorff(const Points& a, const Points& b) {
  double worst = 0.0;
  for (const auto& p : a) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& q : b) best = std::min(best, dist(p, q));
    worst = std::max(worst, best);
  }
  return worst;
}

inline double hausdorff(const Points& a, const Points& b) {
  return std::max(directed_hausdorff(a, b), directed_hausdorff(b, a));
}

/// Minimum total cost of a maximum-cardinality matching, by enumerating every
/// injective map from the smaller side into the larger side.
inline double best_assignment_cost(const std::vector<std::vector<double>>& cost) {
  const std::size_t r = cost.size();
  const std::size_t c = r ? cost[0].size() : 0;
  if (r == 0 || c == 0) return 0.0;
  const bool by_rows = r <= c;
  const std::size_t small = by_rows ? r : c, large = by_rows ? c : r;
  std::vector<std::size_t> perm(large);
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double total = 0.0;
    for (std::size_t i = 0; i < small; ++i) total += by_rows ? cost[i][perm[i]] : cost[perm[i]][i];
    best = std::min(best, total);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

inline Points random_points(std::mt19937_64& g, std::size_t n, std::size_t dim, double scale = 1.0,
                            bool lattice = false) {
  Points p(n, std::vector<double>(dim));
  std::uniform_real_distribution<double> u(0.0, scale);
  std::uniform_int_distribution<int> cell(0, 6);
  for (auto& x : p)
    for (auto& v : x) v = lattice ? 0.25 * cell(g) : u(g);
  return p;
}

}  // namespace oracle
