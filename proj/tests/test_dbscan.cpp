#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <random>
#include <set>

#include "levelset/dbscan.hpp"
#include "levelset/density.hpp"
#include "levelset/error.hpp"
#include "levelset/parallel.hpp"
#include "oracles.hpp"

using namespace levelset;

namespace {

const std::vector<double> kLine{0.0, 0.5, 1.0, 5.0, 5.5, 6.0, 10.0};

oracle::Points line_points(const std::vector<double>& xs) {
  oracle::Points p;
  for (double x : xs) p.push_back({x});
  return p;
}

std::vector<std::set<std::size_t>> as_sets(const std::vector<std::vector<std::size_t>>& groups) {
  std::vector<std::set<std::size_t>> out;
  for (const auto& g : groups) out.emplace_back(g.begin(), g.end());
  return out;
}

// Sandwich check: K subset of C subset of the eps-neighbourhood of K.
void check_against_oracle(const oracle::Points& pts, const Clustering& c, std::size_t min_pts, double eps) {
  const auto ref = oracle::dbscan(pts, min_pts, eps);
  for (std::size_t i = 0; i < pts.size(); ++i) REQUIRE(bool(c.core[i]) == ref.core[i]);
  REQUIRE(c.cluster_count == ref.core_partition.size());
  // each cluster's core set is exactly one oracle component
  std::vector<std::set<std::size_t>> cores(c.cluster_count);
  for (std::size_t i = 0; i < pts.size(); ++i)
    if (c.core[i]) cores[static_cast<std::size_t>(c.labels[i])].insert(i);
  std::vector<std::set<std::size_t>> sorted_ref = ref.core_partition;
  std::sort(sorted_ref.begin(), sorted_ref.end());
  std::sort(cores.begin(), cores.end());
  REQUIRE(cores == sorted_ref);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (c.core[i]) continue;
    bool near_core = false;
    for (std::size_t j = 0; j < pts.size(); ++j) near_core = near_core || (ref.core[j] && oracle::dist(pts[i], pts[j]) <= eps);
    if (!near_core) {
      CHECK(c.labels[i] == kNoise);
      continue;
    }
    REQUIRE(c.labels[i] != kNoise);
    // nearest core point, ties to the smaller id
    std::size_t best = pts.size();
    double bd = 1e300;
    for (std::size_t j = 0; j < pts.size(); ++j) {
      if (!ref.core[j]) continue;
      const double d = oracle::dist(pts[i], pts[j]);
      if (d < bd) {
        bd = d;
        best = j;
      }
    }
    CHECK(c.labels[i] == c.labels[best]);
  }
  // labels ordered by smallest member id
  std::int32_t next = 0;
  for (auto l : c.labels) {
    if (l == kNoise) continue;
    CHECK(l <= next);
    if (l == next) ++next;
  }
}

}  // namespace

TEST_CASE("level graph vertices") {
  const NeighborIndex idx(oracle::cloud(line_points(kLine)));
  CHECK(build_level_graph(idx, 2, 0.6).vertices == std::vector<std::size_t>{0, 1, 2, 3, 4, 5});
  CHECK(build_level_graph(idx, 2, 4.0).vertices.size() == 7);
  CHECK(build_level_graph(idx, 2, 0.4).vertices.empty());
  CHECK_THROWS_AS(build_level_graph(idx, 8, 1.0), Error);
  CHECK_THROWS_AS(build_level_graph(idx, 2, 0.0), Error);
  CHECK_THROWS_AS(build_level_graph(idx, 2, -1.0), Error);
}

TEST_CASE("connected components of the level graph") {
  const NeighborIndex idx(oracle::cloud(line_points(kLine)));
  const auto g = build_level_graph(idx, 2, 0.6);
  CHECK(connected_components(g, idx) == std::vector<std::int32_t>{0, 0, 0, 1, 1, 1});
  const auto wide = build_level_graph(idx, 2, 4.5);
  const auto all = connected_components(wide, idx);
  CHECK(std::all_of(all.begin(), all.end(), [](auto l) { return l == 0; }));
  const NeighborIndex one(oracle::cloud({{2.0}}));
  CHECK(connected_components(build_level_graph(one, 1, 1.0), one) == std::vector<std::int32_t>{0});
}

TEST_CASE("dbscan worked examples") {
  const NeighborIndex idx(oracle::cloud(line_points(kLine)));
  const auto c = dbscan_cluster(idx, 2, 0.6);
  CHECK(c.labels == std::vector<std::int32_t>{0, 0, 0, 1, 1, 1, kNoise});
  CHECK(c.cluster_count == 2);
  CHECK(c.noise_count() == 1);
  const auto c1 = dbscan_cluster(idx, 1, 0.6);
  CHECK(c1.labels == std::vector<std::int32_t>{0, 0, 0, 1, 1, 1, 2});
  const NeighborIndex tri(oracle::cloud(line_points({0.0, 0.55, 1.1})));
  const auto c3 = dbscan_cluster(tri, 2, 0.6);
  CHECK(c3.labels == std::vector<std::int32_t>{0, 0, 0});
  CHECK(std::all_of(c3.core.begin(), c3.core.end(), [](auto f) { return f == 1; }));
}

TEST_CASE("border points go to the nearest core point") {
  const NeighborIndex idx(oracle::cloud(line_points({0.0, 0.25, 0.5, 2.0, 2.25, 2.5, 1.0})));
  const auto c = dbscan_cluster(idx, 3, 0.5);
  CHECK(c.core == std::vector<std::uint8_t>{1, 1, 1, 1, 1, 1, 0});
  CHECK(c.labels == std::vector<std::int32_t>{0, 0, 0, 1, 1, 1, 0});
  const NeighborIndex sparse(oracle::cloud(line_points({0.0, 0.2, 0.6, 1.0, 1.2})));
  CHECK(dbscan_cluster(sparse, 2, 0.35).labels[2] == kNoise);
  CHECK(dbscan_cluster(sparse, 3, 0.4).cluster_count == 1);
}

TEST_CASE("nearest-core tie goes to the smaller core id") {
  // points 1 and 3 are core, point 2 is a border point at distance 0.5 from both
  const oracle::Points q{{-0.1}, {0.0}, {0.5}, {1.0}, {1.1}, {-0.05}, {1.05}};
  const NeighborIndex idx(oracle::cloud(q));
  const auto c = dbscan_cluster(idx, 4, 0.5);
  CHECK(c.core == std::vector<std::uint8_t>{0, 1, 0, 1, 0, 0, 0});
  CHECK(c.cluster_count == 2);
  CHECK(c.labels[2] == c.labels[1]);
  CHECK(c.labels[2] != c.labels[3]);
  const auto narrow = dbscan_cluster(idx, 3, 0.45);
  CHECK(narrow.cluster_count == 2);
  CHECK(narrow.labels[2] == kNoise);
}

TEST_CASE("dbscan matches the definitional oracle on random instances") {
  std::mt19937_64 g(1234);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + g() % 200;
    const std::size_t dim = 1 + g() % 3;
    const auto pts = oracle::random_points(g, n, dim, 1.0, trial % 4 == 0);
    const NeighborIndex idx(oracle::cloud(pts));
    const std::size_t min_pts = 1 + g() % std::min<std::size_t>(n, 12);
    const double eps = trial % 4 == 0 ? 0.25 * static_cast<double>(1 + g() % 3)
                                      : std::uniform_real_distribution<double>(0.02, 0.4)(g);
    const auto c = dbscan_cluster(idx, min_pts, eps);
    check_against_oracle(pts, c, min_pts, eps);
    const auto graph = build_level_graph(idx, min_pts, eps);
    std::vector<std::size_t> core_ids;
    for (std::size_t i = 0; i < n; ++i)
      if (c.core[i]) core_ids.push_back(i);
    CHECK(core_ids == graph.vertices);
  }
}

TEST_CASE("components refine as eps grows") {
  std::mt19937_64 g(77);
  for (int trial = 0; trial < 40; ++trial) {
    const auto pts = oracle::random_points(g, 150, 2);
    const NeighborIndex idx(oracle::cloud(pts));
    const double e1 = std::uniform_real_distribution<double>(0.03, 0.15)(g);
    const double e2 = e1 * std::uniform_real_distribution<double>(1.0, 2.0)(g);
    const auto a = dbscan_cluster(idx, 4, e1);
    const auto b = dbscan_cluster(idx, 4, e2);
    std::vector<std::int32_t> image(a.cluster_count, kNoise);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (!a.core[i]) continue;
      REQUIRE(b.core[i]);
      auto& im = image[static_cast<std::size_t>(a.labels[i])];
      if (im == kNoise) im = b.labels[i];
      CHECK(im == b.labels[i]);
    }
  }
}

TEST_CASE("labels do not depend on the worker count") {
  std::mt19937_64 g(9);
  const auto pts = oracle::random_points(g, 3000, 2);
  const NeighborIndex idx(oracle::cloud(pts));
  set_intra_op_workers(1);
  const auto a = dbscan_cluster(idx, 8, 0.03);
  set_intra_op_workers(4);
  const auto b = dbscan_cluster(idx, 8, 0.03);
  set_intra_op_workers(0);
  CHECK(a == b);
  CHECK(a == dbscan_cluster(idx, 8, 0.03));
}

TEST_CASE("canonicalize_labels orders by smallest member") {
  std::vector<std::int32_t> l{5, kNoise, 2, 5, 9, 2};
  CHECK(canonicalize_labels(l) == 3);
  CHECK(l == std::vector<std::int32_t>{0, kNoise, 1, 0, 2, 1});
}

TEST_CASE("members lists") {
  const NeighborIndex idx(oracle::cloud(line_points(kLine)));
  const auto c = dbscan_cluster(idx, 2, 0.6);
  CHECK(as_sets(c.members()) == std::vector<std::set<std::size_t>>{{0, 1, 2}, {3, 4, 5}});
}
