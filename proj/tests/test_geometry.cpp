#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <limits>
#include <random>
#include <thread>

#include "levelset/error.hpp"
#include "levelset/geometry.hpp"
#include "oracles.hpp"

using namespace levelset;

namespace {

NeighborIndex line(std::vector<double> xs) {
  oracle::Points p;
  for (double x : xs) p.push_back({x});
  return NeighborIndex(oracle::cloud(p));
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::Inconsistent;
}

}  // namespace

TEST_CASE("point cloud validation") {
  CHECK(PointCloud(2, {0, 1, 2, 3}).size() == 2);
  CHECK(code_of([] { PointCloud(2, {0, 1, 2}); }) == ErrorCode::InvalidPoint);
  CHECK(code_of([] { PointCloud(1, {0, std::nan("")}); }) == ErrorCode::InvalidPoint);
  CHECK(code_of([] { PointCloud(1, {std::numeric_limits<double>::infinity()}); }) == ErrorCode::InvalidPoint);
  CHECK(code_of([] { PointCloud::from_rows({{0, 1}, {2}}); }) == ErrorCode::InvalidPoint);
  CHECK(code_of([] { PointCloud::from_rows({}); }) == ErrorCode::EmptyCloud);
  const auto c = PointCloud::from_rows({{0, 1}, {2, 3}, {4, 5}});
  const std::vector<std::size_t> ids{2, 0};
  CHECK(c.select(ids) == PointCloud::from_rows({{4, 5}, {0, 1}}));
}

TEST_CASE("build_index") {
  CHECK(code_of([] { NeighborIndex idx(PointCloud(2, {})); }) == ErrorCode::EmptyCloud);
  const auto idx = build_index(PointCloud::from_rows({{0.0}, {1.0}, {3.0}}));
  CHECK(idx.size() == 3);
  CHECK(idx.cloud() == PointCloud::from_rows({{0.0}, {1.0}, {3.0}}));
}

TEST_CASE("kth_neighbor_distance on {0,1,3}") {
  const auto idx = line({0, 1, 3});
  const std::vector<double> q{0.0};
  CHECK(kth_neighbor_distance(idx, q, 1) == 0.0);
  CHECK(kth_neighbor_distance(idx, q, 2) == 1.0);
  CHECK(kth_neighbor_distance(idx, q, 3) == 3.0);
  CHECK(code_of([&] { kth_neighbor_distance(idx, q, 4); }) == ErrorCode::KTooLarge);
  CHECK(code_of([&] { kth_neighbor_distance(idx, q, 0); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("radius_neighbors on {0,1,3}") {
  const auto idx = line({0, 1, 3});
  CHECK(radius_neighbors(idx, std::vector<double>{0.0}, 1.0) == std::vector<std::size_t>{0, 1});
  CHECK(radius_neighbors(idx, std::vector<double>{0.0}, 0.5) == std::vector<std::size_t>{0});
  CHECK(radius_neighbors(idx, std::vector<double>{2.0}, 1.0) == std::vector<std::size_t>{1, 2});
  CHECK(code_of([&] { radius_neighbors(idx, std::vector<double>{0.0}, -1.0); }) == ErrorCode::InvalidRadius);
}

TEST_CASE("duplicates count toward k") {
  const auto idx = line({2, 2, 2, 7});
  CHECK(idx.kth_neighbor_distance(std::vector<double>{2.0}, 3) == 0.0);
  CHECK(idx.kth_neighbor_distance(std::vector<double>{2.0}, 4) == 5.0);
}

TEST_CASE("queries match a linear scan on random and tied clouds") {
  std::mt19937_64 g(11);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + g() % 200;
    const std::size_t dim = 1 + g() % 5;
    const bool lattice = trial % 2 == 1;  // many exact ties
    const auto pts = oracle::random_points(g, n, dim, 1.0, lattice);
    const NeighborIndex idx(oracle::cloud(pts));
    for (int q = 0; q < 5; ++q) {
      std::vector<double> query = q % 2 ? pts[g() % n] : oracle::random_points(g, 1, dim, 1.0, lattice)[0];
      const std::size_t k = 1 + g() % n;
      const auto all = oracle::sorted_distances(pts, query);
      CHECK(idx.kth_neighbor_distance(query, k) == all[k - 1]);
      const auto knn = idx.knn_distances(query, k);
      CHECK(std::equal(knn.begin(), knn.end(), all.begin()));
      const double eps = lattice ? 0.25 * static_cast<double>(g() % 5) : all[g() % n];
      CHECK(idx.radius_neighbors(query, eps) == oracle::ball(pts, query, eps));
    }
  }
}

TEST_CASE("r_k is nondecreasing in k and dual to ball counts") {
  std::mt19937_64 g(5);
  const auto pts = oracle::random_points(g, 150, 3);
  const NeighborIndex idx(oracle::cloud(pts));
  for (int t = 0; t < 30; ++t) {
    const auto q = oracle::random_points(g, 1, 3)[0];
    double prev = 0.0;
    for (std::size_t k = 1; k <= pts.size(); ++k) {
      const double r = idx.kth_neighbor_distance(q, k);
      CHECK(r >= prev);
      prev = r;
    }
    const double eps = 0.3;
    const std::size_t count = idx.radius_neighbors(q, eps).size();
    for (std::size_t k = 1; k <= pts.size(); k += 7) {
      CHECK((count >= k) == (idx.kth_neighbor_distance(q, k) <= eps));
    }
  }
}

TEST_CASE("rigid motions leave queries unchanged") {
  std::mt19937_64 g(8);
  const auto pts = oracle::random_points(g, 120, 2);
  const double th = 0.7, c = std::cos(th), s = std::sin(th);
  oracle::Points moved;
  for (const auto& p : pts) moved.push_back({c * p[0] - s * p[1] + 3.0, s * p[0] + c * p[1] - 1.0});
  const NeighborIndex a(oracle::cloud(pts)), b(oracle::cloud(moved));
  for (std::size_t i = 0; i < pts.size(); i += 5) {
    for (std::size_t k : {1, 2, 10, 60}) {
      CHECK(std::abs(a.kth_neighbor_distance(pts[i], k) - b.kth_neighbor_distance(moved[i], k)) <= 1e-9);
    }
  }
}

TEST_CASE("ball_max agrees with a scan") {
  std::mt19937_64 g(3);
  const auto pts = oracle::random_points(g, 300, 2);
  const NeighborIndex idx(oracle::cloud(pts));
  std::vector<double> values(pts.size());
  for (auto& v : values) v = std::uniform_real_distribution<double>(-1, 1)(g);
  const auto sub = idx.subtree_maxima(values);
  for (int t = 0; t < 100; ++t) {
    const auto q = oracle::random_points(g, 1, 2)[0];
    const double r = 0.02 + 0.3 * std::uniform_real_distribution<double>()(g);
    double expect = -std::numeric_limits<double>::infinity();
    for (std::size_t i : oracle::ball(pts, q, r)) expect = std::max(expect, values[i]);
    CHECK(idx.ball_max(q, r, values, sub, std::numeric_limits<double>::infinity()) == expect);
    // early exit still reports a value at or above the threshold
    const double got = idx.ball_max(q, r, values, sub, 0.0);
    CHECK(((expect >= 0.0) == (got >= 0.0)));
    if (expect < 0.0) CHECK(got == expect);
  }
  CHECK(idx.ball_max(std::vector<double>{50.0, 50.0}, 0.1, values, sub, 1.0) ==
        -std::numeric_limits<double>::infinity());
}

TEST_CASE("concurrent reads are consistent") {
  std::mt19937_64 g(21);
  const auto pts = oracle::random_points(g, 500, 3);
  const NeighborIndex idx(oracle::cloud(pts));
  std::vector<double> a(pts.size()), b(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) a[i] = idx.kth_neighbor_distance(pts[i], 9);
  std::vector<std::thread> ts;
  for (int w = 0; w < 4; ++w) {
    ts.emplace_back([&, w] {
      for (std::size_t i = static_cast<std::size_t>(w); i < pts.size(); i += 4) b[i] = idx.kth_neighbor_distance(pts[i], 9);
    });
  }
  for (auto& t : ts) t.join();
  CHECK(a == b);
}
