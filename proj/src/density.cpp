#include "levelset/density.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "levelset/error.hpp"
#include "levelset/parallel.hpp"

namespace levelset {

double unit_ball_volume(double d) {
  if (!(d > 0.0) || !std::isfinite(d)) {
    throw Error(ErrorCode::InvalidDimension, "dimension must be positive, got " + std::to_string(d));
  }
  return std::pow(std::numbers::pi, d / 2.0) / std::tgamma(d / 2.0 + 1.0);
}

double power_d(double r, double d) noexcept {
  if (d == std::floor(d) && d >= 1.0 && d <= 64.0) {
    const int m = static_cast<int>(d);
    double out = r;
    for (int i = 1; i < m; ++i) out *= r;
    return out;
  }
  return std::pow(r, d);
}

double density_at_radius(std::size_t k, std::size_t n, double d, double eps) {
  const double denom = static_cast<double>(n) * unit_ball_volume(d) * power_d(eps, d);
  if (denom == 0.0) return std::numeric_limits<double>::infinity();
  return static_cast<double>(k) / denom;
}

double knn_density(const NeighborIndex& index, std::span<const double> q, std::size_t k, double d) {
  const double vd = unit_ball_volume(d);
  const double rk = index.kth_neighbor_distance(q, k);
  const double denom = static_cast<double>(index.size()) * vd * power_d(rk, d);
  if (denom == 0.0) return std::numeric_limits<double>::infinity();
  return static_cast<double>(k) / denom;
}

std::vector<double> knn_radius_all(const NeighborIndex& index, std::size_t k) {
  if (k > index.size()) {
    throw Error(ErrorCode::KTooLarge,
                "k = " + std::to_string(k) + " exceeds n = " + std::to_string(index.size()));
  }
  std::vector<double> out(index.size());
  parallel_for(index.size(), [&](std::size_t i) {
    out[i] = index.kth_neighbor_distance(index.cloud().point(i), k);
  });
  return out;
}

std::vector<double> knn_density_all(const NeighborIndex& index, std::size_t k, double d) {
  const double vd = unit_ball_volume(d);
  auto out = knn_radius_all(index, k);
  const double n = static_cast<double>(index.size());
  for (double& v : out) {
    const double denom = n * vd * power_d(v, d);
    v = denom == 0.0 ? std::numeric_limits<double>::infinity() : static_cast<double>(k) / denom;
  }
  return out;
}

}  // namespace levelset
