#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "levelset/geometry.hpp"

namespace levelset {

/// Volume of the unit ball in R^d, pi^(d/2) / Gamma(d/2 + 1). Real d > 0.
double unit_ball_volume(double d);

/// r^d. Integral d uses repeated multiplication, which is monotone in r under
/// IEEE rounding; this keeps r_k <= eps  <=>  f_k >= level(eps) exact.
double power_d(double r, double d) noexcept;

/// k / (n * v_d * eps^d): the density value whose k-NN radius is exactly eps.
double density_at_radius(std::size_t k, std::size_t n, double d, double eps);

/// k-NN density estimate f_k(q) = k / (n v_d r_k(q)^d); +infinity when r_k(q) = 0.
double knn_density(const NeighborIndex& index, std::span<const double> q, std::size_t k, double d);

/// f_k at every sample point, in id order.
std::vector<double> knn_density_all(const NeighborIndex& index, std::size_t k, double d);

/// r_k at every sample point, in id order.
std::vector<double> knn_radius_all(const NeighborIndex& index, std::size_t k);

}  // namespace levelset
