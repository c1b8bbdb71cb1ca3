#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "levelset/geometry.hpp"

namespace levelset {

enum class DomainKind { Circle, Sphere2, FullDim };

/// Support of the generated density. Circles and 2-spheres live in their own
/// plane/space and are mapped into R^D by x = rotation * [p, 0...] + offset.
/// FullDim is an axis-aligned box in R^D (D <= 3).
struct Domain {
  DomainKind kind = DomainKind::FullDim;
  double radius = 1.0;
  std::size_t ambient_dim = 2;
  std::vector<double> offset;    // D values, empty = origin
  std::vector<double> rotation;  // D*D row-major orthonormal, empty = identity
  std::vector<double> box_lo;
  std::vector<double> box_hi;

  /// Coordinates of a native point: 1 (angle) for circles, 3 (unit vector) for
  /// spheres, D for boxes.
  std::size_t native_size() const noexcept;
  std::size_t intrinsic_dim() const noexcept;
  /// Length / area / volume of the domain.
  double volume() const;
};

/// Plateau-power profile around a center: height inside plateau_radius, then
/// max(floor, height - decay_coefficient * t^decay_exponent) at distance t past it.
struct Bump {
  std::vector<double> center;  // native coordinates
  double plateau_radius = 0.0;
  double height = 1.0;
  double decay_coefficient = 1.0;
  double decay_exponent = 1.0;
  double floor = 0.0;
};

struct DensitySpec {
  Domain domain;
  std::vector<Bump> bumps;
  double floor = 0.0;
  double valley_width = 0.0;
  double valley_gap = 0.0;
  std::optional<double> normalization;  // Z; set by normalize()
  std::optional<double> normalization_rel_error;  // Richardson estimate
};

/// Throws InvalidSpec naming the offending field.
void validate_spec(const DensitySpec& spec);
DensitySpec spec_from_json(const nlohmann::json& j);
nlohmann::json spec_to_json(const DensitySpec& spec);

/// Geodesic distance on the domain (arc length, great circle, or Euclidean).
double domain_distance(const Domain& domain, std::span<const double> a, std::span<const double> b);

/// Profile value before normalization at a native point.
double unnormalized_density(const DensitySpec& spec, std::span<const double> native);

/// Largest unnormalized value, max(floor, heights).
double unnormalized_max(const DensitySpec& spec);

/// Sets Z by quadrature with `quadrature_resolution` (>= 1000) nodes per unit
/// dimension and records a Richardson error estimate.
DensitySpec normalize(DensitySpec spec, std::size_t quadrature_resolution = 1000);

/// Quadrature of the normalized density over the domain (should be 1).
double integrate_density(const DensitySpec& spec, std::size_t quadrature_resolution);

std::vector<double> embed(const Domain& domain, std::span<const double> native);
/// Inverse of embed; throws OffManifold when x is farther than `tol` from the domain.
std::vector<double> to_native(const Domain& domain, std::span<const double> x, double tol = 1e-6);

/// Normalized density at an ambient point on the domain.
double true_density(const DensitySpec& spec, std::span<const double> x);
double true_density_native(const DensitySpec& spec, std::span<const double> native);

/// min over bumps of height / Z: the plateau level at which every bump has a component.
double suggested_lambda(const DensitySpec& spec);
/// Smallest decay exponent among bumps.
double spec_beta(const DensitySpec& spec);
/// c / Z for the bumps sitting at `lambda` (smallest one).
double spec_c_beta(const DensitySpec& spec, double lambda);

struct AnalyticComponent {
  std::string kind;  // "arc", "cap" or "ball"
  std::vector<double> center;  // native
  double radius = 0.0;         // domain distance
};

struct TruthComponent {
  std::size_t id = 0;
  PointCloud points;  // ambient coordinates
  std::optional<AnalyticComponent> analytic;
};

/// Connected components of {f >= lambda}, as grid nodes of pitch <= resolution
/// (plus boundary samples when the component is a single bump region).
std::vector<TruthComponent> ground_truth_components(const DensitySpec& spec, double lambda,
                                                    double resolution, double* pitch = nullptr);

struct SyntheticDataset {
  PointCloud cloud;
  std::vector<double> true_density_at_points;
  DensitySpec spec;
  std::uint64_t seed = 0;
  double suggested_lambda = 0.0;
  std::size_t true_dim = 0;
  double true_beta = 0.0;
  std::vector<TruthComponent> truth_components;
  double resolution = 0.0;
};

/// n i.i.d. samples by rejection from uniform proposals. Deterministic in seed.
/// A nonpositive truth_resolution skips the truth components.
SyntheticDataset sample_dataset(const DensitySpec& spec, std::size_t n, std::uint64_t seed,
                                double truth_resolution = 0.005);

/// Population D_r at the plateau level: (c/Z) r^beta.
double compute_Dr_oracle(const DensitySpec& spec, double lambda, double r);

}  // namespace levelset
