#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "levelset/dbscan.hpp"
#include "levelset/geometry.hpp"

namespace levelset {

/// sup over a in A of the distance from a to B. Zero for empty A.
double directed_hausdorff(const PointCloud& a, const PointCloud& b);

/// max of both directed distances; both sets must be nonempty.
double hausdorff(const PointCloud& a, const PointCloud& b);

struct ClusterMatch {
  std::size_t estimate = 0;
  std::size_t truth = 0;
  double error = 0.0;
  bool resolved = false;  // truth pitch <= error / 10
};

struct RecoveryReport {
  std::vector<ClusterMatch> matches;
  std::vector<std::size_t> unmatched_estimates;
  std::vector<std::size_t> unmatched_truth;
  bool bijection = false;
  std::optional<double> theoretical_bound;
  std::optional<double> rate_exponent;
  std::optional<double> resolution;

  double max_error() const;
};

/// Pairs estimated clusters with truth components by the assignment that
/// minimizes the summed Hausdorff distance. `resolution` is the pitch of the
/// truth samples, if known.
RecoveryReport match_clusters(const Clustering& estimated, const PointCloud& points,
                              const std::vector<PointCloud>& truth,
                              std::optional<double> resolution = std::nullopt);

/// Hausdorff-distance matrix between every estimated cluster and truth set.
std::vector<std::vector<double>> hausdorff_cost_matrix(const std::vector<PointCloud>& estimates,
                                                       const std::vector<PointCloud>& truth);

/// 2 (4 lambda / c_beta)^(1/beta) C_{delta,n}^(2/beta) k^(-1/(2 beta)).
double theoretical_error_bound(double lambda, double c_beta_lower, double beta, double c_dn,
                               std::size_t k);

/// -1/(2 beta + dim max(1, beta)) on a manifold, -1/(2 beta + dim) in full dimension.
double rate_exponent(double dim, double beta, bool full_dimensional);

}  // namespace levelset
