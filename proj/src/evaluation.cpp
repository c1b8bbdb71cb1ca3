#include "levelset/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

#include "levelset/assignment.hpp"
#include "levelset/error.hpp"

namespace levelset {
namespace {

constexpr std::size_t kBruteForceLimit = 32;

double directed_with_index(const PointCloud& a, const PointCloud& b, const NeighborIndex* b_index) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double nearest;
    if (b_index) {
      nearest = b_index->kth_neighbor_distance(a.point(i), 1);
    } else {
      nearest = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < b.size(); ++j) nearest = std::min(nearest, distance(a.point(i), b.point(j)));
    }
    worst = std::max(worst, nearest);
  }
  return worst;
}

std::unique_ptr<NeighborIndex> maybe_index(const PointCloud& c) {
  if (c.size() <= kBruteForceLimit) return nullptr;
  return std::make_unique<NeighborIndex>(c);
}

void check_dims(const PointCloud& a, const PointCloud& b) {
  if (!a.empty() && !b.empty() && a.dim() != b.dim()) {
    throw Error(ErrorCode::InvalidArgument, "point sets have different dimensions");
  }
}

}  // namespace

double directed_hausdorff(const PointCloud& a, const PointCloud& b) {
  if (a.empty()) return 0.0;
  if (b.empty()) throw Error(ErrorCode::EmptyTarget, "target set is empty");
  check_dims(a, b);
  const auto idx = maybe_index(b);
  return directed_with_index(a, b, idx.get());
}

double hausdorff(const PointCloud& a, const PointCloud& b) {
  if (a.empty() || b.empty()) throw Error(ErrorCode::EmptySet, "Hausdorff distance needs nonempty sets");
  return std::max(directed_hausdorff(a, b), directed_hausdorff(b, a));
}

double RecoveryReport::max_error() const {
  double m = 0.0;
  for (const auto& x : matches) m = std::max(m, x.error);
  return m;
}

std::vector<std::vector<double>> hausdorff_cost_matrix(const std::vector<PointCloud>& estimates,
                                                       const std::vector<PointCloud>& truth) {
  std::vector<std::unique_ptr<NeighborIndex>> est_idx, truth_idx;
  for (const auto& e : estimates) {
    if (e.empty()) throw Error(ErrorCode::EmptySet, "empty estimated cluster");
    est_idx.push_back(maybe_index(e));
  }
  for (const auto& t : truth) {
    if (t.empty()) throw Error(ErrorCode::EmptySet, "empty truth component");
    truth_idx.push_back(maybe_index(t));
  }
  std::vector<std::vector<double>> cost(estimates.size(), std::vector<double>(truth.size()));
  for (std::size_t i = 0; i < estimates.size(); ++i) {
    for (std::size_t j = 0; j < truth.size(); ++j) {
      check_dims(estimates[i], truth[j]);
      cost[i][j] = std::max(directed_with_index(estimates[i], truth[j], truth_idx[j].get()),
                            directed_with_index(truth[j], estimates[i], est_idx[i].get()));
    }
  }
  return cost;
}

RecoveryReport match_clusters(const Clustering& estimated, const PointCloud& points,
                              const std::vector<PointCloud>& truth,
                              std::optional<double> resolution) {
  if (estimated.labels.size() != points.size()) {
    throw Error(ErrorCode::Inconsistent, "labels and points differ in length");
  }
  std::vector<PointCloud> estimates;
  for (const auto& ids : estimated.members()) estimates.push_back(points.select(ids));
  const auto cost = hausdorff_cost_matrix(estimates, truth);

  RecoveryReport report;
  report.resolution = resolution;
  std::vector<char> est_used(estimates.size(), 0), truth_used(truth.size(), 0);
  for (const auto& [i, j] : solve_assignment(cost)) {
    ClusterMatch m{i, j, cost[i][j], false};
    m.resolved = resolution.has_value() && *resolution <= 0.1 * m.error;
    report.matches.push_back(m);
    est_used[i] = 1;
    truth_used[j] = 1;
  }
  for (std::size_t i = 0; i < estimates.size(); ++i) {
    if (!est_used[i]) report.unmatched_estimates.push_back(i);
  }
  for (std::size_t j = 0; j < truth.size(); ++j) {
    if (!truth_used[j]) report.unmatched_truth.push_back(j);
  }
  report.bijection = report.unmatched_estimates.empty() && report.unmatched_truth.empty();
  return report;
}

double theoretical_error_bound(double lambda, double c_beta_lower, double beta, double c_dn,
                               std::size_t k) {
  if (!(lambda > 0.0) || !(c_beta_lower > 0.0) || !(beta > 0.0) || !(c_dn > 0.0) || k == 0) {
    throw Error(ErrorCode::InvalidArgument, "error bound arguments must be positive");
  }
  return 2.0 * std::pow(4.0 * lambda / c_beta_lower, 1.0 / beta) * std::pow(c_dn, 2.0 / beta) *
         std::pow(static_cast<double>(k), -1.0 / (2.0 * beta));
}

double rate_exponent(double dim, double beta, bool full_dimensional) {
  if (!(dim > 0.0) || !(beta > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "dimension and beta must be positive");
  }
  const double denom = full_dimensional ? 2.0 * beta + dim : 2.0 * beta + dim * std::max(1.0, beta);
  return -1.0 / denom;
}

}  // namespace levelset
