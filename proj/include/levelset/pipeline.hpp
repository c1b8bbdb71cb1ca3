#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "levelset/dbscan.hpp"
#include "levelset/geometry.hpp"
#include "levelset/tuning.hpp"

namespace levelset {

enum class Mode { Manifold, FullDimensional };

const char* mode_name(Mode m);
Mode parse_mode(const std::string& s);

/// Inputs of the clustering pipeline. Unset k / dim are estimated.
struct ClusterRequest {
  double lambda = 1.0;
  double delta = 0.1;
  double c0 = 0.05;
  std::optional<double> slack;
  std::optional<std::size_t> k;
  std::optional<double> dim;
  bool prune = false;
  Mode mode = Mode::Manifold;
  double eps0 = 0.1;
  double k_l = 1.0;
  double k_u = 1.0;
  KExponentRule k_rule = KExponentRule::Rate;
  std::optional<std::size_t> k_dim;   // k for the dimension estimate
  std::optional<std::size_t> k_beta;  // k for D_hat
  std::optional<double> beta_r;       // r for D_hat
};

struct ClusterResult {
  Clustering clustering;
  std::size_t k = 0;
  double d = 0.0;
  double eps = 0.0;
  std::optional<double> eps_tilde;
  std::optional<DimensionEstimate> dimension;
  std::optional<BetaEstimate> beta;
  std::size_t unpruned_count = 0;
  std::vector<std::int32_t> merge_map;
  std::vector<std::string> warnings;
  nlohmann::json report;
};

/// d (estimate or explicit) -> beta_hat -> k -> eps -> DBSCAN -> optional merge at eps_tilde.
ClusterResult run_cluster_pipeline(const NeighborIndex& index, const ClusterRequest& request);

nlohmann::json beta_estimate_json(const BetaEstimate& b);

/// Default k for the dimension estimate: min(ceil(ln^2 n), floor(n/2)).
std::size_t default_k_dim(std::size_t n);

}  // namespace levelset
