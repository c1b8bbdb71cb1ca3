#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "levelset/pipeline.hpp"
#include "levelset/synthdata.hpp"

namespace levelset {

struct ExperimentPlan {
  DensitySpec spec;  // normalized
  std::vector<std::size_t> n_values;  // strictly increasing
  std::vector<std::uint64_t> seeds;   // ascending, distinct
  std::optional<double> lambda;       // default: plateau level of the spec
  ClusterRequest request;             // lambda is overwritten per plan
  double truth_resolution = 0.005;
  std::string results_path;
  std::string summary_path;
};

/// Reads a plan document. Relative spec paths resolve against `base_dir`.
ExperimentPlan plan_from_json(const nlohmann::json& j, const std::string& base_dir);

struct ExperimentRow {
  std::size_t n = 0;
  std::uint64_t seed = 0;
  std::size_t k_used = 0;
  double eps_used = 0.0;
  double d_used = 0.0;
  std::optional<double> beta_hat;
  std::size_t cluster_count = 0;
  bool bijection = false;
  std::vector<double> errors;  // per match, by estimate id
  std::optional<double> theoretical_bound;
  std::string error;  // empty when the trial succeeded
  double wall_time = 0.0;

  bool failed() const { return !error.empty(); }
  /// Largest matched Hausdorff error; NaN without matches.
  double max_error() const;
};

struct ExperimentResult {
  std::vector<ExperimentRow> rows;  // sorted by (n, seed)
  double lambda = 0.0;
  double truth_pitch = 0.0;
  std::size_t truth_components = 0;
};

/// Runs synth -> cluster -> eval for every (n, seed), `jobs` trials at a time.
ExperimentResult run_experiment(const ExperimentPlan& plan, unsigned jobs);

std::string rows_to_csv(const std::vector<ExperimentRow>& rows, bool with_timings);
nlohmann::json summarize_experiment(const ExperimentPlan& plan, const ExperimentResult& result);

/// Least-squares slope of log y against log x.
double fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace levelset
