#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "levelset/geometry.hpp"

namespace levelset {

/// Target level and the constants that turn it into DBSCAN parameters.
struct TuningConfig {
  double lambda = 1.0;
  double delta = 0.1;
  double c0 = 0.05;
  std::size_t k = 1;
  double d = 1.0;
  /// Replaces C_{delta,n}^2 / sqrt(k) when set; must lie in [0, 1).
  std::optional<double> slack_override;
  double eps0 = 0.1;
  double k_l = 1.0;
  double k_u = 1.0;
};

/// C_{delta,n} = c0 * ln(2/delta) * sqrt(d ln n).
double c_delta_n(double c0, double delta, std::size_t n, double d);

/// Relative slack s = C_{delta,n}^2 / sqrt(k), or the override.
double level_slack(const TuningConfig& cfg, std::size_t n);

/// Slack for the pruning radius: C_{delta,n}^2 / k^(1/3). An override s maps to
/// s * k^(1/6) so that the ratio between the two slacks is preserved.
double level_slack_tilde(const TuningConfig& cfg, std::size_t n);

/// eps = (k / (n v_d lambda (1 - s)))^(1/d).
double epsilon_for_level(const TuningConfig& cfg, std::size_t n);

/// Same formula with the cube-root slack; the second DBSCAN radius.
double epsilon_tilde(const TuningConfig& cfg, std::size_t n);

struct KRange {
  std::size_t lo = 0;
  std::size_t hi = 0;
};

/// ceil(k_l ln^2 n) <= k <= floor(k_u (ln n)^(2d/(2+d)) n^(2b/(2b+d))), clamped to [1, n].
KRange k_range(std::size_t n, double d, double beta_prime, double k_l, double k_u);

/// ln 2 / ln(r_2k / r_k) at sample i; nullopt when undefined.
std::optional<double> estimate_dimension_at(const NeighborIndex& index, std::size_t i,
                                            std::size_t k);

struct DimensionEstimate {
  double d_hat_real = 0.0;
  std::size_t d_hat_rounded = 0;
  std::size_t n_used = 0;
  double provisional = 0.0;  // first-pass median over all samples
  double density_threshold = 0.0;
  std::vector<std::optional<double>> per_point;  // filled when requested
};

/// Two-pass median estimate of the intrinsic dimension. The second pass keeps
/// samples whose f_k (with the provisional dimension) is at or above the
/// `density_quantile` quantile.
DimensionEstimate estimate_dimension(const NeighborIndex& index, std::size_t k,
                                     double density_quantile = 0.5, bool keep_per_point = false);

/// min over samples x0 of max over samples x in B(x0, r) of |lambda - f_k(x)|.
double compute_D_hat(const NeighborIndex& index, std::size_t k, double r, double lambda, double d);

struct BetaEstimate {
  double beta_hat = 0.0;
  double d_hat_level = 0.0;
  double r = 0.0;
  std::size_t k_beta = 0;
  bool k_beta_capped = false;  // default k_beta hit the n/2 cap
  bool k_beta_default = true;
  bool r_default = true;
  bool low_beta = false;       // beta_hat < 0.1
};

struct BetaOptions {
  std::optional<std::size_t> k_beta;
  std::optional<double> r;
};

/// Default k for the beta estimator: min(floor(ln^5 n), floor(n/2)).
std::size_t default_k_beta(std::size_t n);
/// Default radius for the beta estimator: 1 / sqrt(ln n).
double default_beta_radius(std::size_t n);

/// log_r(D): the regularity exponent implied by a level deviation D at radius r.
double beta_from_level_deviation(double d_hat_level, double r);

BetaEstimate estimate_beta(const NeighborIndex& index, double lambda, double d,
                           const BetaOptions& options = {});

enum class KExponentRule {
  Rate,           // k = n^(2b'/(2b'+d))
  RemarkLiteral,  // k = n^(b'/(2b'+d))
};

/// b' = min(1, max(beta_hat - eps0, 0.1)).
double clamp_beta_prime(double beta_hat, double eps0) noexcept;

/// Unclamped k before rounding.
double raw_adaptive_k(std::size_t n, double d, double beta_prime, KExponentRule rule);

/// round(n^(2b'/(2b'+d))) clamped to [ceil(k_l ln^2 n), floor(n/2)].
std::size_t choose_k(std::size_t n, double d, double beta_hat, double eps0, double k_l,
                     KExponentRule rule = KExponentRule::Rate);

}  // namespace levelset
