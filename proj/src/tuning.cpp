#include "levelset/tuning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "levelset/density.hpp"
#include "levelset/error.hpp"
#include "levelset/parallel.hpp"

namespace levelset {
namespace {

double median_of(std::vector<double> v) {
  const std::size_t m = v.size();
  std::sort(v.begin(), v.end());
  return m % 2 == 1 ? v[m / 2] : 0.5 * (v[m / 2 - 1] + v[m / 2]);
}

void check_config(const TuningConfig& cfg) {
  if (!(cfg.lambda > 0.0) || !std::isfinite(cfg.lambda)) {
    throw Error(ErrorCode::InvalidArgument, "lambda must be positive");
  }
  if (cfg.k == 0) throw Error(ErrorCode::InvalidArgument, "k must be positive");
  if (!(cfg.d > 0.0)) throw Error(ErrorCode::InvalidDimension, "d must be positive");
}

double radius_for_slack(const TuningConfig& cfg, std::size_t n, double s, const char* what) {
  if (!(s < 1.0)) {
    throw Error(ErrorCode::InfeasibleK,
                std::string(what) + " slack " + std::to_string(s) +
                    " >= 1 makes the level nonpositive; increase k, decrease c0, or set "
                    "slack_override");
  }
  const double level = cfg.lambda * (1.0 - s);
  const double x = static_cast<double>(cfg.k) /
                   (static_cast<double>(n) * unit_ball_volume(cfg.d) * level);
  return std::pow(x, 1.0 / cfg.d);
}

}  // namespace

double c_delta_n(double c0, double delta, std::size_t n, double d) {
  if (!(c0 > 0.0)) throw Error(ErrorCode::InvalidArgument, "c0 must be positive");
  if (!(delta > 0.0 && delta < 1.0)) throw Error(ErrorCode::InvalidDelta, "delta must lie in (0, 1)");
  if (n < 2) throw Error(ErrorCode::InvalidN, "n must be at least 2");
  if (!(d > 0.0)) throw Error(ErrorCode::InvalidDimension, "d must be positive");
  return c0 * std::log(2.0 / delta) * std::sqrt(d * std::log(static_cast<double>(n)));
}

double level_slack(const TuningConfig& cfg, std::size_t n) {
  check_config(cfg);
  if (cfg.slack_override) {
    if (!(*cfg.slack_override >= 0.0)) {
      throw Error(ErrorCode::InvalidArgument, "slack_override must be nonnegative");
    }
    return *cfg.slack_override;
  }
  const double c = c_delta_n(cfg.c0, cfg.delta, n, cfg.d);
  return c * c / std::sqrt(static_cast<double>(cfg.k));
}

double level_slack_tilde(const TuningConfig& cfg, std::size_t n) {
  check_config(cfg);
  const double k = static_cast<double>(cfg.k);
  if (cfg.slack_override) return level_slack(cfg, n) * std::pow(k, 1.0 / 6.0);
  const double c = c_delta_n(cfg.c0, cfg.delta, n, cfg.d);
  return c * c / std::cbrt(k);
}

double epsilon_for_level(const TuningConfig& cfg, std::size_t n) {
  return radius_for_slack(cfg, n, level_slack(cfg, n), "level");
}

double epsilon_tilde(const TuningConfig& cfg, std::size_t n) {
  return radius_for_slack(cfg, n, level_slack_tilde(cfg, n), "pruning");
}

KRange k_range(std::size_t n, double d, double beta_prime, double k_l, double k_u) {
  if (n < 3) throw Error(ErrorCode::InvalidN, "n must be at least 3");
  if (!(d > 0.0)) throw Error(ErrorCode::InvalidDimension, "d must be positive");
  if (!(beta_prime > 0.0 && beta_prime <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "beta' must lie in (0, 1]");
  }
  if (!(k_l > 0.0) || !(k_u >= 0.0)) throw Error(ErrorCode::InvalidArgument, "k_l, k_u must be positive");
  const double nn = static_cast<double>(n);
  const double ln = std::log(nn);
  const double lo = std::ceil(k_l * ln * ln);
  const double hi = std::floor(k_u * std::pow(ln, 2.0 * d / (2.0 + d)) *
                               std::pow(nn, 2.0 * beta_prime / (2.0 * beta_prime + d)));
  KRange out;
  out.lo = static_cast<std::size_t>(std::clamp(lo, 1.0, nn));
  out.hi = static_cast<std::size_t>(std::clamp(hi, 1.0, nn));
  if (out.lo > out.hi || hi < 1.0) {
    throw Error(ErrorCode::EmptyRange, "no admissible k for n = " + std::to_string(n) +
                                           " (lo " + std::to_string(lo) + ", hi " +
                                           std::to_string(hi) + ")");
  }
  return out;
}

std::optional<double> estimate_dimension_at(const NeighborIndex& index, std::size_t i,
                                            std::size_t k) {
  if (k == 0) throw Error(ErrorCode::InvalidArgument, "k must be positive");
  if (2 * k > index.size()) {
    throw Error(ErrorCode::KTooLarge, "2k = " + std::to_string(2 * k) + " exceeds n = " +
                                          std::to_string(index.size()));
  }
  const auto dists = index.knn_distances(index.cloud().point(i), 2 * k);
  const double rk = dists[k - 1];
  const double r2k = dists[2 * k - 1];
  if (rk == 0.0 || r2k == rk) return std::nullopt;
  return std::log(2.0) / std::log(r2k / rk);
}

DimensionEstimate estimate_dimension(const NeighborIndex& index, std::size_t k,
                                     double density_quantile, bool keep_per_point) {
  if (!(density_quantile > 0.0 && density_quantile <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "density quantile must lie in (0, 1]");
  }
  if (k == 0) throw Error(ErrorCode::InvalidArgument, "k must be positive");
  const std::size_t n = index.size();
  if (2 * k > n) {
    throw Error(ErrorCode::KTooLarge,
                "2k = " + std::to_string(2 * k) + " exceeds n = " + std::to_string(n));
  }

  std::vector<std::optional<double>> pointwise(n);
  std::vector<double> rk(n);
  parallel_for(n, [&](std::size_t i) {
    const auto dists = index.knn_distances(index.cloud().point(i), 2 * k);
    rk[i] = dists[k - 1];
    const double r2k = dists[2 * k - 1];
    if (rk[i] != 0.0 && r2k != rk[i]) pointwise[i] = std::log(2.0) / std::log(r2k / rk[i]);
  });

  std::vector<double> defined;
  for (const auto& v : pointwise) {
    if (v) defined.push_back(*v);
  }
  if (defined.empty()) {
    throw Error(ErrorCode::DegenerateSample, "no sample has a defined pointwise dimension");
  }

  DimensionEstimate est;
  est.provisional = median_of(defined);
  const double d_pass = std::max(1.0, std::round(est.provisional));
  const double vd = unit_ball_volume(d_pass);
  std::vector<double> fk(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double denom = static_cast<double>(n) * vd * power_d(rk[i], d_pass);
    fk[i] = denom == 0.0 ? std::numeric_limits<double>::infinity() : static_cast<double>(k) / denom;
  }
  std::vector<double> sorted = fk;
  std::sort(sorted.begin(), sorted.end());
  const auto rank = static_cast<std::size_t>(std::ceil(density_quantile * static_cast<double>(n)));
  est.density_threshold = sorted[std::max<std::size_t>(rank, 1) - 1];

  std::vector<double> kept;
  for (std::size_t i = 0; i < n; ++i) {
    if (pointwise[i] && fk[i] >= est.density_threshold) kept.push_back(*pointwise[i]);
  }
  if (kept.empty()) {
    throw Error(ErrorCode::DegenerateSample, "no sample above the density filter has a defined dimension");
  }
  est.n_used = kept.size();
  est.d_hat_real = median_of(std::move(kept));
  est.d_hat_rounded = static_cast<std::size_t>(std::max(1.0, std::round(est.d_hat_real)));
  if (keep_per_point) est.per_point = std::move(pointwise);
  return est;
}

double compute_D_hat(const NeighborIndex& index, std::size_t k, double r, double lambda, double d) {
  if (!(r > 0.0)) throw Error(ErrorCode::InvalidRadius, "r must be positive");
  const std::size_t n = index.size();
  const auto fk = knn_density_all(index, k, d);
  std::vector<double> dev(n);
  for (std::size_t i = 0; i < n; ++i) dev[i] = std::abs(lambda - fk[i]);

  // Branch and bound: the inner max at x0 is at least dev[x0], so candidates are
  // visited in ascending dev order and the scan stops once dev[x0] >= best.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return dev[a] < dev[b] || (dev[a] == dev[b] && a < b);
  });
  const auto subtree = index.subtree_maxima(dev);
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t x0 : order) {
    if (dev[x0] >= best) break;
    const double m = index.ball_max(index.cloud().point(x0), r, dev, subtree, best);
    if (m < best) best = m;
  }
  return best;
}

std::size_t default_k_beta(std::size_t n) {
  const double ln = std::log(static_cast<double>(n));
  const double k5 = std::floor(std::pow(ln, 5.0));
  const std::size_t cap = std::max<std::size_t>(n / 2, 1);
  if (!(k5 >= 1.0)) return 1;
  return k5 >= static_cast<double>(cap) ? cap : static_cast<std::size_t>(k5);
}

double default_beta_radius(std::size_t n) {
  return 1.0 / std::sqrt(std::log(static_cast<double>(n)));
}

double beta_from_level_deviation(double d_hat_level, double r) {
  if (!(r > 0.0 && r < 1.0)) {
    throw Error(ErrorCode::RadiusOutOfRange, "r must lie in (0, 1), got " + std::to_string(r));
  }
  if (d_hat_level == 0.0) throw Error(ErrorCode::DegenerateBeta, "D_hat = 0 gives beta = +infinity");
  if (!std::isfinite(d_hat_level)) throw Error(ErrorCode::DegenerateBeta, "D_hat is infinite");
  if (!(d_hat_level > 0.0)) throw Error(ErrorCode::InvalidArgument, "D_hat must be nonnegative");
  return std::log(d_hat_level) / std::log(r);
}

BetaEstimate estimate_beta(const NeighborIndex& index, double lambda, double d,
                           const BetaOptions& options) {
  const std::size_t n = index.size();
  if (n < 3) throw Error(ErrorCode::InvalidN, "beta estimation needs n >= 3");
  if (!(lambda > 0.0)) throw Error(ErrorCode::InvalidArgument, "lambda must be positive");
  BetaEstimate est;
  est.k_beta_default = !options.k_beta.has_value();
  est.r_default = !options.r.has_value();
  if (options.k_beta) {
    est.k_beta = *options.k_beta;
  } else {
    est.k_beta = default_k_beta(n);
    est.k_beta_capped = std::floor(std::pow(std::log(static_cast<double>(n)), 5.0)) >
                        static_cast<double>(est.k_beta);
  }
  est.r = options.r.value_or(default_beta_radius(n));
  if (!(est.r > 0.0 && est.r < 1.0)) {
    throw Error(ErrorCode::RadiusOutOfRange, "r must lie in (0, 1), got " + std::to_string(est.r));
  }
  est.d_hat_level = compute_D_hat(index, est.k_beta, est.r, lambda, d);
  est.beta_hat = beta_from_level_deviation(est.d_hat_level, est.r);
  est.low_beta = est.beta_hat < 0.1;
  return est;
}

double clamp_beta_prime(double beta_hat, double eps0) noexcept {
  return std::min(1.0, std::max(beta_hat - eps0, 0.1));
}

double raw_adaptive_k(std::size_t n, double d, double beta_prime, KExponentRule rule) {
  const double num = rule == KExponentRule::Rate ? 2.0 * beta_prime : beta_prime;
  return std::pow(static_cast<double>(n), num / (2.0 * beta_prime + d));
}

std::size_t choose_k(std::size_t n, double d, double beta_hat, double eps0, double k_l,
                     KExponentRule rule) {
  if (n < 3) throw Error(ErrorCode::InvalidN, "n must be at least 3");
  if (!(d > 0.0)) throw Error(ErrorCode::InvalidDimension, "d must be positive");
  const double bp = clamp_beta_prime(beta_hat, eps0);
  const double ln = std::log(static_cast<double>(n));
  const double lo = std::ceil(k_l * ln * ln);
  const double hi = std::floor(static_cast<double>(n) / 2.0);
  double k = std::round(raw_adaptive_k(n, d, bp, rule));
  k = std::min(std::max(k, lo), hi);
  return static_cast<std::size_t>(std::max(k, 1.0));
}

}  // namespace levelset
