#include "levelset/pipeline.hpp"

#include <cmath>

#include "levelset/error.hpp"
#include "levelset/pruning.hpp"

namespace levelset {

using nlohmann::json;

const char* mode_name(Mode m) {
  return m == Mode::Manifold ? "manifold" : "full_dimensional";
}

Mode parse_mode(const std::string& s) {
  if (s == "manifold") return Mode::Manifold;
  if (s == "full_dimensional" || s == "full-dimensional" || s == "full_dim") return Mode::FullDimensional;
  throw Error(ErrorCode::InvalidArgument, "mode must be manifold or full_dimensional, got '" + s + "'");
}

std::size_t default_k_dim(std::size_t n) {
  const double ln = std::log(static_cast<double>(n));
  const auto k = static_cast<std::size_t>(std::ceil(ln * ln));
  return std::max<std::size_t>(1, std::min(k, n / 2));
}

namespace {

json dimension_json(const DimensionEstimate& e, std::size_t k) {
  return {{"k", k},
          {"d_hat_real", e.d_hat_real},
          {"d_hat_rounded", e.d_hat_rounded},
          {"n_used", e.n_used},
          {"provisional", e.provisional},
          {"density_threshold", e.density_threshold}};
}

}  // namespace

json beta_estimate_json(const BetaEstimate& b) {
  return {{"beta_hat", b.beta_hat},
          {"d_hat_level", b.d_hat_level},
          {"r", b.r},
          {"k_beta", b.k_beta},
          {"k_beta_source", b.k_beta_default ? "default" : "explicit"},
          {"k_beta_capped", b.k_beta_capped},
          {"r_source", b.r_default ? "default" : "explicit"},
          {"low_beta", b.low_beta}};
}

ClusterResult run_cluster_pipeline(const NeighborIndex& index, const ClusterRequest& req) {
  const std::size_t n = index.size();
  if (!(req.lambda > 0.0) || !std::isfinite(req.lambda)) {
    throw Error(ErrorCode::InvalidArgument, "lambda must be positive");
  }
  ClusterResult out;
  json report;
  report["n"] = n;
  report["ambient_dim"] = index.cloud().dim();
  report["mode"] = mode_name(req.mode);
  report["lambda"] = req.lambda;
  report["delta"] = req.delta;
  report["c0"] = req.c0;
  report["slack_override"] = req.slack ? json(*req.slack) : json(nullptr);
  report["eps0"] = req.eps0;
  report["k_l"] = req.k_l;
  report["k_u"] = req.k_u;
  report["k_rule"] = req.k_rule == KExponentRule::Rate ? "rate" : "remark_literal";
  report["prune"] = req.prune;

  // dimension
  if (req.dim) {
    out.d = *req.dim;
    report["d"] = {{"value", out.d}, {"source", "explicit"}};
  } else if (req.mode == Mode::FullDimensional) {
    out.d = static_cast<double>(index.cloud().dim());
    report["d"] = {{"value", out.d}, {"source", "ambient"}};
  } else {
    const std::size_t kd = req.k_dim.value_or(default_k_dim(n));
    out.dimension = estimate_dimension(index, kd);
    out.d = static_cast<double>(out.dimension->d_hat_rounded);
    report["d"] = {{"value", out.d}, {"source", "auto"}};
    report["dimension_estimate"] = dimension_json(*out.dimension, kd);
  }
  if (!(out.d > 0.0)) throw Error(ErrorCode::InvalidDimension, "dimension must be positive");

  // k
  if (req.k) {
    out.k = *req.k;
    report["k"] = {{"value", out.k}, {"source", "explicit"}};
  } else {
    BetaOptions opts;
    opts.k_beta = req.k_beta;
    opts.r = req.beta_r;
    double beta_for_k = 0.0;
    try {
      out.beta = estimate_beta(index, req.lambda, out.d, opts);
      beta_for_k = out.beta->beta_hat;
      report["beta_estimate"] = beta_estimate_json(*out.beta);
      if (out.beta->low_beta) out.warnings.push_back("beta_hat < 0.1; choose_k clamps beta' to 0.1");
    } catch (const Error& e) {
      if (e.code() != ErrorCode::DegenerateBeta) throw;
      beta_for_k = 1.0 + req.eps0;
      out.warnings.push_back(std::string("beta estimate degenerate (") + e.what() + "); using beta' = 1");
      report["beta_estimate"] = nullptr;
    }
    out.k = choose_k(n, out.d, beta_for_k, req.eps0, req.k_l, req.k_rule);
    report["beta_prime"] = clamp_beta_prime(beta_for_k, req.eps0);
    report["k"] = {{"value", out.k}, {"source", "auto"}};
  }
  if (out.k > n) throw Error(ErrorCode::KTooLarge, "k = " + std::to_string(out.k) + " exceeds n = " + std::to_string(n));

  TuningConfig cfg;
  cfg.lambda = req.lambda;
  cfg.delta = req.delta;
  cfg.c0 = req.c0;
  cfg.k = out.k;
  cfg.d = out.d;
  cfg.slack_override = req.slack;
  cfg.eps0 = req.eps0;
  cfg.k_l = req.k_l;
  cfg.k_u = req.k_u;
  report["c_delta_n"] = c_delta_n(req.c0, req.delta, n, out.d);
  report["slack"] = level_slack(cfg, n);
  out.eps = epsilon_for_level(cfg, n);
  report["eps"] = out.eps;

  Clustering fine = dbscan_cluster(index, out.k, out.eps);
  out.unpruned_count = fine.cluster_count;
  if (req.prune) {
    report["slack_tilde"] = level_slack_tilde(cfg, n);
    out.eps_tilde = epsilon_tilde(cfg, n);
    report["eps_tilde"] = *out.eps_tilde;
    const Clustering coarse = dbscan_cluster(index, out.k, *out.eps_tilde);
    PrunedClustering pruned = merge_by_coarse(index, fine, coarse);
    pruned.eps_tilde = *out.eps_tilde;
    out.merge_map = pruned.merge_map;
    out.clustering = std::move(pruned.clustering);
    report["merge_map"] = out.merge_map;
  } else {
    out.clustering = std::move(fine);
  }
  report["unpruned_cluster_count"] = out.unpruned_count;
  report["cluster_count"] = out.clustering.cluster_count;
  report["noise_count"] = out.clustering.noise_count();
  report["warnings"] = out.warnings;
  out.report = std::move(report);
  return out;
}

}  // namespace levelset
