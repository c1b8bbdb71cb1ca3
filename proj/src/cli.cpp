#include "levelset/cli.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "levelset/error.hpp"
#include "levelset/evaluation.hpp"
#include "levelset/experiment.hpp"
#include "levelset/io.hpp"
#include "levelset/parallel.hpp"
#include "levelset/pipeline.hpp"
#include "levelset/synthdata.hpp"
#include "levelset/tuning.hpp"

namespace levelset {
namespace {

using nlohmann::json;

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::InfeasibleK:
    case ErrorCode::KTooLarge:
    case ErrorCode::EmptyRange:
    case ErrorCode::DegenerateSample:
    case ErrorCode::DegenerateBeta:
    case ErrorCode::RadiusOutOfRange:
    case ErrorCode::RejectionStall:
    case ErrorCode::NonFiniteIntegral:
    case ErrorCode::EmptyLevelSet:
    case ErrorCode::UnsupportedLevel:
    case ErrorCode::EpsOrderViolation:
    case ErrorCode::InternalInvariant:
      return kExitInfeasible;
    default:
      return kExitInput;
  }
}

unsigned default_jobs() {
  if (const char* env = std::getenv("LEVELSET_JOBS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::optional<std::size_t> parse_auto_count(const std::string& s, const char* flag) {
  if (s == "auto") return std::nullopt;
  std::size_t pos = 0;
  long long v = 0;
  try {
    v = std::stoll(s, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != s.size() || v <= 0) {
    throw Error(ErrorCode::InvalidArgument, std::string(flag) + " must be a positive integer or 'auto'");
  }
  return static_cast<std::size_t>(v);
}

PointCloud load_points(const std::string& path) {
  std::istringstream in(read_text_file(path));
  return read_points_csv(in);
}

void emit_json(const json& j, const std::string& path, std::ostream& out) {
  const std::string text = dump_json(j);
  if (path.empty() || path == "-") {
    out << text;
  } else {
    write_text_file(path, text);
  }
}

struct SynthArgs {
  std::string spec;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  std::string out_points;
  std::string out_truth;
  double truth_resolution = 0.005;
  std::size_t quadrature = 1000;
};

int cmd_synth(const SynthArgs& a, std::ostream&) {
  const DensitySpec spec = normalize(spec_from_json(read_json_file(a.spec)), a.quadrature);
  const double res = a.out_truth.empty() ? 0.0 : a.truth_resolution;
  const SyntheticDataset ds = sample_dataset(spec, a.n, a.seed, res);
  std::ostringstream csv;
  write_points_csv(csv, ds.cloud);
  write_text_file(a.out_points, csv.str());
  if (!a.out_truth.empty()) write_text_file(a.out_truth, dump_json(truth_to_json(ds)));
  return kExitOk;
}

struct ClusterArgs {
  std::string in;
  double lambda = 0.0;
  double delta = 0.1;
  std::string k = "auto";
  std::string dim = "auto";
  double c0 = 0.05;
  std::optional<double> slack;
  bool prune = false;
  std::string mode = "manifold";
  double eps0 = 0.1;
  double k_l = 1.0;
  double k_u = 1.0;
  std::optional<std::size_t> k_dim;
  std::optional<std::size_t> k_beta;
  std::optional<double> beta_r;
  bool remark_exponent = false;
  std::string out_labels;
  std::string out_report;
};

int cmd_cluster(const ClusterArgs& a, std::ostream& out) {
  ClusterRequest req;
  req.lambda = a.lambda;
  req.delta = a.delta;
  req.c0 = a.c0;
  req.slack = a.slack;
  req.k = parse_auto_count(a.k, "--k");
  if (auto d = parse_auto_count(a.dim, "--dim")) req.dim = static_cast<double>(*d);
  req.prune = a.prune;
  req.mode = parse_mode(a.mode);
  req.eps0 = a.eps0;
  req.k_l = a.k_l;
  req.k_u = a.k_u;
  req.k_dim = a.k_dim;
  req.k_beta = a.k_beta;
  req.beta_r = a.beta_r;
  req.k_rule = a.remark_exponent ? KExponentRule::RemarkLiteral : KExponentRule::Rate;
  const NeighborIndex index(load_points(a.in));
  const ClusterResult res = run_cluster_pipeline(index, req);
  if (!a.out_labels.empty()) {
    std::ostringstream csv;
    write_labels_csv(csv, res.clustering);
    write_text_file(a.out_labels, csv.str());
  }
  emit_json(res.report, a.out_report, out);
  return kExitOk;
}

struct DimArgs {
  std::string in;
  std::optional<std::size_t> k;
  double quantile = 0.5;
  bool per_point = false;
};

int cmd_estimate_dim(const DimArgs& a, std::ostream& out) {
  const NeighborIndex index(load_points(a.in));
  const std::size_t k = a.k.value_or(default_k_dim(index.size()));
  const DimensionEstimate e = estimate_dimension(index, k, a.quantile, a.per_point);
  json j{{"n", index.size()},
         {"k", k},
         {"density_quantile", a.quantile},
         {"d_hat_real", e.d_hat_real},
         {"d_hat_rounded", e.d_hat_rounded},
         {"n_used", e.n_used},
         {"provisional", e.provisional},
         {"density_threshold", e.density_threshold}};
  if (a.per_point) {
    json pp = json::array();
    for (const auto& v : e.per_point) pp.push_back(v ? json(*v) : json(nullptr));
    j["per_point"] = std::move(pp);
  }
  out << dump_json(j);
  return kExitOk;
}

struct BetaArgs {
  std::string in;
  double lambda = 0.0;
  std::string dim = "auto";
  std::optional<std::size_t> k_beta;
  std::optional<double> r;
  std::optional<std::size_t> k_dim;
};

int cmd_estimate_beta(const BetaArgs& a, std::ostream& out) {
  const NeighborIndex index(load_points(a.in));
  double d = 0.0;
  json j{{"n", index.size()}, {"lambda", a.lambda}};
  if (auto dd = parse_auto_count(a.dim, "--dim")) {
    d = static_cast<double>(*dd);
    j["d_source"] = "explicit";
  } else {
    const std::size_t kd = a.k_dim.value_or(default_k_dim(index.size()));
    d = static_cast<double>(estimate_dimension(index, kd).d_hat_rounded);
    j["d_source"] = "auto";
  }
  j["d"] = d;
  if (!(a.lambda > 0.0)) throw Error(ErrorCode::InvalidArgument, "--lambda must be positive");
  BetaOptions opts;
  opts.k_beta = a.k_beta;
  opts.r = a.r;
  const BetaEstimate b = estimate_beta(index, a.lambda, d, opts);
  j.update(beta_estimate_json(b));
  out << dump_json(j);
  return kExitOk;
}

struct EvalArgs {
  std::string labels;
  std::string truth;
  std::string points;
  std::string cluster_report;
  std::string out;
};

json report_to_json(const RecoveryReport& rep) {
  json matches = json::array();
  for (const auto& m : rep.matches) {
    matches.push_back({{"estimate", m.estimate}, {"truth", m.truth}, {"error", m.error}, {"resolved", m.resolved}});
  }
  json j{{"matches", std::move(matches)},
         {"unmatched_estimates", rep.unmatched_estimates},
         {"unmatched_truth", rep.unmatched_truth},
         {"bijection", rep.bijection}};
  j["max_error"] = rep.matches.empty() ? json(nullptr) : json(rep.max_error());
  j["theoretical_bound"] = rep.theoretical_bound ? json(*rep.theoretical_bound) : json(nullptr);
  j["rate_exponent"] = rep.rate_exponent ? json(*rep.rate_exponent) : json(nullptr);
  j["resolution"] = rep.resolution ? json(*rep.resolution) : json(nullptr);
  return j;
}

int cmd_eval(const EvalArgs& a, std::ostream& out) {
  const PointCloud points = load_points(a.points);
  std::istringstream lin(read_text_file(a.labels));
  LabelsFile lf = read_labels_csv(lin);
  const TruthFile truth = truth_from_json(read_json_file(a.truth));
  if (lf.labels.size() != points.size()) {
    throw Error(ErrorCode::Inconsistent, "labels cover " + std::to_string(lf.labels.size()) +
                                             " points but the points file has " + std::to_string(points.size()));
  }
  if (truth.components.empty()) throw Error(ErrorCode::Inconsistent, "truth has no components");
  std::vector<PointCloud> truth_sets;
  for (const auto& c : truth.components) {
    if (c.points.dim() != points.dim()) throw Error(ErrorCode::Inconsistent, "truth and points differ in dimension");
    truth_sets.push_back(c.points);
  }
  Clustering c;
  c.labels = std::move(lf.labels);
  c.core = std::move(lf.core);
  c.cluster_count = canonicalize_labels(c.labels);
  RecoveryReport rep = match_clusters(c, points, truth_sets, truth.resolution);

  std::optional<double> report_k, report_cdn, report_d;
  if (!a.cluster_report.empty()) {
    const json cr = read_json_file(a.cluster_report);
    try {
      report_k = cr.at("k").at("value").get<double>();
      report_d = cr.at("d").at("value").get<double>();
      report_cdn = cr.at("c_delta_n").get<double>();
    } catch (const json::exception&) {
      throw Error(ErrorCode::ParseError, "cluster report lacks k, d or c_delta_n");
    }
  }
  if (truth.spec) {
    const DensitySpec& spec = *truth.spec;
    const bool full = spec.domain.kind == DomainKind::FullDim;
    const double dim = static_cast<double>(spec.domain.intrinsic_dim());
    rep.rate_exponent = rate_exponent(dim, spec_beta(spec), full);
    if (report_k && report_cdn && spec.normalization) {
      try {
        const double cb = spec_c_beta(spec, truth.lambda);
        rep.theoretical_bound = theoretical_error_bound(truth.lambda, cb, spec_beta(spec), *report_cdn,
                                                        static_cast<std::size_t>(*report_k));
      } catch (const Error& e) {
        if (e.code() != ErrorCode::UnsupportedLevel) throw;
      }
    }
  }
  json j = report_to_json(rep);
  j["cluster_count"] = c.cluster_count;
  j["truth_count"] = truth_sets.size();
  emit_json(j, a.out, out);
  return kExitOk;
}

struct ExperimentArgs {
  std::string plan;
  std::string results;
  std::string summary;
  bool timings = false;
};

int cmd_experiment(const ExperimentArgs& a, unsigned jobs, std::ostream& out, std::ostream& err) {
  const std::string base = std::filesystem::path(a.plan).parent_path().string();
  ExperimentPlan plan = plan_from_json(read_json_file(a.plan), base);
  if (!a.results.empty()) plan.results_path = a.results;
  if (!a.summary.empty()) plan.summary_path = a.summary;
  if (plan.results_path.empty()) throw Error(ErrorCode::InvalidArgument, "no results path (plan outputs.results or --results)");
  const ExperimentResult result = run_experiment(plan, jobs);
  write_text_file(plan.results_path, rows_to_csv(result.rows, a.timings));
  emit_json(summarize_experiment(plan, result), plan.summary_path, out);
  std::size_t failed = 0;
  for (const auto& r : result.rows) failed += r.failed();
  if (failed) err << "levelset: " << failed << " of " << result.rows.size() << " trials failed\n";
  return failed == result.rows.size() ? kExitInfeasible : kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Density level-set clustering with DBSCAN", "levelset"};
  app.require_subcommand(1);
  unsigned jobs = default_jobs();
  app.add_option("--jobs", jobs, "Worker threads (default: LEVELSET_JOBS or all cores)")->check(CLI::PositiveNumber);

  SynthArgs sa;
  auto* synth = app.add_subcommand("synth", "Sample a synthetic dataset from a density spec");
  synth->add_option("--spec", sa.spec, "Density spec JSON")->required();
  synth->add_option("--n", sa.n, "Number of samples")->required()->check(CLI::PositiveNumber);
  synth->add_option("--seed", sa.seed, "Random seed");
  synth->add_option("--out-points", sa.out_points, "Points CSV output")->required();
  synth->add_option("--out-truth", sa.out_truth, "Truth JSON output");
  synth->add_option("--truth-resolution", sa.truth_resolution, "Grid pitch for truth components")
      ->check(CLI::PositiveNumber);
  synth->add_option("--quadrature", sa.quadrature, "Quadrature nodes per dimension (>= 1000)");

  ClusterArgs ca;
  auto* cluster = app.add_subcommand("cluster", "Cluster a point CSV at a density level");
  cluster->add_option("--in", ca.in, "Points CSV")->required();
  cluster->add_option("--lambda", ca.lambda, "Density level")->required();
  cluster->add_option("--delta", ca.delta, "Confidence parameter in (0,1)");
  cluster->add_option("--k", ca.k, "minPts: integer or auto");
  cluster->add_option("--dim", ca.dim, "Dimension: integer or auto");
  cluster->add_option("--c0", ca.c0, "Constant C0");
  cluster->add_option("--slack", ca.slack, "Override for the level slack");
  cluster->add_flag("--prune", ca.prune, "Merge false clusters with a second run at eps_tilde");
  cluster->add_option("--mode", ca.mode, "manifold or full_dimensional");
  cluster->add_option("--eps0", ca.eps0, "Margin subtracted from beta_hat");
  cluster->add_option("--k-l", ca.k_l, "Lower k range constant");
  cluster->add_option("--k-u", ca.k_u, "Upper k range constant");
  cluster->add_option("--k-dim", ca.k_dim, "k for the dimension estimate");
  cluster->add_option("--k-beta", ca.k_beta, "k for the beta estimate");
  cluster->add_option("--beta-r", ca.beta_r, "Radius for the beta estimate");
  cluster->add_flag("--remark-exponent", ca.remark_exponent, "Use k = n^(b'/(2b'+d))");
  cluster->add_option("--out-labels", ca.out_labels, "Labels CSV output");
  cluster->add_option("--out-report", ca.out_report, "Report JSON output (default stdout)");

  DimArgs da;
  auto* edim = app.add_subcommand("estimate-dim", "Estimate the intrinsic dimension");
  edim->add_option("--in", da.in, "Points CSV")->required();
  edim->add_option("--k", da.k, "Neighbor count (2k <= n)");
  edim->add_option("--quantile", da.quantile, "Density quantile for the second pass");
  edim->add_flag("--per-point", da.per_point, "Include pointwise estimates");

  BetaArgs ba;
  auto* ebeta = app.add_subcommand("estimate-beta", "Estimate the regularity exponent at a level");
  ebeta->add_option("--in", ba.in, "Points CSV")->required();
  ebeta->add_option("--lambda", ba.lambda, "Density level")->required();
  ebeta->add_option("--dim", ba.dim, "Dimension: integer or auto");
  ebeta->add_option("--k-dim", ba.k_dim, "k for the dimension estimate");
  ebeta->add_option("--k-beta,--k", ba.k_beta, "k for the k-NN density");
  ebeta->add_option("--r", ba.r, "Ball radius in (0,1)");

  EvalArgs ea;
  auto* eval = app.add_subcommand("eval", "Compare cluster labels with ground truth");
  eval->add_option("--labels", ea.labels, "Labels CSV")->required();
  eval->add_option("--truth", ea.truth, "Truth JSON")->required();
  eval->add_option("--points", ea.points, "Points CSV")->required();
  eval->add_option("--cluster-report", ea.cluster_report, "Report from the cluster command");
  eval->add_option("--out", ea.out, "Eval JSON output (default stdout)");

  ExperimentArgs xa;
  auto* exp = app.add_subcommand("experiment", "Run a rate sweep from a plan");
  exp->add_option("--plan", xa.plan, "Plan JSON")->required();
  exp->add_option("--results", xa.results, "Results CSV output");
  exp->add_option("--summary", xa.summary, "Summary JSON output (default stdout)");
  exp->add_flag("--timings", xa.timings, "Add a wall_time column");

  std::vector<const char*> argv{"levelset"};
  for (const auto& s : args) argv.push_back(s.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInput;
  }

  const unsigned previous = intra_op_workers();
  set_intra_op_workers(jobs);
  int code = kExitOk;
  try {
    if (*synth) code = cmd_synth(sa, out);
    else if (*cluster) code = cmd_cluster(ca, out);
    else if (*edim) code = cmd_estimate_dim(da, out);
    else if (*ebeta) code = cmd_estimate_beta(ba, out);
    else if (*eval) code = cmd_eval(ea, out);
    else if (*exp) code = cmd_experiment(xa, jobs, out, err);
  } catch (const Error& e) {
    err << "levelset: error: " << e.what() << "\n";
    code = exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "levelset: error: " << e.what() << "\n";
    code = kExitInput;
  }
  set_intra_op_workers(previous);
  return code;
}

}  // namespace levelset
