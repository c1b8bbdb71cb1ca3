#include "levelset/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <limits>
#include <thread>

#include "levelset/error.hpp"
#include "levelset/evaluation.hpp"
#include "levelset/io.hpp"
#include "levelset/parallel.hpp"

namespace levelset {

using nlohmann::json;

namespace {

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

[[noreturn]] void plan_error(const std::string& what) { throw Error(ErrorCode::InvalidArgument, "plan: " + what); }

template <typename T>
std::optional<T> opt_field(const json& obj, const char* key) {
  if (!obj.contains(key) || obj.at(key).is_null()) return std::nullopt;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    plan_error(std::string("field '") + key + "' has the wrong type");
  }
}

ExperimentRow run_trial(const ExperimentPlan& plan, double lambda, const std::vector<PointCloud>& truth,
                        double pitch, std::size_t n, std::uint64_t seed) {
  ExperimentRow row;
  row.n = n;
  row.seed = seed;
  try {
    const SyntheticDataset ds = sample_dataset(plan.spec, n, seed, 0.0);
    const NeighborIndex index(ds.cloud);
    ClusterRequest req = plan.request;
    req.lambda = lambda;
    const ClusterResult res = run_cluster_pipeline(index, req);
    row.k_used = res.k;
    row.eps_used = res.eps;
    row.d_used = res.d;
    if (res.beta) row.beta_hat = res.beta->beta_hat;
    row.cluster_count = res.clustering.cluster_count;
    const RecoveryReport rep = match_clusters(res.clustering, index.cloud(), truth, pitch);
    row.bijection = rep.bijection;
    for (const auto& m : rep.matches) row.errors.push_back(m.error);
    try {
      const double cb = spec_c_beta(plan.spec, lambda);
      const double cdn = c_delta_n(req.c0, req.delta, n, res.d);
      row.theoretical_bound = theoretical_error_bound(lambda, cb, spec_beta(plan.spec), cdn, res.k);
    } catch (const Error&) {
    }
  } catch (const std::exception& e) {
    row.error = e.what();
    if (row.error.empty()) row.error = "unknown failure";
  }
  return row;
}

}  // namespace

double ExperimentRow::max_error() const {
  if (errors.empty()) return std::numeric_limits<double>::quiet_NaN();
  return *std::max_element(errors.begin(), errors.end());
}

ExperimentPlan plan_from_json(const json& j, const std::string& base_dir) {
  if (!j.is_object()) plan_error("must be a JSON object");
  ExperimentPlan plan;
  if (!j.contains("spec")) plan_error("missing 'spec'");
  json spec_doc;
  if (j.at("spec").is_string()) {
    std::filesystem::path p = j.at("spec").get<std::string>();
    if (p.is_relative() && !base_dir.empty()) p = std::filesystem::path(base_dir) / p;
    spec_doc = read_json_file(p.string());
  } else {
    spec_doc = j.at("spec");
  }
  plan.spec = normalize(spec_from_json(spec_doc));

  if (!j.contains("n_values") || !j.at("n_values").is_array() || j.at("n_values").empty()) {
    plan_error("'n_values' must be a nonempty array");
  }
  for (const auto& v : j.at("n_values")) {
    if (!v.is_number_integer() || v.get<std::int64_t>() < 3) plan_error("n values must be integers >= 3");
    const auto n = v.get<std::size_t>();
    if (!plan.n_values.empty() && n <= plan.n_values.back()) plan_error("n values must be strictly increasing");
    plan.n_values.push_back(n);
  }
  if (!j.contains("seeds") || !j.at("seeds").is_array() || j.at("seeds").empty()) {
    plan_error("'seeds' must be a nonempty array");
  }
  for (const auto& v : j.at("seeds")) {
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
      plan_error("seeds must be nonnegative integers");
    }
    plan.seeds.push_back(v.get<std::uint64_t>());
  }
  std::sort(plan.seeds.begin(), plan.seeds.end());
  if (std::adjacent_find(plan.seeds.begin(), plan.seeds.end()) != plan.seeds.end()) {
    plan_error("seeds must be distinct");
  }
  plan.lambda = opt_field<double>(j, "lambda");
  if (plan.lambda && !(*plan.lambda > 0.0)) plan_error("lambda must be positive");
  plan.request.prune = opt_field<bool>(j, "prune").value_or(false);
  if (auto m = opt_field<std::string>(j, "mode")) plan.request.mode = parse_mode(*m);
  plan.truth_resolution = opt_field<double>(j, "truth_resolution").value_or(0.005);
  if (!(plan.truth_resolution > 0.0)) plan_error("truth_resolution must be positive");

  if (j.contains("tuning")) {
    const json& t = j.at("tuning");
    if (!t.is_object()) plan_error("'tuning' must be an object");
    ClusterRequest& r = plan.request;
    r.c0 = opt_field<double>(t, "c0").value_or(r.c0);
    r.delta = opt_field<double>(t, "delta").value_or(r.delta);
    r.slack = opt_field<double>(t, "slack");
    r.k = opt_field<std::size_t>(t, "k");
    r.dim = opt_field<double>(t, "dim");
    r.eps0 = opt_field<double>(t, "eps0").value_or(r.eps0);
    r.k_l = opt_field<double>(t, "k_l").value_or(r.k_l);
    r.k_u = opt_field<double>(t, "k_u").value_or(r.k_u);
    r.k_dim = opt_field<std::size_t>(t, "k_dim");
    r.k_beta = opt_field<std::size_t>(t, "k_beta");
    r.beta_r = opt_field<double>(t, "beta_r");
    if (opt_field<bool>(t, "remark_exponent").value_or(false)) r.k_rule = KExponentRule::RemarkLiteral;
  }
  if (j.contains("outputs")) {
    const json& o = j.at("outputs");
    plan.results_path = opt_field<std::string>(o, "results").value_or("");
    plan.summary_path = opt_field<std::string>(o, "summary").value_or("");
  }
  return plan;
}

ExperimentResult run_experiment(const ExperimentPlan& plan, unsigned jobs) {
  ExperimentResult result;
  result.lambda = plan.lambda.value_or(suggested_lambda(plan.spec));
  const auto comps = ground_truth_components(plan.spec, result.lambda, plan.truth_resolution, &result.truth_pitch);
  std::vector<PointCloud> truth;
  for (const auto& c : comps) truth.push_back(c.points);
  result.truth_components = truth.size();

  struct Trial {
    std::size_t n;
    std::uint64_t seed;
  };
  std::vector<Trial> trials;
  for (std::size_t n : plan.n_values)
    for (std::uint64_t s : plan.seeds) trials.push_back({n, s});
  result.rows.resize(trials.size());

  const unsigned workers = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(trials.size())));
  std::atomic<std::size_t> next{0};
  auto work = [&](bool own_thread) {
    if (own_thread) set_intra_op_workers(1);
    for (;;) {
      const std::size_t t = next.fetch_add(1);
      if (t >= trials.size()) return;
      const auto start = std::chrono::steady_clock::now();
      result.rows[t] = run_trial(plan, result.lambda, truth, result.truth_pitch, trials[t].n, trials[t].seed);
      result.rows[t].wall_time =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
  };
  if (workers == 1) {
    work(false);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, true);
    for (auto& th : pool) th.join();
  }
  return result;
}

std::string rows_to_csv(const std::vector<ExperimentRow>& rows, bool with_timings) {
  std::string out =
      "n,seed,k_used,eps_used,d_used,beta_hat,cluster_count,bijection,max_error,hausdorff_errors,"
      "theoretical_bound,error";
  if (with_timings) out += ",wall_time";
  out += '\n';
  for (const auto& r : rows) {
    out += std::to_string(r.n) + ',' + std::to_string(r.seed) + ',';
    if (!r.failed()) {
      out += std::to_string(r.k_used) + ',' + format_double(r.eps_used) + ',' + format_double(r.d_used) + ',';
      out += (r.beta_hat ? format_double(*r.beta_hat) : "") + ',';
      out += std::to_string(r.cluster_count) + ',' + (r.bijection ? "true" : "false") + ',';
      out += (r.errors.empty() ? "" : format_double(r.max_error())) + ',';
      for (std::size_t i = 0; i < r.errors.size(); ++i) {
        if (i) out += ';';
        out += format_double(r.errors[i]);
      }
      out += ',';
      out += (r.theoretical_bound ? format_double(*r.theoretical_bound) : "") + ',';
    } else {
      out += ",,,,,,,,,";
      std::string msg = r.error;
      std::replace(msg.begin(), msg.end(), ',', ';');
      std::replace(msg.begin(), msg.end(), '\n', ' ');
      out += '"' + msg + '"';
    }
    if (with_timings) out += ',' + format_double(r.wall_time);
    out += '\n';
  }
  return out;
}

double fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw Error(ErrorCode::InvalidArgument, "slope fit needs at least two points");
  }
  const double m = static_cast<double>(x.size());
  double sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw Error(ErrorCode::InvalidArgument, "slope fit needs positive data");
    sx += std::log(x[i]);
    sy += std::log(y[i]);
  }
  const double mx = sx / m, my = sy / m;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(y[i]) - my);
  }
  if (sxx == 0.0) throw Error(ErrorCode::InvalidArgument, "slope fit needs distinct x values");
  return sxy / sxx;
}

json summarize_experiment(const ExperimentPlan& plan, const ExperimentResult& result) {
  json per_n = json::array();
  std::vector<double> xs, ys;
  std::size_t failed = 0;
  for (std::size_t n : plan.n_values) {
    std::vector<double> errs, ks;
    std::size_t trials = 0, failures = 0, bijections = 0;
    for (const auto& r : result.rows) {
      if (r.n != n) continue;
      ++trials;
      if (r.failed()) {
        ++failures;
        continue;
      }
      bijections += r.bijection;
      ks.push_back(static_cast<double>(r.k_used));
      if (!r.errors.empty()) errs.push_back(r.max_error());
    }
    failed += failures;
    json entry{{"n", n}, {"trials", trials}, {"failures", failures}, {"bijections", bijections}};
    entry["median_error"] = errs.empty() ? json(nullptr) : json(median_of(errs));
    entry["median_k"] = ks.empty() ? json(nullptr) : json(median_of(ks));
    if (!errs.empty() && median_of(errs) > 0.0) {
      xs.push_back(static_cast<double>(n));
      ys.push_back(median_of(errs));
    }
    per_n.push_back(std::move(entry));
  }
  const bool full = plan.request.mode == Mode::FullDimensional;
  const double dim = full ? static_cast<double>(plan.spec.domain.ambient_dim)
                          : static_cast<double>(plan.spec.domain.intrinsic_dim());
  json s;
  s["lambda"] = result.lambda;
  s["mode"] = mode_name(plan.request.mode);
  s["true_beta"] = spec_beta(plan.spec);
  s["rate_dim"] = dim;
  s["rate_exponent"] = rate_exponent(dim, spec_beta(plan.spec), full);
  s["truth_pitch"] = result.truth_pitch;
  s["truth_components"] = result.truth_components;
  s["seeds"] = plan.seeds;
  s["n_values"] = plan.n_values;
  s["trials"] = result.rows.size();
  s["failed_trials"] = failed;
  s["per_n"] = std::move(per_n);
  s["fit_points"] = xs.size();
  if (xs.size() >= 2 && plan.seeds.size() >= 3) {
    s["fit_loglog_slope"] = fit_loglog_slope(xs, ys);
  } else {
    s["fit_loglog_slope"] = nullptr;
  }
  return s;
}

}  // namespace levelset
