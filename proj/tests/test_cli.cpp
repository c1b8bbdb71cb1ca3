#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <filesystem>
#include <set>
#include <sstream>

#include "levelset/cli.hpp"
#include "levelset/io.hpp"
#include "levelset/tuning.hpp"

using namespace levelset;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
  int code = 0;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  Run r;
  r.code = run_cli(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("levelset_cli_" + std::to_string(reinterpret_cast<std::uintptr_t>(this)) + "_" +
            std::to_string(std::hash<std::string>{}(doctest::getContextOptions()->binary_name.c_str())));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

const char* kTwoPlateaus = R"({
  "domain": {"kind": "full_dim", "ambient_dim": 2, "box_lo": [0, 0], "box_hi": [2, 1]},
  "floor": 0.05, "valley_width": 0.1, "valley_gap": 0.5,
  "bumps": [
    {"center": [0.5, 0.5], "plateau_radius": 0.3, "height": 1, "decay_coefficient": 100, "decay_exponent": 1},
    {"center": [1.5, 0.5], "plateau_radius": 0.3, "height": 1, "decay_coefficient": 100, "decay_exponent": 1}]})";

const char* kCircle = R"({
  "domain": {"kind": "circle", "ambient_dim": 3},
  "floor": 0.1, "valley_width": 0.2, "valley_gap": 0.3,
  "bumps": [
    {"center": [0], "plateau_radius": 0.5, "height": 1, "decay_coefficient": 4, "decay_exponent": 1},
    {"center": [3.14159], "plateau_radius": 0.5, "height": 1, "decay_coefficient": 4, "decay_exponent": 1}]})";

std::size_t line_count(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST_CASE("synth writes n rows and is deterministic") {
  TempDir dir;
  write_text_file(dir / "spec.json", kCircle);
  const auto a = cli({"synth", "--spec", dir / "spec.json", "--n", "100", "--seed", "4", "--out-points",
                      dir / "a.csv", "--out-truth", dir / "a.json"});
  REQUIRE(a.code == 0);
  const auto text = read_text_file(dir / "a.csv");
  CHECK(line_count(text) == 101);
  CHECK(text.rfind("x0,x1,x2\n", 0) == 0);
  REQUIRE(cli({"synth", "--spec", dir / "spec.json", "--n", "100", "--seed", "4", "--out-points",
               dir / "b.csv", "--out-truth", dir / "b.json"})
              .code == 0);
  CHECK(read_text_file(dir / "b.csv") == text);
  CHECK(read_text_file(dir / "b.json") == read_text_file(dir / "a.json"));
  REQUIRE(cli({"synth", "--spec", dir / "spec.json", "--n", "100", "--seed", "5", "--out-points", dir / "c.csv"})
              .code == 0);
  CHECK(read_text_file(dir / "c.csv") != text);
}

TEST_CASE("synth rejects malformed specs") {
  TempDir dir;
  write_text_file(dir / "bad.json", R"({"domain": {"kind": "circle", "ambient_dim": 2},
    "bumps": [{"center": [0], "plateau_radius": 0.5, "height": 1, "decay_exponent": 1}]})");
  const auto r = cli({"synth", "--spec", dir / "bad.json", "--n", "10", "--out-points", dir / "x.csv"});
  CHECK(r.code == 2);
  CHECK(r.err.find("bumps[0].decay_coefficient") != std::string::npos);
  write_text_file(dir / "broken.json", "{not json");
  CHECK(cli({"synth", "--spec", dir / "broken.json", "--n", "10", "--out-points", dir / "x.csv"}).code == 2);
  CHECK(cli({"synth", "--spec", dir / "missing.json", "--n", "10", "--out-points", dir / "x.csv"}).code == 2);
  CHECK(cli({"synth", "--n", "10"}).code == 2);
  CHECK(cli({"frobnicate"}).code == 2);
  CHECK(cli({}).code == 2);
}

TEST_CASE("cluster echoes explicit parameters") {
  TempDir dir;
  write_text_file(dir / "spec.json", kTwoPlateaus);
  REQUIRE(cli({"synth", "--spec", dir / "spec.json", "--n", "3000", "--seed", "1", "--out-points", dir / "p.csv"})
              .code == 0);
  const auto r = cli({"cluster", "--in", dir / "p.csv", "--lambda", "0.5", "--k", "100", "--dim", "2", "--c0",
                      "0.05", "--out-labels", dir / "l.csv"});
  REQUIRE(r.code == 0);
  const auto rep = json::parse(r.out);
  CHECK(rep.at("k").at("value") == 100);
  CHECK(rep.at("k").at("source") == "explicit");
  CHECK(rep.at("d").at("value") == 2.0);
  TuningConfig cfg;
  cfg.lambda = 0.5;
  cfg.c0 = 0.05;
  cfg.k = 100;
  cfg.d = 2.0;
  const double eps = epsilon_for_level(cfg, 3000);
  CHECK(std::abs(rep.at("eps").get<double>() - eps) <= 1e-12 * eps);
  const auto labels = read_text_file(dir / "l.csv");
  CHECK(line_count(labels) == 3001);
}

TEST_CASE("cluster exit codes") {
  TempDir dir;
  write_text_file(dir / "spec.json", kTwoPlateaus);
  REQUIRE(cli({"synth", "--spec", dir / "spec.json", "--n", "500", "--seed", "1", "--out-points", dir / "p.csv"})
              .code == 0);
  const auto r = cli({"cluster", "--in", dir / "p.csv", "--lambda", "0.5", "--slack", "1.5", "--k", "20", "--dim", "2"});
  CHECK(r.code == 3);
  CHECK(r.err.find("InfeasibleK") != std::string::npos);
  CHECK(cli({"cluster", "--in", dir / "p.csv", "--lambda", "0.5", "--k", "zero"}).code == 2);
  CHECK(cli({"cluster", "--in", dir / "p.csv", "--lambda", "0.5", "--k", "501", "--dim", "2"}).code == 3);
  CHECK(cli({"cluster", "--in", dir / "p.csv", "--lambda", "0.5", "--mode", "sideways"}).code == 2);
  CHECK(cli({"cluster", "--in", dir / "p.csv", "--lambda", "-1", "--k", "10", "--dim", "2"}).code == 2);
  write_text_file(dir / "bad.csv", "x0,x1\n1,2\n3,oops\n");
  const auto bad = cli({"cluster", "--in", dir / "bad.csv", "--lambda", "1"});
  CHECK(bad.code == 2);
  CHECK(bad.err.find("line 3") != std::string::npos);
}

TEST_CASE("automatic clustering with pruning finds both plateaus") {
  TempDir dir;
  write_text_file(dir / "spec.json", kTwoPlateaus);
  REQUIRE(cli({"synth", "--spec", dir / "spec.json", "--n", "8000", "--seed", "3", "--out-points", dir / "p.csv",
               "--out-truth", dir / "t.json"})
              .code == 0);
  const double lambda = json::parse(read_text_file(dir / "t.json")).at("lambda").get<double>();
  const auto r = cli({"cluster", "--in", dir / "p.csv", "--lambda", format_double(lambda), "--k", "auto", "--dim",
                      "auto", "--c0", "0.1", "--prune", "--mode", "full_dimensional", "--out-labels", dir / "l.csv"});
  REQUIRE(r.code == 0);
  const auto rep = json::parse(r.out);
  CHECK(rep.at("cluster_count") == 2);
  CHECK(rep.at("k").at("source") == "auto");
  CHECK(rep.at("d").at("source") == "ambient");
  std::istringstream in(read_text_file(dir / "l.csv"));
  const auto lf = read_labels_csv(in);
  std::set<std::int32_t> distinct;
  for (auto l : lf.labels)
    if (l != kNoise) distinct.insert(l);
  CHECK(distinct.size() == 2);
}

TEST_CASE("estimate-dim and estimate-beta") {
  TempDir dir;
  write_text_file(dir / "spec.json", kCircle);
  REQUIRE(cli({"synth", "--spec", dir / "spec.json", "--n", "3000", "--seed", "2", "--out-points", dir / "p.csv"})
              .code == 0);
  const auto r = cli({"estimate-dim", "--in", dir / "p.csv", "--k", "50"});
  REQUIRE(r.code == 0);
  CHECK(json::parse(r.out).at("d_hat_rounded") == 1);
  const auto pp = cli({"estimate-dim", "--in", dir / "p.csv", "--k", "50", "--per-point"});
  CHECK(json::parse(pp.out).at("per_point").size() == 3000);
  CHECK(cli({"estimate-dim", "--in", dir / "p.csv", "--k", "1501"}).code == 3);
  write_text_file(dir / "dup.csv", "x0,x1\n1,1\n1,1\n1,1\n1,1\n1,1\n1,1\n");
  const auto dup = cli({"estimate-dim", "--in", dir / "dup.csv", "--k", "2"});
  CHECK(dup.code == 3);
  CHECK(dup.err.find("DegenerateSample") != std::string::npos);
  const auto b = cli({"estimate-beta", "--in", dir / "p.csv", "--lambda", "0.2", "--dim", "1", "--k", "100",
                      "--r", "0.3"});
  REQUIRE(b.code == 0);
  const auto bj = json::parse(b.out);
  CHECK(bj.at("k_beta") == 100);
  CHECK(bj.at("r") == 0.3);
  CHECK(bj.contains("beta_hat"));
  CHECK(cli({"estimate-beta", "--in", dir / "p.csv", "--lambda", "0.2", "--dim", "1", "--r", "1.5"}).code == 3);
  CHECK(cli({"estimate-beta", "--in", dir / "p.csv", "--lambda", "0.2", "--dim", "1", "--k", "3001"}).code == 3);
}

TEST_CASE("eval on perfect, empty and permuted labels") {
  TempDir dir;
  write_text_file(dir / "spec.json", kCircle);
  REQUIRE(cli({"synth", "--spec", dir / "spec.json", "--n", "50", "--seed", "2", "--out-points", dir / "p.csv",
               "--out-truth", dir / "t.json", "--truth-resolution", "0.01"})
              .code == 0);
  // points = the truth samples themselves, labelled by component
  const auto truth = truth_from_json(read_json_file(dir / "t.json"));
  REQUIRE(truth.components.size() == 2);
  std::vector<double> coords;
  Clustering perfect, swapped, empty;
  for (std::size_t c = 0; c < 2; ++c) {
    const auto& pts = truth.components[c].points;
    coords.insert(coords.end(), pts.data().begin(), pts.data().end());
    for (std::size_t i = 0; i < pts.size(); ++i) {
      perfect.labels.push_back(static_cast<std::int32_t>(c));
      swapped.labels.push_back(static_cast<std::int32_t>(1 - c));
      empty.labels.push_back(kNoise);
    }
  }
  perfect.core.assign(perfect.labels.size(), 1);
  swapped.core = perfect.core;
  empty.core.assign(perfect.labels.size(), 0);
  std::ostringstream pcsv, l1, l2, l3;
  write_points_csv(pcsv, PointCloud(3, coords));
  write_text_file(dir / "tp.csv", pcsv.str());
  write_labels_csv(l1, perfect);
  write_labels_csv(l2, swapped);
  write_labels_csv(l3, empty);
  write_text_file(dir / "l1.csv", l1.str());
  write_text_file(dir / "l2.csv", l2.str());
  write_text_file(dir / "l3.csv", l3.str());

  const auto a = cli({"eval", "--labels", dir / "l1.csv", "--truth", dir / "t.json", "--points", dir / "tp.csv"});
  REQUIRE(a.code == 0);
  const auto ja = json::parse(a.out);
  CHECK(ja.at("bijection") == true);
  for (const auto& m : ja.at("matches")) CHECK(m.at("error").get<double>() <= truth.resolution);
  CHECK(ja.at("rate_exponent") == -1.0 / 3.0);
  const auto b = cli({"eval", "--labels", dir / "l2.csv", "--truth", dir / "t.json", "--points", dir / "tp.csv"});
  CHECK(b.out == a.out);
  const auto c = cli({"eval", "--labels", dir / "l3.csv", "--truth", dir / "t.json", "--points", dir / "tp.csv"});
  REQUIRE(c.code == 0);
  const auto jc = json::parse(c.out);
  CHECK(jc.at("bijection") == false);
  CHECK(jc.at("unmatched_truth") == json::array({0, 1}));
  CHECK(jc.at("matches").empty());
  const auto mismatch = cli({"eval", "--labels", dir / "l1.csv", "--truth", dir / "t.json", "--points", dir / "p.csv"});
  CHECK(mismatch.code == 2);
}

TEST_CASE("experiment rows and summary") {
  TempDir dir;
  write_text_file(dir / "spec.json", kCircle);
  write_text_file(dir / "plan.json", R"({"spec": "spec.json", "n_values": [400, 800, 1600],
    "seeds": [5, 1, 2, 3, 4], "tuning": {"k": 30, "dim": 1, "slack": 0.2}, "truth_resolution": 0.01,
    "outputs": {"results": "unused.csv"}})");
  const auto r = cli({"experiment", "--plan", dir / "plan.json", "--results", dir / "rows.csv", "--summary",
                      dir / "summary.json"});
  REQUIRE(r.code == 0);
  const auto rows = read_text_file(dir / "rows.csv");
  CHECK(line_count(rows) == 16);
  std::istringstream in(rows);
  std::string line;
  std::getline(in, line);
  CHECK(line.rfind("n,seed,k_used,eps_used,d_used", 0) == 0);
  CHECK(line.find("wall_time") == std::string::npos);
  std::vector<std::pair<long, long>> keys;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string n, seed;
    std::getline(ls, n, ',');
    std::getline(ls, seed, ',');
    keys.emplace_back(std::stol(n), std::stol(seed));
  }
  CHECK(std::is_sorted(keys.begin(), keys.end()));
  CHECK(keys.front() == std::pair<long, long>{400, 1});
  CHECK(keys.back() == std::pair<long, long>{1600, 5});
  const auto s = read_json_file(dir / "summary.json");
  CHECK(s.at("per_n").size() == 3);
  CHECK(s.at("rate_exponent") == -1.0 / 3.0);
  CHECK(s.at("trials") == 15);
  const auto t = cli({"experiment", "--plan", dir / "plan.json", "--results", dir / "rows2.csv", "--summary",
                      dir / "summary2.json", "--timings"});
  REQUIRE(t.code == 0);
  CHECK(read_text_file(dir / "rows2.csv").find("wall_time") != std::string::npos);
  write_text_file(dir / "bad_plan.json", R"({"spec": "spec.json", "n_values": [800, 400], "seeds": [1]})");
  CHECK(cli({"experiment", "--plan", dir / "bad_plan.json", "--results", dir / "x.csv"}).code == 2);
  write_text_file(dir / "fail_plan.json", R"({"spec": "spec.json", "n_values": [400], "seeds": [1, 2],
    "tuning": {"k": 30, "dim": 1, "slack": 1.5}})");
  CHECK(cli({"experiment", "--plan", dir / "fail_plan.json", "--results", dir / "x.csv", "--summary",
             dir / "x.json"})
            .code == 3);
}

TEST_CASE("outputs do not depend on the job count") {
  TempDir dir;
  write_text_file(dir / "spec.json", kTwoPlateaus);
  REQUIRE(cli({"synth", "--spec", dir / "spec.json", "--n", "4000", "--seed", "8", "--out-points", dir / "p.csv"})
              .code == 0);
  const std::vector<std::string> base{"cluster", "--in", dir / "p.csv", "--lambda", "0.45", "--c0", "0.1",
                                      "--prune", "--mode", "full_dimensional", "--out-labels"};
  auto one = base;
  one.push_back(dir / "l1.csv");
  one.insert(one.begin(), {"--jobs", "1"});
  auto four = base;
  four.push_back(dir / "l4.csv");
  four.insert(four.begin(), {"--jobs", "4"});
  const auto a = cli(one);
  const auto b = cli(four);
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  CHECK(read_text_file(dir / "l1.csv") == read_text_file(dir / "l4.csv"));
}
