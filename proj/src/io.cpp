#include "levelset/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "levelset/error.hpp"

namespace levelset {
namespace {

using nlohmann::json;

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

bool next_line(std::istream& is, std::string& line) {
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) return true;
  }
  return false;
}

[[noreturn]] void parse_error(std::size_t line_no, const std::string& what) {
  throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": " + what);
}

std::int64_t parse_int(std::string_view s, std::size_t line_no) {
  std::int64_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    parse_error(line_no, "expected an integer, got '" + std::string(s) + "'");
  }
  return v;
}

std::vector<double> json_vector(const json& v, const char* what) {
  if (!v.is_array()) throw Error(ErrorCode::ParseError, std::string(what) + " must be an array");
  std::vector<double> out;
  out.reserve(v.size());
  for (const auto& x : v) {
    if (!x.is_number()) throw Error(ErrorCode::ParseError, std::string(what) + " must hold numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view s) {
  double v = 0.0;
  const char* b = s.data();
  const char* e = s.data() + s.size();
  if (b != e && *b == '+') ++b;
  const auto res = std::from_chars(b, e, v);
  if (s.empty() || res.ec != std::errc() || res.ptr != e || !std::isfinite(v)) {
    throw Error(ErrorCode::ParseError, "not a number: '" + std::string(s) + "'");
  }
  return v;
}

void write_points_csv(std::ostream& os, const PointCloud& cloud) {
  std::string out;
  for (std::size_t j = 0; j < cloud.dim(); ++j) {
    if (j) out += ',';
    out += 'x';
    out += std::to_string(j);
  }
  out += '\n';
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto p = cloud.point(i);
    for (std::size_t j = 0; j < p.size(); ++j) {
      if (j) out += ',';
      out += format_double(p[j]);
    }
    out += '\n';
  }
  os << out;
}

PointCloud read_points_csv(std::istream& is) {
  std::string line;
  if (!next_line(is, line)) throw Error(ErrorCode::ParseError, "points CSV is empty");
  const auto header = split_commas(line);
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (header[j] != "x" + std::to_string(j)) {
      parse_error(1, "header must be x0,...,x{D-1}");
    }
  }
  const std::size_t dim = header.size();
  std::vector<double> coords;
  std::size_t line_no = 1;
  while (next_line(is, line)) {
    ++line_no;
    const auto fields = split_commas(line);
    if (fields.size() != dim) {
      parse_error(line_no, "expected " + std::to_string(dim) + " fields, got " + std::to_string(fields.size()));
    }
    for (auto f : fields) {
      try {
        coords.push_back(parse_double(f));
      } catch (const Error& e) {
        parse_error(line_no, e.what());
      }
    }
  }
  return PointCloud(dim, std::move(coords));
}

void write_labels_csv(std::ostream& os, const Clustering& clustering) {
  std::string out = "point_id,label,is_core\n";
  for (std::size_t i = 0; i < clustering.labels.size(); ++i) {
    out += std::to_string(i);
    out += ',';
    out += std::to_string(clustering.labels[i]);
    out += ',';
    out += clustering.core[i] ? '1' : '0';
    out += '\n';
  }
  os << out;
}

LabelsFile read_labels_csv(std::istream& is) {
  std::string line;
  if (!next_line(is, line) || line != "point_id,label,is_core") {
    throw Error(ErrorCode::ParseError, "labels CSV header must be point_id,label,is_core");
  }
  LabelsFile out;
  std::size_t line_no = 1;
  while (next_line(is, line)) {
    ++line_no;
    const auto f = split_commas(line);
    if (f.size() != 3) parse_error(line_no, "expected 3 fields");
    if (parse_int(f[0], line_no) != static_cast<std::int64_t>(out.labels.size())) {
      parse_error(line_no, "point ids must run 0,1,2,...");
    }
    const auto label = parse_int(f[1], line_no);
    if (label < kNoise || label > INT32_MAX) parse_error(line_no, "label out of range");
    const auto core = parse_int(f[2], line_no);
    if (core != 0 && core != 1) parse_error(line_no, "is_core must be 0 or 1");
    out.labels.push_back(static_cast<std::int32_t>(label));
    out.core.push_back(static_cast<std::uint8_t>(core));
  }
  return out;
}

json truth_to_json(const SyntheticDataset& ds) {
  json comps = json::array();
  for (const auto& c : ds.truth_components) {
    json pts = json::array();
    for (std::size_t i = 0; i < c.points.size(); ++i) {
      const auto p = c.points.point(i);
      pts.push_back(std::vector<double>(p.begin(), p.end()));
    }
    json analytic = nullptr;
    if (c.analytic) {
      analytic = {{"kind", c.analytic->kind}, {"center", c.analytic->center}, {"radius", c.analytic->radius}};
    }
    comps.push_back({{"id", c.id}, {"analytic", analytic}, {"points", std::move(pts)}});
  }
  return {{"lambda", ds.suggested_lambda},
          {"components", std::move(comps)},
          {"resolution", ds.resolution},
          {"spec_echo", spec_to_json(ds.spec)},
          {"seed", ds.seed}};
}

TruthFile truth_from_json(const json& j) {
  auto need = [&](const json& obj, const char* key) -> const json& {
    if (!obj.is_object() || !obj.contains(key)) {
      throw Error(ErrorCode::ParseError, std::string("truth JSON is missing '") + key + "'");
    }
    return obj.at(key);
  };
  TruthFile t;
  const json& lambda = need(j, "lambda");
  const json& resolution = need(j, "resolution");
  if (!lambda.is_number() || !resolution.is_number()) {
    throw Error(ErrorCode::ParseError, "truth lambda and resolution must be numbers");
  }
  t.lambda = lambda.get<double>();
  t.resolution = resolution.get<double>();
  if (j.contains("seed")) {
    const json& s = j.at("seed");
    if (s.is_number_unsigned() || (s.is_number_integer() && s.get<std::int64_t>() >= 0)) t.seed = s.get<std::uint64_t>();
  }
  if (j.contains("spec_echo") && !j.at("spec_echo").is_null()) {
    try {
      DensitySpec spec = spec_from_json(j.at("spec_echo"));
      if (j.at("spec_echo").contains("normalization")) {
        spec.normalization = j.at("spec_echo").at("normalization").get<double>();
      }
      t.spec = std::move(spec);
    } catch (const Error& e) {
      throw Error(ErrorCode::ParseError, std::string("spec_echo: ") + e.what());
    }
  }
  const json& comps = need(j, "components");
  if (!comps.is_array()) throw Error(ErrorCode::ParseError, "components must be an array");
  std::size_t dim = 0;
  for (const auto& c : comps) {
    TruthComponent tc;
    tc.id = t.components.size();
    const json& pts = need(c, "points");
    if (!pts.is_array()) throw Error(ErrorCode::ParseError, "component points must be an array");
    std::vector<double> coords;
    for (const auto& p : pts) {
      auto v = json_vector(p, "component point");
      if (dim == 0) dim = v.size();
      if (v.size() != dim || dim == 0) throw Error(ErrorCode::ParseError, "truth points have mixed dimensions");
      coords.insert(coords.end(), v.begin(), v.end());
    }
    if (coords.empty()) throw Error(ErrorCode::ParseError, "truth component has no points");
    tc.points = PointCloud(dim, std::move(coords));
    if (c.contains("analytic") && !c.at("analytic").is_null()) {
      const json& a = c.at("analytic");
      AnalyticComponent ac;
      ac.kind = need(a, "kind").get<std::string>();
      ac.center = json_vector(need(a, "center"), "analytic center");
      ac.radius = need(a, "radius").get<double>();
      tc.analytic = std::move(ac);
    }
    t.components.push_back(std::move(tc));
  }
  return t;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::ParseError, "cannot write '" + path + "'");
  out << text;
  if (!out) throw Error(ErrorCode::ParseError, "failed writing '" + path + "'");
}

json read_json_file(const std::string& path) {
  const std::string text = read_text_file(path);
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, "'" + path + "' is not valid JSON: " + e.what());
  }
}

std::string dump_json(const json& j) { return j.dump(2) + "\n"; }

}  // namespace levelset
