#include "levelset/synthdata.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <string>

#include "levelset/error.hpp"
#include "levelset/rng.hpp"
#include "levelset/union_find.hpp"

namespace levelset {
namespace {

using nlohmann::json;
constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

[[noreturn]] void spec_error(const std::string& field, const std::string& what) {
  throw Error(ErrorCode::InvalidSpec, field + " " + what);
}

double wrap_angle(double t) {
  double w = std::fmod(t, kTwoPi);
  if (w < 0.0) w += kTwoPi;
  return w;
}

const char* kind_name(DomainKind k) {
  switch (k) {
    case DomainKind::Circle: return "circle";
    case DomainKind::Sphere2: return "sphere2";
    case DomainKind::FullDim: return "full_dim";
  }
  return "?";
}

// Sum of g over a quadrature rule at the given resolution, weighted by the
// uniform measure of the domain.
template <typename G>
double quadrature(const Domain& dom, std::size_t res, G&& g) {
  double total = 0.0;
  switch (dom.kind) {
    case DomainKind::Circle: {
      const std::size_t m = 64 * res;
      const double h = kTwoPi / static_cast<double>(m);
      double th[1];
      for (std::size_t i = 0; i < m; ++i) {
        th[0] = h * static_cast<double>(i);
        total += g(std::span<const double>(th, 1));
      }
      return total * h * dom.radius;
    }
    case DomainKind::Sphere2: {
      const std::size_t nt = res;
      const std::size_t np = 2 * res;
      const double ht = kPi / static_cast<double>(nt);
      const double hp = kTwoPi / static_cast<double>(np);
      double u[3];
      for (std::size_t i = 0; i < nt; ++i) {
        const double theta = (static_cast<double>(i) + 0.5) * ht;
        const double st = std::sin(theta);
        double row = 0.0;
        for (std::size_t j = 0; j < np; ++j) {
          const double phi = static_cast<double>(j) * hp;
          u[0] = st * std::cos(phi);
          u[1] = st * std::sin(phi);
          u[2] = std::cos(theta);
          row += g(std::span<const double>(u, 3));
        }
        total += row * st;
      }
      return total * ht * hp * dom.radius * dom.radius;
    }
    case DomainKind::FullDim: {
      const std::size_t dim = dom.ambient_dim;
      const std::size_t m = dim <= 2 ? res
                                     : static_cast<std::size_t>(std::ceil(
                                           std::pow(static_cast<double>(res), 2.0 / 3.0)));
      std::vector<double> h(dim), x(dim);
      double cell = 1.0;
      for (std::size_t j = 0; j < dim; ++j) {
        h[j] = (dom.box_hi[j] - dom.box_lo[j]) / static_cast<double>(m);
        cell *= h[j];
      }
      std::vector<std::size_t> idx(dim, 0);
      for (;;) {
        for (std::size_t j = 0; j < dim; ++j) {
          x[j] = dom.box_lo[j] + (static_cast<double>(idx[j]) + 0.5) * h[j];
        }
        total += g(std::span<const double>(x));
        std::size_t j = 0;
        while (j < dim && ++idx[j] == m) idx[j++] = 0;
        if (j == dim) break;
      }
      return total * cell;
    }
  }
  return total;
}

double bump_value(const Domain& dom, const Bump& b, std::span<const double> native) {
  const double s = domain_distance(dom, native, b.center);
  if (s <= b.plateau_radius) return b.height;
  const double t = s - b.plateau_radius;
  return std::max(b.floor, b.height - b.decay_coefficient * std::pow(t, b.decay_exponent));
}

std::vector<double> rotate(const Domain& dom, const std::vector<double>& v) {
  const std::size_t dim = dom.ambient_dim;
  std::vector<double> out(dim, 0.0);
  if (dom.rotation.empty()) {
    out = v;
  } else {
    for (std::size_t r = 0; r < dim; ++r)
      for (std::size_t c = 0; c < dim; ++c) out[r] += dom.rotation[r * dim + c] * v[c];
  }
  if (!dom.offset.empty()) {
    for (std::size_t r = 0; r < dim; ++r) out[r] += dom.offset[r];
  }
  return out;
}

double level_threshold_floor(const DensitySpec& spec) {
  double f = spec.floor;
  for (const auto& b : spec.bumps) f = std::max(f, b.floor);
  return f;
}

double require_z(const DensitySpec& spec) {
  if (!spec.normalization) throw Error(ErrorCode::InvalidArgument, "density spec is not normalized");
  return *spec.normalization;
}

}  // namespace

std::size_t Domain::native_size() const noexcept {
  switch (kind) {
    case DomainKind::Circle: return 1;
    case DomainKind::Sphere2: return 3;
    case DomainKind::FullDim: return ambient_dim;
  }
  return 0;
}

std::size_t Domain::intrinsic_dim() const noexcept {
  switch (kind) {
    case DomainKind::Circle: return 1;
    case DomainKind::Sphere2: return 2;
    case DomainKind::FullDim: return ambient_dim;
  }
  return 0;
}

double Domain::volume() const {
  switch (kind) {
    case DomainKind::Circle: return kTwoPi * radius;
    case DomainKind::Sphere2: return 4.0 * kPi * radius * radius;
    case DomainKind::FullDim: {
      double v = 1.0;
      for (std::size_t j = 0; j < ambient_dim; ++j) v *= box_hi[j] - box_lo[j];
      return v;
    }
  }
  return 0.0;
}

double domain_distance(const Domain& domain, std::span<const double> a, std::span<const double> b) {
  switch (domain.kind) {
    case DomainKind::Circle: {
      const double d = std::fmod(std::abs(a[0] - b[0]), kTwoPi);
      return domain.radius * std::min(d, kTwoPi - d);
    }
    case DomainKind::Sphere2: {
      const double cx = a[1] * b[2] - a[2] * b[1];
      const double cy = a[2] * b[0] - a[0] * b[2];
      const double cz = a[0] * b[1] - a[1] * b[0];
      const double dot = a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
      return domain.radius * std::atan2(std::sqrt(cx * cx + cy * cy + cz * cz), dot);
    }
    case DomainKind::FullDim: return distance(a, b);
  }
  return 0.0;
}

void validate_spec(const DensitySpec& spec) {
  const Domain& dom = spec.domain;
  const std::size_t dim = dom.ambient_dim;
  switch (dom.kind) {
    case DomainKind::Circle:
      if (dim < 2) spec_error("domain.ambient_dim", "must be at least 2 for a circle");
      break;
    case DomainKind::Sphere2:
      if (dim < 3) spec_error("domain.ambient_dim", "must be at least 3 for a sphere");
      break;
    case DomainKind::FullDim:
      if (dim < 1 || dim > 3) spec_error("domain.ambient_dim", "must be 1, 2 or 3 for full_dim");
      if (dom.box_lo.size() != dim) spec_error("domain.box_lo", "must have ambient_dim entries");
      if (dom.box_hi.size() != dim) spec_error("domain.box_hi", "must have ambient_dim entries");
      for (std::size_t j = 0; j < dim; ++j) {
        if (!(dom.box_lo[j] < dom.box_hi[j])) spec_error("domain.box_hi", "must exceed box_lo");
      }
      break;
  }
  if (dom.kind != DomainKind::FullDim) {
    if (!(dom.radius > 0.0) || !std::isfinite(dom.radius)) spec_error("domain.radius", "must be positive");
    if (!dom.offset.empty() && dom.offset.size() != dim) spec_error("domain.offset", "must have ambient_dim entries");
    if (!dom.rotation.empty()) {
      if (dom.rotation.size() != dim * dim) spec_error("domain.rotation", "must be ambient_dim x ambient_dim");
      for (std::size_t a = 0; a < dim; ++a) {
        for (std::size_t b = 0; b < dim; ++b) {
          double dot = 0.0;
          for (std::size_t r = 0; r < dim; ++r) dot += dom.rotation[r * dim + a] * dom.rotation[r * dim + b];
          if (std::abs(dot - (a == b ? 1.0 : 0.0)) > 1e-9) spec_error("domain.rotation", "must be orthonormal");
        }
      }
    }
  }
  if (spec.bumps.empty()) spec_error("bumps", "must contain at least one bump");
  double min_height = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < spec.bumps.size(); ++i) {
    const Bump& b = spec.bumps[i];
    const std::string f = "bumps[" + std::to_string(i) + "].";
    if (b.center.size() != dom.native_size()) spec_error(f + "center", "has the wrong number of coordinates");
    for (double c : b.center) {
      if (!std::isfinite(c)) spec_error(f + "center", "must be finite");
    }
    if (dom.kind == DomainKind::Sphere2) {
      const double nrm = std::hypot(b.center[0], b.center[1], b.center[2]);
      if (std::abs(nrm - 1.0) > 1e-9) spec_error(f + "center", "must be a unit vector");
    }
    if (dom.kind == DomainKind::FullDim) {
      for (std::size_t j = 0; j < dim; ++j) {
        if (b.center[j] < dom.box_lo[j] || b.center[j] > dom.box_hi[j]) spec_error(f + "center", "lies outside the box");
      }
    }
    if (!(b.plateau_radius >= 0.0)) spec_error(f + "plateau_radius", "must be nonnegative");
    if (!(b.height > 0.0) || !std::isfinite(b.height)) spec_error(f + "height", "must be positive");
    if (!(b.decay_coefficient > 0.0)) spec_error(f + "decay_coefficient", "must be positive");
    if (!(b.decay_exponent > 0.0)) spec_error(f + "decay_exponent", "must be positive");
    if (!(b.floor >= 0.0 && b.floor < b.height)) spec_error(f + "floor", "must lie in [0, height)");
    min_height = std::min(min_height, b.height);
  }
  if (!(spec.floor >= 0.0)) spec_error("floor", "must be nonnegative");
  if (!(spec.valley_gap >= 0.0)) spec_error("valley_gap", "must be nonnegative");
  if (!(spec.valley_width >= 0.0)) spec_error("valley_width", "must be nonnegative");
  if (spec.floor > min_height - spec.valley_gap || spec.floor >= min_height) {
    spec_error("floor", "must sit below every bump height by at least valley_gap");
  }
  for (std::size_t i = 0; i < spec.bumps.size(); ++i) {
    for (std::size_t j = i + 1; j < spec.bumps.size(); ++j) {
      const double gap = domain_distance(dom, spec.bumps[i].center, spec.bumps[j].center) -
                         spec.bumps[i].plateau_radius - spec.bumps[j].plateau_radius;
      if (!(gap > spec.valley_width)) {
        spec_error("bumps[" + std::to_string(j) + "].center",
                   "plateau is within valley_width of bumps[" + std::to_string(i) + "]");
      }
    }
  }
}

DensitySpec spec_from_json(const json& j) {
  auto field = [](const json& obj, const char* key, const std::string& path) -> const json& {
    if (!obj.is_object() || !obj.contains(key)) spec_error(path + key, "is missing");
    return obj.at(key);
  };
  auto number = [&](const json& obj, const char* key, const std::string& path) {
    const json& v = field(obj, key, path);
    if (!v.is_number()) spec_error(path + key, "must be a number");
    return v.get<double>();
  };
  auto vec = [&](const json& v, const std::string& name) {
    if (!v.is_array()) spec_error(name, "must be an array of numbers");
    std::vector<double> out;
    for (const auto& x : v) {
      if (!x.is_number()) spec_error(name, "must be an array of numbers");
      out.push_back(x.get<double>());
    }
    return out;
  };

  DensitySpec spec;
  if (!j.is_object()) spec_error("spec", "must be a JSON object");
  const json& d = field(j, "domain", "");
  const json& kind = field(d, "kind", "domain.");
  if (!kind.is_string()) spec_error("domain.kind", "must be a string");
  const std::string k = kind.get<std::string>();
  if (k == "circle") {
    spec.domain.kind = DomainKind::Circle;
  } else if (k == "sphere2") {
    spec.domain.kind = DomainKind::Sphere2;
  } else if (k == "full_dim") {
    spec.domain.kind = DomainKind::FullDim;
  } else {
    spec_error("domain.kind", "must be circle, sphere2 or full_dim");
  }
  const double dim = number(d, "ambient_dim", "domain.");
  if (!(dim >= 1.0) || dim != std::floor(dim)) spec_error("domain.ambient_dim", "must be a positive integer");
  spec.domain.ambient_dim = static_cast<std::size_t>(dim);
  if (spec.domain.kind == DomainKind::FullDim) {
    spec.domain.box_lo = vec(field(d, "box_lo", "domain."), "domain.box_lo");
    spec.domain.box_hi = vec(field(d, "box_hi", "domain."), "domain.box_hi");
  } else {
    spec.domain.radius = d.contains("radius") ? number(d, "radius", "domain.") : 1.0;
    if (d.contains("offset")) spec.domain.offset = vec(d.at("offset"), "domain.offset");
    if (d.contains("rotation")) {
      const json& rot = d.at("rotation");
      if (!rot.is_array()) spec_error("domain.rotation", "must be a matrix");
      for (const auto& row : rot) {
        auto r = vec(row, "domain.rotation");
        spec.domain.rotation.insert(spec.domain.rotation.end(), r.begin(), r.end());
      }
    }
  }

  const json& bumps = field(j, "bumps", "");
  if (!bumps.is_array()) spec_error("bumps", "must be an array");
  double min_height = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < bumps.size(); ++i) {
    const std::string p = "bumps[" + std::to_string(i) + "].";
    const json& b = bumps[i];
    Bump bump;
    bump.center = vec(field(b, "center", p), p + "center");
    if (spec.domain.kind == DomainKind::Sphere2 && bump.center.size() == 3) {
      const double nrm = std::hypot(bump.center[0], bump.center[1], bump.center[2]);
      if (!(nrm > 0.0)) spec_error(p + "center", "must be nonzero");
      for (double& c : bump.center) c /= nrm;
    }
    bump.plateau_radius = number(b, "plateau_radius", p);
    bump.height = number(b, "height", p);
    bump.decay_coefficient = number(b, "decay_coefficient", p);
    bump.decay_exponent = number(b, "decay_exponent", p);
    bump.floor = b.contains("floor") ? number(b, "floor", p) : 0.0;
    min_height = std::min(min_height, bump.height);
    spec.bumps.push_back(std::move(bump));
  }
  spec.floor = j.contains("floor") ? number(j, "floor", "")
                                   : (std::isfinite(min_height) ? 0.01 * min_height : 0.0);
  if (j.contains("valley_width")) spec.valley_width = number(j, "valley_width", "");
  if (j.contains("valley_gap")) spec.valley_gap = number(j, "valley_gap", "");
  validate_spec(spec);
  return spec;
}

json spec_to_json(const DensitySpec& spec) {
  json d;
  d["kind"] = kind_name(spec.domain.kind);
  d["ambient_dim"] = spec.domain.ambient_dim;
  if (spec.domain.kind == DomainKind::FullDim) {
    d["box_lo"] = spec.domain.box_lo;
    d["box_hi"] = spec.domain.box_hi;
  } else {
    d["radius"] = spec.domain.radius;
    // nominal condition number 1/tau: metadata only
    d["nominal_tau"] = spec.domain.radius;
    if (!spec.domain.offset.empty()) d["offset"] = spec.domain.offset;
    if (!spec.domain.rotation.empty()) {
      json rows = json::array();
      const std::size_t dim = spec.domain.ambient_dim;
      for (std::size_t r = 0; r < dim; ++r) {
        rows.push_back(std::vector<double>(spec.domain.rotation.begin() + static_cast<std::ptrdiff_t>(r * dim),
                                           spec.domain.rotation.begin() + static_cast<std::ptrdiff_t>((r + 1) * dim)));
      }
      d["rotation"] = rows;
    }
  }
  json bumps = json::array();
  for (const auto& b : spec.bumps) {
    bumps.push_back({{"center", b.center},
                     {"plateau_radius", b.plateau_radius},
                     {"height", b.height},
                     {"decay_coefficient", b.decay_coefficient},
                     {"decay_exponent", b.decay_exponent},
                     {"floor", b.floor}});
  }
  json out{{"domain", d}, {"bumps", bumps}, {"floor", spec.floor},
           {"valley_width", spec.valley_width}, {"valley_gap", spec.valley_gap}};
  if (spec.normalization) out["normalization"] = *spec.normalization;
  return out;
}

double unnormalized_density(const DensitySpec& spec, std::span<const double> native) {
  double v = spec.floor;
  for (const auto& b : spec.bumps) v = std::max(v, bump_value(spec.domain, b, native));
  return v;
}

double unnormalized_max(const DensitySpec& spec) {
  double v = spec.floor;
  for (const auto& b : spec.bumps) v = std::max(v, b.height);
  return v;
}

DensitySpec normalize(DensitySpec spec, std::size_t quadrature_resolution) {
  validate_spec(spec);
  if (quadrature_resolution < 1000) {
    throw Error(ErrorCode::InvalidArgument, "quadrature resolution must be at least 1000");
  }
  auto g = [&](std::span<const double> x) { return unnormalized_density(spec, x); };
  const double fine = quadrature(spec.domain, quadrature_resolution, g);
  const double coarse = quadrature(spec.domain, quadrature_resolution / 2, g);
  if (!std::isfinite(fine) || !(fine > 0.0)) {
    throw Error(ErrorCode::NonFiniteIntegral, "density integral is not finite and positive");
  }
  spec.normalization = fine;
  spec.normalization_rel_error = std::abs(fine - coarse) / 3.0 / fine;
  return spec;
}

double integrate_density(const DensitySpec& spec, std::size_t quadrature_resolution) {
  return quadrature(spec.domain, quadrature_resolution,
                    [&](std::span<const double> x) { return true_density_native(spec, x); });
}

std::vector<double> embed(const Domain& domain, std::span<const double> native) {
  std::vector<double> v(domain.ambient_dim, 0.0);
  switch (domain.kind) {
    case DomainKind::Circle:
      v[0] = domain.radius * std::cos(native[0]);
      v[1] = domain.radius * std::sin(native[0]);
      break;
    case DomainKind::Sphere2:
      for (std::size_t j = 0; j < 3; ++j) v[j] = domain.radius * native[j];
      break;
    case DomainKind::FullDim:
      return {native.begin(), native.end()};
  }
  return rotate(domain, v);
}

std::vector<double> to_native(const Domain& domain, std::span<const double> x, double tol) {
  const std::size_t dim = domain.ambient_dim;
  if (x.size() != dim) throw Error(ErrorCode::OffManifold, "point has the wrong dimension");
  if (domain.kind == DomainKind::FullDim) {
    for (std::size_t j = 0; j < dim; ++j) {
      if (x[j] < domain.box_lo[j] - tol || x[j] > domain.box_hi[j] + tol) {
        throw Error(ErrorCode::OffManifold, "point lies outside the box");
      }
    }
    return {x.begin(), x.end()};
  }
  std::vector<double> v(x.begin(), x.end());
  if (!domain.offset.empty()) {
    for (std::size_t j = 0; j < dim; ++j) v[j] -= domain.offset[j];
  }
  if (!domain.rotation.empty()) {
    std::vector<double> w(dim, 0.0);
    for (std::size_t r = 0; r < dim; ++r)
      for (std::size_t c = 0; c < dim; ++c) w[c] += domain.rotation[r * dim + c] * v[r];
    v = std::move(w);
  }
  const std::size_t used = domain.kind == DomainKind::Circle ? 2 : 3;
  for (std::size_t j = used; j < dim; ++j) {
    if (std::abs(v[j]) > tol) throw Error(ErrorCode::OffManifold, "point leaves the embedding plane");
  }
  if (domain.kind == DomainKind::Circle) {
    if (std::abs(std::hypot(v[0], v[1]) - domain.radius) > tol) {
      throw Error(ErrorCode::OffManifold, "point is not on the circle");
    }
    return {wrap_angle(std::atan2(v[1], v[0]))};
  }
  const double nrm = std::hypot(v[0], v[1], v[2]);
  if (std::abs(nrm - domain.radius) > tol) throw Error(ErrorCode::OffManifold, "point is not on the sphere");
  return {v[0] / nrm, v[1] / nrm, v[2] / nrm};
}

double true_density_native(const DensitySpec& spec, std::span<const double> native) {
  return unnormalized_density(spec, native) / require_z(spec);
}

double true_density(const DensitySpec& spec, std::span<const double> x) {
  return true_density_native(spec, to_native(spec.domain, x));
}

double suggested_lambda(const DensitySpec& spec) {
  const double z = require_z(spec);
  double h = std::numeric_limits<double>::infinity();
  for (const auto& b : spec.bumps) h = std::min(h, b.height);
  return h / z;
}

double spec_beta(const DensitySpec& spec) {
  double beta = std::numeric_limits<double>::infinity();
  for (const auto& b : spec.bumps) beta = std::min(beta, b.decay_exponent);
  return beta;
}

double spec_c_beta(const DensitySpec& spec, double lambda) {
  const double z = require_z(spec);
  double c = std::numeric_limits<double>::infinity();
  for (const auto& b : spec.bumps) {
    if (std::abs(b.height / z - lambda) <= 1e-12 * lambda) c = std::min(c, b.decay_coefficient / z);
  }
  if (!std::isfinite(c)) throw Error(ErrorCode::UnsupportedLevel, "lambda is not a plateau level");
  return c;
}

namespace {

// Grid over the domain: node coordinates (native) and forward adjacency.
struct DomainGrid {
  std::size_t node_count = 0;
  double pitch = 0.0;
  std::function<void(std::size_t, std::vector<double>&)> node;
  std::function<void(std::size_t, std::vector<std::size_t>&)> forward_neighbors;
  std::function<std::size_t(std::span<const double>)> nearest;
};

DomainGrid make_grid(const Domain& dom, double resolution) {
  DomainGrid g;
  switch (dom.kind) {
    case DomainKind::Circle: {
      const auto m = static_cast<std::size_t>(std::ceil(kTwoPi * dom.radius / resolution));
      const std::size_t count = std::max<std::size_t>(m, 3);
      const double h = kTwoPi / static_cast<double>(count);
      g.node_count = count;
      g.pitch = h * dom.radius;
      g.node = [h](std::size_t i, std::vector<double>& out) { out.assign(1, h * static_cast<double>(i)); };
      g.forward_neighbors = [count](std::size_t i, std::vector<std::size_t>& out) {
        out.assign(1, (i + 1) % count);
      };
      g.nearest = [h, count](std::span<const double> x) {
        return static_cast<std::size_t>(std::llround(wrap_angle(x[0]) / h)) % count;
      };
      break;
    }
    case DomainKind::Sphere2: {
      const auto nt = std::max<std::size_t>(2, static_cast<std::size_t>(std::ceil(kPi * dom.radius / resolution)));
      const auto np = std::max<std::size_t>(3, static_cast<std::size_t>(std::ceil(kTwoPi * dom.radius / resolution)));
      const double ht = kPi / static_cast<double>(nt);
      const double hp = kTwoPi / static_cast<double>(np);
      const std::size_t south = 1 + nt * np;
      g.node_count = south + 1;
      g.pitch = std::max(ht, hp) * dom.radius;
      g.node = [=](std::size_t i, std::vector<double>& out) {
        if (i == 0) {
          out = {0.0, 0.0, 1.0};
        } else if (i == south) {
          out = {0.0, 0.0, -1.0};
        } else {
          const std::size_t row = (i - 1) / np;
          const std::size_t col = (i - 1) % np;
          const double theta = (static_cast<double>(row) + 0.5) * ht;
          const double phi = static_cast<double>(col) * hp;
          out = {std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta)};
        }
      };
      g.forward_neighbors = [=](std::size_t i, std::vector<std::size_t>& out) {
        out.clear();
        if (i == 0) {
          for (std::size_t c = 0; c < np; ++c) out.push_back(1 + c);
          return;
        }
        if (i == south) return;
        const std::size_t row = (i - 1) / np;
        const std::size_t col = (i - 1) % np;
        out.push_back(1 + row * np + (col + 1) % np);
        out.push_back(row + 1 < nt ? 1 + (row + 1) * np + col : south);
      };
      g.nearest = [=](std::span<const double> x) -> std::size_t {
        const double theta = std::acos(std::clamp(x[2], -1.0, 1.0));
        if (theta < 0.5 * ht) return 0;
        if (theta > kPi - 0.5 * ht) return south;
        const auto row = std::min(nt - 1, static_cast<std::size_t>(theta / ht));
        const auto col = static_cast<std::size_t>(std::llround(wrap_angle(std::atan2(x[1], x[0])) / hp)) % np;
        return 1 + row * np + col;
      };
      break;
    }
    case DomainKind::FullDim: {
      const std::size_t dim = dom.ambient_dim;
      std::vector<std::size_t> m(dim), stride(dim);
      std::vector<double> h(dim);
      std::size_t count = 1;
      for (std::size_t j = 0; j < dim; ++j) {
        const double len = dom.box_hi[j] - dom.box_lo[j];
        m[j] = static_cast<std::size_t>(std::ceil(len / resolution)) + 1;
        h[j] = len / static_cast<double>(m[j] - 1);
        stride[j] = count;
        count *= m[j];
        g.pitch = std::max(g.pitch, h[j]);
      }
      g.node_count = count;
      const auto lo = dom.box_lo;
      g.node = [=](std::size_t i, std::vector<double>& out) {
        out.resize(dim);
        for (std::size_t j = 0; j < dim; ++j) {
          out[j] = lo[j] + static_cast<double>((i / stride[j]) % m[j]) * h[j];
        }
      };
      g.forward_neighbors = [=](std::size_t i, std::vector<std::size_t>& out) {
        out.clear();
        for (std::size_t j = 0; j < dim; ++j) {
          if ((i / stride[j]) % m[j] + 1 < m[j]) out.push_back(i + stride[j]);
        }
      };
      g.nearest = [=](std::span<const double> x) {
        std::size_t idx = 0;
        for (std::size_t j = 0; j < dim; ++j) {
          const double t = std::round((x[j] - lo[j]) / h[j]);
          idx += static_cast<std::size_t>(std::clamp(t, 0.0, static_cast<double>(m[j] - 1))) * stride[j];
        }
        return idx;
      };
      break;
    }
  }
  return g;
}

// Points on the boundary of a single-bump level region, at roughly `pitch` spacing.
std::vector<std::vector<double>> boundary_samples(const Domain& dom, const AnalyticComponent& a,
                                                  double pitch) {
  std::vector<std::vector<double>> out;
  out.push_back(a.center);
  if (a.radius <= 0.0) return out;
  switch (dom.kind) {
    case DomainKind::Circle: {
      const double half = a.radius / dom.radius;
      if (half < kPi) {
        out.push_back({wrap_angle(a.center[0] - half)});
        out.push_back({wrap_angle(a.center[0] + half)});
      }
      break;
    }
    case DomainKind::Sphere2: {
      const double ang = a.radius / dom.radius;
      if (ang >= kPi) break;
      // orthonormal frame around the center
      const auto& c = a.center;
      std::vector<double> e1 = std::abs(c[2]) < 0.9 ? std::vector<double>{-c[1], c[0], 0.0}
                                                     : std::vector<double>{0.0, -c[2], c[1]};
      const double n1 = std::hypot(e1[0], e1[1], e1[2]);
      for (double& v : e1) v /= n1;
      const std::vector<double> e2 = {c[1] * e1[2] - c[2] * e1[1], c[2] * e1[0] - c[0] * e1[2],
                                      c[0] * e1[1] - c[1] * e1[0]};
      const double circ = kTwoPi * dom.radius * std::sin(ang);
      const auto m = std::max<std::size_t>(8, static_cast<std::size_t>(std::ceil(circ / pitch)));
      for (std::size_t i = 0; i < m; ++i) {
        const double t = kTwoPi * static_cast<double>(i) / static_cast<double>(m);
        std::vector<double> p(3);
        for (std::size_t j = 0; j < 3; ++j) {
          p[j] = std::cos(ang) * c[j] + std::sin(ang) * (std::cos(t) * e1[j] + std::sin(t) * e2[j]);
        }
        out.push_back(std::move(p));
      }
      break;
    }
    case DomainKind::FullDim: {
      const std::size_t dim = dom.ambient_dim;
      std::vector<std::vector<double>> cand;
      if (dim == 1) {
        cand = {{a.center[0] - a.radius}, {a.center[0] + a.radius}};
      } else if (dim == 2) {
        const auto m = std::max<std::size_t>(8, static_cast<std::size_t>(std::ceil(kTwoPi * a.radius / pitch)));
        for (std::size_t i = 0; i < m; ++i) {
          const double t = kTwoPi * static_cast<double>(i) / static_cast<double>(m);
          cand.push_back({a.center[0] + a.radius * std::cos(t), a.center[1] + a.radius * std::sin(t)});
        }
      } else {
        // Fibonacci lattice on the sphere of radius a.radius
        const auto m = std::max<std::size_t>(
            16, static_cast<std::size_t>(std::ceil(4.0 * kPi * a.radius * a.radius / (pitch * pitch))));
        const double golden = kPi * (3.0 - std::sqrt(5.0));
        for (std::size_t i = 0; i < m; ++i) {
          const double z = 1.0 - 2.0 * (static_cast<double>(i) + 0.5) / static_cast<double>(m);
          const double rr = std::sqrt(1.0 - z * z);
          const double t = golden * static_cast<double>(i);
          cand.push_back({a.center[0] + a.radius * rr * std::cos(t), a.center[1] + a.radius * rr * std::sin(t),
                          a.center[2] + a.radius * z});
        }
      }
      for (auto& p : cand) {
        bool inside = true;
        for (std::size_t j = 0; j < dim; ++j) inside = inside && p[j] >= dom.box_lo[j] && p[j] <= dom.box_hi[j];
        if (inside) out.push_back(std::move(p));
      }
      break;
    }
  }
  return out;
}

}  // namespace

std::vector<TruthComponent> ground_truth_components(const DensitySpec& spec, double lambda,
                                                    double resolution, double* pitch) {
  const double z = require_z(spec);
  if (!(lambda > 0.0)) throw Error(ErrorCode::InvalidArgument, "lambda must be positive");
  if (!(resolution > 0.0)) throw Error(ErrorCode::InvalidArgument, "resolution must be positive");
  if (lambda > unnormalized_max(spec) / z) {
    throw Error(ErrorCode::EmptyLevelSet, "lambda exceeds the maximum density");
  }
  const Domain& dom = spec.domain;
  const DomainGrid grid = make_grid(dom, resolution);
  if (pitch) *pitch = grid.pitch;

  std::vector<std::uint8_t> above(grid.node_count, 0);
  std::vector<double> x;
  for (std::size_t i = 0; i < grid.node_count; ++i) {
    grid.node(i, x);
    above[i] = true_density_native(spec, x) >= lambda;
  }
  DisjointSets sets(grid.node_count);
  std::vector<std::size_t> nb;
  for (std::size_t i = 0; i < grid.node_count; ++i) {
    if (!above[i]) continue;
    grid.forward_neighbors(i, nb);
    for (std::size_t j : nb) {
      if (above[j]) sets.unite(i, j);
    }
  }
  std::vector<std::int64_t> comp_of_root(grid.node_count, -1);
  std::vector<std::vector<std::size_t>> comp_nodes;
  for (std::size_t i = 0; i < grid.node_count; ++i) {
    if (!above[i]) continue;
    const std::size_t r = sets.find(i);
    if (comp_of_root[r] < 0) {
      comp_of_root[r] = static_cast<std::int64_t>(comp_nodes.size());
      comp_nodes.emplace_back();
    }
    comp_nodes[static_cast<std::size_t>(comp_of_root[r])].push_back(i);
  }

  // Analytic level regions: a geodesic ball per bump when lambda clears the floors.
  const double level = lambda * z;
  const bool analytic_ok = level > level_threshold_floor(spec);
  std::vector<std::vector<std::size_t>> bumps_in_comp(comp_nodes.size());
  std::vector<std::size_t> orphan_bumps;
  std::vector<double> bump_radius(spec.bumps.size(), -1.0);
  for (std::size_t b = 0; b < spec.bumps.size(); ++b) {
    const Bump& bump = spec.bumps[b];
    if (bump.height < level) continue;
    bump_radius[b] = bump.plateau_radius +
                     std::pow((bump.height - level) / bump.decay_coefficient, 1.0 / bump.decay_exponent);
    const std::size_t node = grid.nearest(bump.center);
    if (above[node]) {
      bumps_in_comp[static_cast<std::size_t>(comp_of_root[sets.find(node)])].push_back(b);
    } else {
      orphan_bumps.push_back(b);
    }
  }

  const char* analytic_kind = dom.kind == DomainKind::Circle ? "arc" : dom.kind == DomainKind::Sphere2 ? "cap" : "ball";
  std::vector<TruthComponent> out;
  auto emit = [&](const std::vector<std::size_t>& nodes, std::optional<AnalyticComponent> analytic) {
    std::vector<double> coords;
    for (std::size_t i : nodes) {
      grid.node(i, x);
      auto p = embed(dom, x);
      coords.insert(coords.end(), p.begin(), p.end());
    }
    if (analytic) {
      for (const auto& nat : boundary_samples(dom, *analytic, grid.pitch)) {
        auto p = embed(dom, nat);
        coords.insert(coords.end(), p.begin(), p.end());
      }
    }
    TruthComponent c;
    c.id = out.size();
    c.points = PointCloud(dom.ambient_dim, std::move(coords));
    c.analytic = std::move(analytic);
    out.push_back(std::move(c));
  };
  for (std::size_t c = 0; c < comp_nodes.size(); ++c) {
    std::optional<AnalyticComponent> analytic;
    if (analytic_ok && bumps_in_comp[c].size() == 1) {
      const std::size_t b = bumps_in_comp[c][0];
      analytic = AnalyticComponent{analytic_kind, spec.bumps[b].center, bump_radius[b]};
    }
    emit(comp_nodes[c], std::move(analytic));
  }
  // Level regions thinner than the grid (e.g. a cone tip at its peak level).
  for (std::size_t b : orphan_bumps) {
    if (!analytic_ok) continue;
    emit({}, AnalyticComponent{analytic_kind, spec.bumps[b].center, bump_radius[b]});
  }
  return out;
}

SyntheticDataset sample_dataset(const DensitySpec& spec_in, std::size_t n, std::uint64_t seed,
                                double truth_resolution) {
  if (n == 0) throw Error(ErrorCode::InvalidN, "n must be positive");
  DensitySpec spec = spec_in.normalization ? spec_in : normalize(spec_in);
  validate_spec(spec);
  const Domain& dom = spec.domain;
  const double fmax = unnormalized_max(spec);
  const double acceptance = *spec.normalization / (fmax * dom.volume());
  if (acceptance < 1e-4) {
    throw Error(ErrorCode::RejectionStall, "expected acceptance rate " + std::to_string(acceptance) + " < 1e-4");
  }

  Rng rng(seed);
  SyntheticDataset ds;
  std::vector<double> coords;
  coords.reserve(n * dom.ambient_dim);
  ds.true_density_at_points.reserve(n);
  std::vector<double> native(dom.native_size());
  const std::size_t max_attempts = static_cast<std::size_t>(static_cast<double>(n) / 1e-4) + 1000;
  std::size_t attempts = 0;
  while (ds.true_density_at_points.size() < n) {
    if (++attempts > max_attempts) throw Error(ErrorCode::RejectionStall, "rejection sampler stalled");
    switch (dom.kind) {
      case DomainKind::Circle:
        native[0] = kTwoPi * rng.uniform();
        break;
      case DomainKind::Sphere2: {
        double nrm = 0.0;
        do {
          for (double& v : native) v = rng.normal();
          nrm = std::hypot(native[0], native[1], native[2]);
        } while (nrm == 0.0);
        for (double& v : native) v /= nrm;
        break;
      }
      case DomainKind::FullDim:
        for (std::size_t j = 0; j < native.size(); ++j) {
          native[j] = dom.box_lo[j] + (dom.box_hi[j] - dom.box_lo[j]) * rng.uniform();
        }
        break;
    }
    const double f = unnormalized_density(spec, native);
    if (rng.uniform() * fmax >= f) continue;
    auto p = embed(dom, native);
    coords.insert(coords.end(), p.begin(), p.end());
    ds.true_density_at_points.push_back(f / *spec.normalization);
  }
  ds.cloud = PointCloud(dom.ambient_dim, std::move(coords));
  ds.seed = seed;
  ds.suggested_lambda = suggested_lambda(spec);
  ds.true_dim = dom.intrinsic_dim();
  ds.true_beta = spec_beta(spec);
  if (truth_resolution > 0.0) {
    ds.truth_components = ground_truth_components(spec, ds.suggested_lambda, truth_resolution, &ds.resolution);
  }
  ds.spec = std::move(spec);
  return ds;
}

double compute_Dr_oracle(const DensitySpec& spec, double lambda, double r) {
  const double z = require_z(spec);
  if (!(r > 0.0)) throw Error(ErrorCode::InvalidRadius, "r must be positive");
  double best = std::numeric_limits<double>::infinity();
  for (const auto& b : spec.bumps) {
    const double plateau = b.height / z;
    if (plateau > lambda * (1.0 + 1e-12)) {
      throw Error(ErrorCode::UnsupportedLevel, "a bump rises above lambda; D_r is not closed-form");
    }
    if (std::abs(plateau - lambda) > 1e-12 * lambda) continue;
    const double drop = b.height - std::max(b.floor, spec.floor);
    const double decay_range = std::pow(drop / b.decay_coefficient, 1.0 / b.decay_exponent);
    if (r > decay_range) {
      throw Error(ErrorCode::UnsupportedLevel, "r reaches the floor; D_r is only approximate there");
    }
    best = std::min(best, b.decay_coefficient / z * std::pow(r, b.decay_exponent));
  }
  if (!std::isfinite(best)) throw Error(ErrorCode::UnsupportedLevel, "lambda is not a plateau level");
  return best;
}

}  // namespace levelset
