#include "conelab/config.hpp"

#include "json.hpp"

#include <cmath>
#include <set>
#include <sstream>

namespace conelab {

using nlohmann::json;

namespace {

void only_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw SchemaError(where + " must be an object");
  for (const auto& [k, v] : j.items()) {
    (void)v;
    if (!allowed.count(k)) throw SchemaError("unknown key '" + k + "' in " + where);
  }
}

template <class T>
T get(const json& j, const std::string& key, const std::string& where) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw SchemaError("field '" + key + "' in " + where + " has the wrong type");
  }
}

template <class T>
void read(const json& j, const std::string& key, T& into, const std::string& where) {
  if (j.contains(key)) into = get<T>(j, key, where);
}

NormSpec parse_norm(const json& j) {
  only_keys(j, {"family", "matrix", "q", "eps", "b"}, "norm");
  NormSpec s;
  read(j, "family", s.family, "norm");
  read(j, "matrix", s.matrix, "norm");
  read(j, "q", s.q, "norm");
  read(j, "eps", s.eps, "norm");
  read(j, "b", s.shift, "norm");
  return s;
}

ConeSpec parse_cone(const json& j) {
  only_keys(j, {"kind", "normal", "rank", "axis", "half_aperture", "free", "tail"}, "cone");
  ConeSpec s;
  read(j, "kind", s.kind, "cone");
  read(j, "normal", s.normal, "cone");
  read(j, "rank", s.rank, "cone");
  read(j, "axis", s.axis, "cone");
  read(j, "half_aperture", s.half_aperture, "cone");
  read(j, "free", s.free, "cone");
  if (j.contains("tail")) s.tail.push_back(parse_cone(j.at("tail")));
  return s;
}

WeightSpec parse_weight(const json& j) {
  only_keys(j, {"kind", "exponents"}, "weight");
  WeightSpec s;
  read(j, "kind", s.kind, "weight");
  read(j, "exponents", s.exponents, "weight");
  return s;
}

GridSpec parse_grid(const json& j, GridSpec g, const std::string& where) {
  only_keys(j, {"r_min", "r_max", "ratio"}, where);
  read(j, "r_min", g.r_min, where);
  read(j, "r_max", g.r_max, where);
  read(j, "ratio", g.ratio, where);
  return g;
}

// Name, member pointer pairs shared by parsing, printing and validation.
const std::vector<std::pair<std::string, double Tolerances::*>>& tolerance_fields() {
  static const std::vector<std::pair<std::string, double Tolerances::*>> f = {
      {"pde_factor", &Tolerances::pde_factor},
      {"richardson_lo", &Tolerances::richardson_lo},
      {"richardson_hi", &Tolerances::richardson_hi},
      {"neumann", &Tolerances::neumann},
      {"neumann_control", &Tolerances::neumann_control},
      {"dual", &Tolerances::dual},
      {"identity_v", &Tolerances::identity_v},
      {"decay_slope", &Tolerances::decay_slope},
      {"caccioppoli_slack", &Tolerances::caccioppoli_slack},
      {"lemma31_constant", &Tolerances::lemma31_constant},
      {"rigidity_factor", &Tolerances::rigidity_factor},
      {"control_factor", &Tolerances::control_factor},
      {"minimize_rel", &Tolerances::minimize_rel},
      {"fit_linf", &Tolerances::fit_linf},
      {"stationarity", &Tolerances::stationarity},
      {"ellipticity_floor", &Tolerances::ellipticity_floor},
  };
  return f;
}

json cone_json(const ConeSpec& c) {
  json j{{"kind", c.kind}};
  if (c.kind == "half" && !c.normal.empty()) j["normal"] = c.normal;
  if (c.kind == "orthant") j["rank"] = c.rank;
  if (c.kind == "circular") {
    if (!c.axis.empty()) j["axis"] = c.axis;
    j["half_aperture"] = c.half_aperture;
  }
  if (c.kind == "product") {
    j["free"] = c.free;
    if (!c.tail.empty()) j["tail"] = cone_json(c.tail.front());
  }
  return j;
}

Vec to_vec(const std::vector<double>& v) { return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size())); }

}  // namespace

RunConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("config is not valid JSON: ") + e.what());
  }
  only_keys(j, {"n", "p", "a", "norm", "cone", "weight", "lambda", "grid", "extremal_grid", "tolerances", "seed",
                "threads", "out"},
            "config");
  RunConfig c;
  read(j, "n", c.n, "config");
  read(j, "p", c.p, "config");
  if (j.contains("a")) c.a = get<double>(j, "a", "config");
  if (j.contains("norm")) c.norm = parse_norm(j.at("norm"));
  if (j.contains("cone")) c.cone = parse_cone(j.at("cone"));
  if (j.contains("weight")) c.weight = parse_weight(j.at("weight"));
  read(j, "lambda", c.lambda, "config");
  if (j.contains("grid")) c.grid = parse_grid(j.at("grid"), c.grid, "grid");
  if (j.contains("extremal_grid")) c.extremal_grid = parse_grid(j.at("extremal_grid"), c.extremal_grid, "extremal_grid");
  if (j.contains("tolerances")) {
    const json& t = j.at("tolerances");
    std::set<std::string> names;
    for (const auto& [name, member] : tolerance_fields()) names.insert(name);
    only_keys(t, names, "tolerances");
    for (const auto& [name, member] : tolerance_fields()) read(t, name, c.tolerances.*member, "tolerances");
  }
  read(j, "seed", c.seed, "config");
  read(j, "threads", c.threads, "config");
  read(j, "out", c.out, "config");
  return c;
}

std::string config_to_json(const RunConfig& c) {
  json j;
  j["n"] = c.n;
  j["p"] = c.p;
  if (c.a) j["a"] = *c.a;
  json norm{{"family", c.norm.family}};
  if (c.norm.family == "quadratic") norm["matrix"] = c.norm.matrix;
  if (c.norm.family == "blend") {
    norm["q"] = c.norm.q;
    norm["eps"] = c.norm.eps;
  }
  if (c.norm.family == "shifted") norm["b"] = c.norm.shift;
  j["norm"] = norm;
  j["cone"] = cone_json(c.cone);
  json w{{"kind", c.weight.kind}};
  if (c.weight.kind == "monomial") w["exponents"] = c.weight.exponents;
  j["weight"] = w;
  j["lambda"] = c.lambda;
  j["grid"] = {{"r_min", c.grid.r_min}, {"r_max", c.grid.r_max}, {"ratio", c.grid.ratio}};
  j["extremal_grid"] = {{"r_min", c.extremal_grid.r_min}, {"r_max", c.extremal_grid.r_max},
                        {"ratio", c.extremal_grid.ratio}};
  json t;
  for (const auto& [name, member] : tolerance_fields()) t[name] = c.tolerances.*member;
  j["tolerances"] = t;
  j["seed"] = c.seed;
  j["threads"] = c.threads;
  j["out"] = c.out;
  return j.dump(2);
}

Norm build_norm(const NormSpec& s, int n) {
  if (s.family == "euclidean") return Norm::euclidean(n);
  if (s.family == "quadratic") {
    if (s.matrix.empty()) {
      // Default: a fixed tridiagonal SPD matrix.
      Mat a = Mat::Identity(n, n) * 2.0;
      for (int i = 0; i + 1 < n; ++i) a(i, i + 1) = a(i + 1, i) = 0.5;
      return Norm::quadratic(a);
    }
    if (static_cast<int>(s.matrix.size()) != n) throw SchemaError("norm matrix must be n x n");
    Mat a(n, n);
    for (int i = 0; i < n; ++i) {
      if (static_cast<int>(s.matrix[static_cast<std::size_t>(i)].size()) != n)
        throw SchemaError("norm matrix must be n x n");
      for (int k = 0; k < n; ++k) a(i, k) = s.matrix[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
    }
    return Norm::quadratic(a);
  }
  if (s.family == "blend") return Norm::blend(n, s.q, s.eps);
  if (s.family == "shifted") {
    if (s.shift.empty()) return Norm::shifted(0.3 * Vec::Unit(n, 0));
    if (static_cast<int>(s.shift.size()) != n) throw SchemaError("norm shift must have n entries");
    return Norm::shifted(to_vec(s.shift));
  }
  throw SchemaError("unknown norm family '" + s.family + "'");
}

Cone build_cone(const ConeSpec& s, int n) {
  auto vec_or_last_axis = [&](const std::vector<double>& v, const char* what) {
    if (v.empty()) return Vec(Vec::Unit(n, n - 1));
    if (static_cast<int>(v.size()) != n) throw SchemaError(std::string("cone ") + what + " must have n entries");
    return to_vec(v);
  };
  if (s.kind == "full") return Cone::full_space(n);
  if (s.kind == "half") return Cone::half_space(vec_or_last_axis(s.normal, "normal"));
  if (s.kind == "orthant") return Cone::orthant(n, s.rank);
  if (s.kind == "circular") return Cone::circular(vec_or_last_axis(s.axis, "axis"), s.half_aperture);
  if (s.kind == "product") {
    if (s.tail.size() != 1) throw SchemaError("product cone needs a tail cone");
    if (!(s.free >= 1 && s.free < n)) throw SchemaError("product cone needs 1 <= free < n");
    return Cone::product(s.free, build_cone(s.tail.front(), n - s.free));
  }
  throw SchemaError("unknown cone kind '" + s.kind + "'");
}

Weight build_weight(const WeightSpec& s, int n) {
  if (s.kind == "unit") {
    if (!s.exponents.empty()) throw SchemaError("unit weight takes no exponents");
    return Weight::unit(n);
  }
  if (s.kind == "monomial") return Weight::monomial(n, s.exponents);
  throw SchemaError("unknown weight kind '" + s.kind + "'");
}

void validate(const RunConfig& c) {
  if (c.n < 2) throw SchemaError("require n >= 2");
  if (!(c.p > 1.0 && c.p < c.n)) throw SchemaError("require 1<p<n");
  if (!(c.lambda > 0.0)) throw SchemaError("require lambda > 0");
  if (c.threads < 1) throw SchemaError("require threads >= 1");
  for (const auto& [name, member] : tolerance_fields())
    if (!(c.tolerances.*member > 0.0)) throw SchemaError("tolerance '" + name + "' must be positive");
  if (!(c.tolerances.richardson_lo < c.tolerances.richardson_hi))
    throw SchemaError("require richardson_lo < richardson_hi");
  for (const GridSpec* g : {&c.grid, &c.extremal_grid})
    if (!(g->r_min > 0.0 && g->r_max > g->r_min && g->ratio > 1.0))
      throw SchemaError("grid needs 0 < r_min < r_max and ratio > 1");
  if (c.out.empty()) throw SchemaError("output directory must not be empty");
  try {
    const Norm h = build_norm(c.norm, c.n);
    const Cone k = build_cone(c.cone, c.n);
    const Weight w = build_weight(c.weight, c.n);
    (void)h;
    if (c.a && std::abs(*c.a - w.degree()) > 1e-12) throw SchemaError("field 'a' differs from the weight degree");
    if (!(w.degree() >= 0.0)) throw SchemaError("require a >= 0");
    if (!w.is_unit() && !w.compatible_with(k))
      throw SchemaError("weight " + w.describe() + " is not admissible on " + k.describe());
    if (!(c.p < c.n + w.degree())) throw SchemaError("require p < n + a");
  } catch (const InvalidSpec& e) {
    throw SchemaError(e.what());
  }
}

}  // namespace conelab
