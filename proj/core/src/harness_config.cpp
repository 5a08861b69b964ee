#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "blowup/error.hpp"
#include "blowup/harness.hpp"
#include "harness_params.hpp"

namespace blowup::harness {

using nlohmann::json;

namespace {

const std::vector<std::pair<ExperimentKind, std::string>>& kind_names() {
  static const std::vector<std::pair<ExperimentKind, std::string>> names = {
      {ExperimentKind::KoCheck, "ko-check"},   {ExperimentKind::Solve1D, "solve-1d"},
      {ExperimentKind::EllMap, "ell-map"},     {ExperimentKind::DeadCore, "dead-core"},
      {ExperimentKind::Radial, "radial"},      {ExperimentKind::Cylinder, "cylinder"},
      {ExperimentKind::Asymptotics, "asymptotics"}};
  return names;
}

json nums(std::initializer_list<double> v) { return json(std::vector<double>(v)); }

}  // namespace

std::string to_string(ExperimentKind kind) {
  for (const auto& [k, n] : kind_names())
    if (k == kind) return n;
  return "unknown";
}

ExperimentKind parse_kind(const std::string& name) {
  for (const auto& [k, n] : kind_names())
    if (n == name) return k;
  std::string known;
  for (const auto& [k, n] : kind_names()) known += (known.empty() ? "" : ", ") + n;
  throw ConfigError("experiment: unknown kind '" + name + "' (expected one of " + known + ")");
}

const std::vector<ExperimentKind>& all_kinds() {
  static const std::vector<ExperimentKind> kinds = [] {
    std::vector<ExperimentKind> v;
    for (const auto& kn : kind_names()) v.push_back(kn.first);
    return v;
  }();
  return kinds;
}

const std::vector<ParamDef>& param_defs(ExperimentKind kind) {
  using T = ParamType;
  static const std::map<ExperimentKind, std::vector<ParamDef>> defs = {
      {ExperimentKind::KoCheck,
       {{"sweep_p", T::NumberList, json::array(), "p values of a power/p-Laplace frontier sweep"},
        {"sweep_q_factors", T::NumberList, json::array(), "q = factor * (p - 1) for the sweep"},
        {"a5_betas", T::NumberList, json::array(), "betas for the tail-ratio diagnostic"},
        {"expect_ko", T::OptionalBoolean, nullptr, "expected Keller-Osserman verdict"},
        {"expect_osgood", T::OptionalBoolean, nullptr, "expected Osgood verdict"},
        {"expect_a3", T::OptionalBoolean, nullptr, "expected finite integral at zero"}}},
      {ExperimentKind::Solve1D,
       {{"ell", T::OptionalNumber, nullptr, "half-length of the interval (default 1 when v0 is absent)"},
        {"v0", T::OptionalNumber, nullptr, "minimum value; alternative to ell"},
        {"samples", T::Integer, 101, "number of profile samples"},
        {"x_fraction", T::Number, 0.9, "samples cover [0, x_fraction * ell]"},
        {"anchor_distance", T::OptionalNumber, nullptr, "distance to the edge for the blow-up rate check"},
        {"anchor_band", T::Number, 0.02, "allowed relative deviation of v / Phi at the anchor"}}},
      {ExperimentKind::EllMap,
       {{"v0_lo", T::Number, 0.1, "smallest v0"},
        {"v0_hi", T::Number, 10.0, "largest v0"},
        {"points", T::Integer, 10, "log-spaced v0 points"},
        {"roundtrip_tol", T::Number, 1e-6, "relative tolerance of v0 -> ell -> v0"},
        {"decay_ells", T::NumberList, nums({1, 2, 4, 8}), "interval half-lengths for the decay sweep"},
        {"decay_probe", T::Number, 0.0, "abscissa probed by the decay sweep"}}},
      {ExperimentKind::DeadCore,
       {{"extra", T::Number, 0.5, "ell = L + extra"},
        {"samples", T::Integer, 201, "number of profile samples"},
        {"x_fraction", T::Number, 0.9, "samples cover [0, x_fraction * ell]"},
        {"core_margin", T::Number, 1e-3, "core interval is shrunk by this margin for the zero check"},
        {"cap_tol", T::Number, 1e-6, "relative agreement of L between tail caps 1e8 and 1e10"}}},
      {ExperimentKind::Radial,
       {{"n", T::Integer, 2, "space dimension"},
        {"R", T::OptionalNumber, nullptr, "ball radius (default 1 when v0 is absent)"},
        {"v0", T::OptionalNumber, nullptr, "center value; alternative to R"},
        {"ratio_distance", T::Number, 1e-3, "distance R - r of the blow-up rate check"},
        {"ratio_band", T::Number, 0.03, "allowed relative deviation of w / Phi"},
        {"residual_tol", T::Number, 1e-6, "bound on the scaled integrated residual"},
        {"cap_tol", T::Number, 1e-6, "relative agreement of R between caps 1e8 and 1e10"},
        {"match_tol", T::Number, 1e-5, "n = 1 only: agreement of R with the 1D blow-up half-length"},
        {"annulus_inner", T::OptionalNumber, nullptr, "inner radius of the annulus barrier"},
        {"annulus_outer", T::OptionalNumber, nullptr, "outer radius of the annulus barrier"},
        {"annulus_band", T::Number, 0.05, "allowed deviation of the barrier distance ratio"}}},
      {ExperimentKind::Cylinder,
       {{"ells", T::NumberList, nums({1, 2, 4}), "increasing cylinder half-lengths"},
        {"nx", T::Integer, 65, "nodes across the cross-section; y spacing matches"},
        {"epsilon", T::Number, 1e-8, "gradient regularization"},
        {"tol_res", T::Number, 1e-9, "scaled residual tolerance"},
        {"tol_m", T::Number, 1e-4, "plateau tolerance on the sup over K of the m-increment"},
        {"m_start", T::Number, 2.0, "first boundary value"},
        {"max_doublings", T::Integer, 48, "cap on the m schedule"},
        {"formulation", T::String, "auto", "auto, direct or blowup-distance"},
        {"compact_scale", T::Number, 0.75, "K is the centered sub-rectangle at this scale"},
        {"monotone_tol", T::Number, 1e-10, "allowed decrease of u under m-doubling"},
        {"ell_tol", T::Number, 1e-6, "allowed increase of u under ell growth"},
        {"max_cross_error", T::Number, 0.05, "relative sup error of the mid-slice at the largest ell"},
        {"local_bound_R", T::Number, 0.8, "ball radius of the local bound check"},
        {"translation_y", T::OptionalNumber, nullptr, "off-center slice (default largest ell / 4)"},
        {"epsilon_check", T::Boolean, true, "re-solve the largest ell with epsilon / 10"},
        {"epsilon_tol", T::Number, 1e-6, "allowed change on K under epsilon / 10"},
        {"expect_ko_violation", T::Boolean, false, "contrast run: expect unbounded growth in m"},
        {"write_fields", T::Boolean, true, "write full fields as CSV"}}},
      {ExperimentKind::Asymptotics,
       {{"ell", T::Number, 1.0, "half-length of the interval"},
        {"distances", T::NumberList, nums({1e-1, 1e-2, 1e-3}), "distances to the edge"},
        {"band", T::Number, 0.02, "allowed deviation of v / Phi at the smallest distance"},
        {"a5_betas", T::NumberList, nums({0.5}), "betas for the tail-ratio diagnostic"},
        {"a5_t_lo", T::Number, 1e2, "lower end of the diagnostic range"},
        {"a5_t_hi", T::Number, 1e6, "upper end of the diagnostic range"}}},
  };
  return defs.at(kind);
}

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& msg) { throw ConfigError(path + ": " + msg); }

void reject_unknown(const json& obj, const std::vector<std::string>& allowed, const std::string& path) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end()) {
      std::string list;
      for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
      fail(path.empty() ? it.key() : path + "." + it.key(), "unknown key (allowed: " + list + ")");
    }
  }
}

double number_at(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.contains(key)) fail(path + "." + key, "missing");
  const auto& v = obj.at(key);
  if (!v.is_number()) fail(path + "." + key, "expected a number");
  return v.get<double>();
}

std::vector<double> numbers_at(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.contains(key)) fail(path + "." + key, "missing");
  const auto& v = obj.at(key);
  if (!v.is_array()) fail(path + "." + key, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (!v[k].is_number()) fail(path + "." + key + "[" + std::to_string(k) + "]", "expected a number");
    out.push_back(v[k].get<double>());
  }
  return out;
}

registry::ForceSpec parse_force(const json& j) {
  if (!j.is_object()) fail("force", "expected an object");
  if (!j.contains("kind") || !j["kind"].is_string()) fail("force.kind", "missing or not a string");
  const auto kind = j["kind"].get<std::string>();
  registry::ForceSpec s;
  if (kind == "power") {
    reject_unknown(j, {"kind", "q"}, "force");
    s.kind = registry::ForceKind::Power;
    s.q = number_at(j, "q", "force");
  } else if (kind == "exp-minus-one") {
    reject_unknown(j, {"kind"}, "force");
    s.kind = registry::ForceKind::ExpMinusOne;
  } else if (kind == "piecewise") {
    reject_unknown(j, {"kind", "a", "b"}, "force");
    s.kind = registry::ForceKind::PiecewisePower;
    s.a = number_at(j, "a", "force");
    s.b = number_at(j, "b", "force");
  } else if (kind == "table") {
    reject_unknown(j, {"kind", "t", "f"}, "force");
    s.kind = registry::ForceKind::Table;
    s.table_t = numbers_at(j, "t", "force");
    s.table_f = numbers_at(j, "f", "force");
  } else {
    fail("force.kind", "unknown force '" + kind + "' (expected power, exp-minus-one, piecewise, table)");
  }
  return s;
}

registry::OperatorSpec parse_operator(const json& j) {
  if (!j.is_object()) fail("operator", "expected an object");
  if (!j.contains("kind") || !j["kind"].is_string()) fail("operator.kind", "missing or not a string");
  const auto kind = j["kind"].get<std::string>();
  registry::OperatorSpec s;
  if (kind == "p-laplace") {
    reject_unknown(j, {"kind", "p"}, "operator");
    s.kind = registry::OperatorKind::PLaplace;
    s.p = number_at(j, "p", "operator");
  } else if (kind == "mean-curvature") {
    reject_unknown(j, {"kind"}, "operator");
    s.kind = registry::OperatorKind::MeanCurvature;
  } else if (kind == "table") {
    reject_unknown(j, {"kind", "r", "a"}, "operator");
    s.kind = registry::OperatorKind::Custom;
    s.table_r = numbers_at(j, "r", "operator");
    s.table_a = numbers_at(j, "a", "operator");
  } else {
    fail("operator.kind", "unknown operator '" + kind + "' (expected p-laplace, mean-curvature, table)");
  }
  return s;
}

bool matches(ParamType t, const json& v) {
  switch (t) {
    case ParamType::Number: return v.is_number();
    case ParamType::Integer: return v.is_number_integer();
    case ParamType::Boolean: return v.is_boolean();
    case ParamType::String: return v.is_string();
    case ParamType::NumberList:
      if (!v.is_array()) return false;
      for (const auto& e : v)
        if (!e.is_number()) return false;
      return true;
    case ParamType::OptionalNumber: return v.is_null() || v.is_number();
    case ParamType::OptionalBoolean: return v.is_null() || v.is_boolean();
  }
  return false;
}

const char* type_name(ParamType t) {
  switch (t) {
    case ParamType::Number: return "a number";
    case ParamType::Integer: return "an integer";
    case ParamType::Boolean: return "a boolean";
    case ParamType::String: return "a string";
    case ParamType::NumberList: return "an array of numbers";
    case ParamType::OptionalNumber: return "a number or null";
    case ParamType::OptionalBoolean: return "a boolean or null";
  }
  return "?";
}

json parse_params(ExperimentKind kind, const json& j) {
  const auto& defs = param_defs(kind);
  json out = json::object();
  if (!j.is_null() && !j.is_object()) fail("params", "expected an object");
  std::vector<std::string> names;
  for (const auto& d : defs) names.push_back(d.name);
  if (j.is_object()) reject_unknown(j, names, "params");
  for (const auto& d : defs) {
    if (j.is_object() && j.contains(d.name)) {
      const auto& v = j.at(d.name);
      if (!matches(d.type, v)) fail(std::string("params.") + d.name, std::string("expected ") + type_name(d.type));
      out[d.name] = v;
    } else {
      out[d.name] = d.fallback;
    }
  }
  return out;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text, nullptr, true, true);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, col = 1;
    const std::size_t upto = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
    for (std::size_t k = 0; k < upto; ++k) {
      if (text[k] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ConfigError("config syntax error at line " + std::to_string(line) + ", column " + std::to_string(col) +
                      ": " + e.what());
  }
  if (!root.is_object()) throw ConfigError("config: top level must be an object");
  reject_unknown(root, {"experiment", "name", "force", "operator", "params", "output"}, "");
  if (!root.contains("experiment") || !root["experiment"].is_string()) fail("experiment", "missing or not a string");

  ExperimentConfig cfg;
  cfg.kind = parse_kind(root["experiment"].get<std::string>());
  cfg.name = to_string(cfg.kind);
  if (root.contains("name")) {
    if (!root["name"].is_string()) fail("name", "expected a string");
    cfg.name = root["name"].get<std::string>();
  }
  if (root.contains("output")) {
    if (!root["output"].is_string()) fail("output", "expected a string");
    cfg.output = root["output"].get<std::string>();
  }
  const json force = root.value("force", json{{"kind", "power"}, {"q", 3.0}});
  const json op = root.value("operator", json{{"kind", "p-laplace"}, {"p", 2.0}});
  cfg.force = parse_force(force);
  cfg.op = parse_operator(op);
  cfg.params = parse_params(cfg.kind, root.value("params", json()));

  // Build the objects once so invalid data fails at load time rather than mid-run.
  try {
    (void)registry::make_force(cfg.force);
  } catch (const Error& e) {
    fail("force", e.what());
  }
  try {
    (void)registry::make_operator(cfg.op);
  } catch (const Error& e) {
    fail("operator", e.what());
  }
  cfg.echo = {{"experiment", to_string(cfg.kind)}, {"name", cfg.name}, {"force", force}, {"operator", op},
              {"params", cfg.params}};
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str());
}

json config_schema() {
  auto param_schema = [](const ParamDef& d) {
    json s;
    switch (d.type) {
      case ParamType::Number: s["type"] = "number"; break;
      case ParamType::Integer: s["type"] = "integer"; break;
      case ParamType::Boolean: s["type"] = "boolean"; break;
      case ParamType::String: s["type"] = "string"; break;
      case ParamType::NumberList: s = {{"type", "array"}, {"items", {{"type", "number"}}}}; break;
      case ParamType::OptionalNumber: s["type"] = json::array({"number", "null"}); break;
      case ParamType::OptionalBoolean: s["type"] = json::array({"boolean", "null"}); break;
    }
    s["default"] = d.fallback;
    s["description"] = d.help;
    return s;
  };

  json force = {
      {"oneOf",
       json::array({
           {{"type", "object"},
            {"properties", {{"kind", {{"const", "power"}}}, {"q", {{"type", "number"}}}}},
            {"required", {"kind", "q"}},
            {"additionalProperties", false}},
           {{"type", "object"},
            {"properties", {{"kind", {{"const", "exp-minus-one"}}}}},
            {"required", {"kind"}},
            {"additionalProperties", false}},
           {{"type", "object"},
            {"properties",
             {{"kind", {{"const", "piecewise"}}}, {"a", {{"type", "number"}}}, {"b", {{"type", "number"}}}}},
            {"required", {"kind", "a", "b"}},
            {"additionalProperties", false}},
           {{"type", "object"},
            {"properties",
             {{"kind", {{"const", "table"}}},
              {"t", {{"type", "array"}, {"items", {{"type", "number"}}}}},
              {"f", {{"type", "array"}, {"items", {{"type", "number"}}}}}}},
            {"required", {"kind", "t", "f"}},
            {"additionalProperties", false}},
       })},
      {"default", {{"kind", "power"}, {"q", 3.0}}}};
  json op = {
      {"oneOf",
       json::array({
           {{"type", "object"},
            {"properties", {{"kind", {{"const", "p-laplace"}}}, {"p", {{"type", "number"}}}}},
            {"required", {"kind", "p"}},
            {"additionalProperties", false}},
           {{"type", "object"},
            {"properties", {{"kind", {{"const", "mean-curvature"}}}}},
            {"required", {"kind"}},
            {"additionalProperties", false}},
           {{"type", "object"},
            {"properties",
             {{"kind", {{"const", "table"}}},
              {"r", {{"type", "array"}, {"items", {{"type", "number"}}}}},
              {"a", {{"type", "array"}, {"items", {{"type", "number"}}}}}}},
            {"required", {"kind", "r", "a"}},
            {"additionalProperties", false}},
       })},
      {"default", {{"kind", "p-laplace"}, {"p", 2.0}}}};

  json variants = json::array();
  json kinds = json::array();
  for (auto kind : all_kinds()) {
    kinds.push_back(to_string(kind));
    json props = json::object();
    for (const auto& d : param_defs(kind)) props[d.name] = param_schema(d);
    variants.push_back({{"if", {{"properties", {{"experiment", {{"const", to_string(kind)}}}}}}},
                        {"then",
                         {{"properties",
                           {{"params", {{"type", "object"}, {"properties", props}, {"additionalProperties", false}}}}}}}});
  }
  return {{"$schema", "http://json-schema.org/draft-07/schema#"},
          {"title", "blowup-lab experiment config"},
          {"type", "object"},
          {"required", {"experiment"}},
          {"additionalProperties", false},
          {"properties",
           {{"experiment", {{"enum", kinds}}},
            {"name", {{"type", "string"}}},
            {"output", {{"type", "string"}, {"description", "output directory, overridden by --out"}}},
            {"force", force},
            {"operator", op},
            {"params", {{"type", "object"}}}}},
          {"allOf", variants}};
}

}  // namespace blowup::harness
