#include <cmath>
#include <limits>
#include <map>

#include "blowup/error.hpp"
#include "blowup/harness.hpp"

namespace blowup::harness {

using nlohmann::json;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Flattens nested objects and arrays into path -> leaf.
void flatten(const json& j, const std::string& prefix, std::map<std::string, json>& out) {
  if (j.is_object()) {
    for (auto it = j.begin(); it != j.end(); ++it)
      flatten(it.value(), prefix.empty() ? it.key() : prefix + "." + it.key(), out);
  } else if (j.is_array()) {
    for (std::size_t k = 0; k < j.size(); ++k) flatten(j[k], prefix + "[" + std::to_string(k) + "]", out);
  } else {
    out[prefix] = j;
  }
}

void diff_maps(const std::map<std::string, json>& a, const std::map<std::string, json>& b,
               std::vector<DiffEntry>& out, double& max_abs) {
  auto ia = a.begin();
  auto ib = b.begin();
  auto emit = [&](const std::string& key, const json& va, const json& vb) {
    DiffEntry e{key, va, vb, kInf};
    if (va.is_number() && vb.is_number()) e.abs_diff = std::abs(va.get<double>() - vb.get<double>());
    max_abs = std::max(max_abs, e.abs_diff);
    out.push_back(std::move(e));
  };
  while (ia != a.end() || ib != b.end()) {
    if (ib == b.end() || (ia != a.end() && ia->first < ib->first)) {
      emit(ia->first, ia->second, nullptr);
      ++ia;
    } else if (ia == a.end() || ib->first < ia->first) {
      emit(ib->first, nullptr, ib->second);
      ++ib;
    } else {
      if (ia->second != ib->second) emit(ia->first, ia->second, ib->second);
      ++ia;
      ++ib;
    }
  }
}

std::map<std::string, json> check_states(const json& report) {
  std::map<std::string, json> out;
  if (!report.contains("checks")) return out;
  for (const auto& c : report.at("checks")) out[c.value("name", "?")] = c.value("passed", false);
  return out;
}

}  // namespace

json RunDiff::to_json() const {
  auto entries = [](const std::vector<DiffEntry>& v) {
    json arr = json::array();
    for (const auto& e : v) {
      json j = {{"key", e.key}, {"a", e.a}, {"b", e.b}};
      if (std::isfinite(e.abs_diff)) j["abs_diff"] = e.abs_diff;
      arr.push_back(j);
    }
    return arr;
  };
  json j = {{"experiment", kind},
            {"identical", empty()},
            {"measurements", entries(measurements)},
            {"checks", entries(checks)}};
  if (std::isfinite(max_abs_diff)) j["max_abs_diff"] = max_abs_diff;
  else j["max_abs_diff"] = nullptr;
  return j;
}

RunDiff compare_runs(const json& a, const json& b) {
  if (!a.is_object() || !b.is_object() || !a.contains("experiment") || !b.contains("experiment"))
    throw ConfigError("compare: both inputs must be experiment reports");
  const auto ka = a.at("experiment").get<std::string>();
  const auto kb = b.at("experiment").get<std::string>();
  if (ka != kb) throw ConfigError("compare: experiment kind mismatch (" + ka + " vs " + kb + ")");
  RunDiff d;
  d.kind = ka;
  std::map<std::string, json> ma, mb;
  flatten(a.value("measurements", json::object()), "", ma);
  flatten(b.value("measurements", json::object()), "", mb);
  diff_maps(ma, mb, d.measurements, d.max_abs_diff);
  double ignored = 0.0;
  diff_maps(check_states(a), check_states(b), d.checks, ignored);
  return d;
}

}  // namespace blowup::harness
