#include "blowup/serialize.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "blowup/error.hpp"

namespace blowup::io {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

void CsvTable::add_row(const std::vector<double>& row) {
  if (row.size() != header_.size()) throw Error("csv row width does not match the header");
  data_.push_back(row);
}

std::string CsvTable::str() const {
  std::string out;
  for (std::size_t k = 0; k < header_.size(); ++k) out += (k ? "," : "") + header_[k];
  out += '\n';
  for (const auto& row : data_) {
    for (std::size_t k = 0; k < row.size(); ++k) {
      if (k) out += ',';
      out += format_double(row[k]);
    }
    out += '\n';
  }
  return out;
}

void CsvTable::write(const std::filesystem::path& path) const { write_text(path, str()); }

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open " + path.string() + " for writing");
  os << text;
  if (!os) throw Error("failed writing " + path.string());
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) { write_text(path, j.dump(2) + "\n"); }

CsvTable profile_table(const ode1d::Profile1D& profile) {
  CsvTable t({"x", "v"});
  for (std::size_t k = 0; k < profile.x.size(); ++k) t.add_row({profile.x[k], profile.v[k]});
  return t;
}

CsvTable radial_table(const radial::RadialProfile& profile) {
  CsvTable t({"r", "w", "dw"});
  for (std::size_t k = 0; k < profile.r.size(); ++k) t.add_row({profile.r[k], profile.w[k], profile.dw[k]});
  return t;
}

CsvTable field_table(const pde2d::DiscreteField& field) {
  CsvTable t({"x", "y", "u"});
  const auto& g = field.grid;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) t.add_row({g.x(i), g.y(j), field.at(i, j)});
  return t;
}

CsvTable slice_table(const pde2d::DiscreteField& field, double y) {
  CsvTable t({"x", "u"});
  const auto s = pde2d::slice(field, y);
  for (int i = 0; i < field.grid.nx; ++i) t.add_row({field.grid.x(i), s[i]});
  return t;
}

nlohmann::json to_json(const ode1d::Profile1D& profile) {
  nlohmann::json j;
  j["operator"] = profile.op.describe();
  j["force"] = profile.force.describe();
  j["v0"] = profile.v0;
  j["ell"] = profile.ell;
  j["samples"] = profile.x.size();
  if (profile.L) j["L"] = *profile.L;
  if (profile.dead_core) j["dead_core"] = {profile.dead_core->first, profile.dead_core->second};
  return j;
}

nlohmann::json to_json(const radial::RadialProfile& p) {
  nlohmann::json j;
  j["kind"] = p.kind == radial::RadialKind::Ball ? "ball" : "annulus-barrier";
  j["n"] = p.n;
  j["p"] = p.p;
  j["v0"] = p.v0;
  j["R"] = p.R;
  if (p.kind == radial::RadialKind::AnnulusBarrier) {
    j["r_inner"] = p.r_inner;
    j["R_outer"] = p.R_outer;
    j["outer_slope"] = p.outer_slope;
  }
  j["r_cap"] = p.r_cap;
  j["w_cap"] = p.w_cap;
  j["residual_max"] = p.residual_max;
  j["steps"] = p.steps;
  j["samples"] = p.r.size();
  return j;
}

nlohmann::json field_header(const pde2d::DiscreteField& f) {
  const auto& d = f.diagnostics;
  return {{"grid",
           {{"x_half", f.grid.x_half},
            {"y_half", f.grid.y_half},
            {"nx", f.grid.nx},
            {"ny", f.grid.ny},
            {"hx", f.grid.hx()},
            {"hy", f.grid.hy()}}},
          {"m", f.m},
          {"epsilon", f.epsilon},
          {"p", f.p},
          {"diagnostics",
           {{"formulation", pde2d::to_string(d.formulation)},
            {"iterations", d.iterations},
            {"halvings", d.halvings},
            {"gs_fallbacks", d.gs_fallbacks},
            {"projections", d.projections},
            {"residual_sup", d.residual_sup},
            {"direct_residual_sup_on_K", d.direct_residual_sup},
            {"converged", d.converged}}}};
}

nlohmann::json to_json(const pde2d::Escalation& esc) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : esc.rows)
    rows.push_back({{"m", r.m},
                    {"center", r.center},
                    {"increment_center", r.increment_center},
                    {"increment_K", r.increment_K},
                    {"min_increment", r.min_increment},
                    {"energy_K", r.energy_K},
                    {"iterations", r.iterations},
                    {"residual", r.residual}});
  return {{"status", esc.status},
          {"plateau", esc.plateau},
          {"ko_violated", esc.ko_violated},
          {"worst_monotonicity", esc.worst_monotonicity},
          {"energy_bound", esc.energy_bound},
          {"energy_slope", esc.energy_slope},
          {"rows", rows}};
}

}  // namespace blowup::io
