#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "blowup/ode1d.hpp"
#include "blowup/pde2d.hpp"
#include "blowup/radial.hpp"

namespace blowup::io {

// Shortest round-trip decimal form; identical bits give identical text.
std::string format_double(double v);

// Column-oriented CSV table with a header row.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);
  void add_row(const std::vector<double>& row);
  std::size_t rows() const { return data_.size(); }
  std::string str() const;
  void write(const std::filesystem::path& path) const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<double>> data_;
};

void write_text(const std::filesystem::path& path, const std::string& text);
void write_json(const std::filesystem::path& path, const nlohmann::json& j);

CsvTable profile_table(const ode1d::Profile1D& profile);       // x, v
CsvTable radial_table(const radial::RadialProfile& profile);    // r, w, dw
CsvTable field_table(const pde2d::DiscreteField& field);        // x, y, u
CsvTable slice_table(const pde2d::DiscreteField& field, double y);  // x, u

nlohmann::json to_json(const ode1d::Profile1D& profile);  // metadata only, samples go to CSV
nlohmann::json to_json(const radial::RadialProfile& profile);
nlohmann::json field_header(const pde2d::DiscreteField& field);
nlohmann::json to_json(const pde2d::Escalation& esc);  // table without the field

}  // namespace blowup::io
