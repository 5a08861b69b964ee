#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "blowup/ode1d.hpp"
#include "blowup/serialize.hpp"

using namespace blowup;

TEST(Serialize, ShortestRoundTrip) {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, 6.02214076e23, -2.5, 0.0}) {
    const auto s = io::format_double(v);
    EXPECT_EQ(std::stod(s), v) << s;
  }
  EXPECT_EQ(io::format_double(0.5), "0.5");
  EXPECT_EQ(io::format_double(INFINITY), "inf");
}

TEST(Serialize, CsvLayout) {
  io::CsvTable t({"x", "v"});
  t.add_row({0.0, 1.5});
  t.add_row({0.25, 2.0});
  EXPECT_EQ(t.rows(), 2u);
  EXPECT_EQ(t.str(), "x,v\n0,1.5\n0.25,2\n");
  EXPECT_THROW(t.add_row({1.0}), std::exception);
}

TEST(Serialize, WritesNestedDirectories) {
  const auto dir = std::filesystem::temp_directory_path() / "blowup_serialize_test" / "nested";
  std::filesystem::remove_all(dir.parent_path());
  io::write_text(dir / "a.txt", "hello\n");
  std::ifstream is(dir / "a.txt");
  std::stringstream ss;
  ss << is.rdbuf();
  EXPECT_EQ(ss.str(), "hello\n");
  std::filesystem::remove_all(dir.parent_path());
}

TEST(Serialize, ProfileTableAndMetadata) {
  const auto prof = ode1d::solve_profile(registry::p_laplace(2.0), registry::power_force(3.0), 1.0, 11, 0.9);
  const auto t = io::profile_table(prof);
  EXPECT_EQ(t.rows(), 11u);
  const auto j = io::to_json(prof);
  EXPECT_DOUBLE_EQ(j.at("v0").get<double>(), 1.0);
  EXPECT_NEAR(j.at("ell").get<double>(), prof.ell, 0.0);
}
