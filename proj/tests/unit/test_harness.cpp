#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "blowup/error.hpp"
#include "blowup/harness.hpp"

using namespace blowup;
using namespace blowup::harness;
namespace fs = std::filesystem;

namespace {

const char* kSolve = R"({
  "experiment": "solve-1d",
  "name": "unit",
  "force": {"kind": "power", "q": 3},
  "operator": {"kind": "p-laplace", "p": 2},
  // comments are allowed
  "params": {"ell": 1, "samples": 21}
})";

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

std::string error_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

fs::path fresh_dir(const std::string& name) {
  const auto d = fs::temp_directory_path() / ("blowup_harness_" + name);
  fs::remove_all(d);
  return d;
}

}  // namespace

TEST(Harness, KindNamesRoundTrip) {
  for (auto k : all_kinds()) EXPECT_EQ(parse_kind(to_string(k)), k);
  EXPECT_EQ(all_kinds().size(), 7u);
  EXPECT_THROW(parse_kind("solve-3d"), ConfigError);
}

TEST(Harness, DefaultsAreFilledIn) {
  const auto cfg = parse_config(kSolve);
  EXPECT_EQ(cfg.kind, ExperimentKind::Solve1D);
  EXPECT_EQ(cfg.name, "unit");
  EXPECT_EQ(cfg.params.at("samples").get<int>(), 21);
  EXPECT_DOUBLE_EQ(cfg.params.at("x_fraction").get<double>(), 0.9);
  EXPECT_DOUBLE_EQ(cfg.op.p, 2.0);
}

TEST(Harness, SyntaxErrorsCarryPosition) {
  const auto msg = error_of("{\n  \"experiment\": \"ko-check\",\n  \"force\": {,}\n}");
  EXPECT_NE(msg.find("line 3"), std::string::npos) << msg;
  EXPECT_NE(msg.find("column"), std::string::npos) << msg;
}

TEST(Harness, UnknownKeysAreRejectedWithPath) {
  std::string text = kSolve;
  text.replace(text.find("\"samples\""), 9, "\"sampels\"");
  EXPECT_NE(error_of(text).find("params.sampels"), std::string::npos);
  EXPECT_NE(error_of(R"({"experiment": "ko-check", "colour": 1})").find("colour"), std::string::npos);
  EXPECT_NE(error_of(R"({"experiment": "ko-check", "force": {"kind": "power", "q": 2, "r": 1}})").find("force.r"),
            std::string::npos);
}

TEST(Harness, SemanticErrors) {
  EXPECT_FALSE(error_of(R"({"experiment": "solve-1d", "params": {"ell": "one"}})").empty());
  EXPECT_FALSE(error_of(R"({"experiment": "ko-check", "force": {"kind": "power", "q": -1}})").empty());
  EXPECT_FALSE(error_of(R"({"experiment": "ko-check", "operator": {"kind": "p-laplace", "p": 1}})").empty());
  EXPECT_FALSE(error_of(R"({"experiment": "warp"})").empty());
  EXPECT_FALSE(error_of("[1, 2]").empty());
  EXPECT_THROW(load_config("/nonexistent/config.json"), ConfigError);
}

TEST(Harness, ShippedConfigsParse) {
  int count = 0;
  for (const auto& entry : fs::directory_iterator(BLOWUP_CONFIG_DIR)) {
    if (entry.path().extension() != ".json") continue;
    EXPECT_NO_THROW(load_config(entry.path())) << entry.path();
    ++count;
  }
  EXPECT_GE(count, 7);
}

TEST(Harness, SchemaCoversEveryKind) {
  const auto s = config_schema();
  EXPECT_TRUE(s.contains("$schema"));
  const auto dumped = s.dump();
  for (auto k : all_kinds()) EXPECT_NE(dumped.find("\"" + to_string(k) + "\""), std::string::npos);
}

TEST(Harness, RunIsDeterministicAndComparable) {
  const auto cfg = parse_config(kSolve);
  const auto a = fresh_dir("a");
  const auto b = fresh_dir("b");
  const auto ra = run(cfg, a);
  const auto rb = run(cfg, b);
  EXPECT_TRUE(ra.passed());
  ASSERT_FALSE(ra.files.empty());
  EXPECT_EQ(ra.files, rb.files);
  for (const auto& f : ra.files) {
    ASSERT_TRUE(fs::exists(a / f)) << f;
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  }
  EXPECT_TRUE(fs::exists(a / "report.json"));

  const auto ja = nlohmann::json::parse(slurp(a / "report.json"));
  auto jb = nlohmann::json::parse(slurp(b / "report.json"));
  EXPECT_TRUE(compare_runs(ja, jb).empty());

  jb["measurements"]["v0"] = jb["measurements"]["v0"].get<double>() + 0.5;
  const auto diff = compare_runs(ja, jb);
  EXPECT_FALSE(diff.empty());
  EXPECT_NEAR(diff.max_abs_diff, 0.5, 1e-12);
  EXPECT_FALSE(diff.to_json().at("identical").get<bool>());

  jb["experiment"] = "ko-check";
  EXPECT_THROW(compare_runs(ja, jb), ConfigError);
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(Harness, FailedCheckIsReported) {
  std::string text = kSolve;
  text.replace(text.find("\"samples\": 21"), 13, "\"samples\": 21, \"anchor_distance\": 1e-3, \"anchor_band\": 1e-12");
  const auto out = fresh_dir("fail");
  const auto rep = run(parse_config(text), out);
  EXPECT_FALSE(rep.passed());
  bool found = false;
  for (const auto& c : rep.checks) found = found || !c.passed;
  EXPECT_TRUE(found);
  EXPECT_NE(rep.summary().find("FAIL"), std::string::npos);
  fs::remove_all(out);
}

TEST(Harness, KoCheckWritesArtifacts) {
  const auto cfg = parse_config(R"({"experiment": "ko-check", "params": {"expect_ko": true, "sweep_p": [2], "sweep_q_factors": [0.5, 3]}})");
  const auto out = fresh_dir("ko");
  const auto rep = run(cfg, out);
  EXPECT_TRUE(rep.passed());
  EXPECT_TRUE(fs::exists(out / "ko.json"));
  EXPECT_TRUE(fs::exists(out / "sweep.csv"));
  EXPECT_TRUE(rep.timings.contains("total_seconds"));
  fs::remove_all(out);
}
