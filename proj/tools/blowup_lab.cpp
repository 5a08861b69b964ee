#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "blowup/error.hpp"
#include "blowup/harness.hpp"

namespace {

constexpr int kPass = 0;
constexpr int kCheckFailure = 1;
constexpr int kUsage = 2;

nlohmann::json read_report(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw blowup::ConfigError("cannot read report " + path);
  try {
    return nlohmann::json::parse(is);
  } catch (const nlohmann::json::parse_error& e) {
    throw blowup::ConfigError("report " + path + " is not valid JSON: " + e.what());
  }
}

int do_run(const std::string& config_path, const std::string& out, bool verbose) {
  const auto cfg = blowup::harness::load_config(config_path);
  std::filesystem::path dir = !out.empty() ? out : (!cfg.output.empty() ? cfg.output : "blowup-out/" + cfg.name);
  const auto rep = blowup::harness::run(cfg, dir, verbose ? &std::cerr : nullptr);
  std::cout << rep.summary();
  std::cout << "report: " << (dir / "report.json").string() << "\n";
  return rep.passed() ? kPass : kCheckFailure;
}

int do_compare(const std::string& a, const std::string& b) {
  const auto diff = blowup::harness::compare_runs(read_report(a), read_report(b));
  std::cout << diff.to_json().dump(2) << "\n";
  return diff.empty() ? kPass : kCheckFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"blowup-lab: boundary blow-up experiments for div(Q(|grad u|) grad u) = f(u)"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  bool verbose = false;
  auto* run = app.add_subcommand("run", "run an experiment described by a JSON config");
  run->add_option("config", config_path, "config file")->required();
  run->add_option("--out", out_dir, "output directory (default: config 'output', else blowup-out/<name>)");
  run->add_flag("--verbose", verbose, "log progress to stderr");

  std::string report_a, report_b;
  auto* compare = app.add_subcommand("compare", "structured diff of two report.json files");
  compare->add_option("report-a", report_a, "first report")->required();
  compare->add_option("report-b", report_b, "second report")->required();

  auto* schema = app.add_subcommand("schema", "print the JSON schema of the config format");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (run->parsed()) return do_run(config_path, out_dir, verbose);
    if (compare->parsed()) return do_compare(report_a, report_b);
    if (schema->parsed()) {
      std::cout << blowup::harness::config_schema().dump(2) << "\n";
      return kPass;
    }
  } catch (const blowup::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kCheckFailure;
  }
  return kUsage;
}
