// End-to-end acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "blowup/harness.hpp"
#include "blowup/ko.hpp"
#include "blowup/ode1d.hpp"
#include "blowup/pde2d.hpp"
#include "blowup/radial.hpp"
#include "oracles.hpp"

using namespace blowup;
using namespace blowup::registry;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

oracle::Fn power_fn(double q) {
  return [q](double v) { return std::pow(v, q); };
}

// Psi for f = t^q and the p-Laplacian in closed form.
double psi_power(double p, double q, double r) {
  const double alpha = (q + 1.0) / p;
  return std::pow((p - 1.0) * (q + 1.0) / p, 1.0 / p) * std::pow(r, 1.0 - alpha) / (alpha - 1.0);
}

// v0 with blow-up half-length ell, by bisection on the shooting oracle.
double oracle_v0(double p, double q, double ell) {
  double lo = 1e-3, hi = 1e3;
  for (int k = 0; k < 80; ++k) {
    const double mid = std::sqrt(lo * hi);
    (oracle::blowup_length_power(p, q, mid) > ell ? lo : hi) = mid;
  }
  return std::sqrt(lo * hi);
}

// ---------------------------------------------------------------- 1

Outcome ko_grid() {
  const auto t0 = std::chrono::steady_clock::now();
  int wrong = 0, cells = 0;
  double worst_psi = 0.0;
  for (double p : {1.5, 2.0, 3.0, 4.0})
    for (double factor : {0.5, 1.0, 1.5, 3.0}) {
      const double q = factor * (p - 1.0);
      const auto rep = ko::classify(p_laplace(p), power_force(q));
      ++cells;
      // int^inf s^{-(q+1)/p} converges iff q > p - 1; int_0 diverges iff q >= p - 1.
      wrong += rep.ko_holds != (q > p - 1.0) || rep.osgood_holds != (q >= p - 1.0) || rep.status != "ok";
      if (rep.ko_holds && rep.diagnostics.psi_at_one)
        worst_psi = std::max(worst_psi, rel(*rep.diagnostics.psi_at_one, psi_power(p, q, 1.0)));
    }
  const double t = seconds_since(t0);
  return {wrong == 0 && worst_psi <= 1e-9 && t < 10.0,
          std::to_string(cells) + " cells, " + std::to_string(wrong) + " misclassified, Psi(1) rel err " +
              fmt(worst_psi) + ", " + fmt(t) + " s (< 10)"};
}

// ---------------------------------------------------------------- 2

Outcome ode_triples() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst_profile = 0.0, worst_ell = 0.0;
  int count = 0;
  for (double p : {1.5, 2.0, 3.0, 4.0})
    for (auto [factor, v0] : {std::pair{1.5, 2.0}, {2.0, 0.5}, {3.0, 1.0}}) {
      const double q = factor * (p - 1.0);
      const auto op = p_laplace(p);
      const auto f = power_force(q);
      const double ell = ode1d::ell_of_v0(op, f, v0);
      std::vector<double> xs;
      for (int k = 0; k <= 45; ++k) xs.push_back(0.9 * ell * k / 45.0);
      const auto shot = oracle::shoot_plaplace_1d(p, power_fn(q), 0.0, v0, 0.0, xs);
      for (std::size_t k = 0; k < xs.size(); ++k)
        worst_profile = std::max(worst_profile, rel(ode1d::eval_profile(op, f, v0, xs[k]), shot.values[k]));
      worst_ell = std::max(worst_ell, rel(ell, oracle::blowup_length_power(p, q, v0)));
      ++count;
    }
  const double t = seconds_since(t0);
  return {count == 12 && worst_profile <= 1e-5 && worst_ell <= 1e-6 && t < 30.0,
          std::to_string(count) + " triples, profile rel err " + fmt(worst_profile) + " (<= 1e-5), ell rel err " +
              fmt(worst_ell) + " (<= 1e-6), " + fmt(t) + " s (< 30)"};
}

// ---------------------------------------------------------------- 3

Outcome boundary_rate() {
  const auto op = p_laplace(2.0);
  const auto f = power_force(3.0);
  const double ell = 1.0;
  const double v0 = ode1d::v0_of_ell(op, f, ell);
  const double d = 1e-3;
  const double v = ode1d::eval_profile(op, f, v0, ell, ell - d);
  const double ratio = v * d / std::sqrt(2.0);
  return {ratio >= 0.98 && ratio <= 1.02, "v (ell - x) / sqrt 2 = " + fmt(ratio) + " at ell - x = 1e-3, band [0.98, 1.02]"};
}

// ---------------------------------------------------------------- 4

Outcome ell_map() {
  const auto op = p_laplace(3.0);
  const auto f = power_force(4.0);
  bool decreasing = true;
  double prev = INFINITY, worst_round = 0.0;
  for (int k = 0; k < 10; ++k) {
    const double v0 = 0.1 * std::pow(100.0, k / 9.0);
    const double ell = ode1d::ell_of_v0(op, f, v0);
    decreasing = decreasing && ell < prev;
    prev = ell;
    worst_round = std::max(worst_round, rel(ode1d::v0_of_ell(op, f, ell), v0));
  }
  bool decays = true;
  std::string centers;
  double last = INFINITY;
  for (double ell : {1.0, 2.0, 4.0, 8.0}) {
    const double c = ode1d::large_solution(op, f, ell).value_at(0.0);
    decays = decays && c < last;
    last = c;
    centers += (centers.empty() ? "" : " > ") + fmt(c);
  }
  return {decreasing && worst_round <= 1e-6 && decays,
          std::string("ell(v0) ") + (decreasing ? "decreasing" : "NOT decreasing") + " on 10 points, round trip " +
              fmt(worst_round) + " (<= 1e-6), v_ell(0): " + centers};
}

// ---------------------------------------------------------------- 5

Outcome dead_core() {
  const double p = 2.0, a = 0.5;
  const auto op = p_laplace(p);
  const auto f = piecewise_force(a, 3.0);
  // Independent L: int_0^1 ds / sqrt(2F) = 2 sqrt 3, plus the outer part in s = e^t.
  const double L_ref = 2.0 * std::sqrt(3.0) + oracle::simpson(
                                                  [](double t) {
                                                    const double s = std::exp(t);
                                                    return s / std::sqrt(2.0 * (2.0 / 3.0 + (s * s * s * s - 1.0) / 4.0));
                                                  },
                                                  0.0, 40.0, 40000);
  ko::ShellOptions o8, o10;
  o8.min_extent = 1e8;
  o10.min_extent = 1e10;
  const double L8 = *ko::classify(op, f, o8).L;
  const double L10 = *ko::classify(op, f, o10).L;
  const double L = *ko::classify(op, f).L;
  const double cap_gap = rel(L8, L10);

  const double ell = L + 0.5;
  const auto prof = ode1d::dead_core_profile(op, f, ell, 201, 0.9);
  const double edge = ell - L;
  bool exact_zero = true;
  for (int k = 0; k <= 200; ++k) {
    const double x = -(edge - 1e-3) + 2.0 * (edge - 1e-3) * k / 200.0;
    exact_zero = exact_zero && prof.value_at(x) == 0.0;
  }

  // Exact seed near the core edge, then shooting with the full force.
  const double s0 = 1e-2;
  const auto seed = oracle::dead_core_seed(p, a, s0);
  std::vector<double> xs;
  for (int k = 1; k <= 40; ++k) xs.push_back(edge + s0 + (0.9 * ell - edge - s0) * k / 40.0);
  const auto fv = [&f](double v) { return f.value(v); };
  const auto shot = oracle::shoot_plaplace_1d(p, fv, edge + s0, seed.v, seed.z, xs);
  double worst = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) worst = std::max(worst, rel(prof.value_at(xs[k]), shot.values[k]));
  const bool ok = rel(L, L_ref) <= 1e-8 && cap_gap <= 1e-6 && prof.dead_core &&
                  std::abs(prof.dead_core->second - 0.5) <= 1e-9 && exact_zero && worst <= 1e-5;
  return {ok, "L = " + fmt(L) + " (oracle rel " + fmt(rel(L, L_ref)) + "), cap 1e8 vs 1e10 " + fmt(cap_gap) +
                  ", core " + (exact_zero ? "exactly 0" : "NOT zero") + ", RK rel err " + fmt(worst) + " (<= 1e-5)"};
}

// ---------------------------------------------------------------- 6

Outcome radial_checks() {
  const auto t0 = std::chrono::steady_clock::now();
  // n = 1 against the slab oracle.
  const double p1 = 3.0, q1 = 6.0, v1 = 1.5;
  const auto ball1 = radial::shoot_ball(p_laplace(p1), power_force(q1), 1, v1);
  const double ell1 = oracle::blowup_length_power(p1, q1, v1);
  std::vector<double> xs;
  for (int k = 1; k <= 30; ++k) xs.push_back(0.9 * ell1 * k / 30.0);
  const auto shot = oracle::shoot_plaplace_1d(p1, power_fn(q1), 0.0, v1, 0.0, xs);
  double worst1 = rel(ball1.R, ell1);
  for (std::size_t k = 0; k < xs.size(); ++k) worst1 = std::max(worst1, rel(ball1.value_at(xs[k]), shot.values[k]));

  // n = 2 ball of radius 1 and the annulus barrier, p = 2, q = 3.
  const auto ball2 = radial::ball_large_solution(p_laplace(2.0), power_force(3.0), 2, 1.0);
  const double d = 1e-3;
  const double ratio = psi_power(2.0, 3.0, ball2.value_at(ball2.R - d)) / d;
  const auto ann = radial::annulus_barrier(p_laplace(2.0), power_force(3.0), 2, 1.0, 2.0);
  const double ann_ratio = psi_power(2.0, 3.0, ann.value_at(ann.R + d)) / d;
  const double t = seconds_since(t0);
  const bool ok = worst1 <= 1e-5 && ratio >= 0.97 && ratio <= 1.03 && ann_ratio <= 1.05 && ball2.residual_max <= 1e-6 &&
                  t < 60.0;
  return {ok, "n=1 rel err " + fmt(worst1) + " (<= 1e-5), n=2 rate ratio " + fmt(ratio) + " in [0.97, 1.03], annulus " +
                  fmt(ann_ratio) + " (<= 1.05), residual " + fmt(ball2.residual_max) + ", " + fmt(t) + " s (< 60)"};
}

// ---------------------------------------------------------------- 7-9

struct CylinderRun {
  double p = 2.0;
  double q = 1.0;
  pde2d::CylinderFamily family;
  std::vector<double> errors;  // cross-section error per ell
  double refined_error = 0.0;  // ell = 4, nx = 129
  double seconds = 0.0;
};

// sup_{|x| <= 0.9} |u(x, 0) - v(x)| / v(x) against the shooting oracle.
double cross_error(const pde2d::DiscreteField& field, double p, double q, double v0) {
  const auto row = pde2d::slice(field, 0.0);
  std::vector<double> xs;
  std::vector<int> idx;
  for (int i = 0; i < field.grid.nx; ++i)
    if (field.grid.x(i) >= 0.0 && field.grid.x(i) <= 0.9 + 1e-12) {
      xs.push_back(field.grid.x(i));
      idx.push_back(i);
    }
  const auto shot = oracle::shoot_plaplace_1d(p, power_fn(q), 0.0, v0, 0.0, xs);
  double worst = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    const int mirror = field.grid.nx - 1 - idx[k];
    worst = std::max({worst, rel(row[idx[k]], shot.values[k]), rel(row[mirror], shot.values[k])});
  }
  return worst;
}

std::vector<CylinderRun>& cylinders() {
  static std::vector<CylinderRun> runs = [] {
    std::vector<CylinderRun> out;
    for (double p : {2.0, 3.0}) {
      const auto t0 = std::chrono::steady_clock::now();
      CylinderRun c;
      c.p = p;
      c.q = 3.0 * (p - 1.0);
      const auto op = p_laplace(p);
      const auto f = power_force(c.q);
      pde2d::SolverConfig cfg;
      c.family = pde2d::cylinder_family(op, f, {1.0, 2.0, 4.0}, cfg, 65);
      const double v0 = oracle_v0(p, c.q, 1.0);
      for (const auto& run : c.family.runs) c.errors.push_back(cross_error(run.field, p, c.q, v0));
      const auto fine = pde2d::escalate_m(pde2d::cylinder_grid(4.0, 129), op, f, cfg, c.family.common_m);
      c.refined_error = cross_error(fine.field, p, c.q, v0);
      c.seconds = seconds_since(t0);
      out.push_back(std::move(c));
    }
    return out;
  }();
  return runs;
}

Outcome cylinder_family_checks() {
  bool ok = true;
  double total = 0.0;
  std::string detail;
  for (const auto& c : cylinders()) {
    double worst_m = 0.0, worst_ell = -INFINITY;
    for (const auto& r : c.family.runs) worst_m = std::min(worst_m, r.worst_monotonicity);
    for (const auto& o : c.family.ordering) worst_ell = std::max(worst_ell, o.max_violation);
    const auto& e = c.errors;
    const bool dec = e[1] < e[0] && e[2] < e[1];
    const bool good = worst_m >= -1e-10 && worst_ell <= 1e-6 && dec && e[2] <= 0.05 && c.refined_error < e[2];
    ok = ok && good;
    total += c.seconds;
    detail += "p=" + fmt(c.p) + ": m-mono " + fmt(worst_m) + ", ell-order " + fmt(worst_ell) + ", err " + fmt(e[0]) +
              " > " + fmt(e[1]) + " > " + fmt(e[2]) + " -> " + fmt(c.refined_error) + " (nx=129); ";
  }
  ok = ok && total < 1800.0;
  return {ok, detail + fmt(total) + " s (< 1800)"};
}

Outcome local_bound_checks() {
  int checked = 0, violations = 0;
  const double R = 0.8;
  for (const auto& c : cylinders()) {
    const auto op = p_laplace(c.p);
    const auto f = power_force(c.q);
    for (std::size_t k = 0; k < c.family.runs.size(); ++k) {
      const auto& field = c.family.runs[k].field;
      const double ell = c.family.ells[k];
      for (double cx : {-0.2, 0.0, 0.2})
        for (double cy = -(ell - R); cy <= ell - R + 1e-12; cy += 0.25) {
          ++checked;
          violations += !radial::local_bound_check(field, op, f, cx, cy, R).holds;
        }
    }
  }
  return {violations == 0 && checked > 0,
          std::to_string(violations) + " violations over " + std::to_string(checked) + " balls, R = 0.8"};
}

Outcome translation_checks() {
  bool ok = true;
  std::string detail;
  for (const auto& c : cylinders()) {
    const auto& big = c.family.runs[2].field;
    const auto& mid = c.family.runs[1].field;
    const auto y0 = pde2d::slice(big, 0.0);
    const auto y1 = pde2d::slice(big, 1.0);
    const auto m0 = pde2d::slice(mid, 0.0);
    double gap = 0.0, dec = 0.0;
    for (int i = 0; i < big.grid.nx; ++i) {
      if (std::abs(big.grid.x(i)) > 0.9 + 1e-12) continue;
      gap = std::max(gap, std::abs(y0[i] - y1[i]));
      dec = std::max(dec, m0[i] - y0[i]);
    }
    ok = ok && gap < dec;
    detail += "p=" + fmt(c.p) + ": |u(.,0) - u(.,1)| " + fmt(gap) + " < decrement " + fmt(dec) + "; ";
  }
  return {ok, detail};
}

// ---------------------------------------------------------------- 10

Outcome ko_violation() {
  pde2d::SolverConfig cfg;
  const auto esc = pde2d::escalate_m(pde2d::cylinder_grid(1.0, 33), p_laplace(2.0), power_force(1.0), cfg);
  const auto& r = esc.rows;
  int run = 0;
  for (std::size_t k = 1; k < r.size(); ++k)
    run = (r[k].increment_center > 0.0 && r[k].increment_center >= r[k - 1].increment_center) ? run + 1 : 0;
  return {esc.ko_violated && esc.status == "KO violated numerically" && run >= 6,
          "status '" + esc.status + "', " + std::to_string(run) + " trailing non-decreasing increments (>= 6), last " +
              (r.empty() ? std::string("-") : fmt(r.back().increment_center))};
}

// ---------------------------------------------------------------- 11

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

Outcome determinism(const fs::path& work) {
  const std::vector<std::string> configs = {"ko_frontier", "solve_1d", "ell_map", "dead_core", "radial_n2",
                                            "asymptotics", "ko_violation", "cylinder_p2"};
  int files = 0, mismatches = 0;
  std::string first_bad;
  for (const auto& name : configs) {
    const auto cfg = harness::load_config(fs::path(BLOWUP_CONFIG_DIR) / (name + ".json"));
    const fs::path a = work / "a" / name, b = work / "b" / name;
    fs::remove_all(a);
    fs::remove_all(b);
    const auto ra = harness::run(cfg, a);
    const auto rb = harness::run(cfg, b);
    auto listed = ra.files;
    if (listed != rb.files) {
      ++mismatches;
      first_bad = name + " file lists";
      continue;
    }
    for (const auto& f : listed) {
      ++files;
      if (slurp(a / f) != slurp(b / f)) {
        ++mismatches;
        if (first_bad.empty()) first_bad = name + "/" + f;
      }
    }
    auto ja = nlohmann::json::parse(slurp(a / "report.json"));
    auto jb = nlohmann::json::parse(slurp(b / "report.json"));
    ja.erase("timings");
    jb.erase("timings");
    ++files;
    if (ja.dump() != jb.dump() || !harness::compare_runs(ja, jb).empty()) {
      ++mismatches;
      if (first_bad.empty()) first_bad = name + "/report.json";
    }
  }
  return {mismatches == 0 && files > 0, std::to_string(files) + " files over " + std::to_string(configs.size()) +
                                            " configs, " + std::to_string(mismatches) + " differ" +
                                            (first_bad.empty() ? "" : " (first: " + first_bad + ")")};
}

}  // namespace

int main(int argc, char** argv) {
  fs::path work = fs::temp_directory_path() / "blowup_acceptance";
  std::vector<int> only;
  for (int k = 1; k < argc; ++k) {
    const std::string arg = argv[k];
    if (arg == "--work" && k + 1 < argc) {
      work = argv[++k];
    } else if (arg == "--only" && k + 1 < argc) {
      only.push_back(std::stoi(argv[++k]));
    } else {
      std::fprintf(stderr, "usage: %s [--work DIR] [--only N]...\n", argv[0]);
      return 2;
    }
  }

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"KO frontier grid", ko_grid},
      {"1D profiles against shooting", ode_triples},
      {"boundary rate p=2 q=3", boundary_rate},
      {"ell(v0) map and decay", ell_map},
      {"dead core", dead_core},
      {"radial ball and annulus", radial_checks},
      {"2D cylinder family", cylinder_family_checks},
      {"local bound", local_bound_checks},
      {"translation invariance", translation_checks},
      {"KO violation contrast", ko_violation},
      {"determinism", [&] { return determinism(work); }},
  };

  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const int id = static_cast<int>(k) + 1;
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = criteria[k].second();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    failed += !out.pass;
    std::printf("%s criterion %d (%s): %s [%.1f s]\n", out.pass ? "PASS" : "FAIL", id, criteria[k].first.c_str(),
                out.detail.c_str(), seconds_since(t0));
    std::fflush(stdout);
  }
  std::printf("%d criteria failed\n", failed);
  return failed == 0 ? 0 : 1;
}
