#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <ostream>
#include <sstream>

#include "blowup/error.hpp"
#include "blowup/harness.hpp"
#include "blowup/ko.hpp"
#include "blowup/ode1d.hpp"
#include "blowup/pde2d.hpp"
#include "blowup/radial.hpp"
#include "blowup/serialize.hpp"

namespace blowup::harness {

using nlohmann::json;
namespace fs = std::filesystem;

bool ExperimentReport::passed() const {
  for (const auto& c : checks)
    if (!c.passed) return false;
  return true;
}

json ExperimentReport::to_json() const {
  json cs = json::array();
  for (const auto& c : checks) {
    json j = {{"name", c.name}, {"passed", c.passed}, {"value", c.value}, {"tolerance", c.tolerance}};
    if (!c.detail.empty()) j["detail"] = c.detail;
    if (!c.error.empty()) j["error"] = c.error;
    cs.push_back(j);
  }
  return {{"experiment", harness::to_string(kind)},
          {"status", passed() ? "pass" : "fail"},
          {"config", config},
          {"checks", cs},
          {"measurements", measurements},
          {"files", files},
          {"timings", timings}};
}

std::string ExperimentReport::summary() const {
  std::ostringstream os;
  os << "experiment: " << harness::to_string(kind) << "\n";
  os << "name: " << config.value("name", "") << "\n";
  for (const auto& c : checks) {
    os << (c.passed ? "PASS " : "FAIL ") << c.name << "  value=" << c.value.dump()
       << "  tolerance=" << c.tolerance.dump();
    if (!c.detail.empty()) os << "  (" << c.detail << ")";
    if (!c.error.empty()) os << "  error: " << c.error;
    os << "\n";
  }
  os << "files:";
  for (const auto& f : files) os << " " << f;
  os << "\nstatus: " << (passed() ? "pass" : "fail") << "\n";
  return os.str();
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Outcome {
  bool passed = false;
  json value;
  json tolerance;
  std::string detail;
};

class Session {
 public:
  Session(ExperimentReport& rep, fs::path dir, std::ostream* log) : rep_(rep), dir_(std::move(dir)), log_(log) {}

  void check(const std::string& name, const std::function<Outcome()>& body) {
    CheckResult c;
    c.name = name;
    try {
      auto o = body();
      c.passed = o.passed;
      c.value = std::move(o.value);
      c.tolerance = std::move(o.tolerance);
      c.detail = std::move(o.detail);
    } catch (const std::exception& e) {
      c.passed = false;
      c.error = e.what();
    }
    if (log_) *log_ << (c.passed ? "  pass " : "  FAIL ") << name << (c.error.empty() ? "" : ": " + c.error) << "\n";
    rep_.checks.push_back(std::move(c));
  }

  // Records an error as a failed check without aborting the run.
  template <class F>
  bool attempt(const std::string& name, F&& f) {
    try {
      f();
      return true;
    } catch (const std::exception& e) {
      CheckResult c;
      c.name = name;
      c.error = e.what();
      if (log_) *log_ << "  FAIL " << name << ": " << e.what() << "\n";
      rep_.checks.push_back(std::move(c));
      return false;
    }
  }

  void measure(const std::string& key, json v) { rep_.measurements[key] = std::move(v); }

  void write(const std::string& name, const io::CsvTable& t) {
    t.write(dir_ / name);
    rep_.files.push_back(name);
  }
  void write(const std::string& name, const json& j) {
    io::write_json(dir_ / name, j);
    rep_.files.push_back(name);
  }

  void note(const std::string& msg) {
    if (log_) *log_ << msg << "\n";
  }

 private:
  ExperimentReport& rep_;
  fs::path dir_;
  std::ostream* log_;
};

std::optional<double> opt_number(const json& p, const char* key) {
  if (p.at(key).is_null()) return std::nullopt;
  return p.at(key).get<double>();
}

double rel_diff(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

std::string tag(double v) { return io::format_double(v); }

// ---------------------------------------------------------------- ko-check

void run_ko_check(const ExperimentConfig& cfg, Session& s) {
  const auto op = registry::make_operator(cfg.op);
  const auto force = registry::make_force(cfg.force);
  const auto& p = cfg.params;
  ko::KOReport rep;
  const bool ok = s.attempt("classify", [&] { rep = ko::classify(op, force); });
  if (ok) {
    s.write("ko.json", ko::to_json(rep));
    s.measure("ko_holds", rep.ko_holds);
    s.measure("osgood_holds", rep.osgood_holds);
    s.measure("a3_holds", rep.a3_holds);
    if (rep.L) s.measure("L", *rep.L);
    if (rep.diagnostics.psi_at_one) s.measure("psi_at_one", *rep.diagnostics.psi_at_one);
    auto expect = [&](const char* key, const char* label, bool actual) {
      if (p.at(key).is_null()) return;
      const bool want = p.at(key).get<bool>();
      s.check(label, [&] { return Outcome{actual == want, actual, want, ""}; });
    };
    expect("expect_ko", "ko_holds matches expectation", rep.ko_holds);
    expect("expect_osgood", "osgood_holds matches expectation", rep.osgood_holds);
    expect("expect_a3", "a3_holds matches expectation", rep.a3_holds);
  }

  const auto ps = p.at("sweep_p").get<std::vector<double>>();
  const auto factors = p.at("sweep_q_factors").get<std::vector<double>>();
  if (!ps.empty() && !factors.empty()) {
    s.check("frontier sweep: ko_holds iff q > p - 1", [&] {
      io::CsvTable t({"p", "q", "factor", "ko_holds", "expected", "psi_at_one"});
      int wrong = 0;
      for (double pp : ps)
        for (double fac : factors) {
          const double q = fac * (pp - 1.0);
          const auto r = ko::classify(registry::p_laplace(pp), registry::power_force(q));
          const bool expected = q > pp - 1.0;
          wrong += (r.ko_holds != expected);
          t.add_row({pp, q, fac, r.ko_holds ? 1.0 : 0.0, expected ? 1.0 : 0.0,
                     r.diagnostics.psi_at_one.value_or(kInf)});
        }
      s.write("sweep.csv", t);
      return Outcome{wrong == 0, wrong, 0, std::to_string(t.rows()) + " cases"};
    });
  }

  const auto betas = p.at("a5_betas").get<std::vector<double>>();
  if (!betas.empty()) {
    s.attempt("a5 diagnostic", [&] {
      const auto a5 = ko::check_a5(force, op, betas);
      io::CsvTable t({"beta", "t", "ratio"});
      json rows = json::array();
      for (const auto& row : a5.rows) {
        for (std::size_t k = 0; k < row.t.size(); ++k) t.add_row({row.beta, row.t[k], row.ratio[k]});
        rows.push_back({{"beta", row.beta}, {"infimum", row.infimum}, {"likely_holds", row.likely_holds}});
      }
      s.write("a5.csv", t);
      s.measure("a5", rows);
    });
  }
}

// ---------------------------------------------------------------- solve-1d

void run_solve_1d(const ExperimentConfig& cfg, Session& s) {
  const auto op = registry::make_operator(cfg.op);
  const auto force = registry::make_force(cfg.force);
  const auto& p = cfg.params;
  const auto ell_in = opt_number(p, "ell");
  const auto v0_in = opt_number(p, "v0");
  if (ell_in && v0_in) throw ConfigError("params: give either ell or v0, not both");
  const int samples = p.at("samples").get<int>();
  const double frac = p.at("x_fraction").get<double>();
  if (samples < 2) throw ConfigError("params.samples: need at least 2");
  if (!(frac > 0.0 && frac < 1.0)) throw ConfigError("params.x_fraction: must lie in (0, 1)");

  ode1d::Profile1D prof;
  if (!s.attempt("profile", [&] {
        prof = v0_in ? ode1d::solve_profile(op, force, *v0_in, samples, frac)
                     : ode1d::large_solution(op, force, ell_in.value_or(1.0), samples, frac);
      }))
    return;
  s.write("profile.csv", io::profile_table(prof));
  s.write("profile.json", io::to_json(prof));
  s.measure("v0", prof.v0);
  s.measure("ell", prof.ell);

  const auto chk = ode1d::verify_profile(prof);
  s.measure("max_relation_error", chk.max_relation_error);
  s.check("implicit relation holds at the samples",
          [&] { return Outcome{chk.relation_ok, chk.max_relation_error, 1e-8, ""}; });
  s.check("profile convex", [&] { return Outcome{chk.convex, chk.min_second_difference, -1e-8, "min second difference"}; });
  s.check("profile increasing away from the center", [&] { return Outcome{chk.increasing, chk.increasing, true, ""}; });
  s.check("first row is the center", [&] {
    const bool ok = !prof.x.empty() && prof.x[0] == 0.0 && prof.v[0] == prof.v0;
    return Outcome{ok, json::array({prof.x.at(0), prof.v.at(0)}), json::array({0.0, prof.v0}), ""};
  });

  if (const auto d = opt_number(p, "anchor_distance")) {
    const double band = p.at("anchor_band").get<double>();
    s.check("blow-up rate at the anchor distance", [&] {
      if (prof.dead_core) throw ConfigError("anchor check needs a positive minimum");
      const ko::BlowupRate rate(op, force);
      const double v = ode1d::eval_profile_from_edge(op, force, prof.v0, *d);
      const double ratio = v / rate.phi(*d);
      s.measure("anchor_ratio", ratio);
      return Outcome{std::abs(ratio - 1.0) <= band, ratio, json::array({1.0 - band, 1.0 + band}), "v / Phi(d)"};
    });
  }
}

// ---------------------------------------------------------------- ell-map

void run_ell_map(const ExperimentConfig& cfg, Session& s) {
  const auto op = registry::make_operator(cfg.op);
  const auto force = registry::make_force(cfg.force);
  const auto& p = cfg.params;
  const double lo = p.at("v0_lo").get<double>(), hi = p.at("v0_hi").get<double>();
  const int n = p.at("points").get<int>();
  const double tol = p.at("roundtrip_tol").get<double>();
  if (!(lo > 0.0) || !(hi > lo) || n < 2) throw ConfigError("params: need 0 < v0_lo < v0_hi and points >= 2");

  std::vector<double> v0s, ells, backs;
  const bool ok = s.attempt("ell map", [&] {
    io::CsvTable t({"v0", "ell", "v0_roundtrip", "rel_error"});
    for (int k = 0; k < n; ++k) {
      const double v0 = std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * k / (n - 1));
      const double ell = ode1d::ell_of_v0(op, force, v0);
      const double back = ode1d::v0_of_ell(op, force, ell);
      v0s.push_back(v0);
      ells.push_back(ell);
      backs.push_back(back);
      t.add_row({v0, ell, back, rel_diff(back, v0)});
    }
    s.write("ell_map.csv", t);
  });
  if (ok) {
    s.check("ell(v0) strictly decreasing", [&] {
      int bad = 0;
      for (std::size_t k = 1; k < ells.size(); ++k) bad += !(ells[k] < ells[k - 1]);
      return Outcome{bad == 0, bad, 0, "non-decreasing steps"};
    });
    s.check("v0_of_ell(ell_of_v0(v0)) = v0", [&] {
      double worst = 0.0;
      for (std::size_t k = 0; k < v0s.size(); ++k) worst = std::max(worst, rel_diff(backs[k], v0s[k]));
      s.measure("roundtrip_max_rel", worst);
      return Outcome{worst <= tol, worst, tol, ""};
    });
  }

  const auto decay_ells = p.at("decay_ells").get<std::vector<double>>();
  if (!decay_ells.empty()) {
    s.check("decay: v_ell at the probe decreases in ell", [&] {
      const auto tab = ode1d::decay_sweep(op, force, decay_ells, p.at("decay_probe").get<double>());
      io::CsvTable t({"ell", "v0", "value", "dead_core"});
      for (const auto& r : tab.rows) t.add_row({r.ell, r.v0, r.value, r.dead_core ? 1.0 : 0.0});
      s.write("decay.csv", t);
      json vals = json::array();
      for (const auto& r : tab.rows) vals.push_back(r.value);
      s.measure("decay_values", vals);
      return Outcome{tab.monotone, vals, "strictly decreasing", tab.reached_zero ? "reached zero" : ""};
    });
  }
}

// ---------------------------------------------------------------- dead-core

void run_dead_core(const ExperimentConfig& cfg, Session& s) {
  const auto op = registry::make_operator(cfg.op);
  const auto force = registry::make_force(cfg.force);
  const auto& p = cfg.params;
  const double extra = p.at("extra").get<double>();
  const double margin = p.at("core_margin").get<double>();
  const double cap_tol = p.at("cap_tol").get<double>();
  if (!(extra > 0.0)) throw ConfigError("params.extra: must be positive");

  ko::KOReport rep;
  if (!s.attempt("classify", [&] { rep = ko::classify(op, force); })) return;
  s.write("ko.json", ko::to_json(rep));
  s.check("finite integral at zero (dead cores possible)", [&] {
    return Outcome{rep.a3_holds && rep.L.has_value(), rep.a3_holds, true, ""};
  });
  if (!rep.L) return;
  const double L = *rep.L;
  s.measure("L", L);

  s.check("L stable under the tail cap", [&] {
    ko::ShellOptions o8, o10;
    o8.min_extent = 1e8;
    o10.min_extent = 1e10;
    const auto r8 = ko::classify(op, force, o8);
    const auto r10 = ko::classify(op, force, o10);
    if (!r8.L || !r10.L) throw Error("L not finite at a forced cap");
    const double d = rel_diff(*r8.L, *r10.L);
    s.measure("L_cap_1e8", *r8.L);
    s.measure("L_cap_1e10", *r10.L);
    return Outcome{d <= cap_tol, d, cap_tol, "relative change of L"};
  });

  const double ell = L + extra;
  ode1d::Profile1D prof;
  if (!s.attempt("dead-core profile", [&] {
        prof = ode1d::dead_core_profile(op, force, ell, p.at("samples").get<int>(), p.at("x_fraction").get<double>());
      }))
    return;
  s.write("dead_core.csv", io::profile_table(prof));
  s.write("dead_core.json", io::to_json(prof));
  s.measure("ell", ell);

  const double core = ell - L;
  s.check("exactly zero on the shrunken core", [&] {
    double worst = 0.0;
    const int n = 201;
    for (int k = 0; k < n; ++k) {
      const double x = -(core - margin) + 2.0 * (core - margin) * k / (n - 1);
      worst = std::max(worst, std::abs(ode1d::dead_core_value(op, force, L, ell, x)));
    }
    for (std::size_t k = 0; k < prof.x.size(); ++k)
      if (prof.x[k] <= core - margin) worst = std::max(worst, std::abs(prof.v[k]));
    return Outcome{worst == 0.0, worst, 0.0, "core half-width " + tag(core)};
  });
  s.check("positive outside the core", [&] {
    double least = kInf;
    for (std::size_t k = 0; k < prof.x.size(); ++k)
      if (prof.x[k] >= core + margin) least = std::min(least, prof.v[k]);
    return Outcome{least > 0.0, least, "> 0", ""};
  });
}

// ---------------------------------------------------------------- radial

void run_radial(const ExperimentConfig& cfg, Session& s) {
  const auto op = registry::make_operator(cfg.op);
  const auto force = registry::make_force(cfg.force);
  const auto& p = cfg.params;
  const int n = p.at("n").get<int>();
  const auto R_in = opt_number(p, "R");
  const auto v0_in = opt_number(p, "v0");
  if (R_in && v0_in) throw ConfigError("params: give either R or v0, not both");
  if (n < 1) throw ConfigError("params.n: must be at least 1");

  radial::RadialProfile ball;
  const bool ok = s.attempt("ball profile", [&] {
    ball = v0_in ? radial::shoot_ball(op, force, n, *v0_in) : radial::ball_large_solution(op, force, n, R_in.value_or(1.0));
  });
  if (ok) {
    s.write("ball.csv", io::radial_table(ball));
    s.write("ball.json", io::to_json(ball));
    s.measure("v0", ball.v0);
    s.measure("R", ball.R);
    const double res_tol = p.at("residual_tol").get<double>();
    s.check("integrated residual", [&] { return Outcome{ball.residual_max <= res_tol, ball.residual_max, res_tol, ""}; });

    const double d = p.at("ratio_distance").get<double>();
    const double band = p.at("ratio_band").get<double>();
    s.check("boundary rate w / Phi(R - r)", [&] {
      const ko::BlowupRate rate(op, force);
      const double ratio = ball.value_at(ball.R - d) / rate.phi(d);
      s.measure("rate_ratio", ratio);
      return Outcome{std::abs(ratio - 1.0) <= band, ratio, json::array({1.0 - band, 1.0 + band}), ""};
    });

    const double cap_tol = p.at("cap_tol").get<double>();
    s.check("blow-up radius stable under the cap", [&] {
      radial::ShootOptions o;
      o.w_cap = 1e10;
      const auto hi = radial::shoot_ball(op, force, n, ball.v0, o);
      const double rd = rel_diff(hi.R, ball.R);
      return Outcome{rd <= cap_tol, rd, cap_tol, "cap 1e8 vs 1e10"};
    });

    if (n == 1) {
      const double tol = p.at("match_tol").get<double>();
      s.check("n = 1 matches the 1D half-length", [&] {
        const double ell = ode1d::ell_of_v0(op, force, ball.v0);
        const double rd = rel_diff(ball.R, ell);
        s.measure("ell_1d", ell);
        return Outcome{rd <= tol, rd, tol, ""};
      });
    }
  }

  const auto ri = opt_number(p, "annulus_inner");
  const auto ro = opt_number(p, "annulus_outer");
  if (ri.has_value() != ro.has_value()) throw ConfigError("params: annulus_inner and annulus_outer go together");
  if (ri) {
    const double band = p.at("annulus_band").get<double>();
    s.check("annulus barrier distance ratio near the inner boundary", [&] {
      const auto ann = radial::annulus_barrier(op, force, n, *ri, *ro);
      s.write("annulus.csv", io::radial_table(ann));
      s.write("annulus.json", io::to_json(ann));
      const double t = ann.R + 1e-3;
      const double ratio = ko::psi(op, force, ann.value_at(t)) / (t - ann.R);
      s.measure("annulus_ratio", ratio);
      s.measure("annulus_inner_achieved", ann.R);
      return Outcome{ratio <= 1.0 + band, ratio, 1.0 + band, "Psi(w(t)) / (t - r_b) at t - r_b = 1e-3, one-sided"};
    });
  }
}

// ---------------------------------------------------------------- cylinder

pde2d::Formulation parse_formulation(const std::string& s) {
  if (s == "auto") return pde2d::Formulation::Automatic;
  if (s == "direct") return pde2d::Formulation::Direct;
  if (s == "blowup-distance") return pde2d::Formulation::BlowupDistance;
  throw ConfigError("params.formulation: expected auto, direct or blowup-distance");
}

double symmetry_defect(const pde2d::DiscreteField& f) {
  const auto& g = f.grid;
  double worst = 0.0;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      worst = std::max(worst, std::abs(f.at(i, j) - f.at(g.nx - 1 - i, j)));
      worst = std::max(worst, std::abs(f.at(i, j) - f.at(i, g.ny - 1 - j)));
    }
  return worst;
}

// sup over |x| <= limit of |a(x, ya) - b(x, yb)|.
double slice_gap(const pde2d::DiscreteField& a, double ya, const pde2d::DiscreteField& b, double yb, double limit) {
  const auto sa = pde2d::slice(a, ya);
  const auto sb = pde2d::slice(b, yb);
  double worst = 0.0;
  for (int i = 0; i < a.grid.nx; ++i)
    if (std::abs(a.grid.x(i)) <= limit + 1e-12) worst = std::max(worst, std::abs(sa[i] - sb[i]));
  return worst;
}

void run_cylinder(const ExperimentConfig& cfg, Session& s) {
  const auto op = registry::make_operator(cfg.op);
  const auto force = registry::make_force(cfg.force);
  const auto& p = cfg.params;
  auto ells = p.at("ells").get<std::vector<double>>();
  if (ells.empty()) throw ConfigError("params.ells: need at least one value");
  for (std::size_t k = 1; k < ells.size(); ++k)
    if (!(ells[k] > ells[k - 1])) throw ConfigError("params.ells: must be increasing");
  const int nx = p.at("nx").get<int>();
  pde2d::SolverConfig sc;
  sc.epsilon = p.at("epsilon").get<double>();
  sc.tol_res = p.at("tol_res").get<double>();
  sc.tol_m = p.at("tol_m").get<double>();
  sc.m_start = p.at("m_start").get<double>();
  sc.max_doublings = p.at("max_doublings").get<int>();
  sc.compact_scale = p.at("compact_scale").get<double>();
  sc.formulation = parse_formulation(p.at("formulation").get<std::string>());
  sc.ells = ells;
  for (double ell : ells) (void)pde2d::cylinder_grid(ell, nx);  // validates the spacing early

  if (p.at("expect_ko_violation").get<bool>()) {
    for (double ell : ells) {
      s.check("escalation flagged as KO violated (ell = " + tag(ell) + ")", [&] {
        const auto esc = pde2d::escalate_m(pde2d::cylinder_grid(ell, nx), op, force, sc);
        s.write("escalation_ell" + tag(ell) + ".json", io::to_json(esc));
        io::CsvTable t({"m", "center", "increment_center", "increment_K"});
        for (const auto& r : esc.rows) t.add_row({r.m, r.center, r.increment_center, r.increment_K});
        s.write("escalation_ell" + tag(ell) + ".csv", t);
        return Outcome{esc.ko_violated && !esc.plateau, esc.status, "KO violated numerically", ""};
      });
    }
    return;
  }

  pde2d::CylinderFamily fam;
  if (!s.attempt("cylinder family", [&] { fam = pde2d::cylinder_family(op, force, ells, sc, nx); })) return;
  s.measure("common_m", fam.common_m);

  json centers = json::array();
  for (std::size_t k = 0; k < ells.size(); ++k) {
    const auto& run = fam.runs[k];
    const std::string t = tag(ells[k]);
    if (p.at("write_fields").get<bool>()) s.write("field_ell" + t + ".csv", io::field_table(run.field));
    s.write("field_ell" + t + ".json", io::field_header(run.field));
    s.write("slice_ell" + t + ".csv", io::slice_table(run.field, 0.0));
    io::CsvTable et({"m", "center", "increment_center", "increment_K", "min_increment", "energy_K"});
    for (const auto& r : run.rows)
      et.add_row({r.m, r.center, r.increment_center, r.increment_K, r.min_increment, r.energy_K});
    s.write("escalation_ell" + t + ".csv", et);
    centers.push_back(run.field.at(run.field.grid.nx / 2, run.field.grid.ny / 2));
  }
  s.measure("center_values", centers);

  const double mono_tol = p.at("monotone_tol").get<double>();
  s.check("u_m increases with m everywhere", [&] {
    double worst = 0.0;
    for (const auto& r : fam.runs) worst = std::min(worst, r.worst_monotonicity);
    return Outcome{worst >= -mono_tol, worst, -mono_tol, "most negative increment"};
  });
  s.check("escalation reached the plateau", [&] {
    json st = json::array();
    bool all = true;
    for (const auto& r : fam.runs) {
      st.push_back(r.status);
      all = all && r.plateau;
    }
    return Outcome{all, st, "plateau", ""};
  });
  s.check("scaled residual at convergence", [&] {
    double worst = 0.0;
    for (const auto& r : fam.runs) worst = std::max(worst, r.field.diagnostics.residual_sup);
    return Outcome{worst <= sc.tol_res, worst, sc.tol_res, ""};
  });
  s.check("fields nonnegative and bounded by m", [&] {
    double lo = kInf, excess = -kInf;
    for (const auto& r : fam.runs)
      for (double v : r.field.values) {
        lo = std::min(lo, v);
        excess = std::max(excess, v - r.field.m);
      }
    return Outcome{lo >= 0.0 && excess <= 0.0, json::array({lo, excess}), "min >= 0, max - m <= 0", ""};
  });
  s.check("symmetry in x and y", [&] {
    double worst = 0.0;
    for (const auto& r : fam.runs) worst = std::max(worst, symmetry_defect(r.field));
    return Outcome{worst <= 1e-8, worst, 1e-8, ""};
  });
  s.check("gradient energy on K levels off in m", [&] {
    double worst = 0.0;
    for (const auto& r : fam.runs) worst = std::max(worst, std::abs(r.energy_slope));
    return Outcome{worst <= 1e-3, worst, 1e-3, "|d log E / d log m| over the last three doublings"};
  });
  if (ells.size() > 1) {
    const double ell_tol = p.at("ell_tol").get<double>();
    s.check("u_ell decreases with ell on the common domain", [&] {
      double worst = -kInf;
      for (const auto& c : fam.ordering) worst = std::max(worst, c.max_violation);
      return Outcome{worst <= ell_tol, worst, ell_tol, "max of u_large - u_small"};
    });
  }

  // Cross-section comparison against the 1D large solution of (-1, 1).
  std::vector<double> errs;
  ode1d::Profile1D prof;
  const bool have_prof = s.attempt("cross-section profile", [&] {
    prof = ode1d::large_solution(op, force, 1.0);
    io::CsvTable t({"ell", "y", "sup_abs", "sup_rel", "signed_at_center"});
    for (std::size_t k = 0; k < ells.size(); ++k) {
      const auto rep = pde2d::cross_section_compare(fam.runs[k].field, prof);
      errs.push_back(rep.center.sup_rel);
      t.add_row({ells[k], rep.center.y, rep.center.sup_abs, rep.center.sup_rel, rep.center.signed_at_center});
      for (const auto& o : rep.off_center) t.add_row({ells[k], o.y, o.sup_abs, o.sup_rel, o.signed_at_center});
    }
    s.write("cross_section.csv", t);
    s.measure("cross_section_rel_error", errs);
  });
  if (have_prof) {
    if (ells.size() > 1)
      s.check("cross-section error decreases in ell", [&] {
        bool dec = true;
        for (std::size_t k = 1; k < errs.size(); ++k) dec = dec && errs[k] < errs[k - 1];
        return Outcome{dec, errs, "strictly decreasing", ""};
      });
    const double tol = p.at("max_cross_error").get<double>();
    s.check("cross-section error at the largest ell", [&] { return Outcome{errs.back() <= tol, errs.back(), tol, ""}; });
  }

  const double R = p.at("local_bound_R").get<double>();
  s.check("local bound max_{B(R/2)} u <= omega(R/2)", [&] {
    io::CsvTable t({"ell", "cx", "cy", "field_max", "bound", "slack"});
    int violations = 0;
    double worst_margin = kInf;
    for (std::size_t k = 0; k < ells.size(); ++k) {
      const auto& f = fam.runs[k].field;
      for (double cy = 0.0; cy <= ells[k] - R + 1e-12; cy += 0.5) {
        for (double sign : {1.0, -1.0}) {
          if (cy == 0.0 && sign < 0.0) continue;
          const auto lb = radial::local_bound_check(f, op, force, 0.0, sign * cy, R);
          t.add_row({ells[k], 0.0, sign * cy, lb.field_max, lb.bound, lb.slack});
          violations += !lb.holds;
          worst_margin = std::min(worst_margin, lb.bound + lb.slack - lb.field_max);
        }
      }
    }
    s.write("local_bound.csv", t);
    return Outcome{violations == 0, violations, 0, "smallest margin " + tag(worst_margin)};
  });

  if (ells.size() > 1) {
    const auto& big = fam.runs.back().field;
    const auto& prev = fam.runs[fam.runs.size() - 2].field;
    const double ty = opt_number(p, "translation_y").value_or(ells.back() / 4.0);
    s.check("translation invariance at the largest ell", [&] {
      const double gap = slice_gap(big, 0.0, big, ty, 0.9);
      const double dec = slice_gap(prev, 0.0, big, 0.0, 0.9);
      s.measure("translation_gap", gap);
      s.measure("ell_decrement", dec);
      return Outcome{gap < dec, gap, dec, "slice y = " + tag(ty) + " vs y = 0, against the ell decrement"};
    });
  }

  if (p.at("epsilon_check").get<bool>()) {
    const double tol = p.at("epsilon_tol").get<double>();
    s.check("insensitive to epsilon / 10 on K", [&] {
      const auto& f = fam.runs.back().field;
      auto c2 = sc;
      c2.epsilon = sc.epsilon / 10.0;
      const auto g = pde2d::solve_dirichlet(f.grid, op, force, f.m, c2, &f);
      double worst = 0.0;
      for (int j = 0; j < f.grid.ny; ++j)
        for (int i = 0; i < f.grid.nx; ++i)
          if (pde2d::in_compact(f.grid, i, j, sc.compact_scale))
            worst = std::max(worst, std::abs(f.at(i, j) - g.at(i, j)));
      return Outcome{worst <= tol, worst, tol, ""};
    });
  }
}

// ---------------------------------------------------------------- asymptotics

void run_asymptotics(const ExperimentConfig& cfg, Session& s) {
  const auto op = registry::make_operator(cfg.op);
  const auto force = registry::make_force(cfg.force);
  const auto& p = cfg.params;
  const double ell = p.at("ell").get<double>();
  auto ds = p.at("distances").get<std::vector<double>>();
  if (ds.empty()) throw ConfigError("params.distances: need at least one value");
  const double band = p.at("band").get<double>();

  s.check("profile over Phi tends to 1 at the edge", [&] {
    const double v0 = ode1d::v0_of_ell(op, force, ell);
    const ko::BlowupRate rate(op, force);
    io::CsvTable t({"d", "v", "phi", "ratio"});
    std::vector<double> ratios;
    for (double d : ds) {
      const double v = ode1d::eval_profile_from_edge(op, force, v0, d);
      const double ph = rate.phi(d);
      ratios.push_back(v / ph);
      t.add_row({d, v, ph, v / ph});
    }
    s.write("asymptotics.csv", t);
    s.measure("ratios", ratios);
    std::size_t at_min = 0;
    for (std::size_t k = 1; k < ds.size(); ++k)
      if (ds[k] < ds[at_min]) at_min = k;
    const double r = ratios[at_min];
    return Outcome{std::abs(r - 1.0) <= band, r, json::array({1.0 - band, 1.0 + band}), "at the smallest distance"};
  });

  const auto betas = p.at("a5_betas").get<std::vector<double>>();
  if (!betas.empty()) {
    s.attempt("a5 diagnostic", [&] {
      const auto a5 = ko::check_a5(force, op, betas, p.at("a5_t_lo").get<double>(), p.at("a5_t_hi").get<double>());
      io::CsvTable t({"beta", "t", "ratio"});
      json rows = json::array();
      for (const auto& row : a5.rows) {
        for (std::size_t k = 0; k < row.t.size(); ++k) t.add_row({row.beta, row.t[k], row.ratio[k]});
        rows.push_back({{"beta", row.beta}, {"infimum", row.infimum}, {"likely_holds", row.likely_holds}});
      }
      s.write("a5.csv", t);
      s.measure("a5", rows);
      s.measure("a5_note", a5.note);
    });
  }
}

}  // namespace

ExperimentReport run(const ExperimentConfig& cfg, const fs::path& out_dir, std::ostream* log) {
  ExperimentReport rep;
  rep.kind = cfg.kind;
  rep.config = cfg.echo;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw ConfigError("cannot create output directory " + out_dir.string() + ": " + ec.message());
  Session s(rep, out_dir, log);
  s.note("running " + to_string(cfg.kind) + " -> " + out_dir.string());

  const auto t0 = std::chrono::steady_clock::now();
  switch (cfg.kind) {
    case ExperimentKind::KoCheck: run_ko_check(cfg, s); break;
    case ExperimentKind::Solve1D: run_solve_1d(cfg, s); break;
    case ExperimentKind::EllMap: run_ell_map(cfg, s); break;
    case ExperimentKind::DeadCore: run_dead_core(cfg, s); break;
    case ExperimentKind::Radial: run_radial(cfg, s); break;
    case ExperimentKind::Cylinder: run_cylinder(cfg, s); break;
    case ExperimentKind::Asymptotics: run_asymptotics(cfg, s); break;
  }
  rep.timings["total_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  io::write_text(out_dir / "summary.txt", rep.summary());
  rep.files.push_back("summary.txt");
  io::write_json(out_dir / "report.json", rep.to_json());
  return rep;
}

}  // namespace blowup::harness
