#include "blowup/ko.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "blowup/error.hpp"
#include "blowup/numerics/roots.hpp"

namespace blowup::ko {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

TailIntegral to_tail(const numerics::ShellResult& s) {
  TailIntegral t;
  t.value = s.value;
  t.error = s.error;
  t.cap = s.extent;
  t.shells = s.shells;
  t.evaluations = s.evaluations;
  t.converged = s.converged;
  t.divergent = s.divergent;
  return t;
}

}  // namespace

double psi_integrand(const Operator& op, const Force& force, double s) {
  const double y = force.primitive(s);
  // Overflow of F with unbounded B: B^{-1}(F) is beyond any double, the integrand vanishes.
  if (std::isinf(y) && std::isinf(op.energy_sup())) return 0.0;
  if (y >= op.energy_sup()) {
    throw DomainExceeded("F(" + fmt(s) + ") = " + fmt(y) + " reaches sup B = " + fmt(op.energy_sup()) +
                         "; B^{-1}(F(s)) is undefined");
  }
  return 1.0 / op.energy_inverse(y);
}

TailIntegral psi_tail(const Operator& op, const Force& force, double r, const ShellOptions& opt) {
  if (!(r > 0.0)) throw ConfigError("psi requires r > 0");
  auto g = [&](double s) { return psi_integrand(op, force, s); };
  return to_tail(numerics::integrate_to_infinity(g, r, opt));
}

double psi(const Operator& op, const Force& force, double r, const ShellOptions& opt) {
  const auto t = psi_tail(op, force, r, opt);
  if (t.divergent) throw Divergence("Keller-Osserman integral diverges: tail contributions do not decay");
  if (!t.converged)
    throw ConvergenceError("Keller-Osserman tail did not settle after " + std::to_string(t.shells) + " shells",
                           t.error);
  return t.value;
}

TailIntegral zero_integral(const Operator& op, const Force& force, double r, const ShellOptions& opt) {
  if (!(r > 0.0)) throw ConfigError("zero_integral requires r > 0");
  auto g = [&](double s) { return psi_integrand(op, force, s); };
  return to_tail(numerics::integrate_to_zero(g, r, opt));
}

KOReport classify(const Operator& op, const Force& force, const ShellOptions& opt) {
  KOReport rep;
  auto& dg = rep.diagnostics;

  // Analytic comparison for p-Laplacian data with known growth exponents.
  if (auto p = op.p_exponent()) {
    const auto g = force.growth();
    std::ostringstream os;
    if (g.exponential_at_infinity) {
      rep.analytic_ko = true;
      os << "exponential growth at infinity beats t^(p-1) for p=" << *p << ": KO holds analytically";
    } else if (g.at_infinity) {
      rep.analytic_ko = *g.at_infinity > *p - 1.0;
      os << "growth exponent at infinity " << *g.at_infinity << (*rep.analytic_ko ? " > " : " <= ")
         << "p-1 = " << (*p - 1.0) << ": KO " << (*rep.analytic_ko ? "holds" : "fails") << " analytically";
    }
    if (g.near_zero) {
      const bool osgood = *g.near_zero >= *p - 1.0;
      os << "; exponent near 0 " << *g.near_zero << (osgood ? " >= " : " < ") << "p-1: "
         << (osgood ? "Osgood condition holds" : "integral near 0 is finite") << " analytically";
    }
    rep.frontier = os.str();
  } else {
    rep.frontier = "no analytic exponent comparison for " + op.describe();
  }

  bool domain = false;
  std::ostringstream domain_msg;

  TailIntegral tail;
  try {
    tail = psi_tail(op, force, 1.0, opt);
    dg.evaluations += tail.evaluations;
    dg.psi_cap = tail.cap;
    dg.psi_shells = tail.shells;
    dg.psi_error = tail.error;
    rep.ko_holds = tail.converged && !tail.divergent;
    if (rep.ko_holds) {
      dg.psi_at_one = tail.value;
      rep.ko_note = "tail integral from 1 converged over " + std::to_string(tail.shells) +
                    " dyadic shells (explicit cap " + fmt(tail.cap) + ", geometric remainder)";
    } else if (tail.divergent) {
      rep.ko_note = "tail contributions stopped decreasing over successive cap doublings: divergent";
    } else {
      rep.ko_note = "tail did not settle within " + std::to_string(tail.shells) +
                    " shells; treated as not satisfying KO";
    }
  } catch (const DomainExceeded& e) {
    domain = true;
    rep.ko_holds = false;
    rep.ko_note = "domain-exceeded on [1, inf): " + std::string(e.what());
    domain_msg << "sup B = " << op.energy_sup()
               << " is finite; the assumption that B grows without bound (A' bounded below) fails";
  }

  try {
    const auto zero = zero_integral(op, force, 1.0, opt);
    dg.evaluations += zero.evaluations;
    dg.zero_cutoff = zero.cap;
    dg.zero_shells = zero.shells;
    if (zero.converged && !zero.divergent) {
      rep.a3_holds = true;
      dg.zero_side = zero.value;
      if (rep.ko_holds) {
        rep.L = zero.value + tail.value;
        dg.L_error = zero.error + tail.error;
      }
    } else {
      rep.osgood_holds = true;
    }
  } catch (const DomainExceeded& e) {
    domain = true;
    rep.ko_note += std::string(rep.ko_note.empty() ? "" : "; ") + "domain-exceeded on (0, 1]: " + e.what();
  }

  if (domain) {
    rep.status = "domain-exceeded";
    rep.frontier += rep.frontier.empty() ? domain_msg.str() : "; " + domain_msg.str();
  }
  return rep;
}

nlohmann::json to_json(const KOReport& r) {
  nlohmann::json j;
  j["ko_holds"] = r.ko_holds;
  j["osgood_holds"] = r.osgood_holds;
  j["a3_holds"] = r.a3_holds;
  j["L"] = r.L ? nlohmann::json(*r.L) : nlohmann::json(nullptr);
  j["frontier"] = r.frontier;
  j["status"] = r.status;
  j["ko_note"] = r.ko_note;
  if (r.analytic_ko) j["analytic_ko"] = *r.analytic_ko;
  const auto& d = r.diagnostics;
  nlohmann::json dj;
  dj["psi_at_one"] = d.psi_at_one ? nlohmann::json(*d.psi_at_one) : nlohmann::json(nullptr);
  dj["psi_error"] = d.psi_error;
  dj["psi_cap"] = d.psi_cap;
  dj["psi_shells"] = d.psi_shells;
  dj["zero_side"] = d.zero_side ? nlohmann::json(*d.zero_side) : nlohmann::json(nullptr);
  dj["zero_cutoff"] = d.zero_cutoff;
  dj["zero_shells"] = d.zero_shells;
  dj["L_error"] = d.L_error ? nlohmann::json(*d.L_error) : nlohmann::json(nullptr);
  dj["evaluations"] = d.evaluations;
  j["diagnostics"] = dj;
  return j;
}

// ---------------------------------------------------------------- BlowupRate

BlowupRate::BlowupRate(Operator op, Force force, double r_min)
    : op_(std::move(op)), force_(std::move(force)), r_min_(r_min) {
  if (!(r_min > 0.0)) throw ConfigError("BlowupRate requires r_min > 0");
  d_max_ = ko::psi(op_, force_, r_min_);
}

double BlowupRate::psi(double r) const {
  if (!(r >= r_min_)) throw ConfigError("psi: r = " + fmt(r) + " below the validity range r_min = " + fmt(r_min_));
  return ko::psi(op_, force_, r);
}

double BlowupRate::phi(double d) const {
  if (!(d > 0.0) || d > d_max_)
    throw ConfigError("phi: d = " + fmt(d) + " outside the validity range (0, " + fmt(d_max_) + "]");
  if (d == d_max_) return r_min_;
  const double target = std::log(d);
  auto f = [&](double t) { return std::log(ko::psi(op_, force_, std::exp(t))) - target; };
  double lo = std::log(r_min_);
  double flo = std::log(d_max_) - target;
  double hi = lo + 1.0;
  double fhi = f(hi);
  while (fhi > 0.0) {
    lo = hi;
    flo = fhi;
    hi += 2.0;
    if (hi > 690.0) throw ConfigError("phi: no bracket for d = " + fmt(d));
    fhi = f(hi);
  }
  const auto root = numerics::brent(f, lo, hi, flo, fhi, 1e-13);
  return std::exp(root.x);
}

double phi(const BlowupRate& rate, double d) { return rate.phi(d); }

// ---------------------------------------------------------------- A5

A5Report check_a5(const Force& force, const Operator& op, const std::vector<double>& betas, double t_lo,
                  double t_hi, int points_per_decade) {
  A5Report rep;
  const int decades = static_cast<int>(std::round(std::log10(t_hi / t_lo)));
  const int n = decades * points_per_decade + 1;
  std::vector<double> ts(n), psis(n);
  for (int k = 0; k < n; ++k) {
    ts[k] = t_lo * std::pow(10.0, static_cast<double>(k) / points_per_decade);
    const auto tail = psi_tail(op, force, ts[k]);
    if (tail.divergent) throw Divergence("check_a5 requires the Keller-Osserman condition");
    psis[k] = tail.value;
  }
  auto g = [&](double s) { return psi_integrand(op, force, s); };
  for (double beta : betas) {
    if (!(beta > 0.0 && beta < 1.0)) throw ConfigError("check_a5: beta must lie in (0, 1)");
    A5Row row;
    row.beta = beta;
    row.infimum = kInf;
    for (int k = 0; k < n; ++k) {
      const double t = ts[k];
      // Psi(beta t) / Psi(t) = 1 + int_{beta t}^{t} g / Psi(t); the log variable keeps it well scaled.
      auto in_log = [&](double z) {
        const double s = t * std::exp(z);
        return g(s) * s;
      };
      const double gap = numerics::integrate_gk(in_log, std::log(beta), 0.0, 1e-13).value;
      const double ratio = 1.0 + gap / psis[k];
      row.t.push_back(t);
      row.ratio.push_back(ratio);
      row.infimum = std::min(row.infimum, ratio);
    }
    row.margin = row.infimum - 1.0;
    row.likely_holds = row.infimum > 1.0 + 1e-3;
    rep.all_likely_hold = rep.all_likely_hold && row.likely_holds;
    rep.rows.push_back(std::move(row));
  }
  rep.note = "sampled infimum over t in [" + fmt(t_lo) + ", " + fmt(t_hi) +
             "]; a numerical indication, not a proof of the liminf condition";
  return rep;
}

// ---------------------------------------------------------------- span integrals

double span_integrand(const Operator& op, const Force& force, double base, double h) {
  const double y = force.increment(base, h);
  if (std::isinf(y) && std::isinf(op.energy_sup())) return 0.0;
  if (y >= op.energy_sup()) {
    throw DomainExceeded("F(" + fmt(base + h) + ") - F(" + fmt(base) + ") reaches sup B = " +
                         fmt(op.energy_sup()));
  }
  return 1.0 / op.energy_inverse(y);
}

SpanIntegral span_from_minimum(const Operator& op, const Force& force, double base, double H,
                               const ShellOptions& opt) {
  if (!(base > 0.0)) throw ConfigError("span integral requires a positive minimum value");
  SpanIntegral out;
  if (!(H > 0.0)) {
    out.converged = true;
    return out;
  }
  const double h1 = std::min(base, H);
  auto k = [&](double h) { return span_integrand(op, force, base, h); };

  // Singular piece on [0, h1]: the integrand behaves like h^{-1/p} at 0.
  if (auto p = op.p_exponent()) {
    const double expo = *p / (*p - 1.0);
    const double U = std::pow(h1, 1.0 / expo);
    auto sub = [&](double u) {
      if (u <= 0.0) return 0.0;
      const double h = std::pow(u, expo);
      return k(h) * expo * std::pow(u, expo - 1.0);
    };
    auto r = numerics::integrate_gk(sub, 0.0, U, 1e-13, 0.0, 4000);
    out.value = r.value;
    out.error = r.error;
    out.converged = r.converged || r.error <= 1e-11 * std::abs(r.value);
  } else {
    auto ts = [&](double, double da, double) { return k(da); };
    auto r = numerics::integrate_tanh_sinh(ts, 0.0, h1, 1e-12);
    out.value = r.value;
    out.error = r.error;
    out.converged = r.converged;
  }

  if (H > h1) {
    if (std::isinf(H)) {
      auto tail = numerics::integrate_to_infinity(k, h1, opt);
      if (tail.divergent) {
        out.divergent = true;
        out.converged = false;
        out.value = kInf;
        return out;
      }
      out.value += tail.value;
      out.error += tail.error;
      out.converged = out.converged && tail.converged;
    } else {
      auto in_log = [&](double z) {
        const double h = std::exp(z);
        return k(h) * h;
      };
      auto r = numerics::integrate_gk(in_log, std::log(h1), std::log(H), 1e-13, 0.0, 4000);
      out.value += r.value;
      out.error += r.error;
      out.converged = out.converged && (r.converged || r.error <= 1e-11 * std::abs(r.value));
    }
  }
  return out;
}

SpanIntegral span_tail(const Operator& op, const Force& force, double base, double h, const ShellOptions& opt) {
  SpanIntegral out;
  auto k = [&](double x) { return span_integrand(op, force, base, x); };
  auto tail = numerics::integrate_to_infinity(k, h, opt);
  out.value = tail.value;
  out.error = tail.error;
  out.converged = tail.converged;
  out.divergent = tail.divergent;
  return out;
}

// ---------------------------------------------------------------- RateTable

RateTable::RateTable(const Operator& op, const Force& force, double r_lo, double r_hi, int per_decade) {
  if (!(r_lo > 0.0) || !(r_hi > r_lo)) throw ConfigError("RateTable requires 0 < r_lo < r_hi");
  auto g = [&](double s) { return psi_integrand(op, force, s); };
  while (r_hi > 2.0 * r_lo && !(std::isfinite(force.primitive(r_hi)) && g(r_hi) > 0.0)) r_hi *= 0.5;
  const double l0 = std::log(r_lo), l1 = std::log(r_hi);
  const int n = std::max(2, static_cast<int>(std::ceil((l1 - l0) / std::log(10.0) * per_decade)) + 1);
  lr_.resize(n);
  r_.resize(n);
  lpsi_.resize(n);
  dlp_.resize(n);
  for (int i = 0; i < n; ++i) {
    lr_[i] = l0 + (l1 - l0) * i / (n - 1);
    r_[i] = std::exp(lr_[i]);
  }
  double acc = ko::psi(op, force, r_[n - 1]);
  lpsi_[n - 1] = std::log(acc);
  for (int i = n - 2; i >= 0; --i) {
    auto in_log = [&](double z) {
      const double s = std::exp(z);
      return g(s) * s;
    };
    acc += numerics::integrate_gk(in_log, lr_[i], lr_[i + 1], 1e-14).value;
    lpsi_[i] = std::log(acc);
  }
  for (int i = 0; i < n; ++i) dlp_[i] = -r_[i] * g(r_[i]) / std::exp(lpsi_[i]);
}

double RateTable::log_psi(double lr, double* dlog) const {
  const std::size_t n = lr_.size();
  if (lr <= lr_.front()) {
    if (dlog) *dlog = dlp_.front();
    return lpsi_.front() + dlp_.front() * (lr - lr_.front());
  }
  if (lr >= lr_.back()) {
    if (dlog) *dlog = dlp_.back();
    return lpsi_.back() + dlp_.back() * (lr - lr_.back());
  }
  const double step = lr_[1] - lr_[0];
  std::size_t i = std::min(n - 2, static_cast<std::size_t>((lr - lr_.front()) / step));
  const double h = lr_[i + 1] - lr_[i];
  const double t = (lr - lr_[i]) / h;
  const double y0 = lpsi_[i], y1 = lpsi_[i + 1], m0 = dlp_[i] * h, m1 = dlp_[i + 1] * h;
  const double t2 = t * t, t3 = t2 * t;
  const double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + t, h01 = -2 * t3 + 3 * t2, h11 = t3 - t2;
  if (dlog) {
    const double d00 = 6 * t2 - 6 * t, d10 = 3 * t2 - 4 * t + 1, d01 = -6 * t2 + 6 * t, d11 = 3 * t2 - 2 * t;
    *dlog = (d00 * y0 + d10 * m0 + d01 * y1 + d11 * m1) / h;
  }
  return h00 * y0 + h10 * m0 + h01 * y1 + h11 * m1;
}

double RateTable::psi(double r) const { return std::exp(log_psi(std::log(r))); }

double RateTable::phi(double w) const {
  const double target = std::log(w);
  // ln Psi is decreasing in ln r; locate the interval, then Newton with bisection safeguard.
  if (target >= lpsi_.front()) return std::exp(lr_.front() + (target - lpsi_.front()) / dlp_.front());
  if (target <= lpsi_.back()) return std::exp(lr_.back() + (target - lpsi_.back()) / dlp_.back());
  auto it = std::lower_bound(lpsi_.begin(), lpsi_.end(), target, [](double a, double b) { return a > b; });
  const std::size_t j = static_cast<std::size_t>(it - lpsi_.begin());
  double lo = lr_[j - 1], hi = lr_[j];
  auto fdf = [&](double x) {
    double d = 0.0;
    const double v = log_psi(x, &d) - target;
    return std::pair<double, double>{-v, -d};
  };
  const auto root = numerics::newton_bracketed(fdf, lo, hi, 0.5 * (lo + hi), 1e-14);
  return std::exp(root.x);
}

}  // namespace blowup::ko
