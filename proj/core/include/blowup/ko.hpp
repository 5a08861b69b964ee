#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "blowup/numerics/quadrature.hpp"
#include "blowup/registry.hpp"

namespace blowup::ko {

using registry::Force;
using registry::Operator;
using numerics::ShellOptions;

// 1 / B^{-1}(F(s)). Throws DomainExceeded when F(s) >= sup B.
double psi_integrand(const Operator& op, const Force& force, double s);

struct TailIntegral {
  double value = 0.0;
  double error = 0.0;
  double cap = 0.0;       // last abscissa summed explicitly before extrapolation
  int shells = 0;
  int evaluations = 0;
  bool converged = false;
  bool divergent = false;
};

// int_r^inf ds / B^{-1}(F(s)) without throwing on divergence.
TailIntegral psi_tail(const Operator& op, const Force& force, double r, const ShellOptions& opt = {});

// Same integral; throws Divergence when the tail does not converge.
double psi(const Operator& op, const Force& force, double r, const ShellOptions& opt = {});

// int_0^r ds / B^{-1}(F(s)); divergent exactly when the Osgood condition holds.
TailIntegral zero_integral(const Operator& op, const Force& force, double r, const ShellOptions& opt = {});

struct KODiagnostics {
  std::optional<double> psi_at_one;
  double psi_error = 0.0;
  double psi_cap = 0.0;
  int psi_shells = 0;
  std::optional<double> zero_side;   // int_0^1, when finite
  double zero_cutoff = 0.0;          // smallest lower limit reached
  int zero_shells = 0;
  std::optional<double> L_error;
  int evaluations = 0;
};

struct KOReport {
  bool ko_holds = false;
  bool osgood_holds = false;
  bool a3_holds = false;
  std::optional<double> L;
  std::string status = "ok";       // "ok" or "domain-exceeded"
  std::string ko_note;             // how ko_holds was decided
  std::string frontier;            // analytic exponent comparison, when available
  std::optional<bool> analytic_ko; // analytic predicate for power-type data
  KODiagnostics diagnostics;
};

KOReport classify(const Operator& op, const Force& force, const ShellOptions& opt = {});
nlohmann::json to_json(const KOReport& report);

// Psi and its inverse Phi on the validity range r >= r_min, d in (0, Psi(r_min)].
class BlowupRate {
 public:
  BlowupRate(Operator op, Force force, double r_min = 1e-6);
  double psi(double r) const;
  double phi(double d) const;
  double r_min() const { return r_min_; }
  double d_max() const { return d_max_; }

 private:
  Operator op_;
  Force force_;
  double r_min_;
  double d_max_;
};

double phi(const BlowupRate& rate, double d);

struct A5Row {
  double beta = 0.0;
  double infimum = 0.0;
  double margin = 0.0;          // infimum - 1
  bool likely_holds = false;    // infimum > 1 + 1e-3
  std::vector<double> t;
  std::vector<double> ratio;
};

struct A5Report {
  std::vector<A5Row> rows;
  bool all_likely_hold = true;
  std::string note;
};

A5Report check_a5(const Force& force, const Operator& op, const std::vector<double>& betas,
                  double t_lo = 1e2, double t_hi = 1e6, int points_per_decade = 4);

// Singular span integrals used by the one-dimensional solution:
// int_0^H dh / B^{-1}(F(base + h) - F(base)) for base > 0 and H possibly infinite.
struct SpanIntegral {
  double value = 0.0;
  double error = 0.0;
  bool converged = false;
  bool divergent = false;
};

double span_integrand(const Operator& op, const Force& force, double base, double h);
SpanIntegral span_from_minimum(const Operator& op, const Force& force, double base, double H,
                               const ShellOptions& opt = {});
// int_h^inf of the same integrand (regular at the lower limit h > 0).
SpanIntegral span_tail(const Operator& op, const Force& force, double base, double h,
                       const ShellOptions& opt = {});

// Tabulated Psi on a log grid with log-log Hermite interpolation, for fast repeated
// evaluation of Psi, Phi, and the coefficient A(X)/f(u), X = B^{-1}(F(u)).
class RateTable {
 public:
  RateTable(const Operator& op, const Force& force, double r_lo, double r_hi, int per_decade = 40);
  double psi(double r) const;
  double phi(double w) const;
  double r_lo() const { return r_.front(); }
  double r_hi() const { return r_.back(); }
  std::size_t size() const { return r_.size(); }

 private:
  double log_psi(double lr, double* dlog = nullptr) const;
  std::vector<double> lr_;   // ln r
  std::vector<double> r_;
  std::vector<double> lpsi_; // ln Psi
  std::vector<double> dlp_;  // d ln Psi / d ln r = -r g(r) / Psi(r)
};

}  // namespace blowup::ko
