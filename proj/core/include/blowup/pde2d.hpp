#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "blowup/ode1d.hpp"
#include "blowup/registry.hpp"

namespace blowup::pde2d {

using registry::Force;
using registry::Operator;

// Uniform node grid on (-x_half, x_half) x (-y_half, y_half), boundary nodes included.
struct Grid2D {
  double x_half = 1.0;
  double y_half = 1.0;
  int nx = 65;
  int ny = 65;

  double hx() const { return 2.0 * x_half / (nx - 1); }
  double hy() const { return 2.0 * y_half / (ny - 1); }
  double x(int i) const { return -x_half + hx() * i; }
  double y(int j) const { return -y_half + hy() * j; }
  std::size_t index(int i, int j) const { return static_cast<std::size_t>(j) * nx + i; }
  std::size_t size() const { return static_cast<std::size_t>(nx) * ny; }
  bool on_boundary(int i, int j) const { return i == 0 || j == 0 || i == nx - 1 || j == ny - 1; }
};

// Grid on (-1, 1) x (-ell, ell) with nx x ny nodes; validates nx, ny >= 8.
Grid2D make_grid(double ell, int nx, int ny);
// Same x resolution, y spacing equal to the x spacing: ny = (nx - 1) * ell + 1.
Grid2D cylinder_grid(double ell, int nx = 65);

enum class Formulation {
  Automatic,       // distance variable when KO and Osgood hold, direct otherwise
  Direct,          // flux-form stencil applied to u itself
  BlowupDistance,  // same equation for w = Psi(u), bounded near the boundary; upwind gradient term
};

std::string to_string(Formulation f);

struct SolverConfig {
  double epsilon = 1e-8;
  double tol_res = 1e-9;
  int max_newton = 80;
  int max_halvings = 30;
  int gs_sweeps = 200;
  int max_fallbacks = 4;
  double m_start = 2.0;
  double m_factor = 2.0;
  int max_doublings = 48;
  double tol_m = 1e-4;
  double compact_scale = 0.75;
  int ko_stall_doublings = 6;
  Formulation formulation = Formulation::Automatic;
  std::vector<double> ells;
};

struct SolverDiagnostics {
  int iterations = 0;
  int halvings = 0;
  int gs_fallbacks = 0;
  int projections = 0;            // nodes clipped to [0, m]
  double residual_sup = 0.0;      // scaled residual of the solved formulation
  double direct_residual_sup = 0.0;  // scaled residual of the flux stencil on u (diagnostic)
  bool converged = false;
  Formulation formulation = Formulation::Direct;
};

struct DiscreteField {
  Grid2D grid;
  std::vector<double> values;  // u at every node, row-major in j
  double m = 0.0;
  double epsilon = 1e-8;
  double p = 2.0;
  SolverDiagnostics diagnostics;

  double at(int i, int j) const { return values[grid.index(i, j)]; }
  double& at(int i, int j) { return values[grid.index(i, j)]; }
};

// Scaled residual of the flux-form stencil on u: (div of face fluxes - f(u)) divided by
// 1 + sum |face flux| / h + |f(u)|. Boundary entries are zero.
std::vector<double> residual(const DiscreteField& field, const Force& force);
// Unscaled version (used by the stencil exactness tests).
std::vector<double> raw_residual(const DiscreteField& field, const Force& force);

// Solves the Dirichlet problem Delta_p u = f(u), u = m on the boundary.
// An optional initial guess overrides the default start (u = m, or its distance analogue).
DiscreteField solve_dirichlet(const Grid2D& grid, const Operator& op, const Force& force, double m,
                              const SolverConfig& cfg, const DiscreteField* initial = nullptr);

struct EscalationRow {
  double m = 0.0;
  double center = 0.0;
  double increment_center = 0.0;  // u_m - u_{m/2} at the center
  double increment_K = 0.0;       // sup over K of the increment
  double min_increment = 0.0;     // min over all nodes (monotonicity: >= -1e-10)
  double energy_K = 0.0;          // discrete int_K |grad u|^p
  int iterations = 0;
  double residual = 0.0;
};

struct Escalation {
  DiscreteField field;
  std::vector<EscalationRow> rows;
  std::string status;           // "plateau", "KO violated numerically", "max doublings"
  bool plateau = false;
  bool ko_violated = false;
  double worst_monotonicity = 0.0;  // most negative increment over all doublings
  double energy_bound = 0.0;        // max energy on K over the run
  double energy_slope = 0.0;        // d log(energy) / d log(m) over the last three doublings
};

Escalation escalate_m(const Grid2D& grid, const Operator& op, const Force& force, const SolverConfig& cfg,
                      double final_m = 0.0);

// Solution on a symmetric sub-rectangle K = [-s, s] x [-s ell, s ell].
bool in_compact(const Grid2D& grid, int i, int j, double scale);
double energy_on_compact(const DiscreteField& field, double scale);

struct SliceComparison {
  double ell_small = 0.0;
  double ell_large = 0.0;
  double max_violation = 0.0;  // max over the common domain of u_large - u_small
  bool ordered = false;        // max_violation <= tol
};

struct CylinderFamily {
  std::vector<double> ells;
  std::vector<Escalation> runs;
  std::vector<SliceComparison> ordering;
  double common_m = 0.0;
  bool monotone = false;
};

CylinderFamily cylinder_family(const Operator& op, const Force& force, const std::vector<double>& ells,
                               const SolverConfig& cfg, int nx = 65);

// u(x_i, y) along a horizontal grid line; y must lie on the grid.
std::vector<double> slice(const DiscreteField& field, double y);

struct CrossSectionError {
  double y = 0.0;
  double sup_abs = 0.0;
  double sup_rel = 0.0;       // sup |u - v| / |v|
  double signed_at_center = 0.0;  // u - v at x = 0
};

struct CrossSectionReport {
  CrossSectionError center;
  std::vector<CrossSectionError> off_center;  // y = +-ell/2 when on the grid
  int nodes = 0;
};

CrossSectionReport cross_section_compare(const DiscreteField& field, const ode1d::Profile1D& profile,
                                         double x_limit = 0.9);
CrossSectionError slice_error(const DiscreteField& field, const ode1d::Profile1D& profile, double y,
                              double x_limit = 0.9);

}  // namespace blowup::pde2d
