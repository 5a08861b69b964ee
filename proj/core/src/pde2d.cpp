#include "blowup/pde2d.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <memory>
#include <sstream>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "blowup/error.hpp"
#include "blowup/ko.hpp"

namespace blowup::pde2d {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(8);
  os << v;
  return os.str();
}

// Face flux gamma * g_normal with gamma = (|g|^2 + eps^2)^{(p-2)/2}, and its partials
// with respect to the normal and tangential gradient components.
struct FaceFlux {
  double flux, d_normal, d_tangent;
};

FaceFlux face_flux(double gn, double gt, double p, double eps2) {
  const double s = gn * gn + gt * gt + eps2;
  if (p == 2.0) return {gn, 1.0, 0.0};
  const double gamma = std::pow(s, 0.5 * (p - 2.0));
  const double c = (p - 2.0) / s;
  return {gamma * gn, gamma * (1.0 + c * gn * gn), gamma * c * gn * gt};
}

// Divergence of the face fluxes at node (i, j), optional 3x3 partials d[(di+1) + 3(dj+1)].
struct StencilValue {
  double div = 0.0;
  double magnitude = 0.0;  // sum |face flux| / h
  std::array<double, 9> d{};
};

StencilValue flux_divergence(const std::vector<double>& u, const Grid2D& g, int i, int j, double p, double eps,
                             bool want_partials) {
  const double hx = g.hx(), hy = g.hy();
  const double eps2 = eps * eps;
  auto U = [&](int di, int dj) { return u[g.index(i + di, j + dj)]; };
  StencilValue sv;
  auto add = [&](int di, int dj, double v) { sv.d[(di + 1) + 3 * (dj + 1)] += v; };

  // East and west faces: normal along x, tangential from averaged centered y-differences.
  for (int side : {1, -1}) {
    const int a = side > 0 ? 0 : -1;  // left node offset of the face
    const double gn = (U(a + 1, 0) - U(a, 0)) / hx;
    const double gt = ((U(a, 1) - U(a, -1)) + (U(a + 1, 1) - U(a + 1, -1))) / (4.0 * hy);
    const auto ff = face_flux(gn, gt, p, eps2);
    sv.div += side * ff.flux / hx;
    sv.magnitude += std::abs(ff.flux) / hx;
    if (want_partials) {
      const double cn = side * ff.d_normal / (hx * hx);
      add(a + 1, 0, cn);
      add(a, 0, -cn);
      const double ct = side * ff.d_tangent / (4.0 * hy * hx);
      add(a, 1, ct);
      add(a, -1, -ct);
      add(a + 1, 1, ct);
      add(a + 1, -1, -ct);
    }
  }
  // North and south faces.
  for (int side : {1, -1}) {
    const int b = side > 0 ? 0 : -1;
    const double gn = (U(0, b + 1) - U(0, b)) / hy;
    const double gt = ((U(1, b) - U(-1, b)) + (U(1, b + 1) - U(-1, b + 1))) / (4.0 * hx);
    const auto ff = face_flux(gn, gt, p, eps2);
    sv.div += side * ff.flux / hy;
    sv.magnitude += std::abs(ff.flux) / hy;
    if (want_partials) {
      const double cn = side * ff.d_normal / (hy * hy);
      add(0, b + 1, cn);
      add(0, b, -cn);
      const double ct = side * ff.d_tangent / (4.0 * hx * hy);
      add(1, b, ct);
      add(-1, b, -ct);
      add(1, b + 1, ct);
      add(-1, b + 1, -ct);
    }
  }
  return sv;
}

// Coefficient of the distance formulation: kappa(w) = A(X) / f(u), u = Phi(w), X = B^{-1}(F(u)).
class DistanceMap {
 public:
  DistanceMap(const Operator& op, const Force& force, double m_max)
      : op_(op), force_(force), table_(op, force, 1e-8, std::max(1e15, 100.0 * m_max), 40) {}

  double psi(double u) const { return table_.psi(u); }
  double phi(double w) const { return table_.phi(w); }

  void coefficient(double w, double& kappa, double& dkappa) const {
    const double u = table_.phi(w);
    const double X = op_.energy_inverse(force_.primitive(u));
    const double G = op_.flux(X);
    const double fu = force_.value(u);
    kappa = G / fu;
    dkappa = -1.0 + X * G * force_.slope(u) / (fu * fu);
  }

 private:
  const Operator& op_;
  const Force& force_;
  ko::RateTable table_;
};

struct Problem {
  const Grid2D& grid;
  const Operator& op;
  const Force& force;
  double p;
  double eps;
  double m;
  Formulation form;
  const DistanceMap* map = nullptr;
};

// Residual entry and its scale at an interior node; partials optional.
struct NodeResidual {
  double value = 0.0;
  double scale = 1.0;
  std::array<double, 9> d{};
};

NodeResidual node_residual(const Problem& pb, const std::vector<double>& x, int i, int j, bool want) {
  const Grid2D& g = pb.grid;
  NodeResidual nr;
  const auto sv = flux_divergence(x, g, i, j, pb.p, pb.eps, want);
  const double xc = x[g.index(i, j)];
  if (pb.form == Formulation::Direct) {
    const double fu = pb.force.value(xc);
    nr.value = sv.div - fu;
    nr.scale = 1.0 + sv.magnitude + std::abs(fu);
    if (want) {
      nr.d = sv.d;
      nr.d[4] -= pb.force.slope(xc);
    }
    return nr;
  }
  double kappa = 0.0, dkappa = 0.0;
  pb.map->coefficient(xc, kappa, dkappa);
  const double hx = g.hx(), hy = g.hy();
  // Upwind one-sided differences toward the smaller neighbor (monotone in neighbor differences).
  const double wc = xc;
  const double wW = x[g.index(i - 1, j)], wE = x[g.index(i + 1, j)];
  const double wS = x[g.index(i, j - 1)], wN = x[g.index(i, j + 1)];
  const int kx = wW <= wE ? 3 : 5;
  const int ky = wS <= wN ? 1 : 7;
  const double gx = std::max(wc - std::min(wW, wE), 0.0) / hx;
  const double gy = std::max(wc - std::min(wS, wN), 0.0) / hy;
  const double s = gx * gx + gy * gy + pb.eps * pb.eps;
  const double N = std::pow(s, 0.5 * pb.p);
  nr.value = kappa * sv.div - (N - 1.0);
  nr.scale = 1.0 + std::abs(kappa) * sv.magnitude + N;
  if (want) {
    for (int k = 0; k < 9; ++k) nr.d[k] = kappa * sv.d[k];
    nr.d[4] += dkappa * sv.div;
    const double dN = pb.p * std::pow(s, 0.5 * pb.p - 1.0);
    nr.d[4] -= dN * (gx / hx + gy / hy);
    nr.d[kx] += dN * gx / hx;
    nr.d[ky] += dN * gy / hy;
  }
  return nr;
}

struct Evaluation {
  Eigen::VectorXd scaled;  // residual / scale
  Eigen::VectorXd raw;
  double sup = 0.0;
  double norm = 0.0;
};

int interior_index(const Grid2D& g, int i, int j) { return (j - 1) * (g.nx - 2) + (i - 1); }

Evaluation evaluate(const Problem& pb, const std::vector<double>& x) {
  const Grid2D& g = pb.grid;
  const int n = (g.nx - 2) * (g.ny - 2);
  Evaluation ev;
  ev.scaled.resize(n);
  ev.raw.resize(n);
  for (int j = 1; j < g.ny - 1; ++j) {
    for (int i = 1; i < g.nx - 1; ++i) {
      const auto nr = node_residual(pb, x, i, j, false);
      const int k = interior_index(g, i, j);
      ev.raw[k] = nr.value;
      ev.scaled[k] = nr.value / nr.scale;
    }
  }
  ev.sup = ev.scaled.lpNorm<Eigen::Infinity>();
  ev.norm = ev.scaled.norm();
  if (!std::isfinite(ev.norm)) ev.sup = ev.norm = kInf;
  return ev;
}

class JacobianSolver {
 public:
  explicit JacobianSolver(const Grid2D& g) : g_(g), n_((g.nx - 2) * (g.ny - 2)) {
    // Fixed 9-point pattern; explicit zeros keep the structure identical between iterations.
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(n_) * 9);
    for (int j = 1; j < g.ny - 1; ++j)
      for (int i = 1; i < g.nx - 1; ++i)
        for (int dj = -1; dj <= 1; ++dj)
          for (int di = -1; di <= 1; ++di)
            if (!g.on_boundary(i + di, j + dj))
              trip.emplace_back(interior_index(g, i, j), interior_index(g, i + di, j + dj), 0.0);
    J_.resize(n_, n_);
    J_.setFromTriplets(trip.begin(), trip.end());
    J_.makeCompressed();
    lu_.analyzePattern(J_);
  }

  bool solve(const Problem& pb, const std::vector<double>& x, const Eigen::VectorXd& rhs, Eigen::VectorXd& out) {
    for (int k = 0; k < J_.outerSize(); ++k)
      for (Eigen::SparseMatrix<double>::InnerIterator it(J_, k); it; ++it) it.valueRef() = 0.0;
    for (int j = 1; j < g_.ny - 1; ++j) {
      for (int i = 1; i < g_.nx - 1; ++i) {
        const auto nr = node_residual(pb, x, i, j, true);
        const int row = interior_index(g_, i, j);
        for (int dj = -1; dj <= 1; ++dj)
          for (int di = -1; di <= 1; ++di)
            if (!g_.on_boundary(i + di, j + dj))
              J_.coeffRef(row, interior_index(g_, i + di, j + dj)) += nr.d[(di + 1) + 3 * (dj + 1)];
      }
    }
    lu_.factorize(J_);
    if (lu_.info() != Eigen::Success) return false;
    out = lu_.solve(rhs);
    return lu_.info() == Eigen::Success && out.allFinite();
  }

 private:
  const Grid2D& g_;
  int n_;
  Eigen::SparseMatrix<double> J_;
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu_;
};

// Keeps x inside the admissible box; returns the number of clipped nodes.
int project(const Problem& pb, std::vector<double>& x, double lower, double upper) {
  int count = 0;
  const Grid2D& g = pb.grid;
  for (int j = 1; j < g.ny - 1; ++j) {
    for (int i = 1; i < g.nx - 1; ++i) {
      double& v = x[g.index(i, j)];
      if (v < lower) {
        v = lower;
        ++count;
      } else if (v > upper) {
        v = upper;
        ++count;
      }
    }
  }
  return count;
}

void gauss_seidel(const Problem& pb, std::vector<double>& x, int sweeps, double lower, double upper) {
  const Grid2D& g = pb.grid;
  for (int s = 0; s < sweeps; ++s) {
    for (int color = 0; color < 2; ++color) {
      for (int j = 1; j < g.ny - 1; ++j) {
        for (int i = 1 + ((j + 1 + color) % 2); i < g.nx - 1; i += 2) {
          const auto nr = node_residual(pb, x, i, j, true);
          const double diag = nr.d[4];
          if (!(std::abs(diag) > 0.0) || !std::isfinite(nr.value)) continue;
          double& v = x[g.index(i, j)];
          v = std::clamp(v - nr.value / diag, lower, upper);
        }
      }
    }
  }
}

double center_value(const DiscreteField& f) { return f.at(f.grid.nx / 2, f.grid.ny / 2); }

Formulation resolve(const Operator& op, const Force& force, Formulation requested) {
  if (requested != Formulation::Automatic) return requested;
  if (!op.p_exponent()) return Formulation::Direct;
  const auto rep = ko::classify(op, force);
  return (rep.ko_holds && rep.osgood_holds) ? Formulation::BlowupDistance : Formulation::Direct;
}

}  // namespace

std::string to_string(Formulation f) {
  switch (f) {
    case Formulation::Automatic: return "auto";
    case Formulation::Direct: return "direct";
    case Formulation::BlowupDistance: return "blowup-distance";
  }
  return "unknown";
}

Grid2D make_grid(double ell, int nx, int ny) {
  if (!(ell > 0.0)) throw ConfigError("grid half-length ell must be positive");
  if (nx < 8 || ny < 8) throw ConfigError("grid needs nx, ny >= 8");
  return Grid2D{1.0, ell, nx, ny};
}

Grid2D cylinder_grid(double ell, int nx) {
  const double cells = (nx - 1) * ell;
  const long ny = std::lround(cells) + 1;
  if (std::abs(cells - std::round(cells)) > 1e-9 || (ny - 1) % 2 != 0)
    throw ConfigError("cylinder grid: (nx - 1) * ell must be an even integer for matching spacings");
  return make_grid(ell, nx, static_cast<int>(ny));
}

std::vector<double> raw_residual(const DiscreteField& field, const Force& force) {
  const Grid2D& g = field.grid;
  std::vector<double> r(g.size(), 0.0);
  for (int j = 1; j < g.ny - 1; ++j)
    for (int i = 1; i < g.nx - 1; ++i) {
      const auto sv = flux_divergence(field.values, g, i, j, field.p, field.epsilon, false);
      r[g.index(i, j)] = sv.div - force.value(field.at(i, j));
    }
  return r;
}

std::vector<double> residual(const DiscreteField& field, const Force& force) {
  const Grid2D& g = field.grid;
  std::vector<double> r(g.size(), 0.0);
  for (int j = 1; j < g.ny - 1; ++j)
    for (int i = 1; i < g.nx - 1; ++i) {
      const auto sv = flux_divergence(field.values, g, i, j, field.p, field.epsilon, false);
      const double fu = force.value(field.at(i, j));
      r[g.index(i, j)] = (sv.div - fu) / (1.0 + sv.magnitude + std::abs(fu));
    }
  return r;
}

bool in_compact(const Grid2D& g, int i, int j, double scale) {
  const double tol = 1e-12;
  return std::abs(g.x(i)) <= scale * g.x_half + tol && std::abs(g.y(j)) <= scale * g.y_half + tol;
}

double energy_on_compact(const DiscreteField& f, double scale) {
  const Grid2D& g = f.grid;
  const double hx = g.hx(), hy = g.hy();
  double e = 0.0;
  for (int j = 0; j + 1 < g.ny; ++j) {
    for (int i = 0; i + 1 < g.nx; ++i) {
      if (!in_compact(g, i, j, scale) || !in_compact(g, i + 1, j + 1, scale)) continue;
      const double gx = (f.at(i + 1, j) + f.at(i + 1, j + 1) - f.at(i, j) - f.at(i, j + 1)) / (2.0 * hx);
      const double gy = (f.at(i, j + 1) + f.at(i + 1, j + 1) - f.at(i, j) - f.at(i + 1, j)) / (2.0 * hy);
      e += std::pow(gx * gx + gy * gy, 0.5 * f.p) * hx * hy;
    }
  }
  return e;
}

DiscreteField solve_dirichlet(const Grid2D& grid, const Operator& op, const Force& force, double m,
                              const SolverConfig& cfg, const DiscreteField* initial) {
  auto p_opt = op.p_exponent();
  if (!p_opt) throw ConfigError("the 2D solver supports the p-Laplacian only, got " + op.describe());
  if (!(m >= 0.0) || !std::isfinite(m)) throw ConfigError("boundary value m must be finite and nonnegative");
  if (!(cfg.epsilon > 0.0) || !(cfg.tol_res > 0.0)) throw ConfigError("epsilon and tol_res must be positive");
  if (grid.nx < 8 || grid.ny < 8) throw ConfigError("grid needs nx, ny >= 8");
  if (initial && (initial->grid.nx != grid.nx || initial->grid.ny != grid.ny))
    throw ConfigError("initial guess grid does not match");

  DiscreteField field;
  field.grid = grid;
  field.m = m;
  field.epsilon = cfg.epsilon;
  field.p = *p_opt;
  field.values.assign(grid.size(), m);
  auto& dg = field.diagnostics;

  if (m == 0.0) {
    // Zero data: u = 0 solves the problem exactly since f(0) = 0.
    field.values.assign(grid.size(), 0.0);
    dg.converged = true;
    dg.formulation = Formulation::Direct;
    return field;
  }

  Formulation form = resolve(op, force, cfg.formulation);
  std::unique_ptr<DistanceMap> map;
  if (form == Formulation::BlowupDistance) map = std::make_unique<DistanceMap>(op, force, m);
  dg.formulation = form;
  Problem pb{grid, op, force, *p_opt, cfg.epsilon, m, form, map.get()};

  // Unknown x: u itself, or w = Psi(u) for the distance formulation.
  std::vector<double> x(grid.size());
  double lower = 0.0, upper = m;
  if (form == Formulation::BlowupDistance) {
    const double wb = map->psi(m);
    lower = wb;
    upper = kInf;
    for (int j = 0; j < grid.ny; ++j)
      for (int i = 0; i < grid.nx; ++i) {
        const std::size_t k = grid.index(i, j);
        if (grid.on_boundary(i, j)) x[k] = wb;
        else if (initial) x[k] = std::max(wb, map->psi(std::max(initial->values[k], 1e-300)));
        else {
          const double d = std::min(grid.x_half - std::abs(grid.x(i)), grid.y_half - std::abs(grid.y(j)));
          x[k] = wb + d;
        }
      }
  } else {
    for (int j = 0; j < grid.ny; ++j)
      for (int i = 0; i < grid.nx; ++i) {
        const std::size_t k = grid.index(i, j);
        x[k] = (grid.on_boundary(i, j) || !initial) ? m : std::clamp(initial->values[k], 0.0, m);
      }
  }

  JacobianSolver jac(grid);
  auto ev = evaluate(pb, x);
  Eigen::VectorXd delta;
  int fallbacks = 0;
  while (ev.sup > cfg.tol_res) {
    if (dg.iterations >= cfg.max_newton)
      throw ConvergenceError("solve_dirichlet: no convergence in " + std::to_string(cfg.max_newton) +
                                 " Newton iterations at m = " + fmt(m) + " (last scaled residual " + fmt(ev.sup) + ")",
                             ev.sup);
    ++dg.iterations;
    bool accepted = false;
    if (jac.solve(pb, x, -ev.raw, delta)) {
      double lambda = 1.0;
      for (int h = 0; h <= cfg.max_halvings; ++h) {
        std::vector<double> trial = x;
        for (int j = 1; j < grid.ny - 1; ++j)
          for (int i = 1; i < grid.nx - 1; ++i)
            trial[grid.index(i, j)] += lambda * delta[interior_index(grid, i, j)];
        const int clipped = project(pb, trial, lower, upper);
        const auto tev = evaluate(pb, trial);
        if (tev.norm < ev.norm) {
          x.swap(trial);
          ev = tev;
          dg.projections += clipped;
          accepted = true;
          break;
        }
        lambda *= 0.5;
        ++dg.halvings;
      }
    }
    if (!accepted) {
      if (fallbacks >= cfg.max_fallbacks)
        throw ConvergenceError("solve_dirichlet: line search and Gauss-Seidel fallback exhausted at m = " + fmt(m) +
                                   " (last scaled residual " + fmt(ev.sup) + ")",
                               ev.sup);
      ++fallbacks;
      ++dg.gs_fallbacks;
      gauss_seidel(pb, x, cfg.gs_sweeps, lower, upper);
      ev = evaluate(pb, x);
    }
  }
  dg.residual_sup = ev.sup;
  dg.converged = true;

  if (form == Formulation::BlowupDistance) {
    for (int j = 0; j < grid.ny; ++j)
      for (int i = 0; i < grid.nx; ++i) {
        const std::size_t k = grid.index(i, j);
        field.values[k] = grid.on_boundary(i, j) ? m : std::min(m, map->phi(x[k]));
      }
  } else {
    field.values = x;
  }
  const auto res = residual(field, force);
  for (int j = 1; j < grid.ny - 1; ++j)
    for (int i = 1; i < grid.nx - 1; ++i)
      if (in_compact(grid, i, j, cfg.compact_scale))
        dg.direct_residual_sup = std::max(dg.direct_residual_sup, std::abs(res[grid.index(i, j)]));
  return field;
}

namespace {

void escalation_step(Escalation& esc, const Grid2D& grid, const Operator& op, const Force& force,
                     const SolverConfig& cfg, double m) {
  auto next = solve_dirichlet(grid, op, force, m, cfg, &esc.field);
  const auto& prev = esc.field;
  EscalationRow row;
  row.m = m;
  row.center = center_value(next);
  row.increment_center = row.center - center_value(prev);
  row.min_increment = kInf;
  row.increment_K = -kInf;
  for (int j = 0; j < grid.ny; ++j)
    for (int i = 0; i < grid.nx; ++i) {
      const double inc = next.at(i, j) - prev.at(i, j);
      row.min_increment = std::min(row.min_increment, inc);
      if (in_compact(grid, i, j, cfg.compact_scale)) row.increment_K = std::max(row.increment_K, inc);
    }
  row.energy_K = energy_on_compact(next, cfg.compact_scale);
  row.iterations = next.diagnostics.iterations;
  row.residual = next.diagnostics.residual_sup;
  esc.worst_monotonicity = std::min(esc.worst_monotonicity, row.min_increment);
  esc.energy_bound = std::max(esc.energy_bound, row.energy_K);
  esc.rows.push_back(row);
  esc.field = std::move(next);
}

void finish(Escalation& esc) {
  const std::size_t n = esc.rows.size();
  if (n >= 4) {
    const auto& a = esc.rows[n - 4];
    const auto& b = esc.rows[n - 1];
    if (a.energy_K > 0.0 && b.energy_K > 0.0)
      esc.energy_slope = std::log(b.energy_K / a.energy_K) / std::log(b.m / a.m);
  }
}

}  // namespace

Escalation escalate_m(const Grid2D& grid, const Operator& op, const Force& force, const SolverConfig& cfg,
                      double final_m) {
  if (!(cfg.m_start > 0.0) || !(cfg.m_factor > 1.0)) throw ConfigError("m schedule must start positive and grow");
  if (!(cfg.tol_m > 0.0)) throw ConfigError("tol_m must be positive");
  Escalation esc;
  esc.field = solve_dirichlet(grid, op, force, cfg.m_start, cfg);
  EscalationRow first;
  first.m = cfg.m_start;
  first.center = center_value(esc.field);
  first.energy_K = energy_on_compact(esc.field, cfg.compact_scale);
  first.iterations = esc.field.diagnostics.iterations;
  first.residual = esc.field.diagnostics.residual_sup;
  esc.energy_bound = first.energy_K;
  esc.rows.push_back(first);

  double m = cfg.m_start;
  int growing = 0;
  for (int k = 1; k <= cfg.max_doublings; ++k) {
    m *= cfg.m_factor;
    escalation_step(esc, grid, op, force, cfg, m);
    const auto& row = esc.rows.back();
    const auto& before = esc.rows[esc.rows.size() - 2];

    // Unbounded growth: strictly increasing center with non-decreasing increments.
    if (row.increment_center > 0.0 && (esc.rows.size() == 2 || row.increment_center >= before.increment_center))
      ++growing;
    else
      growing = 0;

    if (final_m > 0.0) {
      if (m >= final_m * (1.0 - 1e-12)) {
        esc.plateau = row.increment_K <= cfg.tol_m;
        break;
      }
      continue;
    }
    if (row.increment_K <= cfg.tol_m) {
      esc.plateau = true;
      break;
    }
    if (growing >= cfg.ko_stall_doublings) {
      esc.ko_violated = true;
      break;
    }
  }
  esc.status = esc.ko_violated ? "KO violated numerically" : (esc.plateau ? "plateau" : "max doublings");
  finish(esc);
  return esc;
}

CylinderFamily cylinder_family(const Operator& op, const Force& force, const std::vector<double>& ells,
                               const SolverConfig& cfg, int nx) {
  if (ells.empty()) throw ConfigError("cylinder_family needs at least one ell");
  for (std::size_t k = 1; k < ells.size(); ++k)
    if (!(ells[k] > ells[k - 1])) throw ConfigError("cylinder_family needs increasing ells");
  CylinderFamily fam;
  fam.ells = ells;
  for (double ell : ells) fam.runs.push_back(escalate_m(cylinder_grid(ell, nx), op, force, cfg));

  // Bring every run to a common final m so the comparison is between equal boundary data.
  double common = 0.0;
  for (const auto& r : fam.runs) common = std::max(common, r.field.m);
  fam.common_m = common;
  for (std::size_t k = 0; k < ells.size(); ++k) {
    auto& run = fam.runs[k];
    if (run.field.m >= common) continue;
    const auto grid = run.field.grid;
    double m = run.field.m;
    while (m < common * (1.0 - 1e-12)) {
      m *= cfg.m_factor;
      escalation_step(run, grid, op, force, cfg, m);
    }
    run.plateau = run.rows.back().increment_K <= cfg.tol_m;
    if (run.status != "KO violated numerically") run.status = run.plateau ? "plateau" : "max doublings";
    finish(run);
  }

  fam.monotone = true;
  for (std::size_t k = 0; k + 1 < ells.size(); ++k) {
    for (std::size_t l = k + 1; l < ells.size(); ++l) {
      const auto& small = fam.runs[k].field;
      const auto& large = fam.runs[l].field;
      SliceComparison cmp;
      cmp.ell_small = ells[k];
      cmp.ell_large = ells[l];
      cmp.max_violation = -kInf;
      const int offset = (large.grid.ny - small.grid.ny) / 2;
      for (int j = 0; j < small.grid.ny; ++j)
        for (int i = 0; i < small.grid.nx; ++i)
          cmp.max_violation = std::max(cmp.max_violation, large.at(i, j + offset) - small.at(i, j));
      cmp.ordered = cmp.max_violation <= 1e-6;
      fam.monotone = fam.monotone && cmp.ordered;
      fam.ordering.push_back(cmp);
    }
  }
  return fam;
}

std::vector<double> slice(const DiscreteField& field, double y) {
  const Grid2D& g = field.grid;
  const double jr = (y + g.y_half) / g.hy();
  const long j = std::lround(jr);
  if (std::abs(jr - j) > 1e-9 || j < 0 || j >= g.ny)
    throw ConfigError("slice: y = " + fmt(y) + " is not a grid line");
  std::vector<double> out(g.nx);
  for (int i = 0; i < g.nx; ++i) out[i] = field.at(i, static_cast<int>(j));
  return out;
}

namespace {

CrossSectionError compare_slice(const DiscreteField& field, const std::vector<double>& exact,
                                const std::vector<int>& nodes, double y) {
  CrossSectionError e;
  e.y = y;
  const auto s = slice(field, y);
  const Grid2D& g = field.grid;
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    const int i = nodes[k];
    const double diff = s[i] - exact[k];
    e.sup_abs = std::max(e.sup_abs, std::abs(diff));
    e.sup_rel = std::max(e.sup_rel, std::abs(diff) / std::abs(exact[k]));
    if (std::abs(g.x(i)) < 1e-12) e.signed_at_center = diff;
  }
  return e;
}

void check_compatible(const DiscreteField& field, const ode1d::Profile1D& profile) {
  if (std::abs(profile.ell - field.grid.x_half) > 1e-9 * field.grid.x_half)
    throw ConfigError("cross_section_compare: profile half-length " + fmt(profile.ell) +
                      " does not match the cross-section half-width " + fmt(field.grid.x_half));
  if (field.grid.ny % 2 == 0 || field.grid.nx % 2 == 0)
    throw ConfigError("cross_section_compare: resolution mismatch (odd node counts needed for the center lines)");
}

}  // namespace

CrossSectionError slice_error(const DiscreteField& field, const ode1d::Profile1D& profile, double y,
                              double x_limit) {
  check_compatible(field, profile);
  std::vector<int> nodes;
  std::vector<double> exact;
  for (int i = 0; i < field.grid.nx; ++i)
    if (std::abs(field.grid.x(i)) <= x_limit + 1e-12) {
      nodes.push_back(i);
      exact.push_back(profile.value_at(field.grid.x(i)));
    }
  return compare_slice(field, exact, nodes, y);
}

CrossSectionReport cross_section_compare(const DiscreteField& field, const ode1d::Profile1D& profile,
                                         double x_limit) {
  check_compatible(field, profile);
  CrossSectionReport rep;
  std::vector<int> nodes;
  std::vector<double> exact;
  for (int i = 0; i < field.grid.nx; ++i) {
    const double x = field.grid.x(i);
    if (std::abs(x) > x_limit + 1e-12) continue;
    nodes.push_back(i);
    // The profile is even; reuse the mirrored value.
    const int mirror = field.grid.nx - 1 - i;
    if (mirror < i) exact.push_back(exact[static_cast<std::size_t>(std::find(nodes.begin(), nodes.end(), mirror) - nodes.begin())]);
    else exact.push_back(profile.value_at(x));
  }
  rep.nodes = static_cast<int>(nodes.size());
  rep.center = compare_slice(field, exact, nodes, 0.0);
  const double half = 0.5 * field.grid.y_half;
  for (double y : {-half, half}) {
    const double jr = (y + field.grid.y_half) / field.grid.hy();
    if (std::abs(jr - std::round(jr)) <= 1e-9) rep.off_center.push_back(compare_slice(field, exact, nodes, y));
  }
  return rep;
}

}  // namespace blowup::pde2d
