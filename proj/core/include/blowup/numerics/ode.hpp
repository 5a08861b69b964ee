#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <limits>
#include <utility>

namespace blowup::numerics {

template <std::size_t N>
using OdeState = std::array<double, N>;

struct OdeOptions {
  double rel_tol = 1e-11;
  double abs_tol = 1e-14;
  double initial_step = 1e-6;
  double max_step = std::numeric_limits<double>::infinity();
  long max_steps = 2'000'000;
};

enum class OdeStop { Reached, Stopped, StepUnderflow, MaxSteps, NonFinite };

template <std::size_t N>
struct OdeOutcome {
  OdeStop status = OdeStop::Reached;
  double t = 0.0;
  OdeState<N> y{};
  long accepted = 0;
  long rejected = 0;
};

// Dormand-Prince 5(4) with FSAL. stop(t, y) is checked after each accepted step;
// observe(t, y, dydt) sees every accepted state including the initial one.
template <std::size_t N, class Rhs, class Stop, class Observe>
OdeOutcome<N> integrate_dopri(Rhs&& rhs, double t0, OdeState<N> y0, double t_end, Stop&& stop,
                              Observe&& observe, const OdeOptions& opt = {}) {
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                          a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                          a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                          b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                          e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

  using S = OdeState<N>;
  OdeOutcome<N> out;
  double t = t0;
  S y = y0;
  S k1 = rhs(t, y);
  observe(t, y, k1);
  double h = std::min(opt.initial_step, t_end - t0);
  auto axpy = [](const S& base, std::initializer_list<std::pair<double, const S*>> terms, double hh) {
    S r = base;
    for (auto& [c, k] : terms)
      for (std::size_t i = 0; i < N; ++i) r[i] += hh * c * (*k)[i];
    return r;
  };

  for (long step = 0; step < opt.max_steps; ++step) {
    if (t >= t_end) {
      out.status = OdeStop::Reached;
      break;
    }
    h = std::min({h, t_end - t, opt.max_step});
    const bool last = h == t_end - t;
    if (h <= 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t))) {
      out.status = OdeStop::StepUnderflow;
      out.t = t;
      out.y = y;
      return out;
    }
    const S k2 = rhs(t + c2 * h, axpy(y, {{a21, &k1}}, h));
    const S k3 = rhs(t + c3 * h, axpy(y, {{a31, &k1}, {a32, &k2}}, h));
    const S k4 = rhs(t + c4 * h, axpy(y, {{a41, &k1}, {a42, &k2}, {a43, &k3}}, h));
    const S k5 = rhs(t + c5 * h, axpy(y, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}, h));
    const S k6 = rhs(t + h, axpy(y, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}, h));
    const S yn = axpy(y, {{b1, &k1}, {b3, &k3}, {b4, &k4}, {b5, &k5}, {b6, &k6}}, h);
    const S k7 = rhs(t + h, yn);

    double err = 0.0;
    bool finite = true;
    for (std::size_t i = 0; i < N; ++i) {
      const double ei = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
      const double sc = opt.abs_tol + opt.rel_tol * std::max(std::abs(y[i]), std::abs(yn[i]));
      err += (ei / sc) * (ei / sc);
      finite = finite && std::isfinite(yn[i]) && std::isfinite(k7[i]);
    }
    err = std::sqrt(err / static_cast<double>(N));
    if (!finite) err = std::numeric_limits<double>::infinity();

    if (err <= 1.0) {
      t = last ? t_end : t + h;
      y = yn;
      k1 = k7;
      ++out.accepted;
      observe(t, y, k1);
      if (stop(t, y)) {
        out.status = OdeStop::Stopped;
        out.t = t;
        out.y = y;
        return out;
      }
      const double fac = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
      h *= fac;
    } else {
      ++out.rejected;
      const double fac = std::isfinite(err) ? std::clamp(0.9 * std::pow(err, -0.2), 0.1, 0.5) : 0.1;
      h *= fac;
    }
    if (step + 1 == opt.max_steps) out.status = OdeStop::MaxSteps;
  }
  out.t = t;
  out.y = y;
  return out;
}

}  // namespace blowup::numerics
