#include "rescat/integrate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "rescat/error.hpp"

namespace rescat {

// Precision budget: the phase is advanced unwrapped and only reduced mod 2*pi
// where f and g are evaluated. The largest phases reached by the experiments
// are ~8e6 rad, where one ulp is ~1e-9 rad.

TrajectoryPoint make_point(double t, const SlowVector& I, double phi_unwrapped) {
  return TrajectoryPoint{t, I, wrap_phase(phi_unwrapped), phi_unwrapped};
}

std::string_view to_string(Stepper stepper) {
  switch (stepper) {
    case Stepper::euler: return "euler";
    case Stepper::rk4: return "rk4";
    case Stepper::averaged: return "averaged";
    case Stepper::paver: return "paver";
    case Stepper::reference: return "reference";
  }
  return "unknown";
}

Stepper parse_stepper(std::string_view name) {
  for (Stepper s : {Stepper::euler, Stepper::rk4, Stepper::averaged, Stepper::paver, Stepper::reference}) {
    if (to_string(s) == name) return s;
  }
  throw InvalidArgument("unknown stepper '" + std::string(name) + "'");
}

std::optional<std::size_t> Trajectory::index_at_or_before(double time) const {
  const auto it = std::upper_bound(points.begin(), points.end(), time,
                                   [](double value, const TrajectoryPoint& p) { return value < p.t; });
  if (it == points.begin()) return std::nullopt;
  return static_cast<std::size_t>(it - points.begin()) - 1;
}

Trajectory Trajectory::slice(double t0, double t1) const {
  Trajectory out{system_id, stepper, kappa, stride, {}};
  for (const TrajectoryPoint& p : points) {
    if (p.t >= t0 && p.t <= t1) out.points.push_back(p);
  }
  return out;
}

std::optional<std::string> check_invariants(const Trajectory& traj) {
  if (traj.points.empty()) return "trajectory has no points";
  if (traj.stride == 0) return "stride must be positive";
  const double spacing = traj.kappa * static_cast<double>(traj.stride);
  for (std::size_t i = 0; i < traj.points.size(); ++i) {
    const TrajectoryPoint& p = traj.points[i];
    const double diff = std::remainder(p.phi_wrapped - p.phi_unwrapped, kTwoPi);
    if (!(p.phi_wrapped >= 0.0 && p.phi_wrapped < kTwoPi) || std::abs(diff) > 1e-9) {
      return "wrapped/unwrapped phase mismatch at row " + std::to_string(i);
    }
    if (i == 0) continue;
    const double dt = p.t - traj.points[i - 1].t;
    if (!(dt > 0.0)) return "time not strictly increasing at row " + std::to_string(i);
    const bool last = i + 1 == traj.points.size();
    const double tol = 1e-12 * std::max(1.0, std::abs(p.t) / spacing) * spacing;
    if (std::abs(dt - spacing) > tol && !(last && dt < spacing + tol)) {
      return "irregular spacing at row " + std::to_string(i);
    }
  }
  return std::nullopt;
}

namespace {

void require_finite(const TrajectoryPoint& p, std::size_t step_index) {
  bool ok = std::isfinite(p.t) && std::isfinite(p.phi_unwrapped);
  for (double v : p.I) ok = ok && std::isfinite(v);
  if (!ok) throw IntegrationDiverged(step_index, p.t);
}

void require_positive_step(double kappa) {
  if (!(kappa > 0.0) || !std::isfinite(kappa)) throw InvalidArgument("step must be positive and finite");
}

SlowVector axpy(const SlowVector& x, double a, const SlowVector& y) {
  SlowVector r;
  for (std::size_t j = 0; j < kSlowDim; ++j) r[j] = x[j] + a * y[j];
  return r;
}

struct Derivative {
  SlowVector dI;
  double dphi;
};

// Classical RK4 on (I, phi) for a field that may depend on time.
template <class Field>
TrajectoryPoint rk4_generic(const Field& field, const TrajectoryPoint& s, double h) {
  const Derivative k1 = field(s.I, s.phi_unwrapped, s.t);
  const Derivative k2 = field(axpy(s.I, 0.5 * h, k1.dI), s.phi_unwrapped + 0.5 * h * k1.dphi, s.t + 0.5 * h);
  const Derivative k3 = field(axpy(s.I, 0.5 * h, k2.dI), s.phi_unwrapped + 0.5 * h * k2.dphi, s.t + 0.5 * h);
  const Derivative k4 = field(axpy(s.I, h, k3.dI), s.phi_unwrapped + h * k3.dphi, s.t + h);
  SlowVector I;
  for (std::size_t j = 0; j < kSlowDim; ++j) {
    I[j] = s.I[j] + h / 6.0 * (k1.dI[j] + 2.0 * k2.dI[j] + 2.0 * k3.dI[j] + k4.dI[j]);
  }
  const double phi = s.phi_unwrapped + h / 6.0 * (k1.dphi + 2.0 * k2.dphi + 2.0 * k3.dphi + k4.dphi);
  return make_point(s.t + h, I, phi);
}

template <class Step>
Trajectory run_fixed_step(std::string system_id, Stepper id, const TrajectoryPoint& start, double kappa, double t_end,
                          std::size_t stride, const Step& step) {
  require_positive_step(kappa);
  if (stride == 0) throw InvalidArgument("stride must be positive");
  if (!(t_end > start.t)) throw InvalidArgument("t_end must exceed the start time");

  const std::size_t n_steps = step_count(start.t, t_end, kappa);
  Trajectory traj{std::move(system_id), id, kappa, stride, {}};
  traj.points.reserve(n_steps / stride + 2);

  TrajectoryPoint state = make_point(start.t, start.I, start.phi_unwrapped);
  traj.points.push_back(state);
  for (std::size_t n = 1; n <= n_steps; ++n) {
    state = step(state, n);
    state.t = start.t + static_cast<double>(n) * kappa;
    require_finite(state, n);
    if (n % stride == 0 || n == n_steps) traj.points.push_back(state);
  }
  return traj;
}

}  // namespace

TrajectoryPoint euler_step(const SlowFastSystem& system, const TrajectoryPoint& state, double kappa,
                           std::size_t step_index) {
  require_positive_step(kappa);
  const double phi = wrap_phase(state.phi_unwrapped);
  const SlowVector dI = system.f(state.I, phi, system.eps);
  const double dphi = system.omega(state.I) / system.eps + system.g(state.I, phi, system.eps);
  TrajectoryPoint next = make_point(state.t + kappa, axpy(state.I, kappa, dI), state.phi_unwrapped + kappa * dphi);
  require_finite(next, step_index);
  return next;
}

TrajectoryPoint rk4_step(const SlowFastSystem& system, const TrajectoryPoint& state, double kappa,
                         std::size_t step_index) {
  require_positive_step(kappa);
  const auto field = [&system](const SlowVector& I, double phi_u, double) {
    const double phi = wrap_phase(phi_u);
    return Derivative{system.f(I, phi, system.eps), system.omega(I) / system.eps + system.g(I, phi, system.eps)};
  };
  TrajectoryPoint next = rk4_generic(field, state, kappa);
  require_finite(next, step_index);
  return next;
}

std::size_t step_count(double t_start, double t_end, double kappa) {
  const double x = (t_end - t_start) / kappa;
  const double r = std::round(x);
  if (std::abs(x - r) <= 1e-9 * std::max(1.0, x)) return static_cast<std::size_t>(r);
  return static_cast<std::size_t>(std::ceil(x));
}

Trajectory integrate(const SlowFastSystem& system, Stepper stepper, const TrajectoryPoint& start, double kappa,
                     double t_end, std::size_t stride) {
  switch (stepper) {
    case Stepper::euler:
      return run_fixed_step(system.id, stepper, start, kappa, t_end, stride,
                            [&](const TrajectoryPoint& s, std::size_t n) { return euler_step(system, s, kappa, n); });
    case Stepper::rk4:
    case Stepper::reference:
      return run_fixed_step(system.id, stepper, start, kappa, t_end, stride,
                            [&](const TrajectoryPoint& s, std::size_t n) { return rk4_step(system, s, kappa, n); });
    case Stepper::averaged:
      return averaged_integrate(system, start.I, t_end, kappa, start.t, start.phi_unwrapped, stride);
    case Stepper::paver:
      break;
  }
  throw InvalidArgument("the partially averaged stepper needs a resonance; use paver_integrate");
}

Trajectory averaged_integrate(const SlowFastSystem& system, const SlowVector& start_J, double t_end, double kappa,
                              double t_start, double phi_start, std::size_t stride) {
  const auto field = [&system](const SlowVector& J, double, double) {
    return Derivative{system.averaged_field(J), system.omega(J) / system.eps};
  };
  return run_fixed_step(system.id, Stepper::averaged, make_point(t_start, start_J, phi_start), kappa, t_end, stride,
                        [&](const TrajectoryPoint& s, std::size_t) { return rk4_generic(field, s, kappa); });
}

PaverSetup make_paver_setup(const SlowFastSystem& system, int n1, int n2, double kappa) {
  if (n1 < 1) throw InvalidArgument("n1 must be positive");
  if (n2 == 0) throw InvalidArgument("n2 must be nonzero");
  if (std::gcd(n1, std::abs(n2)) != 1) throw InvalidArgument("n1 and n2 must be co-prime");
  require_positive_step(kappa);

  PaverSetup setup{n1, n2, kTwoPi / kappa, {}};
  for (const auto& [component, series] : system.harmonics) {
    HarmonicSeries resonant = series.multiples_of(n1);
    if (!resonant.empty()) setup.harmonics_used.emplace(component, std::move(resonant));
  }
  if (setup.harmonics_used.empty()) {
    throw NoResonantHarmonics("no harmonic of " + system.id + " is a multiple of n1=" + std::to_string(n1));
  }
  return setup;
}

SlowVector paver_field(const SlowFastSystem& system, const PaverSetup& setup, const SlowVector& I, double phi,
                       double t) {
  SlowVector rhs = system.averaged_field(I);
  // Real-cosine form of the sum over q != 0: the q and -q terms pair up.
  const double resonant_phase = setup.n1 * phi + setup.n2 * setup.Omega * t;
  for (const auto& [component, series] : setup.harmonics_used) {
    for (const auto& [m, a] : series.terms()) {
      rhs[component] += a * std::cos((m / setup.n1) * resonant_phase);
    }
  }
  return rhs;
}

Trajectory paver_integrate(const SlowFastSystem& system, const PaverSetup& setup, const TrajectoryPoint& start,
                           double kappa_int, std::pair<double, double> t_span, std::size_t stride) {
  if (setup.harmonics_used.empty()) throw NoResonantHarmonics("paver setup carries no resonant harmonics");
  if (std::abs(start.t - t_span.first) > 1e-12 * std::max(1.0, std::abs(t_span.first))) {
    throw InvalidArgument("start point must sit at the beginning of the span");
  }
  const auto field = [&](const SlowVector& I, double phi_u, double t) {
    return Derivative{paver_field(system, setup, I, phi_u, t), system.omega(I) / system.eps};
  };
  return run_fixed_step(system.id, Stepper::paver, start, kappa_int, t_span.second, stride,
                        [&](const TrajectoryPoint& s, std::size_t) { return rk4_generic(field, s, kappa_int); });
}

}  // namespace rescat
