#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rescat/core.hpp"

namespace rescat {

struct TrajectoryPoint {
  double t = 0.0;
  SlowVector I{};
  double phi_wrapped = 0.0;    // in [0, 2*pi)
  double phi_unwrapped = 0.0;  // accumulated, never reduced
};

/// Builds a point whose wrapped phase is derived from the unwrapped one.
TrajectoryPoint make_point(double t, const SlowVector& I, double phi_unwrapped);

enum class Stepper { euler, rk4, averaged, paver, reference };

std::string_view to_string(Stepper stepper);
Stepper parse_stepper(std::string_view name);

/// Step of the high-resolution reference integrator (classical RK4).
inline double reference_step(double eps) { return eps / 1000.0; }

struct Trajectory {
  std::string system_id;
  Stepper stepper = Stepper::euler;
  double kappa = 0.0;
  std::size_t stride = 1;
  std::vector<TrajectoryPoint> points;

  /// Index of the last point with t <= time, or nullopt if time precedes the trajectory.
  std::optional<std::size_t> index_at_or_before(double time) const;

  /// Points with t in [t0, t1], as a trajectory with the same metadata.
  Trajectory slice(double t0, double t1) const;
};

/// Checks the trajectory invariants; returns a description of the first violation.
///
/// The final recorded point may be closer than stride*kappa to its predecessor
/// because it is always recorded.
std::optional<std::string> check_invariants(const Trajectory& traj);

/// One step of the explicit Euler map. f and g see the wrapped phase.
TrajectoryPoint euler_step(const SlowFastSystem& system, const TrajectoryPoint& state, double kappa,
                           std::size_t step_index = 0);

/// One step of classical RK4 (Butcher weights 1/6, 1/3, 1/3, 1/6) on (I, phi_unwrapped).
TrajectoryPoint rk4_step(const SlowFastSystem& system, const TrajectoryPoint& state, double kappa,
                         std::size_t step_index = 0);

/// ceil((t_end - t_start) / kappa), robust to a quotient that is integral up to rounding.
std::size_t step_count(double t_start, double t_end, double kappa);

/// Iterates a fixed-step stepper, recording every stride-th point and always the final one.
/// Time is recomputed as t_start + n*kappa rather than accumulated.
///
/// `Stepper::paver` is rejected here; it needs a PaverSetup (see paver_integrate).
Trajectory integrate(const SlowFastSystem& system, Stepper stepper, const TrajectoryPoint& start, double kappa,
                     double t_end, std::size_t stride = 1);

/// Integrates the averaged system dJ/dt = F(J) with RK4. The phase is carried
/// along with dphi/dt = omega(J)/eps.
Trajectory averaged_integrate(const SlowFastSystem& system, const SlowVector& start_J, double t_end, double kappa,
                              double t_start = 0.0, double phi_start = 0.0, std::size_t stride = 1);

/// Resonance n1*omega/eps + n2*Omega = 0 with the numerical frequency Omega = 2*pi/kappa.
struct PaverSetup {
  int n1 = 1;
  int n2 = -1;
  double Omega = 0.0;
  /// Per slow component: the terms of its series whose harmonic number is a multiple of n1.
  std::map<std::size_t, HarmonicSeries> harmonics_used;
};

/// Throws NoResonantHarmonics when no component has a harmonic that is a multiple of n1.
PaverSetup make_paver_setup(const SlowFastSystem& system, int n1, int n2, double kappa);

/// Right-hand side of the partially averaged slow equations at (I, phi, t):
/// F(I) + sum_{q >= 1} a_{q n1} cos(q (n1 phi + n2 Omega t)) on each component with harmonics.
SlowVector paver_field(const SlowFastSystem& system, const PaverSetup& setup, const SlowVector& I, double phi,
                       double t);

inline double default_paver_step(double eps) { return eps / 50.0; }

/// Integrates the partially averaged system as a continuous ODE with RK4 of step kappa_int.
Trajectory paver_integrate(const SlowFastSystem& system, const PaverSetup& setup, const TrajectoryPoint& start,
                           double kappa_int, std::pair<double, double> t_span, std::size_t stride = 1);

// CSV with header t,I1,I2,phi_wrapped,phi_unwrapped; values use shortest round-trip formatting.

void write_trajectory_csv(std::ostream& out, const Trajectory& traj);
void write_trajectory_csv(const std::string& path, const Trajectory& traj);

/// Parses a trajectory CSV. kappa*stride is inferred from the first row spacing
/// (stride is reported as 1); system id and stepper are not stored in the file.
Trajectory read_trajectory_csv(std::istream& in);
Trajectory read_trajectory_csv(const std::string& path);

/// Shortest decimal representation that round-trips to the same double.
std::string format_double(double value);

}  // namespace rescat
