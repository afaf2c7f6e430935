#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rescat/core.hpp"
#include "rescat/integrate.hpp"

namespace rescat {

/// Closed-form slow solution I(t) together with its velocity dI/dt.
struct SlowPath {
  std::function<SlowVector(double)> at;
  std::function<SlowVector(double)> velocity;
};

/// I(t) = I0 + (t - t0) * F(I0). Exact for the built-ins, whose averaged field is constant.
SlowPath constant_drift_path(const SlowFastSystem& system, double t0, const SlowVector& I0);

/// A crossing of n1*omega(I(t))/eps + n2*Omega = 0.
struct ResonanceEvent {
  int n1 = 1;
  int n2 = -1;
  double t_star = 0.0;
  SlowVector I_star{};
  std::optional<double> phi_star_unwrapped;  // filled by phase_at_resonance
  double Omega = 0.0;
  double omega_prime_star = 0.0;  // d omega / dt along the slow path at t_star
  int source_harmonic = 1;
};

struct LocateOptions {
  int n1_max = 11;
  int n2_max = 40;
};

/// Every co-prime (n1, n2) with 1 <= n1 <= n1_max, 1 <= |n2| <= n2_max whose
/// crossing lies in t_span, sorted by t_star (ties by n1).
///
/// n1 is restricted to values that divide some harmonic present in the system's
/// harmonic data. Requires omega to be strictly monotone along the path over
/// the span; throws NonMonotoneFrequency otherwise.
std::vector<ResonanceEvent> locate_resonances(const SlowFastSystem& system, double kappa,
                                              std::pair<double, double> t_span, const SlowPath& path,
                                              LocateOptions options = {});

/// Times where omega itself vanishes along the path (the resonance of the
/// continuous system, independent of the step).
std::vector<double> actual_resonances(const SlowFastSystem& system, std::pair<double, double> t_span,
                                      const SlowPath& path);

/// phi_1 + (1/eps) * integral_{t_1}^{t_star} omega(I(s)) ds for a given trajectory point.
double phase_from_point(const TrajectoryPoint& point, double t_star, const SlowFastSystem& system,
                        const SlowPath& path);

/// Phase at the crossing, reconstructed from the last recorded point at or before t_star.
double phase_at_resonance(const Trajectory& traj, const ResonanceEvent& event, const SlowFastSystem& system,
                          const SlowPath& path);

/// Stationary-phase jump of slow component `component` across the event.
///
/// n1 = 1: a_1 * sqrt(2*pi*eps/|w'|) * cos(phi* + n2*Omega*t* + sgn(w')*pi/4).
/// n1 > 1 (extension, checked only against the partially averaged system):
/// a_n1 * sqrt(2*pi*eps/(n1*|w'|)) * cos(n1*phi* + n2*Omega*t* + sgn(w')*pi/4).
///
/// The amplitude assumes unit weight on every harmonic of the sampling comb,
/// which is what the Euler map produces.
double predict_jump(const ResonanceEvent& event, const SlowFastSystem& system, std::size_t component);

/// Sum of predictions of events sharing one crossing time.
double predict_superposed(std::span<const ResonanceEvent> events, const SlowFastSystem& system,
                          std::size_t component);

/// Groups events whose crossing times agree within `tolerance`.
std::vector<std::vector<ResonanceEvent>> group_coincident(std::span<const ResonanceEvent> events,
                                                          double tolerance = 1e-9);

struct JumpWindows {
  double inner = 0.0;  // half-width of the excluded resonance zone
  double outer = 0.0;  // outer edge of each fit window, measured from t_star
};

/// inner = 8*sqrt(eps/|w'|), outer = 4*inner.
JumpWindows default_windows(const ResonanceEvent& event, double eps);

struct JumpReport {
  ResonanceEvent event;
  double predicted = 0.0;
  double measured = 0.0;
  std::pair<double, double> window_pre;
  std::pair<double, double> window_post;
  double residual = 0.0;
};

/// Fits an affine trend on [t*-outer, t*-inner] and [t*+inner, t*+outer] and
/// reports the difference of the two fits at t_star.
///
/// `known` lists other located events; any of them inside a window (and not
/// coincident with `event`) raises OverlappingResonance. predicted and residual
/// are NaN until attach_prediction is called.
JumpReport measure_jump(const Trajectory& traj, const ResonanceEvent& event, std::size_t component,
                        const JumpWindows& windows, std::span<const ResonanceEvent> known = {});

void attach_prediction(JumpReport& report, double predicted);

/// sqrt(eps) * exp(-sigma * 2*pi*eps / (omega*kappa)); an order-of-magnitude bound for n2 = +-1.
double exp_envelope(double eps, double kappa, double omega_at_resonance, double sigma);

struct JumpDetection {
  double t = 0.0;
  double amplitude = 0.0;  // signed step height at the detection
};

/// Step detector: over each maximal run of grid points where the local step
/// response |mean(after) - mean(before)| over half_width exceeds threshold,
/// reports the time and value of its extremum. Assumes negligible slow drift
/// in the scanned component.
std::vector<JumpDetection> scan_jumps(const Trajectory& traj, std::size_t component, double half_width,
                                      double threshold);

void write_jump_reports_csv(std::ostream& out, std::span<const JumpReport> reports);

}  // namespace rescat
