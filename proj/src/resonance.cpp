#include "rescat/resonance.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

#include "rescat/error.hpp"
#include "rescat/kernels.hpp"

namespace rescat {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double dot(const SlowVector& a, const SlowVector& b) {
  double s = 0.0;
  for (std::size_t j = 0; j < kSlowDim; ++j) s += a[j] * b[j];
  return s;
}

double sign(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

// omega along the path, sampled to establish monotonicity and affinity.
class FrequencyProfile {
 public:
  FrequencyProfile(const SlowFastSystem& system, const SlowPath& path, std::pair<double, double> span)
      : system_(system), path_(path), span_(span) {
    if (!(span.second > span.first)) throw InvalidArgument("time span must be increasing");
    constexpr int kSamples = 1025;
    samples_.resize(kSamples);
    for (int i = 0; i < kSamples; ++i) {
      const double t = span.first + (span.second - span.first) * i / (kSamples - 1);
      samples_[i] = {t, (*this)(t)};
    }
    const double direction = sign(samples_.back().second - samples_.front().second);
    for (std::size_t i = 1; i < samples_.size(); ++i) {
      if (direction == 0.0 || sign(samples_[i].second - samples_[i - 1].second) != direction) {
        throw NonMonotoneFrequency("omega is not strictly monotone along the slow path on [" +
                                   std::to_string(span.first) + ", " + std::to_string(span.second) + "]");
      }
    }
    const double wa = samples_.front().second;
    const double wb = samples_.back().second;
    const double scale = std::max({std::abs(wa), std::abs(wb), std::abs(wb - wa)});
    affine_ = std::all_of(samples_.begin(), samples_.end(), [&](const auto& s) {
      const double linear = wa + (wb - wa) * (s.first - span.first) / (span.second - span.first);
      return std::abs(s.second - linear) <= 1e-12 * scale;
    });
  }

  double operator()(double t) const { return system_.omega(path_.at(t)); }

  double min() const { return std::min(samples_.front().second, samples_.back().second); }
  double max() const { return std::max(samples_.front().second, samples_.back().second); }

  /// Time at which omega equals target; target must lie in [min(), max()].
  double solve(double target) const {
    const double a = span_.first;
    const double b = span_.second;
    const double wa = samples_.front().second;
    const double wb = samples_.back().second;
    if (affine_) return a + (target - wa) / (wb - wa) * (b - a);
    double lo = a;
    double hi = b;
    const double dir = sign(wb - wa);
    for (int it = 0; it < 200 && hi - lo > 1e-12 * std::max(1.0, std::abs(lo)); ++it) {
      const double mid = 0.5 * (lo + hi);
      if (dir * ((*this)(mid) - target) < 0.0) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    return 0.5 * (lo + hi);
  }

 private:
  const SlowFastSystem& system_;
  const SlowPath& path_;
  std::pair<double, double> span_;
  std::vector<std::pair<double, double>> samples_;
  bool affine_ = false;
};

bool n1_has_harmonics(const SlowFastSystem& system, int n1) {
  if (system.harmonics.empty()) return true;
  for (const auto& [component, series] : system.harmonics) {
    for (const auto& [m, a] : series.terms()) {
      if (m % n1 == 0 && a != 0.0) return true;
    }
  }
  return false;
}

struct AffineFit {
  double intercept;
  double slope;
};

// Least-squares line through the points with t in [lo, hi], in coordinates centred on t0.
AffineFit fit_affine(const Trajectory& traj, std::size_t component, double lo, double hi, double t0) {
  const auto& pts = traj.points;
  const auto first = std::lower_bound(pts.begin(), pts.end(), lo,
                                      [](const TrajectoryPoint& p, double v) { return p.t < v; });
  const auto last = std::upper_bound(pts.begin(), pts.end(), hi,
                                     [](double v, const TrajectoryPoint& p) { return v < p.t; });
  const auto n = static_cast<double>(last - first);
  if (last - first < 3) throw InvalidArgument("measurement window holds fewer than 3 points");
  double mx = 0.0;
  double my = 0.0;
  for (auto it = first; it != last; ++it) {
    mx += it->t - t0;
    my += it->I[component];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0;
  double sxx = 0.0;
  for (auto it = first; it != last; ++it) {
    const double dx = (it->t - t0) - mx;
    sxy += dx * (it->I[component] - my);
    sxx += dx * dx;
  }
  const double slope = sxy / sxx;
  return {my - slope * mx, slope};
}

}  // namespace

SlowPath constant_drift_path(const SlowFastSystem& system, double t0, const SlowVector& I0) {
  const SlowVector drift = system.averaged_field(I0);
  SlowPath path;
  path.at = [t0, I0, drift](double t) {
    SlowVector I;
    for (std::size_t j = 0; j < kSlowDim; ++j) I[j] = I0[j] + (t - t0) * drift[j];
    return I;
  };
  path.velocity = [drift](double) { return drift; };
  return path;
}

std::vector<ResonanceEvent> locate_resonances(const SlowFastSystem& system, double kappa,
                                              std::pair<double, double> t_span, const SlowPath& path,
                                              LocateOptions options) {
  if (!(kappa > 0.0)) throw InvalidArgument("step must be positive");
  if (options.n1_max < 1 || options.n2_max < 1) throw InvalidArgument("n1_max and n2_max must be positive");
  const FrequencyProfile profile(system, path, t_span);
  const double Omega = kTwoPi / kappa;

  std::vector<ResonanceEvent> events;
  for (int n1 = 1; n1 <= options.n1_max; ++n1) {
    if (!n1_has_harmonics(system, n1)) continue;
    for (int n2 = -options.n2_max; n2 <= options.n2_max; ++n2) {
      if (n2 == 0 || std::gcd(n1, std::abs(n2)) != 1) continue;
      const double target = -static_cast<double>(n2) * Omega * system.eps / n1;
      if (target < profile.min() || target > profile.max()) continue;
      const double t_star = profile.solve(target);
      if (t_star < t_span.first || t_star > t_span.second) continue;
      ResonanceEvent e;
      e.n1 = n1;
      e.n2 = n2;
      e.t_star = t_star;
      e.I_star = path.at(t_star);
      e.Omega = Omega;
      e.omega_prime_star = dot(system.omega_prime(e.I_star), path.velocity(t_star));
      e.source_harmonic = n1;
      events.push_back(e);
    }
  }
  std::sort(events.begin(), events.end(), [](const ResonanceEvent& a, const ResonanceEvent& b) {
    return a.t_star != b.t_star ? a.t_star < b.t_star : a.n1 < b.n1;
  });
  return events;
}

std::vector<double> actual_resonances(const SlowFastSystem& system, std::pair<double, double> t_span,
                                      const SlowPath& path) {
  const FrequencyProfile profile(system, path, t_span);
  if (profile.min() > 0.0 || profile.max() < 0.0) return {};
  return {profile.solve(0.0)};
}

double phase_from_point(const TrajectoryPoint& point, double t_star, const SlowFastSystem& system,
                        const SlowPath& path) {
  if (t_star == point.t) return point.phi_unwrapped;
  // Composite 5-point Gauss-Legendre; exact when omega is polynomial of degree <= 9 in t.
  static constexpr std::array<double, 5> kNodes = {-0.9061798459386640, -0.5384693101056831, 0.0,
                                                   0.5384693101056831, 0.9061798459386640};
  static constexpr std::array<double, 5> kWeights = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
                                                     0.4786286704993665, 0.2369268850561891};
  const double length = t_star - point.t;
  const auto panels = static_cast<int>(std::max(1.0, std::ceil(std::abs(length) / 1e-2)));
  const double h = length / panels;
  double integral = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double mid = point.t + (p + 0.5) * h;
    double panel = 0.0;
    for (std::size_t q = 0; q < kNodes.size(); ++q) {
      panel += kWeights[q] * system.omega(path.at(mid + 0.5 * h * kNodes[q]));
    }
    integral += 0.5 * h * panel;
  }
  return point.phi_unwrapped + integral / system.eps;
}

double phase_at_resonance(const Trajectory& traj, const ResonanceEvent& event, const SlowFastSystem& system,
                          const SlowPath& path) {
  const auto idx = traj.index_at_or_before(event.t_star);
  if (!idx || event.t_star > traj.points.back().t) {
    throw OutOfSpan("t* = " + std::to_string(event.t_star) + " lies outside the trajectory");
  }
  return phase_from_point(traj.points[*idx], event.t_star, system, path);
}

double predict_jump(const ResonanceEvent& event, const SlowFastSystem& system, std::size_t component) {
  if (!event.phi_star_unwrapped) throw InvalidArgument("event has no reconstructed phase");
  const HarmonicSeries* series = system.harmonics_for(component);
  const double a = series ? series->coefficient(event.n1) : 0.0;
  if (a == 0.0) {
    throw NoResonantHarmonics("component " + std::to_string(component) + " has no harmonic n1=" +
                              std::to_string(event.n1));
  }
  const double wp = event.omega_prime_star;
  if (wp == 0.0 || !std::isfinite(wp)) throw DegenerateCrossing("omega' vanishes at the crossing");

  // Reduce each large angle exactly before adding, so shifts of phi* by 2*pi
  // that are exact in floating point leave the result unchanged.
  const double n1 = event.n1;
  const double argument = wrap_phase(n1 * *event.phi_star_unwrapped) +
                          wrap_phase(event.n2 * event.Omega * event.t_star) + sign(wp) * kPi / 4.0;
  if (event.n1 == 1) return a * std::sqrt(kTwoPi * system.eps / std::abs(wp)) * std::cos(argument);
  // Stationary-phase extension to higher harmonics.
  return a * std::sqrt(kTwoPi * system.eps / (n1 * std::abs(wp))) * std::cos(argument);
}

double predict_superposed(std::span<const ResonanceEvent> events, const SlowFastSystem& system,
                          std::size_t component) {
  double sum = 0.0;
  for (const ResonanceEvent& e : events) sum += predict_jump(e, system, component);
  return sum;
}

std::vector<std::vector<ResonanceEvent>> group_coincident(std::span<const ResonanceEvent> events,
                                                          double tolerance) {
  std::vector<ResonanceEvent> sorted(events.begin(), events.end());
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const ResonanceEvent& a, const ResonanceEvent& b) { return a.t_star < b.t_star; });
  std::vector<std::vector<ResonanceEvent>> groups;
  for (const ResonanceEvent& e : sorted) {
    if (groups.empty() || std::abs(e.t_star - groups.back().front().t_star) > tolerance) groups.emplace_back();
    groups.back().push_back(e);
  }
  return groups;
}

JumpWindows default_windows(const ResonanceEvent& event, double eps) {
  const double wp = std::abs(event.omega_prime_star);
  if (wp == 0.0) throw DegenerateCrossing("omega' vanishes at the crossing");
  const double inner = 8.0 * std::sqrt(eps / wp);
  return {inner, 4.0 * inner};
}

JumpReport measure_jump(const Trajectory& traj, const ResonanceEvent& event, std::size_t component,
                        const JumpWindows& windows, std::span<const ResonanceEvent> known) {
  if (component >= kSlowDim) throw InvalidArgument("component index out of range");
  if (!(windows.inner > 0.0 && windows.outer > windows.inner)) {
    throw InvalidArgument("windows need 0 < inner < outer");
  }
  if (traj.points.empty()) throw OutOfSpan("empty trajectory");
  const double ts = event.t_star;
  const std::pair<double, double> pre{ts - windows.outer, ts - windows.inner};
  const std::pair<double, double> post{ts + windows.inner, ts + windows.outer};
  if (pre.first < traj.points.front().t || post.second > traj.points.back().t) {
    throw OutOfSpan("measurement windows around t* = " + std::to_string(ts) + " exceed the trajectory");
  }
  const auto inside = [](double t, const std::pair<double, double>& w) { return t >= w.first && t <= w.second; };
  for (const ResonanceEvent& other : known) {
    if (std::abs(other.t_star - ts) <= 1e-9) continue;
    if (inside(other.t_star, pre) || inside(other.t_star, post)) {
      throw OverlappingResonance(other.n1, other.n2, other.t_star);
    }
  }

  const AffineFit before = fit_affine(traj, component, pre.first, pre.second, ts);
  const AffineFit after = fit_affine(traj, component, post.first, post.second, ts);
  return JumpReport{event, kNaN, after.intercept - before.intercept, pre, post, kNaN};
}

void attach_prediction(JumpReport& report, double predicted) {
  report.predicted = predicted;
  report.residual = std::abs(predicted - report.measured);
}

double exp_envelope(double eps, double kappa, double omega_at_resonance, double sigma) {
  if (!(eps > 0.0 && kappa > 0.0 && omega_at_resonance > 0.0)) {
    throw InvalidArgument("eps, kappa and omega must be positive");
  }
  if (!(sigma >= 0.0)) throw InvalidArgument("sigma must be non-negative");
  return std::sqrt(eps) * std::exp(-sigma * kTwoPi * eps / (omega_at_resonance * kappa));
}

std::vector<JumpDetection> scan_jumps(const Trajectory& traj, std::size_t component, double half_width,
                                      double threshold) {
  const StepResponse response = step_response(traj, component, half_width);
  const auto& v = response.values;
  std::vector<JumpDetection> detections;
  std::size_t i = 0;
  while (i < v.size()) {
    if (std::abs(v[i]) <= threshold) {
      ++i;
      continue;
    }
    std::size_t best = i;
    for (; i < v.size() && std::abs(v[i]) > threshold; ++i) {
      if (std::abs(v[i]) > std::abs(v[best])) best = i;
    }
    detections.push_back({traj.points[response.first_index + best].t, v[best]});
  }
  return detections;
}

void write_jump_reports_csv(std::ostream& out, std::span<const JumpReport> reports) {
  out << "n1,n2,t_star,phi_star,predicted,measured,residual\n";
  for (const JumpReport& r : reports) {
    out << r.event.n1 << ',' << r.event.n2 << ',' << format_double(r.event.t_star) << ','
        << format_double(r.event.phi_star_unwrapped.value_or(kNaN)) << ',' << format_double(r.predicted) << ','
        << format_double(r.measured) << ',' << format_double(r.residual) << '\n';
  }
}

}  // namespace rescat
