#include <doctest.h>

#include <cmath>
#include <numeric>
#include <sstream>

#include "rescat/core.hpp"
#include "rescat/error.hpp"
#include "rescat/experiments.hpp"
#include "rescat/integrate.hpp"
#include "rescat/resonance.hpp"

using namespace rescat;

namespace {

const TrajectoryPoint kStart = make_point(0.0, {-1.0, 1.0}, 0.0);

SlowPath standard_path(const SlowFastSystem& sys) { return constant_drift_path(sys, 0.0, {-1.0, 1.0}); }

// Distance between two angles on the circle.
double angle_gap(double a, double b) {
  const double d = std::remainder(a - b, kTwoPi);
  return std::abs(d);
}

ResonanceEvent find_event(const std::vector<ResonanceEvent>& events, int n1, int n2) {
  for (const ResonanceEvent& e : events) {
    if (e.n1 == n1 && e.n2 == n2) return e;
  }
  FAIL("event (" << n1 << ", " << n2 << ") not located");
  return {};
}

}  // namespace

TEST_CASE("locator examples") {
  const SlowFastSystem test1 = builtin_test1();
  SUBCASE("test1, kappa = eps/2, one crossing") {
    const auto events = locate_resonances(test1, test1.eps / 2, {0.5, 14.0}, standard_path(test1), {1, 40});
    REQUIRE(events.size() == 1);
    CHECK(events[0].n1 == 1);
    CHECK(events[0].n2 == -1);
    CHECK(events[0].t_star == doctest::Approx(4 * kPi + 1).epsilon(1e-12));
    CHECK(events[0].Omega == doctest::Approx(kTwoPi / (test1.eps / 2)));
    CHECK(events[0].omega_prime_star == 1.0);
    CHECK(events[0].I_star[0] == doctest::Approx(4 * kPi));
    CHECK(events[0].source_harmonic == 1);
    CHECK_FALSE(events[0].phi_star_unwrapped.has_value());
  }
  SUBCASE("test1, kappa = eps") {
    const auto events = locate_resonances(test1, test1.eps, {0.0, 14.0}, standard_path(test1), {1, 40});
    REQUIRE(events.size() == 2);
    CHECK(events[0].t_star == doctest::Approx(2 * kPi + 1).epsilon(1e-12));
    CHECK(events[1].t_star == doctest::Approx(4 * kPi + 1).epsilon(1e-12));
  }
  SUBCASE("test11, kappa = eps/2, n1 up to 4") {
    const SlowFastSystem sys = builtin_test11();
    const auto events = locate_resonances(sys, sys.eps / 2, {0.5, 14.0}, standard_path(sys), {4, 40});
    const double expected[] = {kPi + 1, 4 * kPi / 3 + 1, 2 * kPi + 1, 8 * kPi / 3 + 1, 3 * kPi + 1, 4 * kPi + 1};
    std::vector<double> times;
    for (const ResonanceEvent& e : events) {
      if (times.empty() || std::abs(times.back() - e.t_star) > 1e-9) times.push_back(e.t_star);
    }
    REQUIRE(times.size() == std::size(expected));
    for (std::size_t i = 0; i < times.size(); ++i) CHECK(times[i] == doctest::Approx(expected[i]).epsilon(1e-12));
    CHECK(find_event(events, 4, -1).t_star == doctest::Approx(kPi + 1));
    CHECK(find_event(events, 2, -1).t_star == doctest::Approx(2 * kPi + 1));
    CHECK(find_event(events, 3, -2).t_star == doctest::Approx(8 * kPi / 3 + 1));
  }
  SUBCASE("actual resonance of the continuous system") {
    const auto roots = actual_resonances(test1, {0.0, 14.0}, standard_path(test1));
    REQUIRE(roots.size() == 1);
    CHECK(roots[0] == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("locator invariants and completeness against a brute-force scan") {
  for (const SlowFastSystem& sys : {builtin_test1(), builtin_test11()}) {
    for (int divisor : {1, 2}) {
      CAPTURE(sys.id);
      CAPTURE(divisor);
      const double kappa = sys.eps / divisor;
      const double Omega = kTwoPi / kappa;
      const LocateOptions opts{4, 8};
      const auto events = locate_resonances(sys, kappa, {0.0, 14.0}, standard_path(sys), opts);

      for (std::size_t i = 0; i < events.size(); ++i) {
        const ResonanceEvent& e = events[i];
        CHECK(std::gcd(e.n1, std::abs(e.n2)) == 1);
        const double residual = e.n1 * sys.omega(e.I_star) / sys.eps + e.n2 * e.Omega;
        CHECK(std::abs(residual) <= e.n1 * std::abs(e.omega_prime_star) * kappa);
        if (i > 0) CHECK(events[i - 1].t_star <= e.t_star);
      }

      // Sign changes of n1*omega(I1(t))/eps + n2*Omega on a grid of step kappa/10.
      const double h = kappa / 10;
      const auto steps = static_cast<long>(14.0 / h);
      std::size_t found = 0;
      for (int n1 = 1; n1 <= opts.n1_max; ++n1) {
        if (sys.harmonics_for(1)->multiples_of(n1).empty()) continue;
        for (int n2 = -opts.n2_max; n2 <= opts.n2_max; ++n2) {
          if (n2 == 0 || std::gcd(n1, std::abs(n2)) != 1) continue;
          const auto value = [&](long k) { return n1 * ((k * h) - 1.0) / sys.eps + n2 * Omega; };
          for (long k = 0; k < steps; ++k) {
            if ((value(k) < 0) == (value(k + 1) < 0)) continue;
            const double t = (k + 0.5) * h;
            bool matched = false;
            for (const ResonanceEvent& e : events) {
              matched |= e.n1 == n1 && e.n2 == n2 && std::abs(e.t_star - t) <= 2 * kappa;
            }
            CHECK_MESSAGE(matched, "sign change of (" << n1 << ", " << n2 << ") near t = " << t);
            ++found;
          }
        }
      }
      CHECK(found == events.size());
    }
  }
}

TEST_CASE("locator refuses non-monotone frequencies and bad bounds") {
  SlowFastSystem sys = builtin_test1();
  sys.omega = [](const SlowVector& I) { return I[0] * I[0]; };
  sys.omega_prime = [](const SlowVector& I) { return SlowVector{2 * I[0], 0.0}; };
  CHECK_THROWS_AS(locate_resonances(sys, sys.eps, {0.0, 14.0}, standard_path(sys)), NonMonotoneFrequency);
  // Monotone on the right branch, found by bisection.
  const auto events = locate_resonances(sys, sys.eps, {1.5, 4.0}, standard_path(sys), {1, 4});
  REQUIRE(events.size() == 1);
  CHECK(events[0].t_star == doctest::Approx(1.0 + std::sqrt(kTwoPi)).epsilon(1e-11));
  CHECK(events[0].omega_prime_star == doctest::Approx(2 * std::sqrt(kTwoPi)).epsilon(1e-9));

  const SlowFastSystem test1 = builtin_test1();
  CHECK_THROWS_AS(locate_resonances(test1, 0.0, {0.0, 14.0}, standard_path(test1)), InvalidArgument);
  CHECK_THROWS_AS(locate_resonances(test1, test1.eps, {3.0, 2.0}, standard_path(test1)), InvalidArgument);
  CHECK_THROWS_AS(locate_resonances(test1, test1.eps, {0.0, 14.0}, standard_path(test1), {0, 4}), InvalidArgument);
}

TEST_CASE("phase reconstruction") {
  const SlowFastSystem sys = builtin_test1();
  const SlowPath path = standard_path(sys);

  SUBCASE("Euler runs match the tabulated phases modulo 2*pi") {
    // The tabulated values sit 4*pi above ours (see the notes in the README);
    // the jump only depends on the angle.
    const double tabulated[] = {78462.611, 315333.34308, 1973427.065167, 7895189.742154};
    const int divisors[] = {1, 2, 5, 10};
    for (int i = 0; i < 4; ++i) {
      const double kappa = sys.eps / divisors[i];
      const double t_star = 1.0 + 2.0 * kTwoPi * sys.eps / kappa;
      const auto events = locate_resonances(sys, kappa, {t_star - 0.5, t_star + 0.5}, path, {1, 2});
      const ResonanceEvent e = find_event(events, 1, -2);
      const Trajectory traj = integrate(sys, Stepper::euler, kStart, kappa, t_star + 0.01, 1);
      const double phi = phase_at_resonance(traj, e, sys, path);
      CAPTURE(divisors[i]);
      CHECK(angle_gap(phi, tabulated[i]) <= 0.05);
      CHECK(std::abs(phi - tabulated[i]) < 13.0);
    }
  }

  SUBCASE("t1 = t* returns the grid phase") {
    const TrajectoryPoint p = make_point(2.5, {1.5, 1.0}, 123.25);
    CHECK(phase_from_point(p, 2.5, sys, path) == 123.25);
  }

  SUBCASE("closed form for linear omega") {
    const TrajectoryPoint p = make_point(3.0, {2.0, 1.0}, 10.0);
    const double expected = 10.0 + ((4.2 - 1.0) * (4.2 - 1.0) - 4.0) / (2 * sys.eps);
    CHECK(phase_from_point(p, 4.2, sys, path) == doctest::Approx(expected).epsilon(1e-14));
  }

  SUBCASE("self-consistency on an RK4 trajectory") {
    const double kappa = sys.eps;
    const Trajectory traj = integrate(sys, Stepper::rk4, kStart, kappa, 13.7, 1);
    const auto events = locate_resonances(sys, kappa, {0.0, 13.7}, path, {1, 40});
    for (const ResonanceEvent& e : events) {
      const std::size_t i1 = *traj.index_at_or_before(e.t_star);
      const double near = phase_from_point(traj.points[i1], e.t_star, sys, path);
      const double far = phase_from_point(traj.points[i1 - 10], e.t_star, sys, path);
      CHECK(std::abs(near - far) <= 1e-6);
    }
  }

  SUBCASE("on Euler trajectories the two starting points differ by the map's own drift") {
    // The map advances phi by kappa*omega(t_n)/eps, short of the integral by kappa^2/(2 eps) per step,
    // so the earlier starting point comes out ahead.
    const double kappa = sys.eps;
    const Trajectory traj = integrate(sys, Stepper::euler, kStart, kappa, 13.7, 1);
    const auto events = locate_resonances(sys, kappa, {0.0, 13.7}, path, {1, 40});
    const std::size_t i1 = *traj.index_at_or_before(events.back().t_star);
    const double near = phase_from_point(traj.points[i1], events.back().t_star, sys, path);
    const double far = phase_from_point(traj.points[i1 - 10], events.back().t_star, sys, path);
    CHECK(std::abs((far - near) - 10 * kappa * kappa / (2 * sys.eps)) <= 1e-7);
  }

  SUBCASE("crossing outside the trajectory") {
    const Trajectory traj = integrate(sys, Stepper::euler, kStart, sys.eps, 5.0, 1);
    ResonanceEvent e;
    e.t_star = 4 * kPi + 1;
    CHECK_THROWS_AS(phase_at_resonance(traj, e, sys, path), OutOfSpan);
    e.t_star = -0.5;
    CHECK_THROWS_AS(phase_at_resonance(traj, e, sys, path), OutOfSpan);
  }
}

TEST_CASE("predict_jump") {
  const SlowFastSystem sys = builtin_test1();
  const SlowPath path = standard_path(sys);

  SUBCASE("tabulated phases give the theoretical column") {
    const double tabulated_phi[] = {78462.611, 315333.34308, 1973427.065167, 7895189.742154};
    const double theoretical[] = {0.0653, 0.0786, -0.0082, -0.0784};
    const int divisors[] = {1, 2, 5, 10};
    for (int i = 0; i < 4; ++i) {
      const double kappa = sys.eps / divisors[i];
      const double t_star = 1.0 + 2.0 * kTwoPi * sys.eps / kappa;
      auto events = locate_resonances(sys, kappa, {t_star - 0.5, t_star + 0.5}, path, {1, 2});
      ResonanceEvent e = find_event(events, 1, -2);
      e.phi_star_unwrapped = tabulated_phi[i];
      CHECK(std::abs(predict_jump(e, sys, 1) - theoretical[i]) <= 1e-4);
    }
  }

  SUBCASE("amplitude is sqrt(2*pi*eps/|w'|)") {
    ResonanceEvent e;
    e.n2 = -1;
    e.t_star = 0.0;
    e.Omega = 1.0;
    e.omega_prime_star = 1.0;
    e.phi_star_unwrapped = -kPi / 4;
    CHECK(predict_jump(e, sys, 1) == doctest::Approx(std::sqrt(kTwoPi * sys.eps)).epsilon(1e-14));
    e.omega_prime_star = -4.0;
    e.phi_star_unwrapped = kPi / 4;
    CHECK(predict_jump(e, sys, 1) == doctest::Approx(std::sqrt(kTwoPi * sys.eps / 4)).epsilon(1e-14));
  }

  SUBCASE("higher harmonic extension, testinf n1 = 5") {
    const SlowFastSystem inf = builtin_testinf();
    const double kappa = inf.eps / 20;
    auto events = locate_resonances(inf, kappa, {8 * kPi + 0.5, 8 * kPi + 1.5}, standard_path(inf), {11, 40});
    ResonanceEvent e = find_event(events, 5, -1);
    CHECK(e.t_star == doctest::Approx(8 * kPi + 1));
    double peak = 0.0;
    for (int k = 0; k < 720; ++k) {
      e.phi_star_unwrapped = kTwoPi * k / 720 / 5;
      peak = std::max(peak, std::abs(predict_jump(e, inf, 1)));
    }
    CHECK(peak == doctest::Approx(0.002215567313631895).epsilon(1e-4));
    CHECK(peak <= 0.002215567313631895 * (1 + 1e-12));
  }

  SUBCASE("errors") {
    ResonanceEvent e;
    e.Omega = 1.0;
    e.omega_prime_star = 1.0;
    CHECK_THROWS_AS(predict_jump(e, sys, 1), InvalidArgument);
    e.phi_star_unwrapped = 0.0;
    CHECK_THROWS_AS(predict_jump(e, sys, 0), NoResonantHarmonics);
    e.n1 = 2;
    CHECK_THROWS_AS(predict_jump(e, sys, 1), NoResonantHarmonics);
    e.n1 = 1;
    e.omega_prime_star = 0.0;
    CHECK_THROWS_AS(predict_jump(e, sys, 1), DegenerateCrossing);
  }

  SUBCASE("adding 2*pi to phi* leaves the prediction bit-identical") {
    ResonanceEvent e = locate_resonances(sys, sys.eps, {12.0, 14.0}, path, {1, 40}).front();
    for (int k = 0; k < 1740; k += 7) {
      const double phi = std::ldexp(static_cast<double>(k), -10);  // below 8 - 2*pi, so phi + 2*pi is exact
      e.phi_star_unwrapped = phi;
      const double a = predict_jump(e, sys, 1);
      e.phi_star_unwrapped = phi + kTwoPi;
      CHECK(predict_jump(e, sys, 1) == a);
    }
  }

  SUBCASE("coincident events are summed") {
    const SlowFastSystem s11 = builtin_test11();
    const auto events = locate_resonances(s11, s11.eps / 2, {0.0, 14.0}, standard_path(s11), {11, 40});
    const auto groups = group_coincident(events);
    std::size_t total = 0;
    for (const auto& g : groups) {
      total += g.size();
      for (const ResonanceEvent& e : g) CHECK(std::abs(e.t_star - g.front().t_star) <= 1e-9);
    }
    CHECK(total == events.size());
    std::vector<ResonanceEvent> pair = {find_event(events, 1, -1), find_event(events, 1, -1)};
    pair[0].phi_star_unwrapped = 0.3;
    pair[1].phi_star_unwrapped = 1.3;
    CHECK(predict_superposed(pair, s11, 1) ==
          doctest::Approx(predict_jump(pair[0], s11, 1) + predict_jump(pair[1], s11, 1)));
  }
}

TEST_CASE("measure_jump") {
  SUBCASE("synthetic step with drift and a fast sinusoid") {
    const double t_star = 5.0;
    const double height = 0.0375;
    const double omega = 2.0;
    const double eps = 0.001;
    const auto synthetic = [&](double h) {
      Trajectory traj{"synthetic", Stepper::euler, 1e-3, 1, {}};
      for (int n = 0; n <= 4000; ++n) {
        const double t = 3.0 + n * 1e-3;
        const double y = 0.2 + 0.01 * t + (t > t_star ? h : 0.0) + 0.01 / omega * std::sin(omega * t / eps);
        traj.points.push_back(make_point(t, {t - 1.0, y}, 0.0));
      }
      return traj;
    };
    ResonanceEvent e;
    e.t_star = t_star;
    const JumpWindows windows{0.25, 1.0};
    const double sinusoid_only = measure_jump(synthetic(0.0), e, 1, windows).measured;
    const JumpReport r = measure_jump(synthetic(height), e, 1, windows);
    CHECK(std::abs(r.measured - height) <= 2 * std::abs(sinusoid_only) + 1e-12);
    CHECK(std::abs(sinusoid_only) < 1e-4);
    CHECK(r.window_pre.first == doctest::Approx(4.0));
    CHECK(r.window_pre.second == doctest::Approx(4.75));
    CHECK(r.window_post.first == doctest::Approx(5.25));
    CHECK(r.window_post.second == doctest::Approx(6.0));
    CHECK(r.window_pre.second < t_star);
    CHECK(r.window_post.first > t_star);
    CHECK(std::isnan(r.predicted));

    JumpReport copy = r;
    attach_prediction(copy, 0.04);
    CHECK(copy.residual == doctest::Approx(std::abs(0.04 - r.measured)));
  }

  const SlowFastSystem sys = builtin_test1();
  const SlowPath path = standard_path(sys);
  const Trajectory traj = integrate(sys, Stepper::euler, kStart, sys.eps, 14.6, 1);
  const auto events = locate_resonances(sys, sys.eps, {0.0, 14.6}, path, {1, 40});
  ResonanceEvent last = events.back();

  SUBCASE("Euler kappa = eps crossing at 4*pi + 1") {
    last.phi_star_unwrapped = phase_at_resonance(traj, last, sys, path);
    const JumpReport r = measure_jump(traj, last, 1, default_windows(last, sys.eps), events);
    CHECK(std::abs(r.measured - 0.0649) <= 1e-3);
    CHECK(std::abs(r.measured - 0.0653) <= 1e-3);
  }

  SUBCASE("contaminated windows name the intruder") {
    ResonanceEvent intruder = events.front();
    intruder.t_star = last.t_star - 0.5;
    const std::vector<ResonanceEvent> known = {last, intruder};
    try {
      (void)measure_jump(traj, last, 1, default_windows(last, sys.eps), known);
      FAIL("expected an overlap");
    } catch (const OverlappingResonance& err) {
      CHECK(err.intruder_time() == intruder.t_star);
      CHECK(err.intruder_n1() == intruder.n1);
      CHECK(err.intruder_n2() == intruder.n2);
    }
  }

  SUBCASE("windows past the end of the run") {
    const Trajectory short_run = traj.slice(0.0, 14.0);
    CHECK_THROWS_AS(measure_jump(short_run, last, 1, default_windows(last, sys.eps)), OutOfSpan);
    CHECK_THROWS_AS(measure_jump(traj, last, 1, JumpWindows{0.5, 0.2}), InvalidArgument);
  }

  SUBCASE("default windows scale with sqrt(eps/|w'|)") {
    const JumpWindows w = default_windows(last, sys.eps);
    CHECK(w.inner == doctest::Approx(8 * std::sqrt(sys.eps)));
    CHECK(w.outer == doctest::Approx(32 * std::sqrt(sys.eps)));
  }
}

TEST_CASE("exp_envelope") {
  CHECK(exp_envelope(0.001, 0.001, kTwoPi, 0.0) == doctest::Approx(std::sqrt(0.001)).epsilon(1e-15));
  CHECK(exp_envelope(0.001, 0.001, kTwoPi, 1.0) == doctest::Approx(0.011633369384516796).epsilon(1e-14));
  for (double sigma : {0.1, 1.0, 3.0}) {
    CHECK(exp_envelope(0.001, 0.0005, kTwoPi, sigma) < exp_envelope(0.001, 0.001, kTwoPi, sigma));
  }
  CHECK_THROWS_AS(exp_envelope(0.001, 0.0, 1.0, 1.0), InvalidArgument);
  CHECK_THROWS_AS(exp_envelope(0.001, 0.001, 1.0, -1.0), InvalidArgument);
}

TEST_CASE("scan_jumps finds a synthetic step") {
  Trajectory traj{"synthetic", Stepper::euler, 1e-3, 1, {}};
  for (int n = 0; n <= 10000; ++n) {
    const double t = n * 1e-3;
    traj.points.push_back(make_point(t, {t - 1.0, t > 6.0 ? -0.02 : 0.0}, 0.0));
  }
  const auto found = scan_jumps(traj, 1, 0.4, 5e-3);
  REQUIRE(found.size() == 1);
  CHECK(found[0].t == doctest::Approx(6.0).epsilon(2e-3));
  CHECK(found[0].amplitude == doctest::Approx(-0.02));
  CHECK(scan_jumps(traj, 1, 0.4, 0.03).empty());
}

TEST_CASE("partially averaged oracle agrees with the stationary-phase formula") {
  const double tolerance = 10 * std::pow(kDefaultEps, 1.5);
  for (const Table1Row& row : paver_oracle()) {
    CAPTURE(row.divisor);
    CHECK(row.report.residual <= tolerance);
  }

  SUBCASE("higher harmonic extension, testinf n1 = 5 at 8*pi + 1") {
    const SlowFastSystem inf = builtin_testinf();
    const double kappa = inf.eps / 20;
    const SlowPath path = standard_path(inf);
    auto events = locate_resonances(inf, kappa, {8 * kPi + 0.5, 8 * kPi + 1.5}, path, {11, 40});
    ResonanceEvent e = find_event(events, 5, -1);
    const JumpWindows w = default_windows(e, inf.eps);
    const PaverSetup setup = make_paver_setup(inf, 5, -1, kappa);
    for (double phi0 : {0.0, 0.9, 2.1}) {
      const double t0 = e.t_star - w.outer - 0.05;
      const TrajectoryPoint start = make_point(t0, {t0 - 1.0, 1.0}, phi0);
      const double h = default_paver_step(inf.eps);
      const Trajectory traj = paver_integrate(inf, setup, start, h, {t0, e.t_star + w.outer + 10 * h}, 1);
      e.phi_star_unwrapped = phase_at_resonance(traj, e, inf, path);
      const double measured = measure_jump(traj, e, 1, w).measured;
      CHECK(std::abs(measured - predict_jump(e, inf, 1)) <= tolerance);
    }
  }
}

TEST_CASE("jump report CSV") {
  JumpReport r;
  r.event.n1 = 1;
  r.event.n2 = -2;
  r.event.t_star = 13.5;
  r.event.phi_star_unwrapped = 2.5;
  r.predicted = 0.5;
  r.measured = 0.25;
  r.residual = 0.25;
  std::ostringstream out;
  write_jump_reports_csv(out, std::vector<JumpReport>{r});
  CHECK(out.str() == "n1,n2,t_star,phi_star,predicted,measured,residual\n1,-2,13.5,2.5,0.5,0.25,0.25\n");
}
