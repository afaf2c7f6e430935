#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "rescat/core.hpp"
#include "rescat/error.hpp"
#include "rescat/integrate.hpp"
#include "rescat/kernels.hpp"

using namespace rescat;

namespace {

std::vector<RunSpec> mixed_specs() {
  const TrajectoryPoint start = make_point(0.0, {-1.0, 1.0}, 0.0);
  std::vector<RunSpec> specs;
  for (int divisor : {1, 2, 5}) {
    specs.push_back({builtin_test1(), Stepper::euler, start, 0.001 / divisor, 6.0, 3});
    specs.push_back({builtin_testinf(), Stepper::rk4, start, 0.001 / divisor, 4.0, 5});
  }
  specs.push_back({builtin_test11(), Stepper::averaged, start, 0.01, 14.0, 1});
  return specs;
}

bool same(const Trajectory& a, const Trajectory& b) {
  if (a.points.size() != b.points.size() || a.kappa != b.kappa || a.stride != b.stride) return false;
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    const TrajectoryPoint& p = a.points[i];
    const TrajectoryPoint& q = b.points[i];
    if (p.t != q.t || p.I != q.I || p.phi_unwrapped != q.phi_unwrapped || p.phi_wrapped != q.phi_wrapped) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("parallel batch is bit-identical to the serial reference") {
  const std::vector<RunSpec> specs = mixed_specs();
  const std::vector<Trajectory> parallel = run_batch(specs);
  const std::vector<Trajectory> serial = run_batch_reference(specs);
  REQUIRE(parallel.size() == specs.size());
  for (std::size_t i = 0; i < specs.size(); ++i) {
    CAPTURE(i);
    CHECK(same(parallel[i], serial[i]));
    CHECK(same(parallel[i], integrate(specs[i].system, specs[i].stepper, specs[i].start, specs[i].kappa,
                                      specs[i].t_end, specs[i].stride)));
  }
  CHECK(run_batch({}).empty());
}

TEST_CASE("batch failures surface in spec order") {
  std::vector<RunSpec> specs = mixed_specs();
  SlowFastSystem broken = builtin_test1();
  broken.f = [](const SlowVector&, double, double) {
    return SlowVector{1.0, std::numeric_limits<double>::quiet_NaN()};
  };
  specs[2].system = broken;
  specs[4].kappa = -1.0;
  CHECK_THROWS_AS(run_batch(specs), IntegrationDiverged);
  CHECK_THROWS_AS(run_batch_reference(specs), IntegrationDiverged);
}

TEST_CASE("step response matches the naive reference") {
  const TrajectoryPoint start = make_point(0.0, {-1.0, 1.0}, 0.0);
  for (Stepper stepper : {Stepper::euler, Stepper::rk4}) {
    const Trajectory traj = integrate(builtin_test11(), stepper, start, 0.0005, 14.0, 4);
    for (double half_width : {0.05, 0.4}) {
      const StepResponse fast = step_response(traj, 1, half_width);
      const StepResponse slow = step_response_reference(traj, 1, half_width);
      CHECK(fast.first_index == slow.first_index);
      CHECK(fast.half_points == slow.half_points);
      CHECK(fast.half_points == static_cast<std::size_t>(std::llround(half_width / 0.002)));
      REQUIRE(fast.values.size() == slow.values.size());
      CHECK(fast.values.size() == traj.points.size() - 2 * fast.half_points);
      double worst = 0.0;
      for (std::size_t i = 0; i < fast.values.size(); ++i) {
        worst = std::max(worst, std::abs(fast.values[i] - slow.values[i]));
      }
      CHECK(worst <= 1e-12);
    }
  }
}

TEST_CASE("step response of a ramp and of a step") {
  Trajectory traj{"synthetic", Stepper::euler, 0.01, 1, {}};
  for (int n = 0; n <= 100; ++n) {
    const double t = n * 0.01;
    traj.points.push_back(make_point(t, {0.0, 2.0 * t + (n > 50 ? 1.0 : 0.0)}, 0.0));
  }
  const StepResponse r = step_response(traj, 1, 0.05);
  REQUIRE(r.half_points == 5);
  REQUIRE(r.first_index == 5);
  // Ramp alone contributes (k + 1) * slope * h = 0.12.
  CHECK(r.values.front() == doctest::Approx(0.12).epsilon(1e-12));
  CHECK(r.values[50 - r.first_index] == doctest::Approx(1.12).epsilon(1e-12));
  CHECK_THROWS_AS(step_response(traj, 1, 0.0), InvalidArgument);
  CHECK(step_response(traj, 1, 10.0).values.empty());
  CHECK_THROWS_AS(step_response(traj, 2, 0.05), InvalidArgument);
}
