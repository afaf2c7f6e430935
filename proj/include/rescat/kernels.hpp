#pragma once

// OpenMP kernels. Each has a serial reference implementation, kept for tests
// and the benchmark; both must agree (bit-identically for run_batch, to
// rounding for step_response).

#include <cstddef>
#include <span>
#include <vector>

#include "rescat/core.hpp"
#include "rescat/integrate.hpp"

namespace rescat {

/// One independent fixed-step run.
struct RunSpec {
  SlowFastSystem system;
  Stepper stepper = Stepper::euler;
  TrajectoryPoint start;
  double kappa = 0.0;
  double t_end = 0.0;
  std::size_t stride = 1;
};

/// Integrates every spec; runs are distributed over threads, each run stays sequential.
/// The first failure (in spec order) is rethrown after all runs finish.
std::vector<Trajectory> run_batch(std::span<const RunSpec> specs);
std::vector<Trajectory> run_batch_reference(std::span<const RunSpec> specs);

/// Local step response m_i = mean(y_{i+1..i+k}) - mean(y_{i-k..i-1}) of one
/// slow component, k = round(half_width / spacing), for i in [k, n-1-k].
struct StepResponse {
  std::size_t first_index = 0;
  std::size_t half_points = 0;
  std::vector<double> values;
};

StepResponse step_response(const Trajectory& traj, std::size_t component, double half_width);
StepResponse step_response_reference(const Trajectory& traj, std::size_t component, double half_width);

}  // namespace rescat
