#include "rescat/kernels.hpp"

#include <cmath>
#include <exception>

#include "rescat/error.hpp"

namespace rescat {

namespace {

Trajectory run_one(const RunSpec& spec) {
  return integrate(spec.system, spec.stepper, spec.start, spec.kappa, spec.t_end, spec.stride);
}

// Uniformly spaced prefix of the trajectory: the always-recorded final point
// is dropped when its spacing is short.
std::size_t uniform_length(const Trajectory& traj, double& spacing) {
  const auto& pts = traj.points;
  if (pts.size() < 3) throw InvalidArgument("trajectory too short for a step response");
  spacing = pts[1].t - pts[0].t;
  std::size_t n = pts.size();
  const double last = pts[n - 1].t - pts[n - 2].t;
  if (std::abs(last - spacing) > 1e-9 * spacing) --n;
  return n;
}

std::size_t half_points(double half_width, double spacing) {
  const auto k = static_cast<std::size_t>(std::llround(half_width / spacing));
  if (k == 0) throw InvalidArgument("half width is below the trajectory spacing");
  return k;
}

}  // namespace

std::vector<Trajectory> run_batch(std::span<const RunSpec> specs) {
  const auto n = static_cast<std::ptrdiff_t>(specs.size());
  std::vector<Trajectory> out(specs.size());
  std::vector<std::exception_ptr> errors(specs.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      out[i] = run_one(specs[i]);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

std::vector<Trajectory> run_batch_reference(std::span<const RunSpec> specs) {
  std::vector<Trajectory> out;
  out.reserve(specs.size());
  for (const RunSpec& spec : specs) out.push_back(run_one(spec));
  return out;
}

StepResponse step_response(const Trajectory& traj, std::size_t component, double half_width) {
  if (component >= kSlowDim) throw InvalidArgument("component index out of range");
  double spacing = 0.0;
  const std::size_t n = uniform_length(traj, spacing);
  const std::size_t k = half_points(half_width, spacing);
  StepResponse r{k, k, {}};
  if (n < 2 * k + 1) return r;

  std::vector<double> prefix(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + traj.points[i].I[component];

  const auto count = static_cast<std::ptrdiff_t>(n - 2 * k);
  r.values.resize(static_cast<std::size_t>(count));
  const double inv_k = 1.0 / static_cast<double>(k);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t j = 0; j < count; ++j) {
    const std::size_t i = static_cast<std::size_t>(j) + k;
    const double after = prefix[i + k + 1] - prefix[i + 1];
    const double before = prefix[i] - prefix[i - k];
    r.values[static_cast<std::size_t>(j)] = (after - before) * inv_k;
  }
  return r;
}

StepResponse step_response_reference(const Trajectory& traj, std::size_t component, double half_width) {
  if (component >= kSlowDim) throw InvalidArgument("component index out of range");
  double spacing = 0.0;
  const std::size_t n = uniform_length(traj, spacing);
  const std::size_t k = half_points(half_width, spacing);
  StepResponse r{k, k, {}};
  for (std::size_t i = k; i + k < n; ++i) {
    double after = 0.0;
    double before = 0.0;
    for (std::size_t d = 1; d <= k; ++d) {
      after += traj.points[i + d].I[component];
      before += traj.points[i - d].I[component];
    }
    r.values.push_back((after - before) / static_cast<double>(k));
  }
  return r;
}

}  // namespace rescat
