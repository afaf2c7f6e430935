// Times the OpenMP kernels against their serial references.
//
//   bench_kernels [repeats]

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <vector>

#include "rescat/core.hpp"
#include "rescat/integrate.hpp"
#include "rescat/kernels.hpp"

namespace {

using namespace rescat;

double best_of(int repeats, const std::function<void()>& body) {
  double best = 1e300;
  for (int r = 0; r < repeats; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    body();
    best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  return best;
}

void line(const char* name, double serial, double parallel) {
  std::printf("%-28s serial %8.4f s   parallel %8.4f s   speedup %5.2fx\n", name, serial, parallel, serial / parallel);
}

}  // namespace

int main(int argc, char** argv) {
  const int repeats = argc > 1 ? std::max(1, std::atoi(argv[1])) : 3;
  std::printf("threads: %d, best of %d\n", omp_get_max_threads(), repeats);

  // Eight independent phase-shifted RK4 runs.
  std::vector<RunSpec> specs;
  for (int k = 0; k < 8; ++k) {
    specs.push_back({builtin_testinf(), Stepper::rk4, make_point(0.0, {-1.0, 1.0}, k * kPi / 4), 0.0001, 14.0, 10});
  }
  const double batch_serial = best_of(repeats, [&] { (void)run_batch_reference(specs); });
  const double batch_parallel = best_of(repeats, [&] { (void)run_batch(specs); });
  line("run_batch (8 x 140k RK4)", batch_serial, batch_parallel);

  const Trajectory traj = integrate(builtin_test1(), Stepper::euler, make_point(0.0, {-1.0, 1.0}, 0.0), 0.0001, 14.0, 1);
  // The naive reference is O(n*k); keep k moderate so it finishes.
  const double sr_serial = best_of(repeats, [&] { (void)step_response_reference(traj, 1, 0.02); });
  const double sr_parallel = best_of(repeats, [&] { (void)step_response(traj, 1, 0.02); });
  line("step_response (140k, k=200)", sr_serial, sr_parallel);
  return 0;
}
