#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rescat/core.hpp"
#include "rescat/integrate.hpp"
#include "rescat/resonance.hpp"

namespace rescat {

/// A step given either as a literal or as a multiple of eps ("eps", "eps/2", "eps*0.5", "0.0005").
struct KappaSpec {
  bool relative = true;
  double value = 1.0;

  static KappaSpec parse(std::string_view text);
  double resolve(double eps) const;
  std::string to_string() const;
};

struct ExperimentConfig {
  std::string system = "test1";
  Stepper stepper = Stepper::euler;
  double eps = kDefaultEps;
  std::optional<KappaSpec> kappa;  // unset: eps, or eps/1000 for the reference stepper
  double t_start = 0.0;
  double t_end = 14.0;
  SlowVector I0{-1.0, 1.0};
  double phi0 = 0.0;
  std::size_t stride = 0;  // 0: ceil(steps / 200000)
  // Partially averaged runs only.
  int n1 = 1;
  int n2 = -1;
  double kappa_int = 0.0;  // 0: eps/50
  std::string out;       // trajectory CSV, empty for none
  std::string manifest;  // key=value manifest, empty for none

  /// Applies one key=value setting; throws InvalidArgument on unknown keys or bad values.
  void set(std::string_view key, std::string_view value);

  double resolved_kappa() const;
};

/// Keys accepted by ExperimentConfig::set, in manifest order.
const std::vector<std::string>& config_keys();

/// Reads flat key=value lines; '#' starts a comment, blank lines are skipped.
std::vector<std::pair<std::string, std::string>> parse_key_values(std::istream& in);

ExperimentConfig load_config(const std::string& path);

inline constexpr std::size_t kMaxRows = 200000;
std::size_t default_stride(std::size_t steps);

struct RunResult {
  Trajectory trajectory;
  std::size_t steps = 0;
  double wall_seconds = 0.0;
};

/// Integrates the configuration and writes the trajectory CSV and manifest when paths are set.
RunResult run(const ExperimentConfig& config);

void write_manifest(std::ostream& out, const ExperimentConfig& config, const RunResult& result);

/// One row of the Euler jump table for test1 at eps = 0.001.
struct Table1Row {
  int divisor = 1;  // kappa = eps / divisor
  double kappa = 0.0;
  JumpReport report;
};

/// The four Euler runs kappa = eps, eps/2, eps/5, eps/10. Each row analyses the
/// n1 = 1 crossing at t* = 1 + 4*pi*eps/kappa.
std::vector<Table1Row> table1(double eps = kDefaultEps);

/// The same four crossings integrated with the partially averaged system, which
/// keeps only the resonant harmonic. Euler is used up to just before each fit
/// window and hands its state over; phi* comes from the paver trajectory itself.
std::vector<Table1Row> paver_oracle(double eps = kDefaultEps);

/// kappa,t_star,phi_star,predicted,measured,residual
void write_table1_csv(std::ostream& out, const std::vector<Table1Row>& rows);

struct FigureSpec {
  std::string id;
  std::string system;
  Stepper stepper = Stepper::euler;
  int kappa_divisor = 1;  // kappa = eps / kappa_divisor
  double t_end = 14.0;
  std::pair<double, double> window{0.0, 0.0};  // emitted range; equal ends mean everything
  std::size_t stride = 0;                      // 0: default_stride
};

const std::vector<std::string>& figure_ids();
FigureSpec figure_spec(std::string_view id);

/// Trajectory data for one figure, already downsampled / windowed.
Trajectory figure_data(std::string_view id, double eps = kDefaultEps);

/// Several figures at once; the runs execute in parallel.
std::vector<Trajectory> figure_batch(const std::vector<std::string>& ids, double eps = kDefaultEps);

}  // namespace rescat
