#include "rescat/experiments.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <system_error>

#include "rescat/error.hpp"
#include "rescat/kernels.hpp"

namespace rescat {

namespace {

std::string_view trim(std::string_view s) {
  const auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

double to_double(std::string_view text, std::string_view what) {
  text = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(v)) {
    throw InvalidArgument("bad value for " + std::string(what) + ": '" + std::string(text) + "'");
  }
  return v;
}

long to_integer(std::string_view text, std::string_view what) {
  text = trim(text);
  long v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw InvalidArgument("bad integer for " + std::string(what) + ": '" + std::string(text) + "'");
  }
  return v;
}

TrajectoryPoint standard_start() { return make_point(0.0, {-1.0, 1.0}, 0.0); }

constexpr std::size_t kI2 = 1;

}  // namespace

KappaSpec KappaSpec::parse(std::string_view text) {
  text = trim(text);
  KappaSpec spec;
  if (text.starts_with("eps")) {
    const std::string_view rest = trim(text.substr(3));
    spec.relative = true;
    if (rest.empty()) {
      spec.value = 1.0;
    } else if (rest.front() == '/') {
      spec.value = 1.0 / to_double(rest.substr(1), "kappa");
    } else if (rest.front() == '*') {
      spec.value = to_double(rest.substr(1), "kappa");
    } else {
      throw InvalidArgument("bad kappa '" + std::string(text) + "'");
    }
  } else {
    spec.relative = false;
    spec.value = to_double(text, "kappa");
  }
  if (!(spec.value > 0.0) || !std::isfinite(spec.value)) throw InvalidArgument("kappa must be positive");
  return spec;
}

double KappaSpec::resolve(double eps) const {
  if (!relative) return value;
  // eps/N is resolved by division so that eps/10 is the same double everywhere.
  const double divisor = 1.0 / value;
  if (divisor == std::round(divisor)) return eps / divisor;
  return eps * value;
}

std::string KappaSpec::to_string() const {
  if (!relative) return format_double(value);
  if (value == 1.0) return "eps";
  const double divisor = 1.0 / value;
  if (divisor == std::round(divisor)) return "eps/" + format_double(divisor);
  return "eps*" + format_double(value);
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {"system", "stepper", "eps",  "kappa", "t_start",
                                                "t_end",  "I1",      "I2",   "phi0",  "stride",
                                                "n1",     "n2",      "kappa_int", "out", "manifest"};
  return keys;
}

void ExperimentConfig::set(std::string_view key, std::string_view value) {
  value = trim(value);
  if (key == "system") {
    (void)builtin(value);
    system = std::string(value);
  } else if (key == "stepper") {
    stepper = parse_stepper(value);
  } else if (key == "eps") {
    eps = to_double(value, key);
    if (!(eps > 0.0)) throw InvalidArgument("eps must be positive");
  } else if (key == "kappa") {
    kappa = KappaSpec::parse(value);
  } else if (key == "t_start") {
    t_start = to_double(value, key);
  } else if (key == "t_end") {
    t_end = to_double(value, key);
  } else if (key == "I1") {
    I0[0] = to_double(value, key);
  } else if (key == "I2") {
    I0[1] = to_double(value, key);
  } else if (key == "phi0") {
    phi0 = to_double(value, key);
  } else if (key == "stride") {
    const long s = to_integer(value, key);
    if (s < 0) throw InvalidArgument("stride must be non-negative");
    stride = static_cast<std::size_t>(s);
  } else if (key == "n1") {
    n1 = static_cast<int>(to_integer(value, key));
  } else if (key == "n2") {
    n2 = static_cast<int>(to_integer(value, key));
  } else if (key == "kappa_int") {
    kappa_int = to_double(value, key);
    if (kappa_int < 0.0) throw InvalidArgument("kappa_int must be non-negative");
  } else if (key == "out") {
    out = std::string(value);
  } else if (key == "manifest") {
    manifest = std::string(value);
  } else {
    throw InvalidArgument("unknown configuration key '" + std::string(key) + "'");
  }
}

double ExperimentConfig::resolved_kappa() const {
  if (kappa) return kappa->resolve(eps);
  return stepper == Stepper::reference ? reference_step(eps) : eps;
}

std::vector<std::pair<std::string, std::string>> parse_key_values(std::istream& in) {
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = line;
    if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = trim(view);
    if (view.empty()) continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos) throw InvalidArgument("line " + std::to_string(line_no) + ": expected key=value");
    out.emplace_back(std::string(trim(view.substr(0, eq))), std::string(trim(view.substr(eq + 1))));
  }
  return out;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path + "'");
  ExperimentConfig config;
  for (const auto& [key, value] : parse_key_values(in)) config.set(key, value);
  return config;
}

std::size_t default_stride(std::size_t steps) { return std::max<std::size_t>(1, (steps + kMaxRows - 1) / kMaxRows); }

RunResult run(const ExperimentConfig& config) {
  const SlowFastSystem system = builtin(config.system, config.eps);
  const TrajectoryPoint start = make_point(config.t_start, config.I0, config.phi0);
  if (!std::isfinite(config.phi0)) throw InvalidArgument("initial phase must be finite");

  RunResult result;
  const auto t0 = std::chrono::steady_clock::now();
  if (config.stepper == Stepper::paver) {
    const double h = config.kappa_int > 0.0 ? config.kappa_int : default_paver_step(config.eps);
    result.steps = step_count(config.t_start, config.t_end, h);
    const std::size_t stride = config.stride ? config.stride : default_stride(result.steps);
    const PaverSetup setup = make_paver_setup(system, config.n1, config.n2, config.resolved_kappa());
    result.trajectory = paver_integrate(system, setup, start, h, {config.t_start, config.t_end}, stride);
  } else {
    const double kappa = config.resolved_kappa();
    if (!(config.t_end > config.t_start)) throw InvalidArgument("t_end must exceed t_start");
    result.steps = step_count(config.t_start, config.t_end, kappa);
    const std::size_t stride = config.stride ? config.stride : default_stride(result.steps);
    result.trajectory = integrate(system, config.stepper, start, kappa, config.t_end, stride);
  }
  result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  if (!config.out.empty()) write_trajectory_csv(config.out, result.trajectory);
  if (!config.manifest.empty()) {
    std::ofstream out(config.manifest);
    if (!out) throw IoError("cannot open '" + config.manifest + "' for writing");
    write_manifest(out, config, result);
  }
  return result;
}

void write_manifest(std::ostream& out, const ExperimentConfig& config, const RunResult& result) {
  out << "system=" << config.system << '\n'
      << "stepper=" << to_string(config.stepper) << '\n'
      << "eps=" << format_double(config.eps) << '\n'
      << "kappa=" << (config.kappa ? config.kappa->to_string() : std::string("default")) << '\n'
      << "kappa_resolved=" << format_double(config.resolved_kappa()) << '\n'
      << "t_start=" << format_double(config.t_start) << '\n'
      << "t_end=" << format_double(config.t_end) << '\n'
      << "I1=" << format_double(config.I0[0]) << '\n'
      << "I2=" << format_double(config.I0[1]) << '\n'
      << "phi0=" << format_double(config.phi0) << '\n'
      << "stride=" << result.trajectory.stride << '\n';
  if (config.stepper == Stepper::paver) {
    out << "n1=" << config.n1 << '\n'
        << "n2=" << config.n2 << '\n'
        << "kappa_int=" << format_double(result.trajectory.kappa) << '\n';
  }
  out << "out=" << config.out << '\n'
      << "steps=" << result.steps << '\n'
      << "points=" << result.trajectory.points.size() << '\n'
      << "wall_seconds=" << format_double(result.wall_seconds) << '\n';
  if (!out) throw IoError("failed writing manifest");
}

namespace {

constexpr int kTable1Divisors[] = {1, 2, 5, 10};

// One Table-1 configuration: the n1 = 1, n2 = -2 crossing at 1 + 4*pi*eps/kappa.
struct Table1Plan {
  int divisor;
  double kappa;
  ResonanceEvent event;
  JumpWindows windows;
  double t_end;
  std::vector<ResonanceEvent> known;
};

std::vector<Table1Plan> table1_plans(const SlowFastSystem& system, const SlowPath& path, double t0) {
  std::vector<Table1Plan> plans;
  for (const int divisor : kTable1Divisors) {
    const double kappa = system.eps / divisor;
    const double target = 1.0 + 2.0 * kTwoPi * system.eps / kappa;
    auto events = locate_resonances(system, kappa, {t0, target + 1.0}, path, {1, 40});
    const auto it = std::find_if(events.begin(), events.end(), [&](const ResonanceEvent& e) {
      return e.n1 == 1 && std::abs(e.t_star - target) < 1e-6;
    });
    if (it == events.end()) throw Error("table1 row kappa=eps/" + std::to_string(divisor) + ": crossing not found");
    const JumpWindows windows = default_windows(*it, system.eps);
    const double t_end = it->t_star + windows.outer + 10.0 * kappa;
    plans.push_back({divisor, kappa, *it, windows, t_end, locate_resonances(system, kappa, {t0, t_end}, path, {1, 40})});
  }
  return plans;
}

}  // namespace

std::vector<Table1Row> table1(double eps) {
  const SlowFastSystem system = builtin_test1(eps);
  const TrajectoryPoint start = standard_start();
  const SlowPath path = constant_drift_path(system, start.t, start.I);

  std::vector<Table1Plan> plans = table1_plans(system, path, start.t);
  std::vector<RunSpec> specs;
  for (const Table1Plan& plan : plans) specs.push_back({system, Stepper::euler, start, plan.kappa, plan.t_end, 1});
  const std::vector<Trajectory> runs = run_batch(specs);

  std::vector<Table1Row> rows;
  for (std::size_t i = 0; i < plans.size(); ++i) {
    Table1Plan& plan = plans[i];
    try {
      plan.event.phi_star_unwrapped = phase_at_resonance(runs[i], plan.event, system, path);
      JumpReport report = measure_jump(runs[i], plan.event, kI2, plan.windows, plan.known);
      attach_prediction(report, predict_jump(plan.event, system, kI2));
      rows.push_back({plan.divisor, plan.kappa, report});
    } catch (const Error& e) {
      throw Error("table1 row kappa=eps/" + std::to_string(plan.divisor) + ": " + e.what());
    }
  }
  return rows;
}

std::vector<Table1Row> paver_oracle(double eps) {
  const SlowFastSystem system = builtin_test1(eps);
  const TrajectoryPoint start = standard_start();
  const SlowPath path = constant_drift_path(system, start.t, start.I);
  std::vector<Table1Plan> plans = table1_plans(system, path, start.t);

  // Euler up to just before the fit windows; the hand-over state carries the
  // history of every earlier crossing.
  constexpr double kLeadIn = 0.05;
  std::vector<RunSpec> specs;
  for (const Table1Plan& plan : plans) {
    const double handover = plan.event.t_star - plan.windows.outer - kLeadIn;
    specs.push_back({system, Stepper::euler, start, plan.kappa, handover, 1});
  }
  const std::vector<Trajectory> lead = run_batch(specs);

  std::vector<Table1Row> rows(plans.size());
  std::vector<std::string> failures(plans.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::size_t i = 0; i < plans.size(); ++i) {
    Table1Plan plan = plans[i];
    try {
      const PaverSetup setup = make_paver_setup(system, plan.event.n1, plan.event.n2, plan.kappa);
      const TrajectoryPoint& from = lead[i].points.back();
      const double h = default_paver_step(eps);
      const Trajectory traj =
          paver_integrate(system, setup, from, h, {from.t, plan.event.t_star + plan.windows.outer + 10.0 * h}, 1);
      plan.event.phi_star_unwrapped = phase_at_resonance(traj, plan.event, system, path);
      JumpReport report = measure_jump(traj, plan.event, kI2, plan.windows);
      attach_prediction(report, predict_jump(plan.event, system, kI2));
      rows[i] = {plan.divisor, plan.kappa, report};
    } catch (const std::exception& e) {
      failures[i] = "paver oracle row kappa=eps/" + std::to_string(plan.divisor) + ": " + e.what();
    }
  }
  for (const std::string& f : failures) {
    if (!f.empty()) throw Error(f);
  }
  return rows;
}

void write_table1_csv(std::ostream& out, const std::vector<Table1Row>& rows) {
  out << "kappa,t_star,phi_star,predicted,measured,residual\n";
  for (const Table1Row& row : rows) {
    const JumpReport& r = row.report;
    out << format_double(row.kappa) << ',' << format_double(r.event.t_star) << ','
        << format_double(*r.event.phi_star_unwrapped) << ',' << format_double(r.predicted) << ','
        << format_double(r.measured) << ',' << format_double(r.residual) << '\n';
  }
}

const std::vector<std::string>& figure_ids() {
  static const std::vector<std::string> ids = {"fig1a", "fig1b", "fig1c", "fig1d", "fig2a", "fig2b", "fig2c",
                                               "fig2d", "fig3",  "fig4a", "fig4b", "fig4c", "fig5"};
  return ids;
}

FigureSpec figure_spec(std::string_view id) {
  static constexpr int kTest1Divisors[] = {1, 2, 5, 10};
  static constexpr int kTestinfDivisors[] = {2, 10, 20};
  // Long enough for fig5's zoom at 8*pi + 1 to appear in fig4.
  constexpr double kFig4End = 28.0;
  constexpr double kZoomCentre = 8.0 * kPi + 1.0;

  const std::string name(id);
  if (name.size() == 5 && (name.starts_with("fig1") || name.starts_with("fig2")) && name[4] >= 'a' && name[4] <= 'd') {
    const Stepper stepper = name[3] == '1' ? Stepper::euler : Stepper::rk4;
    return {name, "test1", stepper, kTest1Divisors[name[4] - 'a'], 14.0, {0.0, 0.0}, 0};
  }
  if (name == "fig3") return {name, "test11", Stepper::rk4, 2, 14.0, {0.0, 0.0}, 0};
  if (name.size() == 5 && name.starts_with("fig4") && name[4] >= 'a' && name[4] <= 'c') {
    return {name, "testinf", Stepper::rk4, kTestinfDivisors[name[4] - 'a'], kFig4End, {0.0, 0.0}, 0};
  }
  if (name == "fig5") {
    return {name, "testinf", Stepper::rk4, 20, kZoomCentre + 0.31, {kZoomCentre - 0.3, kZoomCentre + 0.3}, 1};
  }
  throw InvalidArgument("unknown figure '" + name + "'");
}

std::vector<Trajectory> figure_batch(const std::vector<std::string>& ids, double eps) {
  std::vector<FigureSpec> figures;
  std::vector<RunSpec> specs;
  for (const std::string& id : ids) {
    FigureSpec fig = figure_spec(id);
    const double kappa = eps / fig.kappa_divisor;
    const std::size_t stride = fig.stride ? fig.stride : default_stride(step_count(0.0, fig.t_end, kappa));
    specs.push_back({builtin(fig.system, eps), fig.stepper, standard_start(), kappa, fig.t_end, stride});
    figures.push_back(std::move(fig));
  }
  std::vector<Trajectory> runs = run_batch(specs);
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const auto& window = figures[i].window;
    if (window.first != window.second) runs[i] = runs[i].slice(window.first, window.second);
  }
  return runs;
}

Trajectory figure_data(std::string_view id, double eps) {
  return std::move(figure_batch({std::string(id)}, eps).front());
}

}  // namespace rescat
