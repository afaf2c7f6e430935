// rescat: batch runner for the resonance-scattering experiments.
//
//   rescat run [--config FILE] [--KEY VALUE ...]
//   rescat table1 [--out table1.csv] [--reports reports.csv]
//   rescat figures [--figure ID ...] [--outdir DIR]
//   rescat resonances --system test11 --kappa eps/2 --span_start 0.5 --t_end 14
//   rescat predict --n1 1 --n2 -2 --kappa eps --phi_star 78462.611

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rescat/error.hpp"
#include "rescat/experiments.hpp"

namespace {

using namespace rescat;

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  return out;
}

// Shared options of the analysis subcommands.
struct EventOptions {
  std::string system = "test1";
  double eps = kDefaultEps;
  std::string kappa = "eps";
  double t_start = 0.0;
  double t_end = 14.0;
  double I1 = -1.0;
  double I2 = 1.0;

  void attach(CLI::App& app) {
    app.add_option("--system", system, "test1 | test11 | testinf")->capture_default_str();
    app.add_option("--eps", eps, "small parameter")->capture_default_str();
    app.add_option("--kappa", kappa, "step: literal or eps, eps/N, eps*x")->capture_default_str();
    app.add_option("--t_start", t_start)->capture_default_str();
    app.add_option("--t_end", t_end)->capture_default_str();
    app.add_option("--I1", I1)->capture_default_str();
    app.add_option("--I2", I2)->capture_default_str();
  }
};

int cmd_run(const std::string& config_path, const std::map<std::string, std::string>& overrides) {
  ExperimentConfig config = config_path.empty() ? ExperimentConfig{} : load_config(config_path);
  for (const auto& [key, value] : overrides) config.set(key, value);
  if (config.out.empty()) config.out = "trajectory.csv";
  if (config.manifest.empty()) config.manifest = config.out + ".manifest";
  const RunResult result = run(config);
  std::cout << "wrote " << config.out << " (" << result.trajectory.points.size() << " rows, " << result.steps
            << " steps)\n";
  return 0;
}

int cmd_table1(const std::string& out_path, const std::string& reports_path) {
  const std::vector<Table1Row> rows = table1();
  std::ofstream out = open_output(out_path);
  write_table1_csv(out, rows);
  if (!reports_path.empty()) {
    std::vector<JumpReport> reports;
    for (const Table1Row& row : rows) reports.push_back(row.report);
    std::ofstream rep = open_output(reports_path);
    write_jump_reports_csv(rep, reports);
  }
  write_table1_csv(std::cout, rows);
  return 0;
}

int cmd_figures(std::vector<std::string> ids, const std::string& outdir) {
  if (ids.empty() || (ids.size() == 1 && ids.front() == "all")) ids = figure_ids();
  std::filesystem::create_directories(outdir);
  const std::vector<Trajectory> data = figure_batch(ids);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const std::string path = (std::filesystem::path(outdir) / (ids[i] + ".csv")).string();
    write_trajectory_csv(path, data[i]);
    std::cout << "wrote " << path << " (" << data[i].points.size() << " rows)\n";
  }
  return 0;
}

int cmd_resonances(const EventOptions& opt, std::optional<double> span_start, int n1_max, int n2_max) {
  const SlowFastSystem system = builtin(opt.system, opt.eps);
  const double kappa = KappaSpec::parse(opt.kappa).resolve(opt.eps);
  const SlowPath path = constant_drift_path(system, opt.t_start, {opt.I1, opt.I2});
  const double from = span_start.value_or(opt.t_start);
  const auto events = locate_resonances(system, kappa, {from, opt.t_end}, path, {n1_max, n2_max});
  std::cout << "n1,n2,t_star,I1_star,I2_star,omega_prime_star\n";
  for (const ResonanceEvent& e : events) {
    std::cout << e.n1 << ',' << e.n2 << ',' << format_double(e.t_star) << ',' << format_double(e.I_star[0]) << ','
              << format_double(e.I_star[1]) << ',' << format_double(e.omega_prime_star) << '\n';
  }
  return 0;
}

int cmd_predict(const EventOptions& opt, int n1, int n2, double phi_star, int component) {
  const SlowFastSystem system = builtin(opt.system, opt.eps);
  const double kappa = KappaSpec::parse(opt.kappa).resolve(opt.eps);
  const SlowPath path = constant_drift_path(system, opt.t_start, {opt.I1, opt.I2});
  const int n2_max = std::abs(n2);
  const auto events = locate_resonances(system, kappa, {opt.t_start, opt.t_end}, path, {n1, n2_max});
  for (ResonanceEvent e : events) {
    if (e.n1 != n1 || e.n2 != n2) continue;
    e.phi_star_unwrapped = phi_star;
    const double jump = predict_jump(e, system, static_cast<std::size_t>(component - 1));
    std::cout << "t_star=" << format_double(e.t_star) << '\n'
              << "omega_prime_star=" << format_double(e.omega_prime_star) << '\n'
              << "predicted=" << format_double(jump) << '\n';
    return 0;
  }
  throw Error("no crossing for (n1=" + std::to_string(n1) + ", n2=" + std::to_string(n2) + ") in the time span");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Scattering on resonances introduced by fixed-step integration"};
  app.require_subcommand(1);

  auto* run_cmd = app.add_subcommand("run", "integrate one configuration; writes trajectory CSV and manifest");
  std::string config_path;
  run_cmd->add_option("--config", config_path, "flat key=value configuration file");
  std::map<std::string, std::string> run_values;
  std::map<std::string, CLI::Option*> run_options;
  for (const std::string& key : config_keys()) {
    run_options[key] = run_cmd->add_option("--" + key, run_values[key], "overrides '" + key + "' from the config");
  }

  auto* table_cmd = app.add_subcommand("table1", "Euler jump table: predicted vs measured jumps");
  std::string table_out = "table1.csv";
  std::string reports_out;
  table_cmd->add_option("--out", table_out)->capture_default_str();
  table_cmd->add_option("--reports", reports_out, "also write per-event jump reports");

  auto* fig_cmd = app.add_subcommand("figures", "trajectory data for the figures");
  std::vector<std::string> fig_ids;
  std::string fig_dir = "figures";
  fig_cmd->add_option("--figure", fig_ids, "figure id (fig1a..fig1d, fig2a..fig2d, fig3, fig4a..fig4c, fig5) or all");
  fig_cmd->add_option("--outdir", fig_dir)->capture_default_str();

  auto* res_cmd = app.add_subcommand("resonances", "list crossings n1*omega/eps + n2*2*pi/kappa = 0");
  EventOptions res_opt;
  res_opt.attach(*res_cmd);
  int n1_max = 11;
  int n2_max = 40;
  std::optional<double> span_start;
  res_cmd->add_option("--span_start", span_start, "start of the searched span (default: t_start, where I = (I1, I2))");
  res_cmd->add_option("--n1_max", n1_max)->capture_default_str();
  res_cmd->add_option("--n2_max", n2_max)->capture_default_str();

  auto* pred_cmd = app.add_subcommand("predict", "stationary-phase jump for one crossing");
  EventOptions pred_opt;
  pred_opt.attach(*pred_cmd);
  int n1 = 1;
  int n2 = -1;
  double phi_star = 0.0;
  int component = 2;
  pred_cmd->add_option("--n1", n1)->capture_default_str();
  pred_cmd->add_option("--n2", n2)->capture_default_str();
  pred_cmd->add_option("--phi_star", phi_star, "unwrapped phase at the crossing")->required();
  pred_cmd->add_option("--component", component, "slow component, 1-based")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) {
      std::map<std::string, std::string> overrides;
      for (const auto& [key, option] : run_options) {
        if (option->count() > 0) overrides[key] = run_values[key];
      }
      return cmd_run(config_path, overrides);
    }
    if (table_cmd->parsed()) return cmd_table1(table_out, reports_out);
    if (fig_cmd->parsed()) return cmd_figures(fig_ids, fig_dir);
    if (res_cmd->parsed()) return cmd_resonances(res_opt, span_start, n1_max, n2_max);
    if (pred_cmd->parsed()) return cmd_predict(pred_opt, n1, n2, phi_star, component);
  } catch (const std::exception& e) {
    std::cerr << "rescat: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
