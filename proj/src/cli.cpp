#include "sdpclik/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "sdpclik/errors.hpp"
#include "sdpclik/scenario_config.hpp"
#include "sdpclik/trace_csv.hpp"

namespace sdpclik {

namespace {

namespace fs = std::filesystem;

/// Flags shared by run, sweep, validate and export-sdp.
struct SourceFlags {
  std::string scenario_path;
  std::string builtin;
  std::string mode;
  std::optional<double> beta_tilde;
  std::optional<double> dt;
  std::optional<double> duration;
  std::optional<double> qd_limit;
};

void add_source_flags(CLI::App* cmd, SourceFlags& f, bool overrides) {
  auto* s = cmd->add_option("--scenario", f.scenario_path, "Scenario config file (JSON)");
  auto* b = cmd->add_option("--builtin", f.builtin, "Builtin scenario: planar3 or ur5");
  s->excludes(b);
  if (!overrides) return;
  cmd->add_option("--mode", f.mode, "Gain mode: sdp or fixed");
  cmd->add_option("--beta-tilde", f.beta_tilde, "Target for the beta relaxation");
  cmd->add_option("--dt", f.dt, "Sampling time [s]");
  cmd->add_option("--duration", f.duration, "Simulated horizon [s]");
  cmd->add_option("--qd-limit", f.qd_limit, "Symmetric joint-velocity bound [rad/s]");
}

double env_number(const char* name) {
  const char* raw = std::getenv(name);
  std::size_t used = 0;
  double v = std::numeric_limits<double>::quiet_NaN();
  try {
    v = std::stod(raw, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || raw[used] != '\0' || !(v > 0.0)) {
    throw ConfigError(std::string("$") + name, std::string("expected a positive number, got '") + raw + "'");
  }
  return v;
}

void apply_env(SolverOptions& s) {
  if (std::getenv("SDPCLIK_FEAS_TOL")) s.feas_tol = env_number("SDPCLIK_FEAS_TOL");
  if (std::getenv("SDPCLIK_OBJ_TOL")) s.obj_tol = env_number("SDPCLIK_OBJ_TOL");
  if (std::getenv("SDPCLIK_MAX_ITERATIONS")) {
    const double it = env_number("SDPCLIK_MAX_ITERATIONS");
    if (it != std::floor(it) || it > 100000) {
      throw ConfigError("$SDPCLIK_MAX_ITERATIONS", "expected an integer within 1..100000");
    }
    s.max_iterations = static_cast<int>(it);
  }
}

ScenarioConfig load_source(const SourceFlags& f) {
  ScenarioConfig cfg;
  if (!f.scenario_path.empty()) {
    cfg = load_config(f.scenario_path);
  } else if (!f.builtin.empty()) {
    try {
      cfg = config_from_scenario(builtin_scenario(f.builtin));
    } catch (const Error& e) {
      throw ConfigError("--builtin", e.what());
    }
  } else {
    throw ConfigError("", "one of --scenario or --builtin is required");
  }
  apply_env(cfg.solver);

  if (!f.mode.empty()) {
    if (f.mode == "sdp") cfg.mode = ControlMode::SdpTuned;
    else if (f.mode == "fixed") cfg.mode = ControlMode::FixedGains;
    else throw ConfigError("--mode", "expected sdp or fixed, got '" + f.mode + "'");
  }
  if (f.beta_tilde) {
    if (!(*f.beta_tilde > 0.0)) throw ConfigError("--beta-tilde", "must be positive");
    cfg.gains.beta_tilde = *f.beta_tilde;
  }
  if (f.dt) {
    if (!(*f.dt > 0.0)) throw ConfigError("--dt", "must be positive");
    cfg.dt = *f.dt;
  }
  if (f.duration) {
    if (!(*f.duration >= 0.0)) throw ConfigError("--duration", "must be >= 0");
    cfg.duration = *f.duration;
  }
  if (f.qd_limit) {
    if (!(*f.qd_limit > 0.0)) throw ConfigError("--qd-limit", "must be positive");
    set_velocity_limit(cfg.robot, *f.qd_limit);
  }
  return cfg;
}

struct Summary {
  std::size_t records = 0;
  Eigen::VectorXd final_err;
  Eigen::VectorXd err_at_1s;
  double min_margin = std::numeric_limits<double>::infinity();
  double max_margin = -std::numeric_limits<double>::infinity();
  double mean_beta_deficit = std::numeric_limits<double>::quiet_NaN();
  double max_abs_qd = 0.0;
  long fallbacks = 0;
};

Summary summarize(const SimTrace& trace) {
  Summary s;
  s.records = trace.records.size();
  s.final_err = trace.records.back().err_norms;
  s.err_at_1s = trace.records[trace.index_at(1.0)].err_norms;
  double deficit = 0.0;
  long with_beta = 0;
  for (const auto& r : trace.records) {
    s.min_margin = std::min(s.min_margin, r.margin);
    s.max_margin = std::max(s.max_margin, r.margin);
    s.max_abs_qd = std::max(s.max_abs_qd, r.qd.cwiseAbs().maxCoeff());
    if (r.fallback()) ++s.fallbacks;
    if (!std::isnan(r.beta)) {
      deficit += trace.beta_tilde - r.beta;
      ++with_beta;
    }
  }
  if (with_beta > 0) s.mean_beta_deficit = deficit / static_cast<double>(with_beta);
  return s;
}

void print_summary(std::ostream& out, const Scenario& sc, const Summary& s, double wall) {
  out << std::setprecision(6);
  out << "scenario: " << sc.name << "\n"
      << "mode: " << to_string(sc.mode) << "\n"
      << "steps: " << sc.steps() << "\n"
      << "records: " << s.records << "\n";
  for (Eigen::Index i = 0; i < s.final_err.size(); ++i) {
    out << "final_err_norm_" << i + 1 << ": " << s.final_err[i] << "\n";
  }
  out << "min_margin: " << s.min_margin << "\n"
      << "max_margin: " << s.max_margin << "\n"
      << "max_abs_qd: " << s.max_abs_qd << "\n"
      << "fallback_steps: " << s.fallbacks << "\n"
      << "wall_time_s: " << wall << "\n";
}

int cmd_run(const SourceFlags& f, const std::string& out_path, const std::string& plot_path,
            bool no_timing, std::ostream& out) {
  const Scenario sc = to_scenario(load_source(f));
  const auto t0 = std::chrono::steady_clock::now();
  const SimTrace trace = run(sc);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  if (!out_path.empty()) write_trace_csv(fs::path(out_path), trace, CsvOptions{!no_timing});
  if (!plot_path.empty()) {
    std::ofstream py(plot_path);
    if (!py) throw ConfigError("--plot-script", "cannot write '" + plot_path + "'");
    py << plot_script(out_path.empty() ? "trace.csv" : out_path, trace.dof, trace.h, trace.n);
  }
  print_summary(out, sc, summarize(trace), wall);
  return kExitOk;
}

std::vector<std::string> split_values(const std::string& list) {
  std::vector<std::string> out;
  std::stringstream ss(list);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    tok.erase(0, tok.find_first_not_of(" \t"));
    tok.erase(tok.find_last_not_of(" \t") + 1);
    if (!tok.empty()) out.push_back(tok);
  }
  return out;
}

int cmd_sweep(SourceFlags f, const std::string& param, const std::string& values,
              const std::string& out_dir, bool no_timing, std::ostream& out, std::ostream& err) {
  const auto tokens = split_values(values);
  if (tokens.empty()) throw ConfigError("--values", "empty value list");

  // Resolve every scenario before running any, so config errors exit early.
  std::vector<Scenario> scenarios;
  for (const auto& tok : tokens) {
    double v = 0.0;
    std::size_t used = 0;
    try {
      v = std::stod(tok, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != tok.size()) throw ConfigError("--values", "not a number: '" + tok + "'");
    SourceFlags g = f;
    if (param == "beta_tilde") g.beta_tilde = v;
    else if (param == "dt") g.dt = v;
    else if (param == "qd_limit") g.qd_limit = v;
    else throw ConfigError("--param", "expected beta_tilde, dt or qd_limit, got '" + param + "'");
    scenarios.push_back(to_scenario(load_source(g)));
  }

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw ConfigError("--out-dir", "cannot create '" + out_dir + "': " + ec.message());

  // One simulator (and solver) per value.
  std::vector<std::future<SimTrace>> jobs;
  for (const auto& sc : scenarios) jobs.push_back(std::async(std::launch::async, [sc] { return run(sc); }));

  std::ofstream summary(fs::path(out_dir) / "summary.csv");
  if (!summary) throw ConfigError("--out-dir", "cannot write summary.csv in '" + out_dir + "'");
  summary << std::setprecision(std::numeric_limits<double>::max_digits10);
  const int h = scenarios.front().stack.h();
  summary << param;
  for (int i = 1; i <= h; ++i) summary << ",final_err_norm_" << i;
  for (int i = 1; i <= h; ++i) summary << ",err_norm_" << i << "_at_1s";
  summary << ",min_margin,max_margin,mean_beta_deficit,max_abs_qd,fallback_steps,trace\n";

  int code = kExitOk;
  for (std::size_t k = 0; k < jobs.size(); ++k) {
    const std::string file = scenarios[k].name + "_" + param + "_" + tokens[k] + ".csv";
    SimTrace trace;
    try {
      trace = jobs[k].get();
    } catch (const SimulationAbort& e) {
      err << "error: " << param << "=" << tokens[k] << ": simulation aborted at step " << e.step()
          << ": " << e.what() << "\n";
      code = kExitAbort;
      continue;
    }
    write_trace_csv(fs::path(out_dir) / file, trace, CsvOptions{!no_timing});
    const Summary s = summarize(trace);
    summary << tokens[k];
    for (double v : s.final_err) summary << ',' << v;
    for (double v : s.err_at_1s) summary << ',' << v;
    summary << ',' << s.min_margin << ',' << s.max_margin << ',' << s.mean_beta_deficit << ','
            << s.max_abs_qd << ',' << s.fallbacks << ',' << file << '\n';
    out << param << "=" << tokens[k] << ": final errors";
    for (double v : s.final_err) out << ' ' << v;
    out << ", max margin " << s.max_margin << " -> " << file << "\n";
  }
  return code;
}

int cmd_validate(const SourceFlags& f, std::ostream& out) {
  const ScenarioConfig cfg = load_source(f);
  to_scenario(cfg);
  out << dump_config(cfg);
  return kExitOk;
}

int cmd_export_sdp(const SourceFlags& f, long step, const std::string& out_path, std::ostream& out) {
  const Scenario sc = to_scenario(load_source(f));
  if (step < 0 || step > sc.steps()) {
    throw ConfigError("--step", "must be within 0.." + std::to_string(sc.steps()));
  }
  Simulator sim(sc);
  Eigen::VectorXd q = sc.q0;
  for (long k = 0; k < step; ++k) q = sim.step(k, q).first;

  HierarchyState state;
  try {
    state = build_state(sc.stack, sc.model, q, sc.pinv_tol);
  } catch (const Error& e) {
    throw SimulationAbort(step, e.what());
  }
  const SdpProblem problem = build_gain_problem(state, sc.model, sc.dt, sc.gains);
  std::ofstream os(out_path);
  if (!os) throw ConfigError("--out", "cannot write '" + out_path + "'");
  write_sdpa(os, problem);
  out << "wrote step " << step << " problem (" << problem.n_vars() << " variables, "
      << problem.blocks.size() << " blocks) to " << out_path << "\n";
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Hierarchical CLIK with per-step SDP gain tuning", "sdpclik"};
  app.require_subcommand(1);

  SourceFlags run_f, sweep_f, validate_f, export_f;
  std::string run_out, plot_path, param, values, out_dir, export_out;
  bool run_no_timing = false, sweep_no_timing = false;
  long export_step = 0;

  auto* run_cmd = app.add_subcommand("run", "Simulate one scenario and write its trace");
  add_source_flags(run_cmd, run_f, true);
  run_cmd->add_option("--out", run_out, "Trace CSV path");
  run_cmd->add_option("--plot-script", plot_path, "Also write a matplotlib script for the trace");
  run_cmd->add_flag("--no-timing", run_no_timing, "Write solve_time_s as 0 (byte-stable output)");

  auto* sweep_cmd = app.add_subcommand("sweep", "Run one scenario over a list of parameter values");
  add_source_flags(sweep_cmd, sweep_f, true);
  sweep_cmd->add_option("--param", param, "beta_tilde, dt or qd_limit")->required();
  sweep_cmd->add_option("--values", values, "Comma-separated values")->required();
  sweep_cmd->add_option("--out-dir", out_dir, "Directory for traces and summary.csv")->required();
  sweep_cmd->add_flag("--no-timing", sweep_no_timing, "Write solve_time_s as 0");

  auto* validate_cmd = app.add_subcommand("validate", "Check a config and print its normalized form");
  add_source_flags(validate_cmd, validate_f, false);

  auto* export_cmd = app.add_subcommand("export-sdp", "Write the gain SDP of one step in SDPA format");
  add_source_flags(export_cmd, export_f, true);
  export_cmd->add_option("--step", export_step, "Step index (default 0)");
  export_cmd->add_option("--out", export_out, "Output .dat-s path")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*run_cmd) return cmd_run(run_f, run_out, plot_path, run_no_timing, out);
    if (*sweep_cmd) return cmd_sweep(sweep_f, param, values, out_dir, sweep_no_timing, out, err);
    if (*validate_cmd) return cmd_validate(validate_f, out);
    if (*export_cmd) return cmd_export_sdp(export_f, export_step, export_out, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const SimulationAbort& e) {
    err << "simulation aborted at step " << e.step() << ": " << e.what() << "\n";
    return kExitAbort;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitInternal;
}

}  // namespace sdpclik
