#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "sdpclik/sim.hpp"

namespace sdpclik {

/// In-memory form of a scenario file.
///
/// Files are JSON objects with the sections
///   name        optional string
///   robot       {kind: "planar"|"dh", link_lengths | dh_rows, qd_upper, qd_lower}
///   tasks       [{kind, target, frame_index?, coordinate?}, ...] highest priority first
///   controller  {mode: "sdp"|"fixed", fixed_gains?, beta_tilde, delta, eps_beta?,
///                solver?: {feas_tol, obj_tol, max_iterations}}
///   sim         {dt, duration, q0 | initial_task_values (+ ik_seed)}
/// Unknown keys are rejected. Every error carries the key path, e.g.
/// "/tasks/1/kind".
struct ScenarioConfig {
  std::string name = "scenario";
  ManipulatorModel robot;
  std::vector<TaskSpec> tasks;
  ControlMode mode = ControlMode::SdpTuned;
  std::optional<Eigen::VectorXd> fixed_gains;
  GainProblemParams gains;
  SolverOptions solver;
  double dt = 0.01;
  double duration = 5.0;
  std::optional<Eigen::VectorXd> q0;
  std::optional<std::vector<Eigen::VectorXd>> initial_task_values;
  std::optional<Eigen::VectorXd> ik_seed;
};

/// Parses and schema-checks a JSON document. Throws ConfigError.
ScenarioConfig parse_config(std::string_view text);
/// Reads and parses a file. Throws ConfigError naming the path on I/O errors.
ScenarioConfig load_config(const std::filesystem::path& path);

/// Normalized document: every effective value spelled out, keys sorted,
/// two-space indentation, trailing newline. parse_config(dump_config(c))
/// dumps back to the identical string.
std::string dump_config(const ScenarioConfig& config);

/// Resolves q0 (solving the initial task values when given) and validates.
/// Throws ConfigError.
Scenario to_scenario(const ScenarioConfig& config);

/// Config equivalent of a simulation scenario (q0 stored explicitly).
ScenarioConfig config_from_scenario(const Scenario& scenario);

/// Sets every joint-velocity bound to +/- limit.
void set_velocity_limit(ManipulatorModel& model, double limit);

}  // namespace sdpclik
