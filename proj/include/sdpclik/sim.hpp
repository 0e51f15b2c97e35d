#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "sdpclik/hierarchy.hpp"
#include "sdpclik/kinematics.hpp"
#include "sdpclik/lmi.hpp"
#include "sdpclik/sdp.hpp"

namespace sdpclik {

enum class ControlMode { SdpTuned, FixedGains };

std::string_view to_string(ControlMode mode);

struct Scenario {
  std::string name;
  ManipulatorModel model;
  TaskStack stack;
  ControlMode mode = ControlMode::SdpTuned;
  Eigen::VectorXd fixed_gains;  // FixedGains only, size n, strictly positive
  GainProblemParams gains;      // beta_tilde, delta, eps_beta
  SolverOptions solver;
  double dt = 0.01;             // s
  double duration = 5.0;        // s
  Eigen::VectorXd q0;           // rad
  double pinv_tol = kDefaultPinvTolerance;

  void validate() const;
  /// Number of integration steps, floor(duration / dt).
  long steps() const;
};

struct TraceRecord {
  double t = 0.0;
  Eigen::VectorXd q;
  Eigen::VectorXd qd;
  Eigen::VectorXd err_norms;  // one per task
  Eigen::VectorXd lambda;     // gains applied at this step
  double beta = 0.0;          // NaN in FixedGains mode
  double gamma = 0.0;         // NaN in FixedGains mode
  double margin = 0.0;        // stability_margin with the applied gains
  double lyapunov = 0.0;
  /// Solver outcome; empty in FixedGains mode. A non-optimal status in
  /// SdpTuned mode means the previous step's gains were reused.
  std::optional<SolveStatus> solver_status;
  double min_block_eig = 0.0;
  double solve_time = 0.0;

  bool fallback() const { return solver_status && *solver_status != SolveStatus::Optimal; }
};

struct SimTrace {
  std::string scenario;
  int dof = 0;
  int h = 0;
  int n = 0;
  double dt = 0.0;
  double beta_tilde = 0.0;
  double delta = 0.0;
  std::vector<TraceRecord> records;

  /// Index of the record closest to time t.
  std::size_t index_at(double t) const;
};

/// Discrete-time closed loop: build the hierarchy, pick gains, apply the CLIK
/// law and integrate with forward Euler. One solver per simulator.
class Simulator {
 public:
  explicit Simulator(Scenario scenario);

  /// Computes the control for configuration q at step k and returns the next
  /// configuration together with the record describing step k.
  std::pair<Eigen::VectorXd, TraceRecord> step(long k, const Eigen::VectorXd& q);

  SimTrace run();

  const Scenario& scenario() const { return scenario_; }

 private:
  Scenario scenario_;
  SdpSolver solver_;
  std::optional<Eigen::VectorXd> last_gains_;
};

inline SimTrace run(const Scenario& scenario) { return Simulator(scenario).run(); }

/// Solves f(q) = values for a square stack (n == dof) by Newton iteration
/// from `seed`. Throws InvalidParameter if it does not converge to `tol`.
Eigen::VectorXd solve_initial_configuration(const ManipulatorModel& model, const TaskStack& stack,
                                            const std::vector<Eigen::VectorXd>& values,
                                            const Eigen::VectorXd& seed, double tol = 1e-12);

/// The planar 3-link and UR5 scenarios.
std::vector<Scenario> builtin_scenarios();
/// Throws InvalidParameter for unknown names. Names: "planar3", "ur5".
Scenario builtin_scenario(std::string_view name);

}  // namespace sdpclik
