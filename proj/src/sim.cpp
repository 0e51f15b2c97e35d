#include "sdpclik/sim.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "sdpclik/errors.hpp"
#include "sdpclik/stability.hpp"

namespace sdpclik {

namespace {
const Eigen::Vector3d kPlanar3Seed(1.0, -2.0, 0.0);
}  // namespace

std::string_view to_string(ControlMode mode) {
  return mode == ControlMode::SdpTuned ? "sdp" : "fixed";
}

void Scenario::validate() const {
  model.validate();
  stack.validate();
  if (!(dt > 0.0) || !std::isfinite(dt)) throw Error(ErrorKind::InvalidParameter, "dt must be positive");
  if (!(duration >= 0.0) || !std::isfinite(duration)) {
    throw Error(ErrorKind::InvalidParameter, "duration must be nonnegative");
  }
  if (q0.size() != model.dof()) {
    throw Error(ErrorKind::DimensionMismatch, "q0 must have one entry per joint");
  }
  if (!q0.allFinite()) throw Error(ErrorKind::InvalidParameter, "q0 must be finite");
  if (mode == ControlMode::FixedGains) {
    if (fixed_gains.size() != stack.n()) {
      throw Error(ErrorKind::DimensionMismatch, "fixed gains must have one entry per task row");
    }
    if (!(fixed_gains.array() > 0.0).all() || !fixed_gains.allFinite()) {
      throw Error(ErrorKind::InvalidParameter, "fixed gains must be strictly positive");
    }
  } else {
    if (!(gains.delta > 0.0)) throw Error(ErrorKind::InvalidParameter, "delta must be positive");
    if (!(gains.beta_tilde > 0.0)) throw Error(ErrorKind::InvalidParameter, "beta_tilde must be positive");
    if (!(gains.eps_beta >= 0.0)) throw Error(ErrorKind::InvalidParameter, "eps_beta must be >= 0");
  }
  if (!(solver.feas_tol > 0.0) || !(solver.obj_tol > 0.0) || solver.max_iterations < 1) {
    throw Error(ErrorKind::InvalidParameter, "solver tolerances must be positive");
  }
}

long Scenario::steps() const {
  // Tolerate representation error such as 5 / 0.01 = 499.99999999999994.
  return static_cast<long>(std::floor(duration / dt + 1e-9));
}

std::size_t SimTrace::index_at(double t) const {
  if (records.empty()) throw Error(ErrorKind::InvalidParameter, "empty trace");
  const double k = std::round(t / dt);
  const auto idx = static_cast<std::size_t>(std::max(0.0, k));
  return std::min(idx, records.size() - 1);
}

Simulator::Simulator(Scenario scenario)
    : scenario_(std::move(scenario)), solver_(scenario_.solver) {
  scenario_.validate();
}

std::pair<Eigen::VectorXd, TraceRecord> Simulator::step(long k, const Eigen::VectorXd& q) {
  const auto& sc = scenario_;
  HierarchyState state;
  try {
    state = build_state(sc.stack, sc.model, q, sc.pinv_tol);
  } catch (const Error& e) {
    throw SimulationAbort(k, e.what());
  }

  TraceRecord rec;
  rec.t = static_cast<double>(k) * sc.dt;
  rec.q = q;
  rec.err_norms.resize(state.h());
  for (int i = 0; i < state.h(); ++i) rec.err_norms[i] = state.errors[i].norm();
  rec.lyapunov = lyapunov_value(state.stacked_error());

  if (sc.mode == ControlMode::FixedGains) {
    rec.lambda = sc.fixed_gains;
    rec.beta = rec.gamma = std::numeric_limits<double>::quiet_NaN();
  } else {
    const SdpProblem problem = build_gain_problem(state, sc.model, sc.dt, sc.gains);
    const GainSolution sol = solver_.solve(problem);
    rec.solver_status = sol.status;
    rec.solve_time = sol.solve_time;
    rec.min_block_eig = sol.min_block_eig;
    if (sol.ok()) {
      rec.lambda = sol.lambda;
      rec.beta = sol.beta;
      rec.gamma = sol.gamma;
      last_gains_ = sol.lambda;
    } else {
      if (!last_gains_) {
        throw SimulationAbort(k, "gain solver failed with no previous gains to reuse (" +
                                     std::string(to_string(sol.status)) + ": " + sol.message + ")");
      }
      rec.lambda = *last_gains_;
      rec.beta = rec.gamma = std::numeric_limits<double>::quiet_NaN();
    }
  }

  rec.qd = clik_velocity(state, rec.lambda);
  rec.margin = stability_margin(assemble_A(ErrorDynamics::from_state(state, sc.dt), rec.lambda), sc.dt);

  if (sc.mode == ControlMode::SdpTuned && !rec.fallback()) {
    for (int j = 0; j < sc.model.dof(); ++j) {
      const double v = rec.qd[j];
      const double bound = v >= 0.0 ? sc.model.qd_upper[j] : -sc.model.qd_lower[j];
      if (std::abs(v) > bound * (1.0 + 1e-6)) {
        std::ostringstream os;
        os << "joint " << j + 1 << " velocity " << v << " exceeds its bound " << bound;
        throw SimulationAbort(k, os.str());
      }
    }
  }

  Eigen::VectorXd next = q + rec.qd * sc.dt;
  return {std::move(next), std::move(rec)};
}

SimTrace Simulator::run() {
  const auto& sc = scenario_;
  last_gains_.reset();

  SimTrace trace;
  trace.scenario = sc.name;
  trace.dof = sc.model.dof();
  trace.h = sc.stack.h();
  trace.n = sc.stack.n();
  trace.dt = sc.dt;
  trace.beta_tilde = sc.gains.beta_tilde;
  trace.delta = sc.gains.delta;

  const long steps = sc.steps();
  trace.records.reserve(static_cast<std::size_t>(steps) + 1);
  Eigen::VectorXd q = sc.q0;
  for (long k = 0; k <= steps; ++k) {
    auto [next, rec] = step(k, q);
    trace.records.push_back(std::move(rec));
    q = std::move(next);
  }
  return trace;
}

Eigen::VectorXd solve_initial_configuration(const ManipulatorModel& model, const TaskStack& stack,
                                            const std::vector<Eigen::VectorXd>& values,
                                            const Eigen::VectorXd& seed, double tol) {
  stack.validate();
  if (static_cast<int>(values.size()) != stack.h()) {
    throw Error(ErrorKind::DimensionMismatch, "need one initial value per task");
  }
  if (stack.n() != model.dof()) {
    throw Error(ErrorKind::InvalidParameter,
                "initial task values determine q0 only when task rows equal joints");
  }
  if (seed.size() != model.dof()) throw Error(ErrorKind::DimensionMismatch, "IK seed size");

  const int n = stack.n();
  auto residual = [&](const Eigen::VectorXd& q) {
    Eigen::VectorXd r(n);
    for (int i = 0; i < stack.h(); ++i) {
      const auto& task = stack.tasks[i];
      if (values[i].size() != task.dim()) {
        throw Error(ErrorKind::DimensionMismatch, "initial value size does not match its task");
      }
      Eigen::VectorXd e = values[i] - task_value(model, task, q);
      if (task.angular()) {
        for (auto& v : e) v = wrap_angle(v);
      }
      r.segment(stack.offset(i), task.dim()) = e;
    }
    return r;
  };

  Eigen::VectorXd q = seed;
  Eigen::VectorXd r = residual(q);
  for (int it = 0; it < 100 && r.cwiseAbs().maxCoeff() > tol; ++it) {
    Eigen::MatrixXd J(n, model.dof());
    for (int i = 0; i < stack.h(); ++i) {
      J.middleRows(stack.offset(i), stack.tasks[i].dim()) = task_jacobian(model, stack.tasks[i], q);
    }
    const Eigen::VectorXd dq = J.colPivHouseholderQr().solve(r);
    // Backtrack while the step fails to reduce the residual.
    double alpha = 1.0;
    Eigen::VectorXd q_next = q + dq;
    Eigen::VectorXd r_next = residual(q_next);
    while (r_next.norm() >= r.norm() && alpha > 1e-6) {
      alpha *= 0.5;
      q_next = q + alpha * dq;
      r_next = residual(q_next);
    }
    q = std::move(q_next);
    r = std::move(r_next);
  }
  if (!(r.cwiseAbs().maxCoeff() <= tol)) {
    throw Error(ErrorKind::InvalidParameter, "initial configuration solve did not converge");
  }
  return q;
}

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

Scenario planar3() {
  Scenario sc;
  sc.name = "planar3";
  sc.model = ManipulatorModel::planar({0.5, 0.3, 0.2}, 3.0);
  sc.stack.tasks = {TaskSpec::planar_position({0.76, 0.18}), TaskSpec::planar_orientation(-1.22)};
  sc.mode = ControlMode::SdpTuned;
  sc.fixed_gains = Eigen::Vector3d(1.0, 1.0, 10.0);
  sc.gains = GainProblemParams{8.0, 2e-5, 1e-9};
  sc.dt = 0.01;
  sc.duration = 5.0;
  // Only the initial task values are known; the seed selects the elbow branch.
  sc.q0 = solve_initial_configuration(
      sc.model, sc.stack, {Eigen::Vector2d(0.5, 0.0), Eigen::VectorXd::Constant(1, -1.134)},
      kPlanar3Seed);
  return sc;
}

Scenario ur5() {
  Scenario sc;
  sc.name = "ur5";
  sc.model = ManipulatorModel::ur5(6.0);
  sc.stack.tasks = {TaskSpec::frame_position(6, {-0.5, -0.4, 0.6}),
                    TaskSpec::frame_coordinate(4, Axis::Y, -0.3)};
  sc.mode = ControlMode::SdpTuned;
  sc.fixed_gains = Eigen::Vector4d(2.0, 2.0, 2.0, 1.0);
  sc.gains = GainProblemParams{8.0, 5e-5, 1e-9};
  sc.dt = 0.01;
  sc.duration = 4.0;
  sc.q0.resize(6);
  sc.q0 << 135.0 * kDeg, 0.0, -90.0 * kDeg, 0.0, 90.0 * kDeg, 0.0;
  return sc;
}

}  // namespace

std::vector<Scenario> builtin_scenarios() { return {planar3(), ur5()}; }

Scenario builtin_scenario(std::string_view name) {
  if (name == "planar3") return planar3();
  if (name == "ur5") return ur5();
  throw Error(ErrorKind::InvalidParameter, "unknown builtin scenario '" + std::string(name) +
                                               "' (expected planar3 or ur5)");
}

}  // namespace sdpclik
