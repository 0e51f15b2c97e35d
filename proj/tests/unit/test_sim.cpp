#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "sdpclik/errors.hpp"
#include "sdpclik/sim.hpp"
#include "sdpclik/stability.hpp"
#include "test_util.hpp"

using namespace sdpclik;
using sdpclik::testing::max_abs;

namespace {

Scenario one_dof(double lambda, double dt = 0.01) {
  Scenario sc;
  sc.name = "one_dof";
  sc.model = ManipulatorModel::planar({1.0}, 1000.0);
  sc.stack.tasks = {TaskSpec::planar_orientation(0.5)};
  sc.mode = ControlMode::FixedGains;
  sc.fixed_gains = Eigen::VectorXd::Constant(1, lambda);
  sc.dt = dt;
  sc.duration = 0.1;
  sc.q0 = Eigen::VectorXd::Zero(1);
  return sc;
}

}  // namespace

TEST(Builtins, Planar3Shape) {
  const auto sc = builtin_scenario("planar3");
  EXPECT_EQ(sc.stack.n(), 3);
  EXPECT_EQ(sc.model.dof(), 3);
  EXPECT_EQ(sc.steps(), 500);
  const auto p = task_value(sc.model, sc.stack.tasks[0], sc.q0);
  const auto o = task_value(sc.model, sc.stack.tasks[1], sc.q0);
  EXPECT_LT((p - Eigen::Vector2d(0.5, 0.0)).norm(), 1e-6);
  EXPECT_LT(std::abs(o[0] + 1.134), 1e-6);
}

TEST(Builtins, Ur5Shape) {
  const auto sc = builtin_scenario("ur5");
  EXPECT_EQ(sc.stack.n(), 4);
  EXPECT_EQ(sc.model.dof(), 6);
  EXPECT_EQ(sc.steps(), 400);
  EXPECT_EQ(builtin_scenarios().size(), 2u);
}

TEST(Builtins, UnknownNameIsRejected) {
  EXPECT_THROW(builtin_scenario("puma"), Error);
}

TEST(Step, ZeroErrorIsAFixedPoint) {
  auto sc = builtin_scenario("planar3");
  for (auto& t : sc.stack.tasks) t.target = task_value(sc.model, t, sc.q0);
  sc.mode = ControlMode::FixedGains;
  Simulator sim(sc);
  const auto [next, rec] = sim.step(0, sc.q0);
  EXPECT_EQ(max_abs(rec.qd), 0.0);
  EXPECT_EQ(next, sc.q0);
}

TEST(Step, ScalarGainPastTheBoundaryIsUnstable) {
  const double dt = 0.01, lambda = 2 / dt + 1;
  Simulator sim(one_dof(lambda, dt));
  const auto [next, rec] = sim.step(0, Eigen::VectorXd::Zero(1));
  EXPECT_GT(rec.margin, 0);
  EXPECT_NEAR(rec.margin, -2 * lambda * dt + lambda * lambda * dt * dt, 1e-12);
}

TEST(Step, Planar3FirstStep) {
  const auto sc = builtin_scenario("planar3");
  Simulator sim(sc);
  const auto [next, rec] = sim.step(0, sc.q0);
  ASSERT_TRUE(rec.solver_status.has_value());
  EXPECT_EQ(*rec.solver_status, SolveStatus::Optimal);
  EXPECT_LT(rec.margin, 0);
  EXPECT_LE(rec.qd.cwiseAbs().maxCoeff(), 3.0 * (1 + 1e-6));
  EXPECT_LT(max_abs(next - (sc.q0 + rec.qd * sc.dt)), 1e-15);
}

TEST(Run, ZeroDurationGivesTheInitialRecordOnly) {
  auto sc = builtin_scenario("planar3");
  sc.duration = 0;
  const auto trace = run(sc);
  ASSERT_EQ(trace.records.size(), 1u);
  EXPECT_EQ(trace.records[0].t, 0.0);
  EXPECT_EQ(trace.records[0].q, sc.q0);
}

TEST(Run, RecordCountAndSpacing) {
  auto sc = one_dof(5.0, 0.03);
  sc.duration = 1.0;
  const auto trace = run(sc);
  ASSERT_EQ(trace.records.size(), 34u);  // floor(1 / 0.03) + 1
  for (std::size_t k = 1; k < trace.records.size(); ++k) {
    EXPECT_NEAR(trace.records[k].t - trace.records[k - 1].t, 0.03, 1e-12);
  }
  EXPECT_EQ(trace.records[0].solver_status, std::nullopt);
  EXPECT_TRUE(std::isnan(trace.records[0].beta));
}

TEST(Run, FixedGainScalarMatchesClosedForm) {
  // e_{k+1} = (1 - lambda dt) e_k for a single revolute joint.
  const double lambda = 7.0, dt = 0.01;
  auto sc = one_dof(lambda, dt);
  const auto trace = run(sc);
  for (std::size_t k = 0; k < trace.records.size(); ++k) {
    EXPECT_NEAR(trace.records[k].err_norms[0], 0.5 * std::pow(1 - lambda * dt, static_cast<double>(k)), 1e-12);
  }
}

TEST(Run, Planar3SdpInvariants) {
  const auto trace = run(builtin_scenario("planar3"));
  ASSERT_EQ(trace.records.size(), 501u);
  for (std::size_t k = 0; k < trace.records.size(); ++k) {
    const auto& r = trace.records[k];
    ASSERT_EQ(r.solver_status, SolveStatus::Optimal) << "step " << k;
    EXPECT_LT(r.margin, 0) << "step " << k;
    EXPECT_LE(r.qd.cwiseAbs().maxCoeff(), 3.0 * (1 + 1e-6));
    EXPECT_GE(r.min_block_eig, -1e-7);
    if (k > 0) EXPECT_LE(r.lyapunov, trace.records[k - 1].lyapunov + 1e-9) << "step " << k;
  }
}

TEST(Run, BetaTildeSpeedsUpConvergence) {
  auto sc = builtin_scenario("planar3");
  sc.gains.beta_tilde = 2;
  const auto slow = run(sc);
  sc.gains.beta_tilde = 8;
  const auto fast = run(sc);
  const auto& a = slow.records[slow.index_at(1.0)].err_norms;
  const auto& b = fast.records[fast.index_at(1.0)].err_norms;
  for (int i = 0; i < 2; ++i) EXPECT_LE(b[i], a[i]);
}

TEST(Run, Ur5FixedGainsLeaveSecondaryError) {
  auto sc = builtin_scenario("ur5");
  const auto tuned = run(sc);
  sc.mode = ControlMode::FixedGains;
  const auto fixed = run(sc);
  EXPECT_GT(fixed.records.back().err_norms[1], tuned.records.back().err_norms[1]);
}

TEST(Run, SmallerStepsConvergeToOneTrajectory) {
  // Compare error-norm trajectories on the common 0.1 s grid.
  auto sc = builtin_scenario("planar3");
  auto trace_for = [&](double dt) {
    sc.dt = dt;
    return run(sc);
  };
  const auto t100 = trace_for(0.1), t050 = trace_for(0.05), t010 = trace_for(0.01), t005 = trace_for(0.005);
  auto gap = [](const SimTrace& a, const SimTrace& b) {
    double g = 0;
    for (int k = 0; k <= 50; ++k) {
      const double t = 0.1 * k;
      g = std::max(g, max_abs(a.records[a.index_at(t)].err_norms - b.records[b.index_at(t)].err_norms));
    }
    return g;
  };
  EXPECT_LT(gap(t010, t005), gap(t100, t050));
}

TEST(Scenario, Validation) {
  auto sc = one_dof(1.0);
  sc.dt = 0;
  EXPECT_THROW(sc.validate(), Error);
  sc = one_dof(1.0);
  sc.fixed_gains[0] = 0;
  EXPECT_THROW(sc.validate(), Error);
  sc = one_dof(1.0);
  sc.q0 = Eigen::VectorXd::Zero(2);
  EXPECT_THROW(sc.validate(), Error);
  sc = one_dof(1.0);
  sc.duration = -1;
  EXPECT_THROW(Simulator{sc}, Error);
}

TEST(Scenario, StepsTolerateRepresentationError) {
  auto sc = one_dof(1.0, 0.01);
  sc.duration = 5.0;
  EXPECT_EQ(sc.steps(), 500);
  sc.dt = 0.1;
  sc.duration = 0.3;
  EXPECT_EQ(sc.steps(), 3);
}

TEST(Run, RankLossAbortsWithStepIndex) {
  // Fully stretched two-link arm: the position Jacobian has rank one.
  Scenario sc;
  sc.name = "stretched";
  sc.model = ManipulatorModel::planar({0.5, 0.5}, 10.0);
  sc.stack.tasks = {TaskSpec::planar_position({0.5, 0.5})};
  sc.mode = ControlMode::FixedGains;
  sc.fixed_gains = Eigen::Vector2d(1, 1);
  sc.q0 = Eigen::Vector2d(0.3, 0.0);
  try {
    run(sc);
    FAIL() << "expected SimulationAbort";
  } catch (const SimulationAbort& e) {
    EXPECT_EQ(e.step(), 0);
    EXPECT_NE(std::string(e.what()).find("rank"), std::string::npos) << e.what();
  }

  // Reaching the singular pose part way through the run.
  sc.model = ManipulatorModel::planar({0.5, 0.5}, 1e3);
  sc.fixed_gains = Eigen::Vector2d(1, 1) / sc.dt;  // one-step deadbeat on the error
  sc.q0 = Eigen::Vector2d(0.0, 0.3);
  sc.stack.tasks = {TaskSpec::planar_position({1.0, 0.0})};
  try {
    run(sc);
    FAIL() << "expected SimulationAbort";
  } catch (const SimulationAbort& e) {
    EXPECT_GT(e.step(), 0);
  }
}

TEST(SolveInitialConfiguration, ReachesRequestedValues) {
  const auto m = ManipulatorModel::planar({0.5, 0.3, 0.2}, 3.0);
  TaskStack stack{{TaskSpec::planar_position({0, 0}), TaskSpec::planar_orientation(0)}};
  const Eigen::VectorXd q = solve_initial_configuration(
      m, stack, {Eigen::Vector2d(0.6, 0.2), Eigen::VectorXd::Constant(1, 0.4)}, Eigen::Vector3d(0.3, 0.5, -0.2));
  EXPECT_LT((task_value(m, stack.tasks[0], q) - Eigen::Vector2d(0.6, 0.2)).norm(), 1e-10);
  EXPECT_NEAR(task_value(m, stack.tasks[1], q)[0], 0.4, 1e-10);
  EXPECT_THROW(solve_initial_configuration(m, stack, {Eigen::Vector2d(5, 0), Eigen::VectorXd::Constant(1, 0)},
                                           Eigen::Vector3d(0.3, 0.5, -0.2)),
               Error);
}
