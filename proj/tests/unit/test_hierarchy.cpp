#include <numbers>

#include <gtest/gtest.h>

#include "sdpclik/errors.hpp"
#include "sdpclik/hierarchy.hpp"
#include "sdpclik/sim.hpp"
#include "test_util.hpp"

using namespace sdpclik;
using sdpclik::testing::max_abs;
using sdpclik::testing::Rng;

namespace {

Eigen::MatrixXd row(std::initializer_list<double> v) {
  Eigen::MatrixXd r(1, static_cast<Eigen::Index>(v.size()));
  Eigen::Index k = 0;
  for (double x : v) r(0, k++) = x;
  return r;
}

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd r(static_cast<Eigen::Index>(v.size()));
  Eigen::Index k = 0;
  for (double x : v) r[k++] = x;
  return r;
}

struct Instance {
  std::vector<Eigen::MatrixXd> J;
  std::vector<Eigen::VectorXd> err;
};

Instance random_instance(Rng& rng, std::vector<int> dims, int nu) {
  Instance in;
  for (int d : dims) {
    in.J.push_back(rng.matrix(d, nu));
    in.err.push_back(rng.vector(d));
  }
  return in;
}

}  // namespace

TEST(TaskError, ZeroAtGoal) {
  const auto m = ManipulatorModel::planar({0.5, 0.3, 0.2}, 3.0);
  const auto sc = builtin_scenario("planar3");
  // Goal configuration found by moving the task to where the arm already is.
  const Eigen::VectorXd here = task_value(m, TaskSpec::planar_position({0, 0}), sc.q0);
  const auto e = task_error(TaskSpec::planar_position(here), m, sc.q0);
  EXPECT_LT(max_abs(e), 1e-15);
}

TEST(TaskError, Planar3InitialOrientationError) {
  const auto sc = builtin_scenario("planar3");
  const auto e = task_error(sc.stack.tasks[1], sc.model, sc.q0);
  EXPECT_NEAR(e[0], -1.22 - (-1.134), 1e-9);
  EXPECT_NEAR(e[0], -0.086, 1e-9);
}

TEST(TaskError, AngleErrorTakesShortestPath) {
  const auto m = ManipulatorModel::planar({1.0}, 1.0);
  const double pi = std::numbers::pi;
  const auto e = task_error(TaskSpec::planar_orientation(pi - 0.1), m, vec({-pi + 0.1}));
  EXPECT_NEAR(e[0], -0.2, 1e-12);
}

TEST(BuildState, SingleAxisAlignedRow) {
  const auto s = state_from_jacobians({row({1, 0, 0})}, {vec({0.5})});
  ASSERT_EQ(s.projectors.size(), 1u);
  EXPECT_EQ(s.projectors[0], Eigen::Matrix3d::Identity());
  // The projector past the only level, built the same way the stack does.
  const Eigen::MatrixXd N1 = Eigen::Matrix3d::Identity() - s.pinvs[0] * s.jacobians[0];
  EXPECT_LT(max_abs(N1 - Eigen::Vector3d(0, 1, 1).asDiagonal().toDenseMatrix()), 1e-15);
  EXPECT_NEAR(s.block(0, 0)(0, 0), -1.0, 1e-15);
}

TEST(BuildState, TwoOrthogonalRows) {
  const auto s = state_from_jacobians({row({1, 0, 0}), row({0, 1, 0})}, {vec({1}), vec({1})});
  EXPECT_NEAR(s.block(0, 0)(0, 0), -1.0, 1e-15);
  EXPECT_NEAR(s.block(1, 1)(0, 0), -1.0, 1e-15);
  EXPECT_NEAR(s.block(0, 1)(0, 0), 0.0, 1e-15);
  EXPECT_NEAR(s.block(1, 0)(0, 0), 0.0, 1e-15);
  EXPECT_LT(max_abs(s.projectors[1] - Eigen::Vector3d(0, 1, 1).asDiagonal().toDenseMatrix()), 1e-15);
}

TEST(BuildState, EmptyStackIsRejected) {
  try {
    state_from_jacobians({}, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::EmptyStack);
  }
  try {
    build_state(TaskStack{}, ManipulatorModel::planar({1, 1}, 1), Eigen::Vector2d::Zero());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::EmptyStack);
  }
}

TEST(BuildState, RankDeficiencyNamesTheLevel) {
  // Level 2 duplicates level 1: each Jacobian is fine alone, but the
  // secondary task has no room left.
  try {
    state_from_jacobians({row({1, 0, 0}), row({1, 0, 0}), row({0, 0, 1})}, {vec({1}), vec({1}), vec({1})});
    FAIL() << "expected RankDeficient";
  } catch (const RankDeficientError& e) {
    EXPECT_EQ(e.level(), 2);
  }
  try {
    state_from_jacobians({row({1, 0, 0}), row({0, 0, 0})}, {vec({1}), vec({1})});
    FAIL() << "expected RankDeficient";
  } catch (const RankDeficientError& e) {
    EXPECT_EQ(e.level(), 2);
  }
}

TEST(BuildState, SingularPlanarArm) {
  const auto m = ManipulatorModel::planar({0.5, 0.3}, 1.0);
  TaskStack stack{{TaskSpec::planar_position({0.2, 0.2})}};
  try {
    build_state(stack, m, Eigen::Vector2d(0.4, 0.0));  // stretched arm
    FAIL() << "expected RankDeficient";
  } catch (const RankDeficientError& e) {
    EXPECT_EQ(e.level(), 1);
  }
}

TEST(BuildState, MoreTaskRowsThanJointsIsRejected) {
  try {
    state_from_jacobians({Eigen::MatrixXd::Identity(2, 2), row({1, 1})}, {vec({1, 1}), vec({1})});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DimensionMismatch);
  }
}

TEST(BuildState, ProjectorPropertiesOnRandomStacks) {
  Rng rng(21);
  for (int trial = 0; trial < 50; ++trial) {
    const auto in = random_instance(rng, {2, 1, 2}, 7);
    const auto s = state_from_jacobians(in.J, in.err);
    Eigen::MatrixXd augmented(0, 7);
    for (int i = 1; i < s.h(); ++i) {
      const Eigen::MatrixXd& N = s.projectors[i];
      Eigen::MatrixXd next(augmented.rows() + in.J[i - 1].rows(), 7);
      next << augmented, in.J[i - 1];
      augmented = next;
      EXPECT_LT(max_abs(N * N - N), 1e-10);
      EXPECT_LT(max_abs(N - N.transpose()), 1e-10);
      EXPECT_LT(max_abs(augmented * N), 1e-10);
    }
  }
}

TEST(BuildState, Ur5BuiltinStackAtHome) {
  const auto sc = builtin_scenario("ur5");
  const auto s = build_state(sc.stack, sc.model, sc.q0);
  EXPECT_EQ(s.n(), 4);
  EXPECT_EQ(s.dof(), 6);
  EXPECT_EQ(s.dims, (std::vector<int>{3, 1}));
  EXPECT_EQ(s.offsets, (std::vector<int>{0, 3}));
}

TEST(ClikVelocity, IdentityJacobian) {
  const auto s = state_from_jacobians({Eigen::MatrixXd::Identity(3, 3)}, {vec({1, 0, -1})});
  const auto qd = clik_velocity(s, Eigen::Vector3d::Constant(2.0));
  EXPECT_LT(max_abs(qd - vec({2, 0, -2})), 1e-15);
}

TEST(ClikVelocity, ZeroErrorGivesZeroVelocity) {
  Rng rng(2);
  auto in = random_instance(rng, {2, 1}, 5);
  for (auto& e : in.err) e.setZero();
  const auto s = state_from_jacobians(in.J, in.err);
  EXPECT_EQ(max_abs(clik_velocity(s, rng.vector(3, 0, 10))), 0.0);
}

TEST(ClikVelocity, MatchesTermByTermEvaluation) {
  Rng rng(31);
  for (int trial = 0; trial < 50; ++trial) {
    const auto in = random_instance(rng, {2, 2}, 6);
    const auto s = state_from_jacobians(in.J, in.err);
    const Eigen::VectorXd lambda = rng.vector(4, 0, 5);

    // q_dot = J1^+ L1 e1 + (I - J1^+ J1) J2^+ L2 e2, from SVD-free normal equations.
    const Eigen::MatrixXd J1p = in.J[0].transpose() * (in.J[0] * in.J[0].transpose()).inverse();
    const Eigen::MatrixXd J2p = in.J[1].transpose() * (in.J[1] * in.J[1].transpose()).inverse();
    const Eigen::MatrixXd N1 = Eigen::MatrixXd::Identity(6, 6) - J1p * in.J[0];
    const Eigen::VectorXd expected = J1p * lambda.head(2).cwiseProduct(in.err[0]) +
                                     N1 * J2p * lambda.tail(2).cwiseProduct(in.err[1]);
    EXPECT_LT(max_abs(clik_velocity(s, lambda) - expected), 1e-12);
  }
}

TEST(ClikVelocity, PrimaryTaskIsUnaffectedByLowerLevels) {
  Rng rng(41);
  for (int trial = 0; trial < 50; ++trial) {
    const auto in = random_instance(rng, {2, 1, 2}, 7);
    const auto s = state_from_jacobians(in.J, in.err);
    const Eigen::VectorXd lambda = rng.vector(5, 0, 20);
    const Eigen::VectorXd qd = clik_velocity(s, lambda);
    EXPECT_LT(max_abs(in.J[0] * qd - lambda.head(2).cwiseProduct(in.err[0])), 1e-10);
  }
}

TEST(ClikVelocity, SuperpositionInErrorsAndGains) {
  Rng rng(43);
  const auto in = random_instance(rng, {1, 2}, 4);
  const Eigen::VectorXd lambda = rng.vector(3, 0, 5);

  // Linear in each task error.
  auto e_a = in.err, e_b = in.err, e_sum = in.err;
  e_b[1] = rng.vector(2);
  e_sum[1] = 2.0 * e_a[1] + 3.0 * e_b[1];
  auto e_zero = in.err;
  e_zero[1].setZero();
  const auto v = [&](const std::vector<Eigen::VectorXd>& e, const Eigen::VectorXd& l) {
    return clik_velocity(state_from_jacobians(in.J, e), l);
  };
  const Eigen::VectorXd base = v(e_zero, lambda);
  EXPECT_LT(max_abs((v(e_sum, lambda) - base) - 2.0 * (v(e_a, lambda) - base) - 3.0 * (v(e_b, lambda) - base)),
            1e-12);

  // Linear in each gain entry.
  for (int l = 0; l < 3; ++l) {
    Eigen::VectorXd l0 = lambda, l1 = lambda, l2 = lambda;
    l0[l] = 0;
    l1[l] = 1;
    l2[l] = 7.5;
    EXPECT_LT(max_abs((v(in.err, l2) - v(in.err, l0)) - 7.5 * (v(in.err, l1) - v(in.err, l0))), 1e-12);
  }
}

TEST(ClikVelocity, GainSizeMustMatch) {
  const auto s = state_from_jacobians({row({1, 0})}, {vec({1})});
  EXPECT_THROW(clik_velocity(s, Eigen::Vector2d::Ones()), Error);
}
