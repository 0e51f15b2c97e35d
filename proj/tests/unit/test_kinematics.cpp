#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "sdpclik/errors.hpp"
#include "sdpclik/kinematics.hpp"
#include "test_util.hpp"

using namespace sdpclik;
using sdpclik::testing::max_abs;
using sdpclik::testing::Rng;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

ManipulatorModel planar3() { return ManipulatorModel::planar({0.5, 0.3, 0.2}, 3.0); }

Eigen::VectorXd ur5_q0() {
  Eigen::VectorXd q(6);
  q << 135 * kDeg, 0, -90 * kDeg, 0, 90 * kDeg, 0;
  return q;
}

Eigen::MatrixXd fd_jacobian(const ManipulatorModel& m, const TaskSpec& t, const Eigen::VectorXd& q) {
  const double h = 1e-6;
  Eigen::MatrixXd J(t.dim(), q.size());
  for (Eigen::Index j = 0; j < q.size(); ++j) {
    Eigen::VectorXd qp = q, qm = q;
    qp[j] += h;
    qm[j] -= h;
    J.col(j) = (task_value(m, t, qp) - task_value(m, t, qm)) / (2 * h);
  }
  return J;
}

}  // namespace

TEST(TaskValue, StraightPlanarArmReachesSumOfLengths) {
  const auto v = task_value(planar3(), TaskSpec::planar_position({0, 0}), Eigen::Vector3d::Zero());
  EXPECT_NEAR(v[0], 1.0, 1e-15);
  EXPECT_NEAR(v[1], 0.0, 1e-15);
}

TEST(TaskValue, PlanarOrientationIsAngleSum) {
  const auto v = task_value(planar3(), TaskSpec::planar_orientation(0), Eigen::Vector3d(0.3, -0.1, 0.5));
  EXPECT_NEAR(v[0], 0.7, 1e-15);
}

TEST(TaskValue, PlanarPositionIsPeriodicInEveryJoint) {
  Rng rng(11);
  for (int k = 0; k < 20; ++k) {
    const Eigen::VectorXd q = rng.vector(3, -3, 3);
    const Eigen::VectorXd shifted = q.array() + 2 * std::numbers::pi;
    const auto t = TaskSpec::planar_position({0, 0});
    EXPECT_LT(max_abs(task_value(planar3(), t, q) - task_value(planar3(), t, shifted)), 1e-9);
  }
}

// Reference values from a symbolic homogeneous-transform chain (exact DH
// parameters, evaluated to 20 digits).
TEST(TaskValue, Ur5FramesMatchSymbolicChainAtHomeConfiguration) {
  const auto ur5 = ManipulatorModel::ur5(6.0);
  const auto y4 = task_value(ur5, TaskSpec::frame_coordinate(4, Axis::Y, 0), ur5_q0());
  EXPECT_NEAR(y4[0], -0.22333967683777103558, 1e-9);

  const auto p4 = task_value(ur5, TaskSpec::frame_position(4, {0, 0, 0}), ur5_q0());
  EXPECT_NEAR(p4[0], 0.37770108717079436016, 1e-9);
  EXPECT_NEAR(p4[2], 0.48140900000000000000, 1e-9);

  const auto p6 = task_value(ur5, TaskSpec::frame_position(6, {0, 0, 0}), ur5_q0());
  EXPECT_NEAR(p6[0], 0.44462874401010108334, 1e-9);
  EXPECT_NEAR(p6[1], -0.29026733367707775877, 1e-9);
  EXPECT_NEAR(p6[2], 0.56370900000000000000, 1e-9);
}

TEST(TaskValue, Ur5FramesMatchSymbolicChainAtGenericConfiguration) {
  const auto ur5 = ManipulatorModel::ur5(6.0);
  Eigen::VectorXd q(6);
  q << 0.3, -0.7, 1.1, -0.2, 0.5, 0.9;
  const auto p4 = task_value(ur5, TaskSpec::frame_position(4, {0, 0, 0}), q);
  EXPECT_NEAR(p4[0], -0.62343353656183065139, 1e-9);
  EXPECT_NEAR(p4[1], -0.30710352938878266176, 1e-9);
  EXPECT_NEAR(p4[2], 0.21020217230545054245, 1e-9);
  const auto p6 = task_value(ur5, TaskSpec::frame_position(6, {0, 0, 0}), q);
  EXPECT_NEAR(p6[0], -0.62106844600742510105, 1e-9);
  EXPECT_NEAR(p6[1], -0.38197360250787068629, 1e-9);
  EXPECT_NEAR(p6[2], 0.10960003019201503310, 1e-9);
}

TEST(TaskValue, TaskKindMustFitModel) {
  try {
    task_value(planar3(), TaskSpec::frame_position(2, {0, 0, 0}), Eigen::Vector3d::Zero());
    FAIL() << "expected TaskModelMismatch";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::TaskModelMismatch);
  }
  try {
    task_value(ManipulatorModel::ur5(6), TaskSpec::planar_orientation(0), Eigen::VectorXd::Zero(6));
    FAIL() << "expected TaskModelMismatch";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::TaskModelMismatch);
  }
}

TEST(TaskValue, FrameIndexOutOfRangeIsRejected) {
  EXPECT_THROW(task_value(ManipulatorModel::ur5(6), TaskSpec::frame_position(7, {0, 0, 0}),
                          Eigen::VectorXd::Zero(6)),
               Error);
}

TEST(TaskJacobian, PlanarOrientationRowIsOnes) {
  Rng rng(3);
  const auto J = task_jacobian(planar3(), TaskSpec::planar_orientation(0), rng.vector(3, -3, 3));
  EXPECT_EQ(J, Eigen::RowVector3d::Ones());
}

TEST(TaskJacobian, PlanarPositionAtZeroConfiguration) {
  const auto J = task_jacobian(planar3(), TaskSpec::planar_position({0, 0}), Eigen::Vector3d::Zero());
  Eigen::Matrix<double, 2, 3> expected;
  expected << 0, 0, 0, 1.0, 0.5, 0.2;
  EXPECT_LT(max_abs(J - expected), 1e-15);
}

TEST(TaskJacobian, MatchesCentralDifferencesPlanar) {
  Rng rng(5);
  const auto model = ManipulatorModel::planar({0.7, 0.4, 0.35, 0.2}, 2.0);
  for (int k = 0; k < 100; ++k) {
    const Eigen::VectorXd q = rng.vector(4, -3.1, 3.1);
    for (const auto& t : {TaskSpec::planar_position({0, 0}), TaskSpec::planar_orientation(0)}) {
      EXPECT_LT(max_abs(task_jacobian(model, t, q) - fd_jacobian(model, t, q)), 1e-6);
    }
  }
}

TEST(TaskJacobian, MatchesCentralDifferencesDh) {
  Rng rng(7);
  const auto ur5 = ManipulatorModel::ur5(6.0);
  for (int k = 0; k < 100; ++k) {
    const Eigen::VectorXd q = rng.vector(6, -3.1, 3.1);
    for (int frame = 1; frame <= 6; ++frame) {
      const auto pos = TaskSpec::frame_position(frame, {0, 0, 0});
      EXPECT_LT(max_abs(task_jacobian(ur5, pos, q) - fd_jacobian(ur5, pos, q)), 1e-6);
      for (Axis a : {Axis::X, Axis::Y, Axis::Z}) {
        const auto c = TaskSpec::frame_coordinate(frame, a, 0);
        EXPECT_LT(max_abs(task_jacobian(ur5, c, q) - fd_jacobian(ur5, c, q)), 1e-6);
      }
    }
  }
}

TEST(TaskJacobian, DhChainWithThetaOffsets) {
  Rng rng(8);
  std::vector<DhRow> rows{{0.1, 0.4, 0.2, 0.3}, {0.5, -1.0, 0.0, -0.7}, {0.3, 0.0, 0.1, 1.2}};
  const auto m = ManipulatorModel::dh_chain(rows, 1.0);
  for (int k = 0; k < 20; ++k) {
    const Eigen::VectorXd q = rng.vector(3, -3, 3);
    const auto t = TaskSpec::frame_position(3, {0, 0, 0});
    EXPECT_LT(max_abs(task_jacobian(m, t, q) - fd_jacobian(m, t, q)), 1e-6);
  }
}

TEST(Pinv, ScaledUnitRow) {
  Eigen::MatrixXd J(1, 3);
  J << 2, 0, 0;
  const auto P = pinv(J);
  ASSERT_EQ(P.rows(), 3);
  ASSERT_EQ(P.cols(), 1);
  EXPECT_LT(max_abs(P - Eigen::Vector3d(0.5, 0, 0)), 1e-15);
}

TEST(Pinv, Identity) {
  EXPECT_LT(max_abs(pinv(Eigen::Matrix3d::Identity()) - Eigen::Matrix3d::Identity()), 1e-15);
}

TEST(Pinv, PenroseConditionsOnRandomWideMatrices) {
  Rng rng(13);
  for (int k = 0; k < 100; ++k) {
    const int m = 1 + k % 4;
    const Eigen::MatrixXd J = rng.matrix(m, 6);
    const Eigen::MatrixXd P = pinv(J);
    EXPECT_LT(max_abs(J * P * J - J), 1e-10);
    EXPECT_LT(max_abs(P * J * P - P), 1e-10);
    const Eigen::MatrixXd JP = J * P, PJ = P * J;
    EXPECT_LT(max_abs(JP - JP.transpose()), 1e-10);
    EXPECT_LT(max_abs(PJ - PJ.transpose()), 1e-10);
    // Full row rank: right inverse.
    EXPECT_LT(max_abs(JP - Eigen::MatrixXd::Identity(m, m)), 1e-10);
    EXPECT_LT(max_abs(P - J.transpose() * (J * J.transpose()).inverse()), 1e-10);
  }
}

TEST(Pinv, RankDeficientRowsAreAnError) {
  Eigen::MatrixXd J(2, 3);
  J << 1, 2, 3, 2, 4, 6;
  try {
    pinv(J);
    FAIL() << "expected RankDeficient";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::RankDeficient);
  }
  EXPECT_THROW(pinv(Eigen::MatrixXd::Zero(1, 3)), Error);
}

TEST(Pinv, TallMatrixIsRejected) {
  try {
    pinv(Eigen::MatrixXd::Identity(3, 2));
    FAIL() << "expected DimensionMismatch";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DimensionMismatch);
  }
}

TEST(Pinv, ToleranceIsRelativeToLargestSingularValue) {
  Eigen::MatrixXd J(2, 2);
  J << 1, 0, 0, 1e-9;
  EXPECT_THROW(pinv(J), Error);
  EXPECT_NO_THROW(pinv(J, 1e-10));
  EXPECT_NO_THROW(pinv(J * 1e6, 1e-10));
}

TEST(WrapAngle, MapsIntoHalfOpenInterval) {
  EXPECT_NEAR(wrap_angle(0.3), 0.3, 1e-15);
  EXPECT_NEAR(wrap_angle(2 * std::numbers::pi + 0.3), 0.3, 1e-12);
  EXPECT_NEAR(wrap_angle(-std::numbers::pi), std::numbers::pi, 1e-12);
  EXPECT_NEAR(wrap_angle(std::numbers::pi), std::numbers::pi, 1e-12);
  EXPECT_NEAR(wrap_angle((std::numbers::pi - 0.1) - (-std::numbers::pi + 0.1)), -0.2, 1e-12);
}

TEST(ManipulatorModel, ValidationRejectsBadBounds) {
  auto m = planar3();
  m.qd_lower[1] = 0.5;
  EXPECT_THROW(m.validate(), Error);
  m = planar3();
  m.qd_upper.resize(2);
  EXPECT_THROW(m.validate(), Error);
  EXPECT_THROW(ManipulatorModel::planar({}, 1.0), Error);
  EXPECT_EQ(ManipulatorModel::ur5(6.0).dof(), 6);
}
