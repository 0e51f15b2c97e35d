#pragma once

#include <vector>

#include <Eigen/Dense>

#include "sdpclik/task.hpp"

namespace sdpclik {

enum class ModelKind { Planar, DhChain };

/// Standard (distal) Denavit-Hartenberg row for a revolute joint:
/// T = Rz(q + theta_offset) * Tz(d) * Tx(a) * Rx(alpha).
struct DhRow {
  double a = 0.0;
  double alpha = 0.0;
  double d = 0.0;
  double theta_offset = 0.0;
};

struct ManipulatorModel {
  ModelKind kind = ModelKind::Planar;
  std::vector<double> link_lengths;  // Planar only, meters
  std::vector<DhRow> dh_rows;        // DhChain only
  Eigen::VectorXd qd_upper;          // rad/s, strictly positive
  Eigen::VectorXd qd_lower;          // rad/s, strictly negative

  int dof() const;
  /// Throws InvalidParameter when geometry and bounds are inconsistent.
  void validate() const;

  static ManipulatorModel planar(std::vector<double> lengths, double qd_limit);
  static ManipulatorModel dh_chain(std::vector<DhRow> rows, double qd_limit);
  /// Universal Robots UR5 with the manufacturer-published DH table.
  static ManipulatorModel ur5(double qd_limit);
};

/// Homogeneous transform of a single DH row at joint angle q.
Eigen::Matrix4d dh_transform(const DhRow& row, double q);

/// Base-to-frame transforms T_0 .. T_dof, with T_0 = identity.
std::vector<Eigen::Matrix4d> dh_frames(const ManipulatorModel& model,
                                       const Eigen::Ref<const Eigen::VectorXd>& q);

/// sigma_i = f_i(q). Throws TaskModelMismatch for incompatible task kinds.
Eigen::VectorXd task_value(const ManipulatorModel& model, const TaskSpec& task,
                           const Eigen::Ref<const Eigen::VectorXd>& q);

/// Analytic Jacobian of task_value, n_i x dof.
Eigen::MatrixXd task_jacobian(const ManipulatorModel& model, const TaskSpec& task,
                              const Eigen::Ref<const Eigen::VectorXd>& q);

inline constexpr double kDefaultPinvTolerance = 1e-8;

/// Moore-Penrose pseudo-inverse of a wide (m <= cols) matrix.
///
/// Singular values at or below tol * sigma_max count as zero. The matrix must
/// keep full row rank under that rule; otherwise RankDeficientError is thrown
/// instead of returning a damped or truncated inverse.
Eigen::MatrixXd pinv(const Eigen::Ref<const Eigen::MatrixXd>& J,
                     double tol = kDefaultPinvTolerance);

/// Wraps an angle to (-pi, pi].
double wrap_angle(double angle);

}  // namespace sdpclik
