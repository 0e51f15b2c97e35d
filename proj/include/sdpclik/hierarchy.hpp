#pragma once

#include <vector>

#include <Eigen/Dense>

#include "sdpclik/kinematics.hpp"
#include "sdpclik/task.hpp"

namespace sdpclik {

/// Ordered task list; index 0 has the highest priority.
struct TaskStack {
  std::vector<TaskSpec> tasks;

  int h() const { return static_cast<int>(tasks.size()); }
  /// Total error dimension, sum of task dims.
  int n() const;
  /// Row offset of task i inside the stacked error / gain vector.
  int offset(int i) const;
  std::vector<int> dims() const;
  /// Throws EmptyStack, or the task's own validation error.
  void validate() const;
};

/// Everything the controller needs at one configuration. Immutable snapshot.
struct HierarchyState {
  std::vector<Eigen::MatrixXd> jacobians;   // J_i, n_i x nu
  std::vector<Eigen::MatrixXd> pinvs;       // J_i^+, nu x n_i
  std::vector<Eigen::VectorXd> errors;      // sigma~_i
  std::vector<Eigen::MatrixXd> projectors;  // N_0 .. N_{h-1}, N_0 = I
  /// Gain-free error dynamics, n x n; block (i, rho) is -J_i N_{rho-1} J_rho^+.
  Eigen::MatrixXd gain_free;
  std::vector<int> dims;
  std::vector<int> offsets;

  int h() const { return static_cast<int>(dims.size()); }
  int n() const { return static_cast<int>(gain_free.rows()); }
  int dof() const { return jacobians.empty() ? 0 : static_cast<int>(jacobians.front().cols()); }

  Eigen::MatrixXd block(int i, int rho) const {
    return gain_free.block(offsets[i], offsets[rho], dims[i], dims[rho]);
  }
  /// Augmented error [sigma~_1; ...; sigma~_h].
  Eigen::VectorXd stacked_error() const;
};

/// sigma* - sigma, with angle-valued rows wrapped to (-pi, pi].
Eigen::VectorXd task_error(const TaskSpec& task, const ManipulatorModel& model,
                           const Eigen::Ref<const Eigen::VectorXd>& q);

/// Same as build_state for explicitly given Jacobians and task errors
/// (highest priority first). Useful when the Jacobians do not come from a
/// ManipulatorModel.
HierarchyState state_from_jacobians(std::vector<Eigen::MatrixXd> jacobians,
                                   std::vector<Eigen::VectorXd> errors,
                                   double pinv_tol = kDefaultPinvTolerance);

/// Evaluates Jacobians, errors, augmented-Jacobian null-space projectors and
/// the gain-free dynamics blocks. RankDeficientError::level() names the
/// priority level whose (augmented) Jacobian dropped rank.
HierarchyState build_state(const TaskStack& stack, const ManipulatorModel& model,
                           const Eigen::Ref<const Eigen::VectorXd>& q,
                           double pinv_tol = kDefaultPinvTolerance);

/// q_dot = sum_i N_{i-1} J_i^+ Lambda_i sigma~_i, Lambda_i = diag of the
/// matching slice of `lambda` (stacked gains, size n).
Eigen::VectorXd clik_velocity(const HierarchyState& state,
                              const Eigen::Ref<const Eigen::VectorXd>& lambda);

}  // namespace sdpclik
