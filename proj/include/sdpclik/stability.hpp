#pragma once

#include <vector>

#include <Eigen/Dense>

#include "sdpclik/hierarchy.hpp"

namespace sdpclik {

/// Gain-free closed-loop error dynamics at one control step.
struct ErrorDynamics {
  Eigen::MatrixXd gain_free;  // n x n block grid of A_{i,rho}
  std::vector<int> dims;      // task dimensions n_i
  double dt = 0.0;            // control period, s

  int n() const { return static_cast<int>(gain_free.rows()); }
  void validate() const;

  static ErrorDynamics from_state(const HierarchyState& state, double dt);
};

/// A(lambda): column l of the gain-free grid scaled by lambda_l.
Eigen::MatrixXd assemble_A(const ErrorDynamics& dyn, const Eigen::Ref<const Eigen::VectorXd>& lambda);

/// Largest eigenvalue of sym(A^T dt + A dt + A^T A dt^2). Negative means the
/// quadratic Lyapunov function strictly decreases under the first-order update.
double stability_margin(const Eigen::Ref<const Eigen::MatrixXd>& A, double dt);

/// V = 0.5 * |err|^2.
double lyapunov_value(const Eigen::Ref<const Eigen::VectorXd>& err);

}  // namespace sdpclik
