#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "sdpclik/hierarchy.hpp"
#include "sdpclik/kinematics.hpp"
#include "sdpclik/stability.hpp"

namespace sdpclik {

/// Decision vector layout x = [lambda (n), beta, gamma].
/// Coefficient index 0 is the constant term; 1..n are the gains, n+1 is beta
/// and n+2 is gamma.
struct VariableLayout {
  int n = 0;

  int size() const { return n + 2; }
  int lambda(int l) const { return 1 + l; }  // l is 0-based
  int beta() const { return n + 1; }
  int gamma() const { return n + 2; }
};

/// One affine matrix inequality F(x) = F_0 + sum_l F_l x_l >= 0.
struct LmiBlock {
  struct Term {
    int index;  // 0 = constant, l >= 1 multiplies x[l - 1]
    Eigen::MatrixXd coeff;
  };

  std::string name;
  int size = 0;
  std::vector<Term> terms;

  /// Adds `coeff` to the coefficient of `index`, creating it when absent.
  void add(int index, const Eigen::MatrixXd& coeff);
  /// Coefficient of `index`, zero when the block does not depend on it.
  Eigen::MatrixXd coeff(int index) const;
  Eigen::MatrixXd evaluate(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  /// Throws DimensionMismatch / InvalidParameter on malformed data.
  void validate(int n_vars) const;
};

struct SdpProblem {
  VariableLayout layout;
  Eigen::VectorXd c;
  std::vector<LmiBlock> blocks;

  int n_vars() const { return layout.size(); }
  double objective(const Eigen::Ref<const Eigen::VectorXd>& x) const { return c.dot(x); }
};

/// Stability block, 2n x 2n:
/// [[-(A^T + A) - beta I, A^T sqrt(dt)], [A sqrt(dt), I]] with A = A(lambda).
LmiBlock build_F1(const ErrorDynamics& dyn);

/// S such that clik_velocity(state, lambda) == S * lambda.
Eigen::MatrixXd build_S(const HierarchyState& state);

/// Joint-velocity blocks: upper encodes qd_upper - S lambda >= 0, lower
/// encodes S lambda - qd_lower >= 0 (both diagonal, nu x nu).
std::pair<LmiBlock, LmiBlock> build_F2(const Eigen::Ref<const Eigen::MatrixXd>& S,
                                       const Eigen::Ref<const Eigen::VectorXd>& qd_upper,
                                       const Eigen::Ref<const Eigen::VectorXd>& qd_lower);

/// Epigraph of (beta - beta_tilde)^2 + delta |lambda|^2 <= gamma:
/// [[gamma, lambda^T, beta - beta_tilde], [lambda, I / delta, 0], [beta - beta_tilde, 0, 1]].
LmiBlock build_F3(double beta_tilde, double delta, int n);

/// beta - eps_beta >= 0.
LmiBlock build_F4_beta_positive(double eps_beta, int n);

/// diag(lambda) >= 0; keeps every task gain nonnegative.
LmiBlock build_gain_nonnegativity(int n);

/// Packs blocks with the cost vector c = [0, ..., 0, 1] (minimize gamma).
SdpProblem assemble_problem(std::vector<LmiBlock> blocks, int n);

struct GainProblemParams {
  double beta_tilde = 8.0;
  double delta = 2e-5;
  double eps_beta = 1e-9;
};

/// Full per-step gain-scheduling problem for the given hierarchy snapshot.
SdpProblem build_gain_problem(const HierarchyState& state, const ManipulatorModel& model,
                              double dt, const GainProblemParams& params);

/// Writes the problem in SDPA sparse format (".dat-s").
///
/// SDPA solves min c^T x s.t. sum_l F_l x_l - F_0 >= 0, so the constant
/// matrices are written negated. Entries are listed upper-triangular, one
/// "matrix block row col value" line each, after the header lines
/// (m, number of blocks, block sizes, c).
void write_sdpa(std::ostream& os, const SdpProblem& problem);

}  // namespace sdpclik
