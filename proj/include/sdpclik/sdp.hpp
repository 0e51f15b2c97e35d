#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "sdpclik/lmi.hpp"

namespace sdpclik {

struct SolverOptions {
  double feas_tol = 1e-7;   // accepted negative eigenvalue of any block at x
  double obj_tol = 1e-6;    // accepted duality gap / epigraph slack
  int max_iterations = 200;
};

enum class SolveStatus { Optimal, Infeasible, MaxIterations, NumericalFailure };

std::string_view to_string(SolveStatus status);

struct GainSolution {
  Eigen::VectorXd x;       // full decision vector [lambda, beta, gamma]
  Eigen::VectorXd lambda;
  double beta = 0.0;
  double gamma = 0.0;
  SolveStatus status = SolveStatus::NumericalFailure;
  double min_block_eig = 0.0;
  double objective = 0.0;
  double duality_gap = 0.0;
  int iterations = 0;
  double solve_time = 0.0;  // s
  std::string message;

  bool ok() const { return status == SolveStatus::Optimal; }
};

struct CertificateReport {
  std::vector<std::string> block_names;
  std::vector<double> block_min_eigs;
  double min_eig = 0.0;
  int worst_block = -1;
  double objective = 0.0;
  bool feasible = false;
};

/// Evaluates every block at x and reports its smallest eigenvalue.
CertificateReport check_certificate(const SdpProblem& problem,
                                    const Eigen::Ref<const Eigen::VectorXd>& x, double feas_tol);

/// Infeasible-start primal-dual interior-point method for
///   min c^T x  s.t.  F_j(x) >= 0 for every block j,
/// paired with the dual max -sum tr(F_j0 Y_j) s.t. sum_j tr(F_jl Y_j) = c_l,
/// Y_j >= 0. Search directions use the HKM scaling with a Mehrotra
/// predictor-corrector step. Blocks are dense; the problems this library
/// produces have at most a few tens of rows in total.
///
/// The iteration schedule is fixed, so identical inputs give identical
/// results.
class SdpSolver {
 public:
  explicit SdpSolver(SolverOptions opts = {}) : opts_(opts) {}

  GainSolution solve(const SdpProblem& problem) const;
  const SolverOptions& options() const { return opts_; }

 private:
  SolverOptions opts_;
};

inline GainSolution solve_sdp(const SdpProblem& problem, const SolverOptions& opts = {}) {
  return SdpSolver(opts).solve(problem);
}

}  // namespace sdpclik
