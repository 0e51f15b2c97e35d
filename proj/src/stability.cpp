#include "sdpclik/stability.hpp"

#include <algorithm>
#include <cassert>
#include <numeric>
#include <sstream>

#include "sdpclik/errors.hpp"

namespace sdpclik {

void ErrorDynamics::validate() const {
  if (!(dt > 0.0)) throw Error(ErrorKind::InvalidParameter, "dt must be positive");
  if (gain_free.rows() != gain_free.cols()) {
    throw Error(ErrorKind::DimensionMismatch, "gain-free dynamics must be square");
  }
  if (std::accumulate(dims.begin(), dims.end(), 0) != n()) {
    throw Error(ErrorKind::DimensionMismatch, "task dimensions do not cover the dynamics grid");
  }
}

ErrorDynamics ErrorDynamics::from_state(const HierarchyState& state, double dt) {
  ErrorDynamics dyn{state.gain_free, state.dims, dt};
  dyn.validate();
  return dyn;
}

Eigen::MatrixXd assemble_A(const ErrorDynamics& dyn, const Eigen::Ref<const Eigen::VectorXd>& lambda) {
  if (lambda.size() != dyn.n()) {
    std::ostringstream os;
    os << "gain vector has " << lambda.size() << " entries, dynamics has " << dyn.n();
    throw Error(ErrorKind::DimensionMismatch, os.str());
  }
  return dyn.gain_free * lambda.asDiagonal();
}

double stability_margin(const Eigen::Ref<const Eigen::MatrixXd>& A, double dt) {
  if (A.rows() != A.cols()) throw Error(ErrorKind::DimensionMismatch, "A must be square");
  const Eigen::MatrixXd X = (A.transpose() + A) * dt + A.transpose() * A * (dt * dt);
  const Eigen::MatrixXd sym = 0.5 * (X + X.transpose());
  assert((sym - X).cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, X.cwiseAbs().maxCoeff()));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().maxCoeff();
}

double lyapunov_value(const Eigen::Ref<const Eigen::VectorXd>& err) {
  return 0.5 * err.squaredNorm();
}

}  // namespace sdpclik
