#include "sdpclik/hierarchy.hpp"

#include <numeric>
#include <sstream>

#include "sdpclik/errors.hpp"

namespace sdpclik {

int TaskStack::n() const {
  int n = 0;
  for (const auto& t : tasks) n += t.dim();
  return n;
}

int TaskStack::offset(int i) const {
  int off = 0;
  for (int k = 0; k < i; ++k) off += tasks[k].dim();
  return off;
}

std::vector<int> TaskStack::dims() const {
  std::vector<int> d;
  d.reserve(tasks.size());
  for (const auto& t : tasks) d.push_back(t.dim());
  return d;
}

void TaskStack::validate() const {
  if (tasks.empty()) throw Error(ErrorKind::EmptyStack, "task stack is empty");
  for (const auto& t : tasks) t.validate();
}

Eigen::VectorXd HierarchyState::stacked_error() const {
  Eigen::VectorXd e(n());
  for (int i = 0; i < h(); ++i) e.segment(offsets[i], dims[i]) = errors[i];
  return e;
}

Eigen::VectorXd task_error(const TaskSpec& task, const ManipulatorModel& model,
                           const Eigen::Ref<const Eigen::VectorXd>& q) {
  Eigen::VectorXd e = task.target - task_value(model, task, q);
  if (task.angular()) {
    for (auto& v : e) v = wrap_angle(v);
  }
  return e;
}

namespace {

Eigen::MatrixXd pinv_at_level(const Eigen::MatrixXd& J, double tol, int level, const char* what) {
  try {
    return pinv(J, tol);
  } catch (const RankDeficientError& e) {
    std::ostringstream os;
    os << what << " at priority level " << level << " is rank deficient: " << e.what();
    throw RankDeficientError(level, os.str());
  }
}

}  // namespace

HierarchyState state_from_jacobians(std::vector<Eigen::MatrixXd> jacobians,
                                   std::vector<Eigen::VectorXd> errors, double pinv_tol) {
  const int h = static_cast<int>(jacobians.size());
  if (h == 0) throw Error(ErrorKind::EmptyStack, "task stack is empty");
  if (static_cast<int>(errors.size()) != h) {
    throw Error(ErrorKind::DimensionMismatch, "need one error vector per Jacobian");
  }
  const auto nu = jacobians.front().cols();

  HierarchyState s;
  for (int i = 0; i < h; ++i) {
    if (jacobians[i].cols() != nu || errors[i].size() != jacobians[i].rows()) {
      std::ostringstream os;
      os << "task " << i + 1 << ": Jacobian is " << jacobians[i].rows() << "x" << jacobians[i].cols()
         << " and its error has " << errors[i].size() << " rows";
      throw Error(ErrorKind::DimensionMismatch, os.str());
    }
    s.dims.push_back(static_cast<int>(jacobians[i].rows()));
  }
  s.offsets.resize(h);
  std::exclusive_scan(s.dims.begin(), s.dims.end(), s.offsets.begin(), 0);
  const int n = std::accumulate(s.dims.begin(), s.dims.end(), 0);
  if (n > nu) {
    std::ostringstream os;
    os << "task stack needs " << n << " rows but the robot has only " << nu << " joints";
    throw Error(ErrorKind::DimensionMismatch, os.str());
  }

  s.jacobians = std::move(jacobians);
  s.errors = std::move(errors);
  for (int i = 0; i < h; ++i) {
    s.pinvs.push_back(pinv_at_level(s.jacobians[i], pinv_tol, i + 1, "task Jacobian"));
  }

  // N_i = I - J_{1..i}^+ J_{1..i} from the augmented Jacobian itself.
  s.projectors.push_back(Eigen::MatrixXd::Identity(nu, nu));
  Eigen::MatrixXd augmented(0, nu);
  for (int i = 0; i + 1 < h; ++i) {
    Eigen::MatrixXd next(augmented.rows() + s.dims[i], nu);
    next << augmented, s.jacobians[i];
    augmented = std::move(next);
    const Eigen::MatrixXd aug_pinv =
        pinv_at_level(augmented, pinv_tol, i + 1, "augmented Jacobian");
    s.projectors.push_back(Eigen::MatrixXd::Identity(nu, nu) - aug_pinv * augmented);
  }

  s.gain_free.resize(n, n);
  for (int rho = 0; rho < h; ++rho) {
    const Eigen::MatrixXd col = s.projectors[rho] * s.pinvs[rho];
    for (int i = 0; i < h; ++i) {
      s.gain_free.block(s.offsets[i], s.offsets[rho], s.dims[i], s.dims[rho]) =
          -s.jacobians[i] * col;
    }
  }
  return s;
}

HierarchyState build_state(const TaskStack& stack, const ManipulatorModel& model,
                           const Eigen::Ref<const Eigen::VectorXd>& q, double pinv_tol) {
  stack.validate();
  if (stack.n() > model.dof()) {
    std::ostringstream os;
    os << "task stack needs " << stack.n() << " rows but the robot has only " << model.dof()
       << " joints";
    throw Error(ErrorKind::DimensionMismatch, os.str());
  }
  std::vector<Eigen::MatrixXd> jacobians;
  std::vector<Eigen::VectorXd> errors;
  for (const auto& task : stack.tasks) {
    jacobians.push_back(task_jacobian(model, task, q));
    errors.push_back(task_error(task, model, q));
  }
  return state_from_jacobians(std::move(jacobians), std::move(errors), pinv_tol);
}

Eigen::VectorXd clik_velocity(const HierarchyState& state,
                              const Eigen::Ref<const Eigen::VectorXd>& lambda) {
  if (lambda.size() != state.n()) {
    std::ostringstream os;
    os << "gain vector has " << lambda.size() << " entries, stack has " << state.n();
    throw Error(ErrorKind::DimensionMismatch, os.str());
  }
  Eigen::VectorXd qd = Eigen::VectorXd::Zero(state.dof());
  for (int i = 0; i < state.h(); ++i) {
    const Eigen::VectorXd scaled =
        lambda.segment(state.offsets[i], state.dims[i]).cwiseProduct(state.errors[i]);
    qd.noalias() += state.projectors[i] * (state.pinvs[i] * scaled);
  }
  return qd;
}

}  // namespace sdpclik
