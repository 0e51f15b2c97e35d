#include "sdpclik/kinematics.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "sdpclik/errors.hpp"

namespace sdpclik {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::TaskModelMismatch: return "TaskModelMismatch";
    case ErrorKind::RankDeficient: return "RankDeficient";
    case ErrorKind::EmptyStack: return "EmptyStack";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::InvalidParameter: return "InvalidParameter";
    case ErrorKind::Config: return "ConfigError";
    case ErrorKind::SimulationAbort: return "SimulationAbort";
  }
  return "Unknown";
}

int task_dim(TaskKind kind) {
  switch (kind) {
    case TaskKind::PlanarEEPosition: return 2;
    case TaskKind::PlanarEEOrientation: return 1;
    case TaskKind::DhFramePosition: return 3;
    case TaskKind::DhFrameCoordinate: return 1;
  }
  return 0;
}

std::string_view to_string(TaskKind kind) {
  switch (kind) {
    case TaskKind::PlanarEEPosition: return "planar_ee_position";
    case TaskKind::PlanarEEOrientation: return "planar_ee_orientation";
    case TaskKind::DhFramePosition: return "dh_frame_position";
    case TaskKind::DhFrameCoordinate: return "dh_frame_coordinate";
  }
  return "unknown";
}

std::string_view to_string(Axis axis) {
  switch (axis) {
    case Axis::X: return "x";
    case Axis::Y: return "y";
    case Axis::Z: return "z";
  }
  return "?";
}

int TaskSpec::dim() const { return task_dim(kind); }

void TaskSpec::validate() const {
  if (target.size() != dim()) {
    std::ostringstream os;
    os << "task " << to_string(kind) << " expects a target of size " << dim() << ", got "
       << target.size();
    throw Error(ErrorKind::DimensionMismatch, os.str());
  }
  if (!target.allFinite()) {
    throw Error(ErrorKind::InvalidParameter, "task target must be finite");
  }
  if ((kind == TaskKind::DhFramePosition || kind == TaskKind::DhFrameCoordinate) &&
      frame_index < 1) {
    throw Error(ErrorKind::InvalidParameter, "frame_index must be >= 1");
  }
}

TaskSpec TaskSpec::planar_position(const Eigen::Vector2d& target) {
  TaskSpec t;
  t.kind = TaskKind::PlanarEEPosition;
  t.target = target;
  return t;
}

TaskSpec TaskSpec::planar_orientation(double target) {
  TaskSpec t;
  t.kind = TaskKind::PlanarEEOrientation;
  t.target = Eigen::VectorXd::Constant(1, target);
  return t;
}

TaskSpec TaskSpec::frame_position(int frame_index, const Eigen::Vector3d& target) {
  TaskSpec t;
  t.kind = TaskKind::DhFramePosition;
  t.frame_index = frame_index;
  t.target = target;
  return t;
}

TaskSpec TaskSpec::frame_coordinate(int frame_index, Axis axis, double target) {
  TaskSpec t;
  t.kind = TaskKind::DhFrameCoordinate;
  t.frame_index = frame_index;
  t.coordinate = axis;
  t.target = Eigen::VectorXd::Constant(1, target);
  return t;
}

int ManipulatorModel::dof() const {
  return kind == ModelKind::Planar ? static_cast<int>(link_lengths.size())
                                   : static_cast<int>(dh_rows.size());
}

void ManipulatorModel::validate() const {
  const int n = dof();
  if (n < 1) throw Error(ErrorKind::InvalidParameter, "manipulator needs at least one joint");
  if (kind == ModelKind::Planar && !dh_rows.empty()) {
    throw Error(ErrorKind::InvalidParameter, "planar model must not carry DH rows");
  }
  if (kind == ModelKind::DhChain && !link_lengths.empty()) {
    throw Error(ErrorKind::InvalidParameter, "DH model must not carry planar link lengths");
  }
  if (qd_upper.size() != n || qd_lower.size() != n) {
    throw Error(ErrorKind::DimensionMismatch, "joint-velocity bounds must have one entry per joint");
  }
  for (int j = 0; j < n; ++j) {
    if (!(qd_lower[j] < 0.0 && 0.0 < qd_upper[j]) || !std::isfinite(qd_lower[j]) ||
        !std::isfinite(qd_upper[j])) {
      std::ostringstream os;
      os << "joint " << j + 1 << ": velocity bounds must satisfy lower < 0 < upper";
      throw Error(ErrorKind::InvalidParameter, os.str());
    }
  }
  for (double l : link_lengths) {
    if (!std::isfinite(l)) throw Error(ErrorKind::InvalidParameter, "link length must be finite");
  }
}

ManipulatorModel ManipulatorModel::planar(std::vector<double> lengths, double qd_limit) {
  ManipulatorModel m;
  m.kind = ModelKind::Planar;
  m.link_lengths = std::move(lengths);
  m.qd_upper = Eigen::VectorXd::Constant(m.dof(), qd_limit);
  m.qd_lower = -m.qd_upper;
  m.validate();
  return m;
}

ManipulatorModel ManipulatorModel::dh_chain(std::vector<DhRow> rows, double qd_limit) {
  ManipulatorModel m;
  m.kind = ModelKind::DhChain;
  m.dh_rows = std::move(rows);
  m.qd_upper = Eigen::VectorXd::Constant(m.dof(), qd_limit);
  m.qd_lower = -m.qd_upper;
  m.validate();
  return m;
}

ManipulatorModel ManipulatorModel::ur5(double qd_limit) {
  constexpr double half_pi = std::numbers::pi / 2.0;
  return dh_chain({{0.0, half_pi, 0.089159, 0.0},
                   {-0.425, 0.0, 0.0, 0.0},
                   {-0.39225, 0.0, 0.0, 0.0},
                   {0.0, half_pi, 0.10915, 0.0},
                   {0.0, -half_pi, 0.09465, 0.0},
                   {0.0, 0.0, 0.0823, 0.0}},
                  qd_limit);
}

Eigen::Matrix4d dh_transform(const DhRow& row, double q) {
  const double th = q + row.theta_offset;
  const double ct = std::cos(th), st = std::sin(th);
  const double ca = std::cos(row.alpha), sa = std::sin(row.alpha);
  Eigen::Matrix4d T;
  T << ct, -st * ca, st * sa, row.a * ct,
       st, ct * ca, -ct * sa, row.a * st,
       0.0, sa, ca, row.d,
       0.0, 0.0, 0.0, 1.0;
  return T;
}

std::vector<Eigen::Matrix4d> dh_frames(const ManipulatorModel& model,
                                       const Eigen::Ref<const Eigen::VectorXd>& q) {
  if (model.kind != ModelKind::DhChain) {
    throw Error(ErrorKind::TaskModelMismatch, "DH frames requested from a planar model");
  }
  std::vector<Eigen::Matrix4d> frames;
  frames.reserve(model.dh_rows.size() + 1);
  frames.push_back(Eigen::Matrix4d::Identity());
  for (std::size_t j = 0; j < model.dh_rows.size(); ++j) {
    frames.push_back(frames.back() * dh_transform(model.dh_rows[j], q[static_cast<Eigen::Index>(j)]));
  }
  return frames;
}

namespace {

void check_config(const ManipulatorModel& model, const Eigen::Ref<const Eigen::VectorXd>& q) {
  if (q.size() != model.dof()) {
    std::ostringstream os;
    os << "configuration has " << q.size() << " entries, model has " << model.dof() << " joints";
    throw Error(ErrorKind::DimensionMismatch, os.str());
  }
  if (!q.allFinite()) throw Error(ErrorKind::InvalidParameter, "configuration must be finite");
}

bool is_planar_task(TaskKind kind) {
  return kind == TaskKind::PlanarEEPosition || kind == TaskKind::PlanarEEOrientation;
}

void check_compatible(const ManipulatorModel& model, const TaskSpec& task) {
  const bool planar = model.kind == ModelKind::Planar;
  if (planar != is_planar_task(task.kind)) {
    std::ostringstream os;
    os << "task " << to_string(task.kind) << " is not supported by a "
       << (planar ? "planar" : "DH-chain") << " model";
    throw Error(ErrorKind::TaskModelMismatch, os.str());
  }
  if (!planar && (task.frame_index < 1 || task.frame_index > model.dof())) {
    std::ostringstream os;
    os << "frame_index " << task.frame_index << " outside 1.." << model.dof();
    throw Error(ErrorKind::TaskModelMismatch, os.str());
  }
}

}  // namespace

Eigen::VectorXd task_value(const ManipulatorModel& model, const TaskSpec& task,
                           const Eigen::Ref<const Eigen::VectorXd>& q) {
  check_config(model, q);
  check_compatible(model, task);

  switch (task.kind) {
    case TaskKind::PlanarEEPosition: {
      Eigen::VectorXd p = Eigen::VectorXd::Zero(2);
      double phi = 0.0;
      for (int j = 0; j < model.dof(); ++j) {
        phi += q[j];
        p[0] += model.link_lengths[j] * std::cos(phi);
        p[1] += model.link_lengths[j] * std::sin(phi);
      }
      return p;
    }
    case TaskKind::PlanarEEOrientation:
      return Eigen::VectorXd::Constant(1, q.sum());
    case TaskKind::DhFramePosition:
    case TaskKind::DhFrameCoordinate: {
      const auto frames = dh_frames(model, q);
      const Eigen::Vector3d origin = frames[task.frame_index].block<3, 1>(0, 3);
      if (task.kind == TaskKind::DhFramePosition) return origin;
      return Eigen::VectorXd::Constant(1, origin[static_cast<int>(task.coordinate)]);
    }
  }
  throw Error(ErrorKind::TaskModelMismatch, "unknown task kind");
}

Eigen::MatrixXd task_jacobian(const ManipulatorModel& model, const TaskSpec& task,
                              const Eigen::Ref<const Eigen::VectorXd>& q) {
  check_config(model, q);
  check_compatible(model, task);
  const int nu = model.dof();

  switch (task.kind) {
    case TaskKind::PlanarEEPosition: {
      // Column j collects every link at or beyond joint j.
      Eigen::MatrixXd J = Eigen::MatrixXd::Zero(2, nu);
      double phi = 0.0;
      for (int i = 0; i < nu; ++i) {
        phi += q[i];
        const double dx = -model.link_lengths[i] * std::sin(phi);
        const double dy = model.link_lengths[i] * std::cos(phi);
        for (int j = 0; j <= i; ++j) {
          J(0, j) += dx;
          J(1, j) += dy;
        }
      }
      return J;
    }
    case TaskKind::PlanarEEOrientation:
      return Eigen::MatrixXd::Ones(1, nu);
    case TaskKind::DhFramePosition:
    case TaskKind::DhFrameCoordinate: {
      const auto frames = dh_frames(model, q);
      const Eigen::Vector3d p = frames[task.frame_index].block<3, 1>(0, 3);
      Eigen::MatrixXd Jp = Eigen::MatrixXd::Zero(3, nu);
      for (int j = 0; j < task.frame_index; ++j) {
        const Eigen::Vector3d z = frames[j].block<3, 1>(0, 2);
        const Eigen::Vector3d o = frames[j].block<3, 1>(0, 3);
        Jp.col(j) = z.cross(p - o);
      }
      if (task.kind == TaskKind::DhFramePosition) return Jp;
      return Jp.row(static_cast<int>(task.coordinate));
    }
  }
  throw Error(ErrorKind::TaskModelMismatch, "unknown task kind");
}

Eigen::MatrixXd pinv(const Eigen::Ref<const Eigen::MatrixXd>& J, double tol) {
  const auto m = J.rows();
  if (m == 0 || m > J.cols()) {
    std::ostringstream os;
    os << "pinv expects 0 < rows <= cols, got " << m << "x" << J.cols();
    throw Error(ErrorKind::DimensionMismatch, os.str());
  }
  if (!J.allFinite()) throw Error(ErrorKind::InvalidParameter, "pinv of a non-finite matrix");

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(J, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& s = svd.singularValues();
  const double cutoff = tol * s[0];
  Eigen::Index rank = 0;
  while (rank < s.size() && s[rank] > cutoff) ++rank;
  if (rank < m) {
    std::ostringstream os;
    os << "matrix has row rank " << rank << " < " << m << " (sigma_min/sigma_max = "
       << (s[0] > 0.0 ? s[m - 1] / s[0] : 0.0) << ")";
    throw RankDeficientError(0, os.str());
  }
  return svd.matrixV() * s.cwiseInverse().asDiagonal() * svd.matrixU().transpose();
}

double wrap_angle(double angle) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double w = std::remainder(angle, two_pi);  // [-pi, pi]
  if (w <= -std::numbers::pi) w += two_pi;
  return w;
}

}  // namespace sdpclik
