#pragma once

#include <string_view>

#include <Eigen/Dense>

namespace sdpclik {

enum class TaskKind {
  PlanarEEPosition,     // (x, y) of the planar end effector, 2 rows
  PlanarEEOrientation,  // sum of planar joint angles, 1 row, angle-valued
  DhFramePosition,      // base-frame origin of a DH frame, 3 rows
  DhFrameCoordinate,    // one base-frame coordinate of a DH frame origin
};

enum class Axis { X = 0, Y = 1, Z = 2 };

/// One prioritized task: what is measured and the set-point it is driven to.
struct TaskSpec {
  TaskKind kind = TaskKind::PlanarEEPosition;
  Eigen::VectorXd target;
  /// DH kinds: origin of the frame obtained after applying rows 1..frame_index.
  int frame_index = 0;
  Axis coordinate = Axis::X;

  int dim() const;
  bool angular() const { return kind == TaskKind::PlanarEEOrientation; }
  void validate() const;

  static TaskSpec planar_position(const Eigen::Vector2d& target);
  static TaskSpec planar_orientation(double target);
  static TaskSpec frame_position(int frame_index, const Eigen::Vector3d& target);
  static TaskSpec frame_coordinate(int frame_index, Axis axis, double target);
};

int task_dim(TaskKind kind);
std::string_view to_string(TaskKind kind);
std::string_view to_string(Axis axis);

}  // namespace sdpclik
