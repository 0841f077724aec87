#ifndef RGRASP_ROBOT_MODEL_HPP_
#define RGRASP_ROBOT_MODEL_HPP_

#include <map>
#include <string>
#include <vector>

#include "rgrasp/types.hpp"

namespace rgrasp {

/// Revolute joint: rotation about `axis` (unit, joint frame), preceded by a
/// fixed offset transform from the parent joint frame.
struct JointDesc {
  int parent = -1;  // -1 = world/base
  Iso3 origin = Iso3::Identity();
  Vec3 axis = Vec3::UnitZ();
  std::string name;
};

/// Frame rigidly attached to a joint.
struct FrameAttachment {
  int parent_joint = 0;
  Iso3 offset = Iso3::Identity();
  std::string name;
};

/// Collision sphere rigidly attached to a joint's link.
struct CollisionSphere {
  int parent_joint = 0;  // -1 = base link (world-fixed)
  Vec3 center_local = Vec3::Zero();
  double radius = 0.0;
  bool on_hand = false;  // member of the gripper point set X(q)
};

/// Serial-chain arm-hand description. Immutable after construction/load.
struct RobotModel {
  std::vector<JointDesc> joints;
  std::vector<FrameAttachment> fingertip_frames;
  std::vector<int> gripper_joint_indices;
  std::vector<CollisionSphere> collision_spheres;
  VecX q_min, q_max;    // rad
  VecX qd_min, qd_max;  // rad/s
  std::map<std::string, VecX> named_configs;

  int dof() const { return static_cast<int>(joints.size()); }
  int num_fingertips() const { return static_cast<int>(fingertip_frames.size()); }

  /// n_gr x n row selector for the gripper joints.
  MatX selection_matrix() const;

  /// Indices of joints on the chain from base to `joint` (inclusive).
  std::vector<int> chain_to(int joint) const;

  /// Throws ConfigError if any structural invariant is violated.
  void validate() const;
};

Iso3 transform_from_xyz_rpy(const Vec3& xyz, const Vec3& rpy);

/// Load from the JSON robot file format.
RobotModel load_robot_model(const std::string& path);
RobotModel parse_robot_model(const std::string& json_text);

/// Built-in 15-DoF example: 7-DoF arm plus two 4-DoF fingers.
RobotModel make_default_arm_hand();

}  // namespace rgrasp

#endif  // RGRASP_ROBOT_MODEL_HPP_
