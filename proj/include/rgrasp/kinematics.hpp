#ifndef RGRASP_KINEMATICS_HPP_
#define RGRASP_KINEMATICS_HPP_

#include <vector>

#include "rgrasp/robot_model.hpp"

namespace rgrasp {

/// World-frame pose of one fingertip.
struct FingertipState {
  Vec3 position = Vec3::Zero();
  Mat3 rotation = Mat3::Identity();
};

/// Forward-kinematics snapshot at one joint configuration.
struct KinematicState {
  std::vector<Iso3> joint_transforms;        // world <- joint frame, per joint
  std::vector<FingertipState> fingertips;    // length m
  std::vector<Vec3> sphere_centers;          // world centers, per collision sphere
};

/// Pure FK over all frames and collision spheres. Throws ConfigError on
/// dimension mismatch.
KinematicState forward_kinematics(const RobotModel& model, const VecX& q);

struct FingertipJacobian {
  MatX linear;   // 3 x n, xdot = J q_dot
  MatX angular;  // 3 x n, [J q_dot] = Rdot R^T
};

std::vector<FingertipJacobian> fingertip_jacobians(const RobotModel& model,
                                                   const KinematicState& state);

/// 3 x n Jacobian of one collision-sphere center.
MatX point_jacobian(const RobotModel& model, const KinematicState& state, int sphere_index);

/// 3 x n Jacobian of an arbitrary world point rigidly attached to `joint`.
MatX attached_point_jacobian(const RobotModel& model, const KinematicState& state,
                             int joint, const Vec3& world_point);

}  // namespace rgrasp

#endif  // RGRASP_KINEMATICS_HPP_
