#include "rgrasp/kinematics.hpp"

namespace rgrasp {

KinematicState forward_kinematics(const RobotModel& model, const VecX& q) {
  const int n = model.dof();
  if (q.size() != n)
    throw ConfigError("forward_kinematics: dim(q) = " + std::to_string(q.size()) +
                      ", expected " + std::to_string(n));
  KinematicState st;
  st.joint_transforms.resize(n);
  for (int j = 0; j < n; ++j) {
    const JointDesc& d = model.joints[j];
    Iso3 parent = (d.parent < 0) ? Iso3::Identity() : st.joint_transforms[d.parent];
    Iso3 t = parent * d.origin;
    t.linear() = t.linear() * Eigen::AngleAxisd(q[j], d.axis).toRotationMatrix();
    st.joint_transforms[j] = t;
  }
  st.fingertips.reserve(model.fingertip_frames.size());
  for (const auto& f : model.fingertip_frames) {
    Iso3 t = st.joint_transforms[f.parent_joint] * f.offset;
    st.fingertips.push_back({t.translation(), t.linear()});
  }
  st.sphere_centers.reserve(model.collision_spheres.size());
  for (const auto& s : model.collision_spheres) {
    if (s.parent_joint < 0)
      st.sphere_centers.push_back(s.center_local);
    else
      st.sphere_centers.push_back(st.joint_transforms[s.parent_joint] * s.center_local);
  }
  return st;
}

MatX attached_point_jacobian(const RobotModel& model, const KinematicState& state,
                             int joint, const Vec3& world_point) {
  MatX jac = MatX::Zero(3, model.dof());
  for (int j = joint; j >= 0; j = model.joints[j].parent) {
    const Iso3& t = state.joint_transforms[j];
    const Vec3 axis_w = t.linear() * model.joints[j].axis;
    jac.col(j) = axis_w.cross(world_point - t.translation());
  }
  return jac;
}

std::vector<FingertipJacobian> fingertip_jacobians(const RobotModel& model,
                                                   const KinematicState& state) {
  std::vector<FingertipJacobian> out;
  out.reserve(model.fingertip_frames.size());
  for (size_t i = 0; i < model.fingertip_frames.size(); ++i) {
    const int parent = model.fingertip_frames[i].parent_joint;
    FingertipJacobian fj;
    fj.linear = attached_point_jacobian(model, state, parent, state.fingertips[i].position);
    fj.angular = MatX::Zero(3, model.dof());
    for (int j = parent; j >= 0; j = model.joints[j].parent)
      fj.angular.col(j) = state.joint_transforms[j].linear() * model.joints[j].axis;
    out.push_back(std::move(fj));
  }
  return out;
}

MatX point_jacobian(const RobotModel& model, const KinematicState& state, int sphere_index) {
  const CollisionSphere& s = model.collision_spheres[sphere_index];
  if (s.parent_joint < 0) return MatX::Zero(3, model.dof());
  return attached_point_jacobian(model, state, s.parent_joint,
                                 state.sphere_centers[sphere_index]);
}

}  // namespace rgrasp
