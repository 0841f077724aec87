#include "rgrasp/collision.hpp"

namespace rgrasp {

namespace {

// Tree distance between the parent joints of two spheres; base link is the
// root. Used to skip pairs that are rigidly close by construction.
int chain_distance(const RobotModel& m, int ja, int jb) {
  auto depth = [&m](int j) {
    int d = 0;
    for (; j >= 0; j = m.joints[j].parent) ++d;
    return d;
  };
  int da = depth(ja), db = depth(jb), dist = 0;
  while (da > db) {
    ja = m.joints[ja].parent;
    --da;
    ++dist;
  }
  while (db > da) {
    jb = m.joints[jb].parent;
    --db;
    ++dist;
  }
  while (ja != jb) {
    ja = m.joints[ja].parent;
    jb = m.joints[jb].parent;
    dist += 2;
  }
  return dist;
}

int finger_of(const RobotModel& m, int joint) {
  for (size_t f = 0; f < m.fingertip_frames.size(); ++f) {
    int tip_parent = m.fingertip_frames[f].parent_joint;
    for (int j = tip_parent; j >= 0; j = m.joints[j].parent)
      if (j == joint && m.joints[joint].parent >= 0 &&
          std::find(m.gripper_joint_indices.begin(), m.gripper_joint_indices.end(),
                    joint) != m.gripper_joint_indices.end())
        return static_cast<int>(f);
  }
  return -1;
}

}  // namespace

CollisionPairSet make_collision_pairs(const RobotModel& model,
                                      const std::vector<SdfObject>& environment) {
  CollisionPairSet set;
  const int ns = static_cast<int>(model.collision_spheres.size());
  for (int a = 0; a < ns; ++a) {
    for (int b = a + 1; b < ns; ++b) {
      const int ja = model.collision_spheres[a].parent_joint;
      const int jb = model.collision_spheres[b].parent_joint;
      if (ja == jb) continue;  // same rigid link
      const int fa = finger_of(model, ja), fb = finger_of(model, jb);
      const bool cross_finger = fa >= 0 && fb >= 0 && fa != fb;
      if (!cross_finger && chain_distance(model, ja, jb) < 3) continue;
      set.pairs.push_back({a, b, -1});
    }
  }
  for (int o = 0; o < static_cast<int>(environment.size()); ++o)
    for (int a = 0; a < ns; ++a)
      if (model.collision_spheres[a].parent_joint >= 0)  // base link is static
        set.pairs.push_back({a, -1, o});
  return set;
}

GammaResult gamma(const RobotModel& model, const KinematicState& state,
                  const CollisionPairSet& pairs,
                  const std::vector<SdfObject>& environment) {
  const int k = pairs.size();
  const int n = model.dof();
  GammaResult res;
  res.values.resize(k);
  res.jacobian = MatX::Zero(k, n);
  for (int i = 0; i < k; ++i) {
    const CollisionPair& p = pairs.pairs[i];
    const CollisionSphere& sa = model.collision_spheres[p.sphere_a];
    const Vec3& ca = state.sphere_centers[p.sphere_a];
    if (p.sphere_b >= 0) {
      const CollisionSphere& sb = model.collision_spheres[p.sphere_b];
      const Vec3& cb = state.sphere_centers[p.sphere_b];
      const Vec3 diff = ca - cb;
      const double dist = diff.norm();
      res.values[i] = dist - sa.radius - sb.radius;
      if (dist < 1e-12) {
        res.degenerate = true;  // gradient row left zero
        continue;
      }
      const Vec3 u = diff / dist;
      res.jacobian.row(i) =
          u.transpose() * (point_jacobian(model, state, p.sphere_a) -
                           point_jacobian(model, state, p.sphere_b));
    } else {
      const DistanceResult d = sdf_eval(environment[p.object], ca);
      res.values[i] = d.value - sa.radius;
      res.jacobian.row(i) = d.gradient.transpose() * point_jacobian(model, state, p.sphere_a);
    }
  }
  return res;
}

VecX gamma_values(const RobotModel& model, const KinematicState& state,
                  const CollisionPairSet& pairs,
                  const std::vector<SdfObject>& environment) {
  VecX v(pairs.size());
  for (int i = 0; i < pairs.size(); ++i) {
    const CollisionPair& p = pairs.pairs[i];
    const CollisionSphere& sa = model.collision_spheres[p.sphere_a];
    const Vec3& ca = state.sphere_centers[p.sphere_a];
    if (p.sphere_b >= 0) {
      const CollisionSphere& sb = model.collision_spheres[p.sphere_b];
      v[i] = (ca - state.sphere_centers[p.sphere_b]).norm() - sa.radius - sb.radius;
    } else {
      v[i] = sdf_eval(environment[p.object], ca).value - sa.radius;
    }
  }
  return v;
}

VecX object_distance_values(const RobotModel& model, const KinematicState& state,
                            const std::vector<SdfObject>& objects) {
  std::vector<double> vals;
  for (const auto& obj : objects)
    for (int s = 0; s < static_cast<int>(model.collision_spheres.size()); ++s)
      if (model.collision_spheres[s].on_hand)
        vals.push_back(sdf_eval(obj, state.sphere_centers[s]).value -
                       model.collision_spheres[s].radius);
  return Eigen::Map<VecX>(vals.data(), static_cast<int>(vals.size()));
}

ObjectDistanceStack object_distance_stack(const RobotModel& model,
                                          const KinematicState& state,
                                          const std::vector<SdfObject>& objects) {
  ObjectDistanceStack out;
  const int n = model.dof();
  std::vector<int> hand_spheres;
  for (int s = 0; s < static_cast<int>(model.collision_spheres.size()); ++s)
    if (model.collision_spheres[s].on_hand) hand_spheres.push_back(s);
  const int l = static_cast<int>(hand_spheres.size() * objects.size());
  out.values.resize(l);
  out.jacobian = MatX::Zero(l, n);
  int row = 0;
  for (int o = 0; o < static_cast<int>(objects.size()); ++o) {
    for (int s : hand_spheres) {
      const DistanceResult d = sdf_eval(objects[o], state.sphere_centers[s]);
      out.values[row] = d.value - model.collision_spheres[s].radius;
      out.jacobian.row(row) = d.gradient.transpose() * point_jacobian(model, state, s);
      out.row_roles.push_back(objects[o].role);
      out.row_spheres.push_back(s);
      out.row_objects.push_back(o);
      ++row;
    }
  }
  return out;
}

}  // namespace rgrasp
