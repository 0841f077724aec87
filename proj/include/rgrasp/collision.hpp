#ifndef RGRASP_COLLISION_HPP_
#define RGRASP_COLLISION_HPP_

#include <vector>

#include "rgrasp/kinematics.hpp"
#include "rgrasp/sdf.hpp"

namespace rgrasp {

/// One Gamma row: either sphere-sphere (object < 0) or sphere vs a
/// world-fixed environment SDF (sphere_b < 0).
struct CollisionPair {
  int sphere_a = -1;
  int sphere_b = -1;
  int object = -1;
};

struct CollisionPairSet {
  std::vector<CollisionPair> pairs;
  int size() const { return static_cast<int>(pairs.size()); }
};

/// Self-collision pairs (kinematic-tree distance >= 3, plus all
/// finger-vs-finger pairs) and every sphere against each environment object.
CollisionPairSet make_collision_pairs(const RobotModel& model,
                                      const std::vector<SdfObject>& environment);

struct GammaResult {
  VecX values;      // k
  MatX jacobian;    // k x n, d(Gamma)/dq
  bool degenerate = false;  // coincident sphere centers hit
};

GammaResult gamma(const RobotModel& model, const KinematicState& state,
                  const CollisionPairSet& pairs,
                  const std::vector<SdfObject>& environment);

/// Gamma values without Jacobians; cheap enough for the control-rate audit.
VecX gamma_values(const RobotModel& model, const KinematicState& state,
                  const CollisionPairSet& pairs,
                  const std::vector<SdfObject>& environment);

/// Distance-stack values without Jacobians.
VecX object_distance_values(const RobotModel& model, const KinematicState& state,
                            const std::vector<SdfObject>& objects);

struct ObjectDistanceStack {
  VecX values;    // l, sdf(center) - radius per (hand sphere, object)
  MatX jacobian;  // l x n
  std::vector<SdfRole> row_roles;
  std::vector<int> row_spheres;
  std::vector<int> row_objects;
};

/// Distances from the gripper point set X(q) (the on_hand spheres) to the
/// target and obstacle objects. Empty object list yields a zero-length stack.
ObjectDistanceStack object_distance_stack(const RobotModel& model,
                                          const KinematicState& state,
                                          const std::vector<SdfObject>& objects);

}  // namespace rgrasp

#endif  // RGRASP_COLLISION_HPP_
