#ifndef RGRASP_SCENE_HPP_
#define RGRASP_SCENE_HPP_

#include "rgrasp/fields.hpp"
#include "rgrasp/robot_model.hpp"
#include "rgrasp/sdf.hpp"
#include "rgrasp/tracker.hpp"

namespace rgrasp {

enum class DisturbanceKind { object_teleport, object_velocity, robot_push };

struct DisturbanceEvent {
  double time = 0.0;  // s
  DisturbanceKind kind = DisturbanceKind::object_teleport;
  int object = -1;                       // index into Scene::objects
  Iso3 new_pose = Iso3::Identity();      // object_teleport
  Vec3 linear_velocity = Vec3::Zero();   // object_velocity, m/s
  Vec3 angular_velocity = Vec3::Zero();  // object_velocity, rad/s
  double duration = 0.0;                 // s, timed kinds
  VecX qdot_offset;                      // robot_push, rad/s

  void validate(int num_objects, int dof) const;
};

struct Scene {
  RobotModel robot;
  VecX q0;
  std::vector<SdfObject> objects;      // target and obstacles
  std::vector<SdfObject> environment;  // world-fixed half-spaces
  // Candidate fingertip target sets, one inner vector of m points per grasp,
  // expressed in the target object's frame.
  std::vector<std::vector<Vec3>> grasps_object_frame;
  std::vector<DisturbanceEvent> disturbances;
  FieldParams field_params;
  TrackerParams tracker_params;
  double control_rate = 500.0;   // Hz
  double planning_rate = 100.0;  // Hz
  double duration_limit = 20.0;  // s
  unsigned seed = 0;

  int target_index() const;  // the unique target-role object
  void validate() const;
};

Scene parse_scene(const std::string& json_text, const std::string& base_dir = "");
Scene load_scene(const std::string& path);

/// Apply a dotted "section.key=value" override (e.g. "field.v_const=0.3",
/// "tracker.horizon=0.1", "sim.duration_limit=30", "sim.seed=3").
void apply_override(Scene& scene, const std::string& key, const std::string& value);

/// Procedural surface point clouds (object frame, deterministic sampling).
std::vector<Vec3> make_bowl_cloud(double radius, double height, int points);
std::vector<Vec3> make_dish_cloud(double radius, double height, int points);
std::vector<Vec3> make_mug_cloud(double radius, double height, int points);
std::vector<Vec3> make_wineglass_cloud(double cup_radius, double cup_height,
                                       double stem_height, double base_radius,
                                       int points);

}  // namespace rgrasp

#endif  // RGRASP_SCENE_HPP_
