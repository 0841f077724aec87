#include <doctest.h>

#include "rgrasp/scene.hpp"

using namespace rgrasp;

namespace {

const char* kMinimalScene = R"({
  "robot": "default",
  "initial_config": "center_up",
  "environment": [{"kind": "half_space", "normal": [0, 0, 1], "offset": 0.0}],
  "objects": [
    {"name": "box", "role": "target", "kind": "superellipsoid",
     "semi_axes": [0.03, 0.03, 0.05], "e1": 0.2, "e2": 0.2,
     "pose_xyz": [0.45, 0.0, 0.05],
     "grasps": [[[-0.05, 0.0, 0.02], [0.05, 0.0, 0.02]],
                [[0.0, -0.05, 0.02], [0.0, 0.05, 0.02]]]},
    {"name": "block", "role": "obstacle", "kind": "superellipsoid",
     "semi_axes": [0.02, 0.02, 0.06], "pose_xyz": [0.35, 0.15, 0.06]}
  ],
  "disturbances": [
    {"time": 5.0, "kind": "object_teleport", "object": 0, "pose_xyz": [0.4, 0.1, 0.05]},
    {"time": 2.0, "kind": "object_velocity", "object": 1,
     "linear": [0.05, 0.0, 0.0], "duration": 3.0},
    {"time": 8.0, "kind": "robot_push", "duration": 0.2,
     "qdot_offset": [0.5, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0]}
  ],
  "field_params": {"v_const": 0.3},
  "tracker_params": {"horizon": 0.1},
  "seed": 7
})";

}  // namespace

TEST_CASE("bowl cloud lies on the spherical shell below the rim") {
  const double r = 0.075, h = 0.055;
  const auto pts = make_bowl_cloud(r, h, 1500);
  REQUIRE(pts.size() == 1500);
  const Vec3 center(0.0, 0.0, r);
  for (const Vec3& p : pts) {
    CHECK(std::abs((p - center).norm() - r) < 1e-12);
    CHECK(p.z() > 0.0);
    CHECK(p.z() <= h + 1e-12);
  }
  CHECK_THROWS_AS(make_bowl_cloud(0.05, 0.06, 100), ConfigError);  // height > radius
}

TEST_CASE("dish cloud follows the quadratic profile") {
  const double r = 0.09, h = 0.02;
  const auto pts = make_dish_cloud(r, h, 800);
  REQUIRE(pts.size() == 800);
  for (const Vec3& p : pts) {
    const double rad = std::hypot(p.x(), p.y());
    CHECK(rad <= r + 1e-12);
    CHECK(p.z() == doctest::Approx(h * (rad / r) * (rad / r)).epsilon(1e-9));
  }
}

TEST_CASE("mug cloud is a wall plus bottom disc") {
  const double r = 0.04, h = 0.09;
  const auto pts = make_mug_cloud(r, h, 1200);
  REQUIRE(pts.size() == 1200);
  int wall = 0, bottom = 0;
  for (const Vec3& p : pts) {
    const double rad = std::hypot(p.x(), p.y());
    if (p.z() == 0.0) {
      ++bottom;
      CHECK(rad <= r + 1e-12);
    } else {
      ++wall;
      CHECK(rad == doctest::Approx(r).epsilon(1e-12));
      CHECK(p.z() <= h + 1e-12);
    }
  }
  CHECK(wall > bottom);  // cylinder wall has the larger area
}

TEST_CASE("wineglass cloud spans cup, stem, and base") {
  const auto pts = make_wineglass_cloud(0.045, 0.04, 0.09, 0.035, 1500);
  REQUIRE(pts.size() == 1500);
  int cup = 0, stem = 0, base = 0;
  for (const Vec3& p : pts) {
    if (p.z() > 0.09) ++cup;
    else if (p.z() < 0.005) ++base;
    else ++stem;
  }
  CHECK(cup > 900);
  CHECK(stem > 100);
  CHECK(base > 100);
}

TEST_CASE("scenario parsing round-trips the documented fields") {
  const Scene s = parse_scene(kMinimalScene);
  CHECK(s.robot.dof() == 15);
  CHECK((s.q0 - s.robot.named_configs.at("center_up")).norm() == 0.0);
  CHECK(s.objects.size() == 2);
  CHECK(s.target_index() == 0);
  CHECK(s.objects[0].name == "box");
  CHECK(s.objects[0].kind == SdfKind::superellipsoid);
  CHECK((s.objects[0].pose.translation() - Vec3(0.45, 0.0, 0.05)).norm() < 1e-12);
  CHECK(s.environment.size() == 1);
  REQUIRE(s.grasps_object_frame.size() == 2);
  CHECK(s.grasps_object_frame[0].size() == 2);
  CHECK((s.grasps_object_frame[1][1] - Vec3(0.0, 0.05, 0.02)).norm() < 1e-12);
  REQUIRE(s.disturbances.size() == 3);
  CHECK(s.disturbances[0].kind == DisturbanceKind::object_teleport);
  CHECK(s.disturbances[1].kind == DisturbanceKind::object_velocity);
  CHECK(s.disturbances[1].duration == 3.0);
  CHECK(s.disturbances[2].kind == DisturbanceKind::robot_push);
  CHECK(s.field_params.v_const == 0.3);
  CHECK(s.tracker_params.horizon == 0.1);
  CHECK(s.seed == 7u);
  CHECK(s.duration_limit == 20.0);
  // Nominal gripper posture defaults to the initial gripper configuration.
  CHECK((s.field_params.q_gr_nominal - s.robot.selection_matrix() * s.q0).norm() == 0.0);
  CHECK_NOTHROW(s.validate());
}

TEST_CASE("scenario validation rejects structural errors") {
  // No target object.
  std::string no_target = kMinimalScene;
  const auto pos = no_target.find("\"target\"");
  no_target.replace(pos, 8, "\"obstacle\"");
  // Removing the target also removes its grasps, so loading fails.
  CHECK_THROWS_AS(parse_scene(no_target), ConfigError);

  std::string two_targets = kMinimalScene;
  const auto opos = two_targets.find("\"obstacle\"");
  two_targets.replace(opos, 10, "\"target\"");
  CHECK_THROWS_AS(parse_scene(two_targets), ConfigError);

  std::string bad_config = kMinimalScene;
  const auto cpos = bad_config.find("center_up");
  bad_config.replace(cpos, 9, "no_such_cfg");
  CHECK_THROWS_AS(parse_scene(bad_config), ConfigError);

  std::string bad_disturbance = kMinimalScene;
  const auto dpos = bad_disturbance.find("\"object\": 1");
  bad_disturbance.replace(dpos, 11, "\"object\": 9");
  CHECK_THROWS_AS(parse_scene(bad_disturbance), ConfigError);
}

TEST_CASE("parse errors carry context") {
  CHECK_THROWS_AS(parse_scene("not json"), ConfigError);
  CHECK_THROWS_AS(parse_scene("{}"), ConfigError);
  CHECK_THROWS_AS(load_scene("/no/such/file.json"), ConfigError);
}

TEST_CASE("overrides update the documented sections only") {
  Scene s = parse_scene(kMinimalScene);
  apply_override(s, "field.v_const", "0.4");
  CHECK(s.field_params.v_const == 0.4);
  apply_override(s, "tracker.eps_obstacle", "0.04");
  CHECK(s.tracker_params.eps_obstacle == 0.04);
  apply_override(s, "sim.duration_limit", "30");
  CHECK(s.duration_limit == 30.0);
  apply_override(s, "sim.seed", "3");
  CHECK(s.seed == 3u);
  CHECK_THROWS_AS(apply_override(s, "nosection.key", "1"), ConfigError);
  CHECK_THROWS_AS(apply_override(s, "field.no_such", "1"), ConfigError);
  CHECK_THROWS_AS(apply_override(s, "plainkey", "1"), ConfigError);
  // Overrides that break invariants are rejected by re-validation.
  CHECK_THROWS_AS(apply_override(s, "tracker.horizon", "-1"), ConfigError);
}

TEST_CASE("procedural cloud objects load through the scenario schema") {
  std::string cloud_scene = R"({
    "robot": "default",
    "initial_config": "center_up",
    "objects": [
      {"name": "bowl", "role": "target", "kind": "cloud", "source": "proc:bowl",
       "params": {"radius": 0.075, "height": 0.055, "points": 1200},
       "pose_xyz": [0.45, 0.0, 0.0],
       "grasps": [[[0.0, 0.055, 0.03], [0.0, 0.085, 0.03]]]}
    ]
  })";
  const Scene s = parse_scene(cloud_scene);
  REQUIRE(s.objects[0].cloud != nullptr);
  CHECK(s.objects[0].cloud->points().size() == 1200);
  // A query near the rim sees the shell, transformed by the pose.
  const DistanceResult d = sdf_eval(s.objects[0], Vec3(0.45, 0.0, 0.2));
  CHECK(d.value > 0.05);
  CHECK(d.value < 0.25);
}
