#include "rgrasp/scene.hpp"

#include <fstream>
#include <json.hpp>

namespace rgrasp {

using nlohmann::json;

void DisturbanceEvent::validate(int num_objects, int dof) const {
  if (time < 0.0) throw ConfigError("disturbance time must be >= 0");
  switch (kind) {
    case DisturbanceKind::object_teleport:
      if (object < 0 || object >= num_objects)
        throw ConfigError("disturbance references unknown object");
      break;
    case DisturbanceKind::object_velocity:
      if (object < 0 || object >= num_objects)
        throw ConfigError("disturbance references unknown object");
      if (duration <= 0.0) throw ConfigError("object_velocity needs duration > 0");
      break;
    case DisturbanceKind::robot_push:
      if (duration <= 0.0) throw ConfigError("robot_push needs duration > 0");
      if (qdot_offset.size() != dof)
        throw ConfigError("robot_push offset must have robot dof entries");
      break;
  }
}

int Scene::target_index() const {
  int idx = -1;
  for (int i = 0; i < static_cast<int>(objects.size()); ++i)
    if (objects[i].role == SdfRole::target) {
      if (idx >= 0) throw ConfigError("scene has more than one target object");
      idx = i;
    }
  if (idx < 0) throw ConfigError("scene has no target object");
  return idx;
}

void Scene::validate() const {
  robot.validate();
  if (q0.size() != robot.dof()) throw ConfigError("q0 must have robot dof entries");
  target_index();
  for (const auto& o : objects) {
    o.validate();
    if (o.role == SdfRole::environment)
      throw ConfigError("environment objects belong in the environment list");
  }
  for (const auto& e : environment) {
    e.validate();
    if (e.kind != SdfKind::half_space)
      throw ConfigError("environment objects must be half-spaces");
  }
  if (grasps_object_frame.empty()) throw ConfigError("scene needs candidate grasps");
  const size_t m = robot.fingertip_frames.size();
  for (const auto& g : grasps_object_frame)
    if (g.size() != m)
      throw ConfigError("each candidate grasp needs one point per fingertip");
  for (const auto& d : disturbances)
    d.validate(static_cast<int>(objects.size()), robot.dof());
  if (control_rate <= 0.0 || planning_rate <= 0.0 || planning_rate > control_rate)
    throw ConfigError("rates must satisfy 0 < planning_rate <= control_rate");
  if (duration_limit <= 0.0) throw ConfigError("duration_limit must be > 0");
  field_params.validate();
  tracker_params.validate();
}

namespace {

constexpr double kGolden = M_PI * (3.0 - std::sqrt(5.0));

}  // namespace

std::vector<Vec3> make_bowl_cloud(double radius, double height, int points) {
  if (height <= 0.0 || height > radius || points < 1)
    throw ConfigError("bowl: need 0 < height <= radius and points >= 1");
  std::vector<Vec3> pts;
  pts.reserve(points);
  // Spherical shell of radius R centered at (0,0,R), kept below z = height;
  // uniform in cos(theta) is uniform in area on the sphere.
  for (int k = 0; k < points; ++k) {
    const double u = (k + 0.5) / points;
    const double cos_t = 1.0 - (height / radius) * u;
    const double sin_t = std::sqrt(std::max(0.0, 1.0 - cos_t * cos_t));
    const double phi = kGolden * k;
    pts.emplace_back(radius * sin_t * std::cos(phi), radius * sin_t * std::sin(phi),
                     radius * (1.0 - cos_t));
  }
  return pts;
}

std::vector<Vec3> make_dish_cloud(double radius, double height, int points) {
  if (radius <= 0.0 || height < 0.0 || points < 1)
    throw ConfigError("dish: bad parameters");
  std::vector<Vec3> pts;
  pts.reserve(points);
  // Shallow plate: z = height * (r/R)^2 over the disc.
  for (int k = 0; k < points; ++k) {
    const double r = radius * std::sqrt((k + 0.5) / points);
    const double phi = kGolden * k;
    pts.emplace_back(r * std::cos(phi), r * std::sin(phi),
                     height * (r / radius) * (r / radius));
  }
  return pts;
}

std::vector<Vec3> make_mug_cloud(double radius, double height, int points) {
  if (radius <= 0.0 || height <= 0.0 || points < 2)
    throw ConfigError("mug: bad parameters");
  std::vector<Vec3> pts;
  pts.reserve(points);
  // Open cylinder wall plus bottom disc, points split by surface area.
  const double wall_area = 2.0 * M_PI * radius * height;
  const double bottom_area = M_PI * radius * radius;
  const int n_wall = std::max(
      1, static_cast<int>(points * wall_area / (wall_area + bottom_area)));
  for (int k = 0; k < n_wall; ++k) {
    const double phi = kGolden * k;
    pts.emplace_back(radius * std::cos(phi), radius * std::sin(phi),
                     height * (k + 0.5) / n_wall);
  }
  for (int k = n_wall; k < points; ++k) {
    const double r = radius * std::sqrt((k - n_wall + 0.5) / (points - n_wall));
    const double phi = kGolden * k;
    pts.emplace_back(r * std::cos(phi), r * std::sin(phi), 0.0);
  }
  return pts;
}

std::vector<Vec3> make_wineglass_cloud(double cup_radius, double cup_height,
                                       double stem_height, double base_radius,
                                       int points) {
  if (cup_radius <= 0.0 || cup_height <= 0.0 || cup_height > cup_radius ||
      stem_height <= 0.0 || base_radius <= 0.0 || points < 10)
    throw ConfigError("wineglass: bad parameters");
  std::vector<Vec3> pts;
  pts.reserve(points);
  const int n_cup = (7 * points) / 10;
  const int n_stem = (3 * points) / 20;
  const int n_base = points - n_cup - n_stem;
  for (const Vec3& p : make_bowl_cloud(cup_radius, cup_height, n_cup))
    pts.emplace_back(p.x(), p.y(), p.z() + stem_height);
  constexpr double kStemRadius = 0.006;
  for (int k = 0; k < n_stem; ++k) {
    const double phi = kGolden * k;
    pts.emplace_back(kStemRadius * std::cos(phi), kStemRadius * std::sin(phi),
                     stem_height * (k + 0.5) / n_stem);
  }
  for (int k = 0; k < n_base; ++k) {
    const double r = base_radius * std::sqrt((k + 0.5) / n_base);
    const double phi = kGolden * k;
    pts.emplace_back(r * std::cos(phi), r * std::sin(phi), 0.003);
  }
  return pts;
}

namespace {

Vec3 vec3_from(const json& j) {
  if (!j.is_array() || j.size() != 3) throw ConfigError("expected [x,y,z] triple");
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

Iso3 pose_from(const json& j) {
  const Vec3 xyz = j.contains("pose_xyz") ? vec3_from(j["pose_xyz"]) : Vec3::Zero();
  const Vec3 rpy = j.contains("pose_rpy") ? vec3_from(j["pose_rpy"]) : Vec3::Zero();
  return transform_from_xyz_rpy(xyz, rpy);
}

std::vector<Vec3> cloud_from(const json& jo, const std::string& base_dir) {
  const std::string source = jo.at("source").get<std::string>();
  const auto colon = source.find(':');
  if (colon == std::string::npos)
    throw ConfigError("cloud source must be proc:NAME, csv:PATH, or f32:PATH");
  const std::string scheme = source.substr(0, colon);
  const std::string rest = source.substr(colon + 1);
  if (scheme == "csv" || scheme == "f32") {
    const std::string path =
        (base_dir.empty() || rest.front() == '/') ? rest : base_dir + "/" + rest;
    return scheme == "csv" ? load_cloud_csv(path) : load_cloud_f32(path);
  }
  if (scheme != "proc") throw ConfigError("unknown cloud source scheme: " + scheme);
  const json params = jo.value("params", json::object());
  const int points = params.value("points", 1500);
  if (rest == "bowl")
    return make_bowl_cloud(params.value("radius", 0.075), params.value("height", 0.055),
                           points);
  if (rest == "dish")
    return make_dish_cloud(params.value("radius", 0.09), params.value("height", 0.02),
                           points);
  if (rest == "mug")
    return make_mug_cloud(params.value("radius", 0.04), params.value("height", 0.09),
                          points);
  if (rest == "wineglass")
    return make_wineglass_cloud(
        params.value("cup_radius", 0.045), params.value("cup_height", 0.04),
        params.value("stem_height", 0.09), params.value("base_radius", 0.035), points);
  throw ConfigError("unknown procedural cloud: " + rest);
}

SdfRole role_from(const std::string& s) {
  if (s == "target") return SdfRole::target;
  if (s == "obstacle") return SdfRole::obstacle;
  if (s == "environment") return SdfRole::environment;
  throw ConfigError("unknown role: " + s);
}

void set_field_param(FieldParams& f, const std::string& key, double v) {
  if (key == "v_const") f.v_const = v;
  else if (key == "delta_x") f.delta_x = v;
  else if (key == "eta_g") f.eta_g = v;
  else if (key == "temp_g") f.temp_g = v;
  else if (key == "eta_h") f.eta_h = v;
  else if (key == "temp_h") f.temp_h = v;
  else if (key == "delta_gr") f.delta_gr = v;
  else if (key == "v_const_gr") f.v_const_gr = v;
  else if (key == "w") f.w = v;
  else throw ConfigError("unknown field parameter: " + key);
}

void set_tracker_param(TrackerParams& t, const std::string& key, double v) {
  if (key == "horizon") t.horizon = v;
  else if (key == "eps_gamma") t.eps_gamma = v;
  else if (key == "eps_target") t.eps_target = v;
  else if (key == "eps_obstacle") t.eps_obstacle = v;
  else if (key == "lambda_reg") t.lambda_reg = v;
  else if (key == "prune_distance") t.prune_distance = v;
  else throw ConfigError("unknown tracker parameter: " + key);
}

}  // namespace

Scene parse_scene(const std::string& json_text, const std::string& base_dir) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("scenario parse error: ") + e.what());
  }
  Scene s;
  try {
    const std::string robot = j.value("robot", "default");
    if (robot == "default") {
      s.robot = make_default_arm_hand();
    } else {
      const std::string path =
          (base_dir.empty() || robot.front() == '/') ? robot : base_dir + "/" + robot;
      s.robot = load_robot_model(path);
    }
    const json& init = j.at("initial_config");
    if (init.is_string()) {
      const auto it = s.robot.named_configs.find(init.get<std::string>());
      if (it == s.robot.named_configs.end())
        throw ConfigError("unknown named config: " + init.get<std::string>());
      s.q0 = it->second;
    } else {
      s.q0.resize(init.size());
      for (int i = 0; i < static_cast<int>(init.size()); ++i)
        s.q0[i] = init[i].get<double>();
    }

    for (const auto& je : j.value("environment", json::array())) {
      SdfObject e;
      e.kind = SdfKind::half_space;
      e.role = SdfRole::environment;
      e.normal = vec3_from(je.at("normal")).normalized();
      e.offset = je.value("offset", 0.0);
      e.name = je.value("name", "half_space");
      s.environment.push_back(e);
    }

    int target_seen = -1;
    for (const auto& jo : j.at("objects")) {
      SdfObject o;
      o.name = jo.value("name", "object");
      o.role = role_from(jo.value("role", "obstacle"));
      o.pose = pose_from(jo);
      const std::string kind = jo.at("kind").get<std::string>();
      if (kind == "superellipsoid") {
        o.kind = SdfKind::superellipsoid;
        o.semi_axes = vec3_from(jo.at("semi_axes"));
        o.e1 = jo.value("e1", 1.0);
        o.e2 = jo.value("e2", 1.0);
      } else if (kind == "cloud") {
        o.kind = SdfKind::point_cloud;
        o.cloud = std::make_shared<IndexedCloud>(cloud_from(jo, base_dir));
      } else {
        throw ConfigError("unknown object kind: " + kind);
      }
      if (o.role == SdfRole::target) {
        target_seen = static_cast<int>(s.objects.size());
        for (const auto& jg : jo.at("grasps")) {
          std::vector<Vec3> g;
          for (const auto& jp : jg) g.push_back(vec3_from(jp));
          s.grasps_object_frame.push_back(g);
        }
      }
      s.objects.push_back(o);
    }
    (void)target_seen;

    for (const auto& jd : j.value("disturbances", json::array())) {
      DisturbanceEvent d;
      d.time = jd.at("time").get<double>();
      const std::string kind = jd.at("kind").get<std::string>();
      if (kind == "object_teleport") {
        d.kind = DisturbanceKind::object_teleport;
        d.object = jd.at("object").get<int>();
        d.new_pose = pose_from(jd);
      } else if (kind == "object_velocity") {
        d.kind = DisturbanceKind::object_velocity;
        d.object = jd.at("object").get<int>();
        d.linear_velocity = vec3_from(jd.at("linear"));
        if (jd.contains("angular")) d.angular_velocity = vec3_from(jd["angular"]);
        d.duration = jd.at("duration").get<double>();
      } else if (kind == "robot_push") {
        d.kind = DisturbanceKind::robot_push;
        d.duration = jd.at("duration").get<double>();
        const json& off = jd.at("qdot_offset");
        d.qdot_offset.resize(off.size());
        for (int i = 0; i < static_cast<int>(off.size()); ++i)
          d.qdot_offset[i] = off[i].get<double>();
      } else {
        throw ConfigError("unknown disturbance kind: " + kind);
      }
      s.disturbances.push_back(d);
    }

    const json jfield = j.value("field_params", json::object());
    for (const auto& [key, val] : jfield.items())
      set_field_param(s.field_params, key, val.get<double>());
    const json jtracker = j.value("tracker_params", json::object());
    for (const auto& [key, val] : jtracker.items())
      set_tracker_param(s.tracker_params, key, val.get<double>());
    s.control_rate = j.value("control_rate", 500.0);
    s.planning_rate = j.value("planning_rate", 100.0);
    s.duration_limit = j.value("duration_limit", 20.0);
    s.seed = j.value("seed", 0u);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("scenario field error: ") + e.what());
  }
  s.field_params.q_gr_nominal = s.robot.selection_matrix() * s.q0;
  s.validate();
  return s;
}

Scene load_scene(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file: " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const auto slash = path.find_last_of('/');
  return parse_scene(text, slash == std::string::npos ? "" : path.substr(0, slash));
}

void apply_override(Scene& scene, const std::string& key, const std::string& value) {
  const auto dot = key.find('.');
  if (dot == std::string::npos)
    throw ConfigError("override key must be section.name: " + key);
  const std::string section = key.substr(0, dot);
  const std::string name = key.substr(dot + 1);
  const double v = std::stod(value);
  if (section == "field") {
    set_field_param(scene.field_params, name, v);
  } else if (section == "tracker") {
    set_tracker_param(scene.tracker_params, name, v);
  } else if (section == "sim") {
    if (name == "duration_limit") scene.duration_limit = v;
    else if (name == "seed") scene.seed = static_cast<unsigned>(v);
    else if (name == "control_rate") scene.control_rate = v;
    else if (name == "planning_rate") scene.planning_rate = v;
    else throw ConfigError("unknown sim parameter: " + name);
  } else {
    throw ConfigError("unknown override section: " + section);
  }
  scene.validate();
}

}  // namespace rgrasp
