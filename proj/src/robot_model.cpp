#include "rgrasp/robot_model.hpp"

#include <fstream>
#include <json.hpp>
#include <set>

namespace rgrasp {

using nlohmann::json;

MatX RobotModel::selection_matrix() const {
  MatX s = MatX::Zero(static_cast<int>(gripper_joint_indices.size()), dof());
  for (int r = 0; r < static_cast<int>(gripper_joint_indices.size()); ++r)
    s(r, gripper_joint_indices[r]) = 1.0;
  return s;
}

std::vector<int> RobotModel::chain_to(int joint) const {
  std::vector<int> chain;
  for (int j = joint; j >= 0; j = joints[j].parent) chain.push_back(j);
  std::reverse(chain.begin(), chain.end());
  return chain;
}

void RobotModel::validate() const {
  const int n = dof();
  if (n == 0) throw ConfigError("robot model has no joints");
  for (int j = 0; j < n; ++j) {
    if (joints[j].parent >= j)
      throw ConfigError("joint parents must precede children");
    if (std::abs(joints[j].axis.norm() - 1.0) > 1e-9)
      throw ConfigError("joint axis must be unit-norm: " + joints[j].name);
  }
  std::set<int> gr(gripper_joint_indices.begin(), gripper_joint_indices.end());
  if (gr.size() != gripper_joint_indices.size())
    throw ConfigError("duplicate gripper joint index");
  for (int g : gripper_joint_indices)
    if (g < 0 || g >= n) throw ConfigError("gripper joint index out of range");
  for (const auto& f : fingertip_frames)
    if (f.parent_joint < 0 || f.parent_joint >= n)
      throw ConfigError("fingertip parent joint out of range");
  for (const auto& s : collision_spheres) {
    if (s.radius <= 0.0) throw ConfigError("collision sphere radius must be > 0");
    if (s.parent_joint < -1 || s.parent_joint >= n)
      throw ConfigError("collision sphere parent out of range");
  }
  if (q_min.size() != n || q_max.size() != n || qd_min.size() != n || qd_max.size() != n)
    throw ConfigError("limit vectors must have length n");
  if (((q_max - q_min).array() <= 0.0).any())
    throw ConfigError("q_min must be < q_max elementwise");
  for (const auto& [name, q] : named_configs)
    if (q.size() != n) throw ConfigError("named config '" + name + "' has wrong length");
}

Iso3 transform_from_xyz_rpy(const Vec3& xyz, const Vec3& rpy) {
  Iso3 t = Iso3::Identity();
  t.translation() = xyz;
  t.linear() = (Eigen::AngleAxisd(rpy.z(), Vec3::UnitZ()) *
                Eigen::AngleAxisd(rpy.y(), Vec3::UnitY()) *
                Eigen::AngleAxisd(rpy.x(), Vec3::UnitX()))
                   .toRotationMatrix();
  return t;
}

namespace {

Vec3 vec3_from(const json& j) {
  if (!j.is_array() || j.size() != 3) throw ConfigError("expected [x,y,z] triple");
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

Iso3 origin_from(const json& j) {
  Vec3 xyz = j.contains("origin_xyz") ? vec3_from(j["origin_xyz"]) : Vec3::Zero();
  Vec3 rpy = j.contains("origin_rpy") ? vec3_from(j["origin_rpy"]) : Vec3::Zero();
  return transform_from_xyz_rpy(xyz, rpy);
}

VecX vecx_from(const json& j) {
  VecX v(j.size());
  for (int i = 0; i < static_cast<int>(j.size()); ++i) v[i] = j[i].get<double>();
  return v;
}

}  // namespace

RobotModel parse_robot_model(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("robot file parse error: ") + e.what());
  }
  RobotModel m;
  try {
    for (const auto& jj : j.at("joints")) {
      JointDesc d;
      d.parent = jj.value("parent", -1);
      d.origin = origin_from(jj);
      d.axis = vec3_from(jj.at("axis")).normalized();
      d.name = jj.value("name", "");
      m.joints.push_back(d);
    }
    for (const auto& jf : j.at("fingertips")) {
      FrameAttachment f;
      f.parent_joint = jf.at("parent").get<int>();
      f.offset = origin_from(jf);
      f.name = jf.value("name", "");
      m.fingertip_frames.push_back(f);
    }
    for (const auto& js : j.at("collision_spheres")) {
      CollisionSphere s;
      s.parent_joint = js.at("parent").get<int>();
      s.center_local = vec3_from(js.at("center"));
      s.radius = js.at("radius").get<double>();
      s.on_hand = js.value("on_hand", false);
      m.collision_spheres.push_back(s);
    }
    for (const auto& g : j.at("gripper_joints")) m.gripper_joint_indices.push_back(g.get<int>());
    const auto& lim = j.at("limits");
    m.q_min = vecx_from(lim.at("q_min"));
    m.q_max = vecx_from(lim.at("q_max"));
    m.qd_min = vecx_from(lim.at("qd_min"));
    m.qd_max = vecx_from(lim.at("qd_max"));
    if (j.contains("named_configs"))
      for (const auto& [name, q] : j["named_configs"].items())
        m.named_configs[name] = vecx_from(q);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("robot file field error: ") + e.what());
  }
  m.validate();
  return m;
}

RobotModel load_robot_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open robot file: " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_robot_model(text);
}

namespace {

JointDesc make_joint(int parent, const Vec3& xyz, const Vec3& axis, const std::string& name) {
  JointDesc d;
  d.parent = parent;
  d.origin = transform_from_xyz_rpy(xyz, Vec3::Zero());
  d.axis = axis;
  d.name = name;
  return d;
}

}  // namespace

RobotModel make_default_arm_hand() {
  RobotModel m;
  const Vec3 x = Vec3::UnitX(), y = Vec3::UnitY(), z = Vec3::UnitZ();

  // 7-DoF arm, axes z-y-z-y-z-y-z, base on the table plane z = 0.
  m.joints.push_back(make_joint(-1, {0, 0, 0.15}, z, "arm_0"));
  m.joints.push_back(make_joint(0, {0, 0, 0.15}, y, "arm_1"));
  m.joints.push_back(make_joint(1, {0, 0, 0.22}, z, "arm_2"));
  m.joints.push_back(make_joint(2, {0, 0, 0.18}, y, "arm_3"));
  m.joints.push_back(make_joint(3, {0, 0, 0.20}, z, "arm_4"));
  m.joints.push_back(make_joint(4, {0, 0, 0.16}, y, "arm_5"));
  m.joints.push_back(make_joint(5, {0, 0, 0.10}, z, "arm_6"));

  // Two 4-DoF fingers on the palm (joint 6). Finger 0 sits at +y, finger 1
  // at -y; flexion axes are mirrored so positive flexion curls both inward.
  for (int f = 0; f < 2; ++f) {
    const double s = (f == 0) ? 1.0 : -1.0;
    const Vec3 flex = s * x;
    const std::string p = "finger" + std::to_string(f) + "_";
    const int base = static_cast<int>(m.joints.size());
    m.joints.push_back(make_joint(6, {0, s * 0.045, 0.05}, z, p + "0"));
    m.joints.push_back(make_joint(base, {0, 0, 0.015}, flex, p + "1"));
    m.joints.push_back(make_joint(base + 1, {0, 0, 0.045}, flex, p + "2"));
    m.joints.push_back(make_joint(base + 2, {0, 0, 0.035}, flex, p + "3"));

    FrameAttachment tip;
    tip.parent_joint = base + 3;
    // Contact bisector R^x + R^y points toward the opposing finger.
    tip.offset = transform_from_xyz_rpy({0, 0, 0.032},
                                        {0, 0, s > 0 ? -3 * M_PI / 4 : M_PI / 4});
    tip.name = p + "tip";
    m.fingertip_frames.push_back(tip);
  }
  m.gripper_joint_indices = {7, 8, 9, 10, 11, 12, 13, 14};

  auto sph = [&m](int parent, double cz, double r, bool hand = false) {
    m.collision_spheres.push_back({parent, Vec3(0, 0, cz), r, hand});
  };
  sph(-1, 0.08, 0.07);
  sph(0, 0.07, 0.06);
  sph(1, 0.07, 0.06);
  sph(1, 0.15, 0.06);
  sph(2, 0.06, 0.055);
  sph(2, 0.13, 0.055);
  sph(3, 0.07, 0.055);
  sph(3, 0.14, 0.055);
  sph(4, 0.05, 0.05);
  sph(4, 0.11, 0.05);
  sph(5, 0.05, 0.05);
  sph(6, 0.03, 0.045, true);
  for (int f = 0; f < 2; ++f) {
    const int base = 7 + 4 * f;
    sph(base, 0.010, 0.012, true);
    sph(base + 1, 0.022, 0.011, true);
    sph(base + 2, 0.018, 0.010, true);
    sph(base + 3, 0.014, 0.009, true);
    sph(base + 3, 0.030, 0.008, true);  // fingertip pad
  }

  const int n = 15;
  m.q_min = VecX::Zero(n);
  m.q_max = VecX::Zero(n);
  for (int i = 0; i < 7; ++i) {
    const bool pitch = (i % 2 == 1);
    m.q_min[i] = pitch ? -2.1 : -2.9;
    m.q_max[i] = pitch ? 2.1 : 2.9;
  }
  for (int f = 0; f < 2; ++f) {
    const int base = 7 + 4 * f;
    m.q_min[base] = -1.5;
    m.q_max[base] = 1.5;
    for (int i = 1; i < 4; ++i) {
      m.q_min[base + i] = -1.2;
      m.q_max[base + i] = 1.8;
    }
  }
  m.qd_min = VecX::Zero(n);
  m.qd_max = VecX::Zero(n);
  for (int i = 0; i < 7; ++i) {
    m.qd_max[i] = 2.5;
    m.qd_min[i] = -2.5;
  }
  for (int i = 7; i < 15; ++i) {
    m.qd_max[i] = 4.0;
    m.qd_min[i] = -4.0;
  }

  // Initial poses used by the shipped scenarios; tuned on the model above.
  auto cfg = [n](std::initializer_list<double> arm, std::initializer_list<double> hand) {
    VecX q(n);
    int i = 0;
    for (double v : arm) q[i++] = v;
    for (int f = 0; f < 2; ++f)
      for (double v : hand) q[i++] = v;
    return q;
  };
  m.named_configs["center_up"] = cfg({0.0, 0.45, 0.0, 1.15, 0.0, 0.65, 0.0}, {0.0, -0.25, 0.05, 0.05});
  m.named_configs["left_bottom"] = cfg({0.65, 0.85, 0.0, 1.35, 0.0, 0.85, 0.0}, {0.0, -0.25, 0.05, 0.05});
  m.named_configs["right_bottom"] = cfg({-0.65, 0.85, 0.0, 1.35, 0.0, 0.85, 0.0}, {0.0, -0.25, 0.05, 0.05});

  m.validate();
  return m;
}

}  // namespace rgrasp
