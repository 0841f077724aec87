#include <doctest.h>

#include <random>

#include "rgrasp/kinematics.hpp"

using namespace rgrasp;

namespace {

RobotModel single_joint_model(double link_len) {
  RobotModel m;
  JointDesc j;
  j.parent = -1;
  j.origin = Iso3::Identity();
  j.axis = Vec3::UnitZ();
  m.joints.push_back(j);
  FrameAttachment tip;
  tip.parent_joint = 0;
  tip.offset = transform_from_xyz_rpy({link_len, 0, 0}, Vec3::Zero());
  m.fingertip_frames.push_back(tip);
  m.collision_spheres.push_back({-1, Vec3(0, 0, 0.1), 0.05, false});
  m.collision_spheres.push_back({0, Vec3(link_len, 0, 0), 0.02, false});
  m.q_min = VecX::Constant(1, -3.0);
  m.q_max = VecX::Constant(1, 3.0);
  m.qd_min = VecX::Constant(1, -1.0);
  m.qd_max = VecX::Constant(1, 1.0);
  return m;
}

RobotModel random_chain_model(std::mt19937& rng, int n) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  RobotModel m;
  for (int j = 0; j < n; ++j) {
    JointDesc d;
    d.parent = j - 1;
    d.origin = transform_from_xyz_rpy({0.1 * u(rng), 0.1 * u(rng), 0.1 + 0.05 * u(rng)},
                                      {0.3 * u(rng), 0.3 * u(rng), 0.3 * u(rng)});
    d.axis = Vec3(u(rng), u(rng), 1.0 + 0.2 * u(rng)).normalized();
    m.joints.push_back(d);
  }
  FrameAttachment tip;
  tip.parent_joint = n - 1;
  tip.offset = transform_from_xyz_rpy({0.05, 0.01, 0.03}, {0.2, -0.1, 0.4});
  m.fingertip_frames.push_back(tip);
  m.collision_spheres.push_back({n / 2, Vec3(0.02, 0.01, 0.05), 0.03, false});
  m.q_min = VecX::Constant(n, -3.0);
  m.q_max = VecX::Constant(n, 3.0);
  m.qd_min = VecX::Constant(n, -2.0);
  m.qd_max = VecX::Constant(n, 2.0);
  return m;
}

// Independent oracle: explicit 4x4 homogeneous-transform chain product.
Eigen::Matrix4d fk_oracle(const RobotModel& m, const VecX& q, int tip_index) {
  Eigen::Matrix4d t = Eigen::Matrix4d::Identity();
  for (int j : m.chain_to(m.fingertip_frames[tip_index].parent_joint)) {
    Eigen::Matrix4d off = Eigen::Matrix4d::Identity();
    off.topLeftCorner<3, 3>() = m.joints[j].origin.linear();
    off.topRightCorner<3, 1>() = m.joints[j].origin.translation();
    Eigen::Matrix4d rot = Eigen::Matrix4d::Identity();
    rot.topLeftCorner<3, 3>() =
        Eigen::AngleAxisd(q[j], m.joints[j].axis).toRotationMatrix();
    t = t * off * rot;
  }
  Eigen::Matrix4d off = Eigen::Matrix4d::Identity();
  off.topLeftCorner<3, 3>() = m.fingertip_frames[tip_index].offset.linear();
  off.topRightCorner<3, 1>() = m.fingertip_frames[tip_index].offset.translation();
  return t * off;
}

VecX random_q(const RobotModel& m, std::mt19937& rng) {
  std::uniform_real_distribution<double> u(-1.2, 1.2);
  VecX q(m.dof());
  for (int i = 0; i < m.dof(); ++i) q[i] = u(rng);
  return q;
}

}  // namespace

TEST_CASE("FK: zero configuration composes fixed offsets") {
  const RobotModel m = single_joint_model(0.3);
  auto st = forward_kinematics(m, VecX::Zero(1));
  CHECK(st.fingertips[0].position.isApprox(Vec3(0.3, 0, 0), 1e-12));
  CHECK(st.fingertips[0].rotation.isApprox(Mat3::Identity(), 1e-12));
  CHECK(st.sphere_centers[0].isApprox(Vec3(0, 0, 0.1), 1e-12));
}

TEST_CASE("FK: planar rotation about z") {
  const RobotModel m = single_joint_model(0.3);
  auto st = forward_kinematics(m, VecX::Constant(1, M_PI / 2));
  CHECK((st.fingertips[0].position - Vec3(0, 0.3, 0)).norm() < 1e-12);
}

TEST_CASE("FK: dimension mismatch throws") {
  const RobotModel m = single_joint_model(0.3);
  CHECK_THROWS_AS(forward_kinematics(m, VecX::Zero(2)), ConfigError);
}

TEST_CASE("FK matches homogeneous-transform product oracle on random 15-DoF chains") {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const RobotModel m = random_chain_model(rng, 15);
    const VecX q = random_q(m, rng);
    auto st = forward_kinematics(m, q);
    const Eigen::Matrix4d t = fk_oracle(m, q, 0);
    CHECK((st.fingertips[0].position - t.topRightCorner<3, 1>()).norm() < 1e-10);
    CHECK((st.fingertips[0].rotation - t.topLeftCorner<3, 3>()).norm() < 1e-10);
    const Mat3 r = st.fingertips[0].rotation;
    CHECK((r.transpose() * r - Mat3::Identity()).norm() < 1e-9);
    CHECK(r.determinant() == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("FK is pure: bit-identical repeated evaluation") {
  const RobotModel m = make_default_arm_hand();
  const VecX q = m.named_configs.at("center_up");
  auto a = forward_kinematics(m, q);
  auto b = forward_kinematics(m, q);
  for (int i = 0; i < m.num_fingertips(); ++i) {
    CHECK(a.fingertips[i].position == b.fingertips[i].position);
    CHECK(a.fingertips[i].rotation == b.fingertips[i].rotation);
  }
  for (size_t i = 0; i < a.sphere_centers.size(); ++i)
    CHECK(a.sphere_centers[i] == b.sphere_centers[i]);
}

TEST_CASE("Jacobian: textbook single-joint geometric columns") {
  const RobotModel m = single_joint_model(0.4);
  auto st = forward_kinematics(m, VecX::Zero(1));
  auto jac = fingertip_jacobians(m, st);
  CHECK((jac[0].linear.col(0) - Vec3(0, 0.4, 0)).norm() < 1e-12);
  CHECK((jac[0].angular.col(0) - Vec3(0, 0, 1)).norm() < 1e-12);
}

TEST_CASE("Jacobian: off-chain gripper joints have zero columns") {
  const RobotModel m = make_default_arm_hand();
  std::mt19937 rng(3);
  const VecX q = random_q(m, rng);
  auto st = forward_kinematics(m, q);
  auto jac = fingertip_jacobians(m, st);
  // Finger 1's joints (11..14) do not move finger 0's tip, and vice versa.
  for (int j = 11; j <= 14; ++j) {
    CHECK(jac[0].linear.col(j).norm() == 0.0);
    CHECK(jac[0].angular.col(j).norm() == 0.0);
  }
  for (int j = 7; j <= 10; ++j) {
    CHECK(jac[1].linear.col(j).norm() == 0.0);
    CHECK(jac[1].angular.col(j).norm() == 0.0);
  }
}

TEST_CASE("Jacobians match central finite differences") {
  std::mt19937 rng(11);
  const double eps = 1e-6;
  for (int trial = 0; trial < 10; ++trial) {
    const RobotModel m =
        (trial % 2 == 0) ? make_default_arm_hand() : random_chain_model(rng, 12);
    const VecX q = random_q(m, rng);
    auto st = forward_kinematics(m, q);
    auto jac = fingertip_jacobians(m, st);
    for (int i = 0; i < m.num_fingertips(); ++i) {
      for (int j = 0; j < m.dof(); ++j) {
        VecX qp = q, qm = q;
        qp[j] += eps;
        qm[j] -= eps;
        auto stp = forward_kinematics(m, qp);
        auto stm = forward_kinematics(m, qm);
        const Vec3 fd =
            (stp.fingertips[i].position - stm.fingertips[i].position) / (2 * eps);
        const double scale = std::max(1e-3, fd.norm());
        CHECK((fd - jac[i].linear.col(j)).norm() / scale < 1e-5);
      }
    }
  }
}

TEST_CASE("Angular Jacobian: Rdot R^T is skew and unskews to J^R qdot") {
  std::mt19937 rng(19);
  const RobotModel m = make_default_arm_hand();
  const double eps = 1e-6;
  for (int trial = 0; trial < 20; ++trial) {
    const VecX q = random_q(m, rng);
    VecX qd = random_q(m, rng);
    qd.normalize();
    auto st = forward_kinematics(m, q);
    auto jac = fingertip_jacobians(m, st);
    auto stp = forward_kinematics(m, q + eps * qd);
    auto stm = forward_kinematics(m, q - eps * qd);
    for (int i = 0; i < m.num_fingertips(); ++i) {
      const Mat3 rdot = (stp.fingertips[i].rotation - stm.fingertips[i].rotation) / (2 * eps);
      const Mat3 wr = rdot * st.fingertips[i].rotation.transpose();
      CHECK((wr + wr.transpose()).norm() < 1e-6);
      const Vec3 omega = unskew(0.5 * (wr - wr.transpose()));
      CHECK((omega - Vec3(jac[i].angular * qd)).norm() < 1e-5);
    }
  }
}

TEST_CASE("point_jacobian: base sphere is zero, fingertip-coincident sphere matches J^x") {
  RobotModel m = single_joint_model(0.4);
  // Add a sphere exactly at the fingertip origin.
  m.collision_spheres.push_back({0, Vec3(0.4, 0, 0), 0.01, false});
  std::mt19937 rng(5);
  const VecX q = random_q(m, rng);
  auto st = forward_kinematics(m, q);
  auto jac = fingertip_jacobians(m, st);
  CHECK(point_jacobian(m, st, 0).norm() == 0.0);
  CHECK((point_jacobian(m, st, 2) - jac[0].linear).norm() < 1e-12);
}

TEST_CASE("point_jacobian matches central finite differences") {
  std::mt19937 rng(23);
  const RobotModel m = make_default_arm_hand();
  const double eps = 1e-6;
  for (int trial = 0; trial < 5; ++trial) {
    const VecX q = random_q(m, rng);
    auto st = forward_kinematics(m, q);
    for (int si = 0; si < static_cast<int>(m.collision_spheres.size()); si += 3) {
      const MatX jac = point_jacobian(m, st, si);
      for (int j = 0; j < m.dof(); ++j) {
        VecX qp = q, qm = q;
        qp[j] += eps;
        qm[j] -= eps;
        const Vec3 fd = (forward_kinematics(m, qp).sphere_centers[si] -
                         forward_kinematics(m, qm).sphere_centers[si]) /
                        (2 * eps);
        const double scale = std::max(1e-3, fd.norm());
        CHECK((fd - Vec3(jac.col(j))).norm() / scale < 1e-5);
      }
    }
  }
}
