#ifndef RGRASP_FIELDS_HPP_
#define RGRASP_FIELDS_HPP_

#include "rgrasp/path_opt.hpp"

namespace rgrasp {

struct FieldParams {
  double v_const = 0.25;   // m/s, fingertip speed cap
  double delta_x = 0.08;   // m, speed-modulation threshold
  double eta_g = 0.2;      // rad, stability threshold
  double temp_g = 0.1;     // rad, alpha smoothness
  double eta_h = 0.12;     // m, gripper-weight threshold
  double temp_h = 0.04;    // m, beta smoothness
  double delta_gr = 0.3;   // rad, gripper speed threshold
  double v_const_gr = 0.5;  // rad/s, gripper speed cap
  double w = 0.1;          // m/rad, target-selection metric weight
  VecX q_gr_nominal;       // nominal gripper posture, n_gr
  MatX gain;               // K for the linear baseline, SPD

  void validate() const;
};

struct VelocityTargets {
  std::vector<Vec3> xdot_des;   // per fingertip, m/s
  std::vector<Vec3> omega_des;  // per fingertip, rad/s
  VecX qdot_gr_des;             // rad/s
  double alpha = 0.0, beta = 0.0;
  int selected_target = -1;
  std::vector<Vec3> x_star;  // selected fingertip targets, world frame
};

/// Argmin over candidates of sum_i ||x_i - x_i*|| plus, for two fingertips,
/// w * angle(x2-x1, x2*-x1*). Candidates are stacked 3m-vectors.
int select_target(const VecX& x, const std::vector<VecX>& candidates, double w);

/// v_const above delta, quadratic easing to zero at the target below it.
double speed_profile(double e, double v_const, double delta);

/// Speed-profiled velocity along the optimized path's initial direction.
Vec3 fingertip_field(const PathSolution& path, const Vec3& x, const Vec3& x_star,
                     const FieldParams& params);

struct StabilityResult {
  double g = 0.0;                 // rad, mean misalignment angle
  Mat3 dg_dR1 = Mat3::Zero();     // gradient matrices for Eq.-style unskew use
  Mat3 dg_dR2 = Mat3::Zero();
  bool degenerate = false;        // coincident fingertips
};

/// Mean of the two contact-bisector misalignment angles plus numerical
/// gradients with respect to each fingertip rotation.
StabilityResult stability_score(const Vec3& x1, const Mat3& r1, const Vec3& x2,
                                const Mat3& r2);

/// omega = -unskew(skew-part(dg_dR * R^T)); first-order descent on g.
Vec3 orientation_field(const Mat3& dg_dR, const Mat3& r);

/// 1/2 + 1/2 tanh((value - eta) / temp); used for both alpha and beta.
double sigmoid_weight(double value, double eta, double temp);
inline double weight_alpha(double g, double eta_g, double temp_g) {
  return sigmoid_weight(g, eta_g, temp_g);
}
inline double weight_beta(double h, double eta_h, double temp_h) {
  return sigmoid_weight(h, eta_h, temp_h);
}

/// Speed-profiled drive of the gripper joints toward the nominal posture.
VecX gripper_field(const VecX& q_gr, const VecX& q_gr_star, double delta_gr,
                   double v_const_gr);

/// Baseline planner: xdot = K (x* - x) on the stacked fingertip positions.
VecX linear_baseline(const VecX& x, const VecX& x_star, const MatX& gain);

}  // namespace rgrasp

#endif  // RGRASP_FIELDS_HPP_
