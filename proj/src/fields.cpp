#include "rgrasp/fields.hpp"

namespace rgrasp {

void FieldParams::validate() const {
  if (v_const <= 0.0 || delta_x <= 0.0 || temp_g <= 0.0 || temp_h <= 0.0 ||
      delta_gr <= 0.0 || v_const_gr <= 0.0 || w < 0.0)
    throw ConfigError("field parameters must be positive");
  if (gain.size()) {
    if (gain.rows() != gain.cols() ||
        (gain - gain.transpose()).cwiseAbs().maxCoeff() > 1e-9)
      throw ConfigError("baseline gain must be symmetric");
    Eigen::LLT<MatX> llt(gain);
    if (llt.info() != Eigen::Success)
      throw ConfigError("baseline gain must be positive definite");
  }
}

int select_target(const VecX& x, const std::vector<VecX>& candidates, double w) {
  if (candidates.empty()) throw ConfigError("select_target: no candidates");
  const int m = static_cast<int>(x.size()) / 3;
  if (x.size() != 3 * m || m < 1) throw ConfigError("select_target: bad x size");

  int best = 0;
  double best_metric = kInf;
  for (int k = 0; k < static_cast<int>(candidates.size()); ++k) {
    const VecX& c = candidates[k];
    if (c.size() != x.size())
      throw ConfigError("select_target: candidate size mismatch");
    double metric = 0.0;
    for (int i = 0; i < m; ++i)
      metric += (x.segment<3>(3 * i) - c.segment<3>(3 * i)).norm();
    if (m == 2) {
      const Vec3 axis = x.segment<3>(3) - x.segment<3>(0);
      const Vec3 axis_star = c.segment<3>(3) - c.segment<3>(0);
      metric += w * angle_between(axis, axis_star);
    }
    if (metric < best_metric) {  // strict: ties keep the lowest index
      best_metric = metric;
      best = k;
    }
  }
  return best;
}

double speed_profile(double e, double v_const, double delta) {
  if (e >= delta) return v_const;
  const double u = 1.0 - e / delta;
  return v_const * (1.0 - u * u);
}

Vec3 fingertip_field(const PathSolution& path, const Vec3& x, const Vec3& x_star,
                     const FieldParams& params) {
  if ((path.waypoints.col(0) - x).norm() > 1e-6 ||
      (path.waypoints.col(path.waypoints.cols() - 1) - x_star).norm() > 1e-6)
    throw ConfigError("fingertip_field: path endpoints do not match (x, x*)");
  if (path.degenerate_direction) return Vec3::Zero();
  return speed_profile((x - x_star).norm(), params.v_const, params.delta_x) *
         path.initial_direction;
}

namespace {

double score_of(const Vec3& x1, const Mat3& r1, const Vec3& x2, const Mat3& r2) {
  const Vec3 b1 = r1.col(0) + r1.col(1);  // contact bisector R^x + R^y
  const Vec3 b2 = r2.col(0) + r2.col(1);
  return 0.5 * (angle_between(x2 - x1, b1) + angle_between(x1 - x2, b2));
}

// Right-generator central difference: d_k = dg/dtheta_k for R <- R exp([e_k t]).
Vec3 generator_gradient(const Vec3& x1, const Mat3& r1, const Vec3& x2,
                        const Mat3& r2, int which) {
  constexpr double h = 1e-5;
  Vec3 d;
  for (int k = 0; k < 3; ++k) {
    Vec3 axis = Vec3::Zero();
    axis[k] = 1.0;
    const Mat3 dplus = Eigen::AngleAxisd(h, axis).toRotationMatrix();
    const Mat3 dminus = Eigen::AngleAxisd(-h, axis).toRotationMatrix();
    double gp, gm;
    if (which == 0) {
      gp = score_of(x1, r1 * dplus, x2, r2);
      gm = score_of(x1, r1 * dminus, x2, r2);
    } else {
      gp = score_of(x1, r1, x2, r2 * dplus);
      gm = score_of(x1, r1, x2, r2 * dminus);
    }
    d[k] = (gp - gm) / (2.0 * h);
  }
  return d;
}

}  // namespace

StabilityResult stability_score(const Vec3& x1, const Mat3& r1, const Vec3& x2,
                                const Mat3& r2) {
  StabilityResult res;
  if ((x2 - x1).norm() < 1e-9) {
    res.degenerate = true;
    return res;
  }
  res.g = score_of(x1, r1, x2, r2);
  // Package the generator gradient d as D = [R d] R so that
  // unskew(skew-part(D R^T)) = R d, the world-frame ascent direction.
  const Vec3 d1 = generator_gradient(x1, r1, x2, r2, 0);
  const Vec3 d2 = generator_gradient(x1, r1, x2, r2, 1);
  res.dg_dR1 = skew(r1 * d1) * r1;
  res.dg_dR2 = skew(r2 * d2) * r2;
  return res;
}

Vec3 orientation_field(const Mat3& dg_dR, const Mat3& r) {
  const Mat3 m = dg_dR * r.transpose();
  return -unskew(0.5 * (m - m.transpose()));
}

double sigmoid_weight(double value, double eta, double temp) {
  return 0.5 + 0.5 * std::tanh((value - eta) / temp);
}

VecX gripper_field(const VecX& q_gr, const VecX& q_gr_star, double delta_gr,
                   double v_const_gr) {
  if (q_gr.size() != q_gr_star.size())
    throw ConfigError("gripper_field: size mismatch");
  const VecX delta = q_gr_star - q_gr;
  const double dist = delta.norm();
  if (dist < 1e-12) return VecX::Zero(q_gr.size());
  return speed_profile(dist, v_const_gr, delta_gr) * delta / dist;
}

VecX linear_baseline(const VecX& x, const VecX& x_star, const MatX& gain) {
  if (gain.rows() != x.size() || gain.cols() != x.size() ||
      x_star.size() != x.size())
    throw ConfigError("linear_baseline: size mismatch");
  return gain * (x_star - x);
}

}  // namespace rgrasp
