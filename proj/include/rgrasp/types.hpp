#ifndef RGRASP_TYPES_HPP_
#define RGRASP_TYPES_HPP_

#include <Eigen/Dense>
#include <limits>
#include <stdexcept>
#include <string>

namespace rgrasp {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;
using Iso3 = Eigen::Isometry3d;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Invalid model/scenario/problem description.
class ConfigError : public std::runtime_error {
public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// [w] such that [w]v = w x v.
inline Mat3 skew(const Vec3& w) {
  Mat3 s;
  s << 0, -w.z(), w.y(), w.z(), 0, -w.x(), -w.y(), w.x(), 0;
  return s;
}

/// Inverse of skew(); expects a skew-symmetric matrix.
inline Vec3 unskew(const Mat3& s) { return Vec3(s(2, 1), s(0, 2), s(1, 0)); }

/// Angle between two vectors in [0, pi].
inline double angle_between(const Vec3& a, const Vec3& b) {
  const double na = a.norm(), nb = b.norm();
  if (na == 0.0 || nb == 0.0) return 0.0;
  const double c = a.dot(b) / (na * nb);
  return std::acos(std::clamp(c, -1.0, 1.0));
}

}  // namespace rgrasp

#endif  // RGRASP_TYPES_HPP_
