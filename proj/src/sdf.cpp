#include "rgrasp/sdf.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace rgrasp {

namespace {
constexpr double kTiny = 1e-12;
}

IndexedCloud::IndexedCloud(std::vector<Vec3> points) : points_(std::move(points)) {
  if (points_.empty()) throw ConfigError("point cloud is empty");
  Vec3 lo = points_[0], hi = points_[0];
  for (const Vec3& p : points_) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  lo_ = lo;

  // Mean nearest-neighbor spacing by direct scan; construction-time only.
  double mean_nn = 0.0;
  if (points_.size() > 1) {
    for (size_t i = 0; i < points_.size(); ++i) {
      double best = kInf;
      for (size_t j = 0; j < points_.size(); ++j)
        if (j != i) best = std::min(best, (points_[i] - points_[j]).squaredNorm());
      mean_nn += std::sqrt(best);
    }
    mean_nn /= static_cast<double>(points_.size());
  }
  cell_ = std::max(2.0 * mean_nn, 1e-6);

  const Vec3 extent = hi - lo;
  auto dim = [this](double e) {
    return std::max(1, static_cast<int>(std::floor(e / cell_)) + 1);
  };
  nx_ = dim(extent.x());
  ny_ = dim(extent.y());
  nz_ = dim(extent.z());
  while (static_cast<long>(nx_) * ny_ * nz_ > 2'000'000) {
    cell_ *= 2.0;
    nx_ = dim(extent.x());
    ny_ = dim(extent.y());
    nz_ = dim(extent.z());
  }
  cells_.assign(static_cast<size_t>(nx_) * ny_ * nz_, {});
  for (int i = 0; i < static_cast<int>(points_.size()); ++i) {
    const int cx = std::clamp(cell_of(points_[i], 0), 0, nx_ - 1);
    const int cy = std::clamp(cell_of(points_[i], 1), 0, ny_ - 1);
    const int cz = std::clamp(cell_of(points_[i], 2), 0, nz_ - 1);
    cells_[(static_cast<size_t>(cx) * ny_ + cy) * nz_ + cz].push_back(i);
  }
}

int IndexedCloud::cell_of(const Vec3& p, int axis) const {
  return static_cast<int>(std::floor((p[axis] - lo_[axis]) / cell_));
}

int IndexedCloud::nearest_linear(const Vec3& query, double* dist_out) const {
  int best = 0;
  double best_d2 = (points_[0] - query).squaredNorm();
  for (int i = 1; i < static_cast<int>(points_.size()); ++i) {
    const double d2 = (points_[i] - query).squaredNorm();
    if (d2 < best_d2) {
      best_d2 = d2;
      best = i;
    }
  }
  if (dist_out) *dist_out = std::sqrt(best_d2);
  return best;
}

int IndexedCloud::nearest(const Vec3& query, double* dist_out) const {
  const int qx = cell_of(query, 0), qy = cell_of(query, 1), qz = cell_of(query, 2);
  const int max_ring =
      std::max({std::max(qx, nx_ - 1 - qx), std::max(qy, ny_ - 1 - qy),
                std::max(qz, nz_ - 1 - qz)}) +
      1;
  int best = -1;
  double best_d2 = kInf;
  for (int ring = 0; ring <= max_ring; ++ring) {
    // Any point in a cell at Chebyshev cell-distance `ring` is at least
    // (ring - 1) * cell away from the query.
    if (best >= 0) {
      const double lb = (ring - 1) * cell_;
      if (lb > 0.0 && lb * lb > best_d2) break;
    }
    const int x0 = std::max(qx - ring, 0), x1 = std::min(qx + ring, nx_ - 1);
    const int y0 = std::max(qy - ring, 0), y1 = std::min(qy + ring, ny_ - 1);
    const int z0 = std::max(qz - ring, 0), z1 = std::min(qz + ring, nz_ - 1);
    for (int cx = x0; cx <= x1; ++cx)
      for (int cy = y0; cy <= y1; ++cy)
        for (int cz = z0; cz <= z1; ++cz) {
          const int cheb = std::max({std::abs(cx - qx), std::abs(cy - qy), std::abs(cz - qz)});
          if (cheb != ring) continue;
          for (int idx : cells_[(static_cast<size_t>(cx) * ny_ + cy) * nz_ + cz]) {
            const double d2 = (points_[idx] - query).squaredNorm();
            if (d2 < best_d2 || (d2 == best_d2 && idx < best)) {
              best_d2 = d2;
              best = idx;
            }
          }
        }
  }
  if (dist_out) *dist_out = std::sqrt(best_d2);
  return best;
}

void SdfObject::validate() const {
  switch (kind) {
    case SdfKind::superellipsoid:
      if ((semi_axes.array() <= 0.0).any()) throw ConfigError("semi-axes must be > 0");
      if (e1 <= 0.0 || e1 > 2.0 || e2 <= 0.0 || e2 > 2.0)
        throw ConfigError("superellipsoid exponents must lie in (0, 2]");
      break;
    case SdfKind::point_cloud:
      if (!cloud || cloud->points().empty()) throw ConfigError("point cloud missing or empty");
      break;
    case SdfKind::half_space:
      if (std::abs(normal.norm() - 1.0) > 1e-9)
        throw ConfigError("half-space normal must be unit-norm");
      break;
  }
}

namespace {

DistanceResult superellipsoid_distance(const SdfObject& obj, const Vec3& p) {
  const double a = obj.semi_axes.x(), b = obj.semi_axes.y(), c = obj.semi_axes.z();
  const double e1 = obj.e1, e2 = obj.e2;
  const double r = p.norm();
  if (r < kTiny) return {-obj.semi_axes.minCoeff(), Vec3::UnitZ()};

  const double ux = std::pow(std::abs(p.x()) / a, 2.0 / e2);
  const double uy = std::pow(std::abs(p.y()) / b, 2.0 / e2);
  const double uz = std::pow(std::abs(p.z()) / c, 2.0 / e1);
  const double w = std::max(ux + uy, kTiny);
  const double f = std::pow(w, e2 / e1) + uz;

  // Radial scaling: beta * p lies on the surface; exact for spheres.
  const double beta = std::pow(std::max(f, kTiny), -e1 / 2.0);
  const double value = r * (1.0 - beta);

  Vec3 grad_f;
  grad_f.x() = (2.0 / e1) * std::pow(w, e2 / e1 - 1.0) *
               std::pow(std::abs(p.x()) / a, 2.0 / e2 - 1.0) *
               (p.x() >= 0 ? 1.0 : -1.0) / a;
  grad_f.y() = (2.0 / e1) * std::pow(w, e2 / e1 - 1.0) *
               std::pow(std::abs(p.y()) / b, 2.0 / e2 - 1.0) *
               (p.y() >= 0 ? 1.0 : -1.0) / b;
  grad_f.z() = (2.0 / e1) * std::pow(std::abs(p.z()) / c, 2.0 / e1 - 1.0) *
               (p.z() >= 0 ? 1.0 : -1.0) / c;

  // Analytic gradient of the radial-approximation value (exact unit normal
  // on spheres, near-unit otherwise).
  Vec3 grad = (p / r) * (1.0 - beta) + r * (e1 / 2.0) *
                                           std::pow(std::max(f, kTiny), -e1 / 2.0 - 1.0) *
                                           grad_f;
  if (grad.norm() < kTiny) grad = p / r;
  return {value, grad};
}

}  // namespace

DistanceResult sdf_eval(const SdfObject& obj, const Vec3& x_world) {
  const Vec3 p = obj.pose.inverse() * x_world;
  DistanceResult res;
  switch (obj.kind) {
    case SdfKind::superellipsoid:
      res = superellipsoid_distance(obj, p);
      break;
    case SdfKind::point_cloud: {
      double d = 0.0;
      const int idx = obj.cloud->nearest(p, &d);
      res.value = d;  // unsigned; the sign inside thin shells is ignored
      res.gradient = d > kTiny ? Vec3((p - obj.cloud->points()[idx]) / d) : Vec3::Zero();
      break;
    }
    case SdfKind::half_space:
      res.value = obj.normal.dot(p) - obj.offset;
      res.gradient = obj.normal;
      break;
  }
  res.gradient = obj.pose.linear() * res.gradient;
  return res;
}

std::vector<Vec3> load_cloud_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open cloud file: " + path);
  std::vector<Vec3> pts;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    double x, y, z;
    if (std::sscanf(line.c_str(), "%lf %lf %lf", &x, &y, &z) == 3)
      pts.emplace_back(x, y, z);
  }
  if (pts.empty()) throw ConfigError("no points parsed from " + path);
  return pts;
}

std::vector<Vec3> load_cloud_f32(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open cloud file: " + path);
  std::vector<Vec3> pts;
  float buf[3];
  while (in.read(reinterpret_cast<char*>(buf), sizeof(buf)))
    pts.emplace_back(buf[0], buf[1], buf[2]);
  if (pts.empty()) throw ConfigError("no points parsed from " + path);
  return pts;
}

}  // namespace rgrasp
