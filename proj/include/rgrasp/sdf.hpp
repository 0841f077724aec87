#ifndef RGRASP_SDF_HPP_
#define RGRASP_SDF_HPP_

#include <memory>
#include <string>
#include <vector>

#include "rgrasp/types.hpp"

namespace rgrasp {

struct DistanceResult {
  double value = 0.0;  // meters, negative inside where the kind is signed
  Vec3 gradient = Vec3::Zero();
};

/// Point cloud with a uniform voxel grid for nearest-neighbor queries.
/// Cell size is twice the mean nearest-neighbor spacing of the cloud.
class IndexedCloud {
public:
  explicit IndexedCloud(std::vector<Vec3> points);

  /// Nearest point; ties broken by lowest point index.
  int nearest(const Vec3& query, double* dist_out) const;
  int nearest_linear(const Vec3& query, double* dist_out) const;

  const std::vector<Vec3>& points() const { return points_; }
  double cell_size() const { return cell_; }

private:
  int cell_of(const Vec3& p, int axis) const;

  std::vector<Vec3> points_;
  Vec3 lo_ = Vec3::Zero();
  double cell_ = 0.0;
  int nx_ = 1, ny_ = 1, nz_ = 1;
  std::vector<std::vector<int>> cells_;
};

enum class SdfKind { superellipsoid, point_cloud, half_space };
enum class SdfRole { target, obstacle, environment };

struct SdfObject {
  SdfKind kind = SdfKind::superellipsoid;
  SdfRole role = SdfRole::obstacle;
  Iso3 pose = Iso3::Identity();  // world <- object
  std::string name;

  // superellipsoid
  Vec3 semi_axes = Vec3::Ones();
  double e1 = 1.0, e2 = 1.0;

  // point_cloud (object frame); shared so pose updates can snapshot cheaply
  std::shared_ptr<const IndexedCloud> cloud;

  // half_space: n . x >= offset is free space (object frame)
  Vec3 normal = Vec3::UnitZ();
  double offset = 0.0;

  void validate() const;
};

/// Signed (or unsigned, for point clouds) distance and spatial gradient at a
/// world point. Total function; gradient is unit-norm away from degeneracies.
DistanceResult sdf_eval(const SdfObject& obj, const Vec3& x_world);

std::vector<Vec3> load_cloud_csv(const std::string& path);
std::vector<Vec3> load_cloud_f32(const std::string& path);  // little-endian xyz triplets

}  // namespace rgrasp

#endif  // RGRASP_SDF_HPP_
