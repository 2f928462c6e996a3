#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "canopy/geometry.hpp"

namespace canopy {

enum class Label : std::uint8_t { branch, foliage };

const char* to_string(Label label);

struct LabeledPoint {
  Vec3 position;  // metres, ENU
  Label label = Label::foliage;
};

struct LabeledCloud {
  std::vector<LabeledPoint> points;
  double ground_z = 0.0;

  // Ground defaults to the 1st percentile of point heights (0 when empty).
  static LabeledCloud from_points(std::vector<LabeledPoint> points, std::optional<double> ground_z = {});

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  // Mean x and y of all points; z is ground_z.
  Vec3 horizontal_centroid() const;
};

double default_ground_z(std::span<const LabeledPoint> points);

// ASCII CSV `x,y,z,label[,energy]`. A leading `# ground_z=<value>` comment
// pins the ground height; otherwise the default rule applies.
LabeledCloud load_cloud(const std::string& path);
LabeledCloud parse_cloud(const std::vector<std::string>& lines);
void save_cloud(const LabeledCloud& cloud, const std::string& path, std::span<const double> energy = {});
std::string cloud_to_csv(const LabeledCloud& cloud, std::span<const double> energy = {});

struct OpticalCoefficients {
  double alpha = 0.0;  // absorbed fraction
  double beta = 0.0;   // transmitted fraction
};

// Branches (0, 0); foliage (1 - beta_f, beta_f). beta_f must lie in (0, 1].
std::vector<OpticalCoefficients> assign_coefficients(const LabeledCloud& cloud, double beta_f);

// Right-handed orthonormal frame whose w axis points back along the ray
// (toward the light source); columns run along w.
struct GridFrame {
  Vec3 u;
  Vec3 v;
  Vec3 w;

  Vec3 to_grid(const Vec3& p) const { return {dot(p, u), dot(p, v), dot(p, w)}; }
};

GridFrame frame_for_ray(const Vec3& ray_direction);

struct Voxel {
  std::int64_t layer = 0;  // index along w; larger is closer to the source
  double alpha = 0.0;      // mean of constituent points
  double beta = 0.0;
  std::uint32_t first_point = 0;  // into VoxelGrid::point_indices
  std::uint32_t weight = 0;       // number of points
};

struct VoxelColumn {
  std::int64_t iu = 0;
  std::int64_t iv = 0;
  std::uint32_t first_voxel = 0;  // voxels stored top-down
  std::uint32_t voxel_count = 0;
};

inline constexpr std::uint32_t kNoVoxel = std::numeric_limits<std::uint32_t>::max();

struct VoxelGrid {
  double voxel_size = 0.0;
  std::size_t min_weight = 0;
  Vec3 ray_direction;   // propagation direction of the light
  GridFrame frame;
  Vec3 origin;          // minimum corner, grid coordinates
  std::vector<VoxelColumn> columns;  // sorted by (iu, iv)
  std::vector<Voxel> voxels;
  std::vector<std::uint32_t> point_indices;
  std::vector<std::uint32_t> point_to_voxel;  // kNoVoxel when filtered out
  std::size_t filtered_points = 0;

  struct Cell {
    std::int64_t iu, iv, layer;
  };
  Cell cell_of(const Vec3& world) const;

  // Column index for (iu, iv), if occupied.
  std::optional<std::size_t> find_column(std::int64_t iu, std::int64_t iv) const;

  std::span<const Voxel> column_voxels(std::size_t c) const {
    return {voxels.data() + columns[c].first_voxel, columns[c].voxel_count};
  }
  std::span<const std::uint32_t> voxel_points(const Voxel& v) const {
    return {point_indices.data() + v.first_point, v.weight};
  }
};

// Bins the cloud into cubes of side s_vox in a frame aligned with the ray,
// drops voxels holding fewer than w_vox points and averages the optical
// coefficients per voxel. Throws EmptyGridError when nothing survives.
VoxelGrid voxelize(const LabeledCloud& cloud, std::span<const OpticalCoefficients> coefficients, double s_vox,
                   std::size_t w_vox, const Vec3& ray_direction);

// Counter-clockwise (seen from above) rotation about the vertical axis
// through the horizontal centroid.
LabeledCloud rotate_about_trunk(const LabeledCloud& cloud, double degrees);

// Translation in the ground plane.
LabeledCloud offset(const LabeledCloud& cloud, double dx, double dy);

}  // namespace canopy
