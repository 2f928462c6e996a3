#include "canopy/cloud.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "canopy/error.hpp"
#include "canopy/textio.hpp"

namespace canopy {

const char* to_string(Label label) { return label == Label::branch ? "branch" : "foliage"; }

double default_ground_z(std::span<const LabeledPoint> points) {
  if (points.empty()) return 0.0;
  std::vector<double> z(points.size());
  std::transform(points.begin(), points.end(), z.begin(), [](const LabeledPoint& p) { return p.position.z; });
  const auto k = static_cast<std::size_t>(0.01 * static_cast<double>(z.size() - 1));
  std::nth_element(z.begin(), z.begin() + static_cast<std::ptrdiff_t>(k), z.end());
  return z[k];
}

LabeledCloud LabeledCloud::from_points(std::vector<LabeledPoint> points, std::optional<double> ground_z) {
  LabeledCloud c;
  c.ground_z = ground_z ? *ground_z : default_ground_z(points);
  c.points = std::move(points);
  return c;
}

Vec3 LabeledCloud::horizontal_centroid() const {
  if (points.empty()) return {0.0, 0.0, ground_z};
  double sx = 0.0, sy = 0.0;
  for (const auto& p : points) {
    sx += p.position.x;
    sy += p.position.y;
  }
  const double n = static_cast<double>(points.size());
  return {sx / n, sy / n, ground_z};
}

LabeledCloud parse_cloud(const std::vector<std::string>& lines) {
  std::vector<LabeledPoint> points;
  std::optional<double> ground;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto line = textio::trim(lines[i]);
    if (line.empty()) continue;
    if (line.front() == '#') {
      constexpr std::string_view key = "ground_z=";
      const auto body = textio::trim(line.substr(1));
      if (body.starts_with(key)) ground = textio::parse_double(body.substr(key.size()), i + 1);
      continue;
    }
    const auto fields = textio::split_fields(line);
    if (fields.size() >= 4 && fields[0] == "x" && fields[3] == "label") continue;
    if (fields.size() != 4 && fields.size() != 5)
      throw ParseError(i + 1, "expected 'x,y,z,label[,energy]', got " + std::to_string(fields.size()) + " fields");
    LabeledPoint p;
    p.position = {textio::parse_double(fields[0], i + 1), textio::parse_double(fields[1], i + 1),
                  textio::parse_double(fields[2], i + 1)};
    if (!std::isfinite(p.position.x) || !std::isfinite(p.position.y) || !std::isfinite(p.position.z))
      throw ParseError(i + 1, "non-finite coordinate");
    if (fields[3] == "branch") {
      p.label = Label::branch;
    } else if (fields[3] == "foliage") {
      p.label = Label::foliage;
    } else {
      throw ParseError(i + 1, "unknown label '" + std::string(fields[3]) + "' (expected branch or foliage)");
    }
    points.push_back(p);
  }
  return LabeledCloud::from_points(std::move(points), ground);
}

LabeledCloud load_cloud(const std::string& path) {
  try {
    return parse_cloud(textio::read_lines(path));
  } catch (const ParseError& e) {
    throw ParseError(e.line(), path + ": " + e.detail());
  }
}

std::string cloud_to_csv(const LabeledCloud& cloud, std::span<const double> energy) {
  if (!energy.empty() && energy.size() != cloud.size())
    throw std::invalid_argument("energy column length differs from point count");
  std::string out = "# ground_z=" + textio::format_double(cloud.ground_z) + '\n';
  out += energy.empty() ? "x,y,z,label\n" : "x,y,z,label,energy\n";
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto& p = cloud.points[i];
    out += textio::format_double(p.position.x) + ',' + textio::format_double(p.position.y) + ',' +
           textio::format_double(p.position.z) + ',' + to_string(p.label);
    if (!energy.empty()) out += ',' + textio::format_double(energy[i]);
    out += '\n';
  }
  return out;
}

void save_cloud(const LabeledCloud& cloud, const std::string& path, std::span<const double> energy) {
  textio::write_file(path, cloud_to_csv(cloud, energy));
}

std::vector<OpticalCoefficients> assign_coefficients(const LabeledCloud& cloud, double beta_f) {
  if (!(beta_f > 0.0 && beta_f <= 1.0)) throw std::invalid_argument("foliage transmission must lie in (0, 1]");
  std::vector<OpticalCoefficients> out(cloud.size());
  const OpticalCoefficients foliage{1.0 - beta_f, beta_f};
  for (std::size_t i = 0; i < cloud.size(); ++i)
    out[i] = cloud.points[i].label == Label::branch ? OpticalCoefficients{0.0, 0.0} : foliage;
  return out;
}

GridFrame frame_for_ray(const Vec3& ray_direction) {
  const double len = norm(ray_direction);
  if (!(len > 0.0) || !std::isfinite(len)) throw std::invalid_argument("ray direction must be a non-zero vector");
  GridFrame f;
  f.w = -ray_direction * (1.0 / len);
  if (std::abs(f.w.z) > 1.0 - 1e-12) {
    f.w = {0.0, 0.0, f.w.z > 0.0 ? 1.0 : -1.0};
    f.u = {1.0, 0.0, 0.0};
  } else {
    f.u = normalized(cross(Vec3{0.0, 0.0, 1.0}, f.w));
  }
  f.v = cross(f.w, f.u);
  return f;
}

VoxelGrid::Cell VoxelGrid::cell_of(const Vec3& world) const {
  const Vec3 g = frame.to_grid(world) - origin;
  return {static_cast<std::int64_t>(std::floor(g.x / voxel_size)),
          static_cast<std::int64_t>(std::floor(g.y / voxel_size)),
          static_cast<std::int64_t>(std::floor(g.z / voxel_size))};
}

std::optional<std::size_t> VoxelGrid::find_column(std::int64_t iu, std::int64_t iv) const {
  const auto it = std::lower_bound(columns.begin(), columns.end(), std::make_pair(iu, iv),
                                   [](const VoxelColumn& c, const std::pair<std::int64_t, std::int64_t>& key) {
                                     return std::make_pair(c.iu, c.iv) < key;
                                   });
  if (it == columns.end() || it->iu != iu || it->iv != iv) return std::nullopt;
  return static_cast<std::size_t>(it - columns.begin());
}

namespace {

// Sum after sorting so the mean does not depend on point order.
double order_free_mean(std::vector<double>& values) {
  std::sort(values.begin(), values.end());
  double s = 0.0;
  for (double v : values) s += v;
  return s / static_cast<double>(values.size());
}

}  // namespace

VoxelGrid voxelize(const LabeledCloud& cloud, std::span<const OpticalCoefficients> coefficients, double s_vox,
                   std::size_t w_vox, const Vec3& ray_direction) {
  if (!(s_vox > 0.0)) throw std::invalid_argument("voxel size must be positive");
  if (coefficients.size() != cloud.size()) throw std::invalid_argument("one coefficient pair per point required");
  if (cloud.empty()) throw EmptyGridError("cannot voxelize an empty cloud");
  if (cloud.size() >= kNoVoxel) throw std::invalid_argument("cloud too large for 32-bit point indices");

  VoxelGrid grid;
  grid.voxel_size = s_vox;
  grid.min_weight = w_vox;
  grid.frame = frame_for_ray(ray_direction);
  grid.ray_direction = -grid.frame.w;

  const std::size_t n = cloud.size();
  std::vector<Vec3> local(n);
  Vec3 lo{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
          std::numeric_limits<double>::infinity()};
  for (std::size_t i = 0; i < n; ++i) {
    local[i] = grid.frame.to_grid(cloud.points[i].position);
    lo.x = std::min(lo.x, local[i].x);
    lo.y = std::min(lo.y, local[i].y);
    lo.z = std::min(lo.z, local[i].z);
  }
  grid.origin = lo;

  struct Key {
    std::int64_t iu, iv, layer;
    std::uint32_t point;
  };
  std::vector<Key> keys(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3 g = local[i] - lo;
    keys[i] = {static_cast<std::int64_t>(std::floor(g.x / s_vox)), static_cast<std::int64_t>(std::floor(g.y / s_vox)),
               static_cast<std::int64_t>(std::floor(g.z / s_vox)), static_cast<std::uint32_t>(i)};
  }
  // Columns by (iu, iv); within a column top-down (descending layer).
  std::sort(keys.begin(), keys.end(), [](const Key& a, const Key& b) {
    if (a.iu != b.iu) return a.iu < b.iu;
    if (a.iv != b.iv) return a.iv < b.iv;
    if (a.layer != b.layer) return a.layer > b.layer;
    return a.point < b.point;
  });

  grid.point_to_voxel.assign(n, kNoVoxel);
  grid.point_indices.reserve(n);
  std::vector<double> alphas, betas;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && keys[j].iu == keys[i].iu && keys[j].iv == keys[i].iv && keys[j].layer == keys[i].layer) ++j;
    const std::size_t weight = j - i;
    if (weight >= w_vox && weight > 0) {
      Voxel v;
      v.layer = keys[i].layer;
      v.first_point = static_cast<std::uint32_t>(grid.point_indices.size());
      v.weight = static_cast<std::uint32_t>(weight);
      alphas.clear();
      betas.clear();
      const auto voxel_index = static_cast<std::uint32_t>(grid.voxels.size());
      for (std::size_t k = i; k < j; ++k) {
        const std::uint32_t p = keys[k].point;
        grid.point_indices.push_back(p);
        grid.point_to_voxel[p] = voxel_index;
        alphas.push_back(coefficients[p].alpha);
        betas.push_back(coefficients[p].beta);
      }
      v.alpha = order_free_mean(alphas);
      v.beta = order_free_mean(betas);

      if (grid.columns.empty() || grid.columns.back().iu != keys[i].iu || grid.columns.back().iv != keys[i].iv) {
        grid.columns.push_back({keys[i].iu, keys[i].iv, voxel_index, 0});
      }
      ++grid.columns.back().voxel_count;
      grid.voxels.push_back(v);
    } else {
      grid.filtered_points += weight;
    }
    i = j;
  }
  if (grid.voxels.empty())
    throw EmptyGridError("every voxel holds fewer than " + std::to_string(w_vox) + " points");
  return grid;
}

LabeledCloud rotate_about_trunk(const LabeledCloud& cloud, double degrees) {
  if (degrees == 0.0) return cloud;
  const Vec3 c = cloud.horizontal_centroid();
  const double a = deg2rad(degrees);
  const double cs = std::cos(a), sn = std::sin(a);
  LabeledCloud out = cloud;
  for (auto& p : out.points) {
    const double dx = p.position.x - c.x;
    const double dy = p.position.y - c.y;
    p.position.x = c.x + cs * dx - sn * dy;
    p.position.y = c.y + sn * dx + cs * dy;
  }
  return out;
}

LabeledCloud offset(const LabeledCloud& cloud, double dx, double dy) {
  LabeledCloud out = cloud;
  for (auto& p : out.points) {
    p.position.x += dx;
    p.position.y += dy;
  }
  return out;
}

}  // namespace canopy
