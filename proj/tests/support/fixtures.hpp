#pragma once

#include <canopy/cloud.hpp>
#include <canopy/skydome.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

namespace fixtures {

inline canopy::SkyDome single_node(const canopy::Vec3& direction, double value) {
  canopy::SkyDome d;
  d.nodes.push_back(canopy::make_node(canopy::normalized(direction), value, canopy::NodeKind::sun));
  return d;
}

inline canopy::SkyDome random_dome(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> az(0.0, 360.0), el(10.0, 90.0), val(10.0, 500.0);
  canopy::SkyDome d;
  for (std::size_t i = 0; i < n; ++i)
    d.nodes.push_back(
        canopy::make_node(canopy::direction_from_angles(az(rng), el(rng)), val(rng), canopy::NodeKind::diffuse));
  return d;
}

// n^3 lattice starting 1 m above the ground, each point jittered by up to
// 20% of the spacing.
inline canopy::LabeledCloud jittered_lattice(std::mt19937_64& rng, int n, double spacing, double branch_share) {
  std::uniform_real_distribution<double> jitter(-0.2 * spacing, 0.2 * spacing), pick(0.0, 1.0);
  std::vector<canopy::LabeledPoint> pts;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        pts.push_back({{i * spacing + jitter(rng), j * spacing + jitter(rng), 1.0 + k * spacing + jitter(rng)},
                       pick(rng) < branch_share ? canopy::Label::branch : canopy::Label::foliage});
  return canopy::LabeledCloud::from_points(std::move(pts), 0.0);
}

inline double rel_diff(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300});
}

}  // namespace fixtures
