#pragma once

#include <canopy/cloud.hpp>
#include <canopy/skydome.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <tuple>
#include <vector>

// Naive reference for per-point absorbed light: bins points toward each node
// with its own frame arithmetic, then for every point steps layer by layer
// toward the source multiplying the mean transmission of occupied cells.
namespace oracle {

struct Bin {
  std::size_t count = 0;
  double alpha_sum = 0.0;
  double beta_sum = 0.0;
};

inline std::vector<double> march(const canopy::LabeledCloud& cloud,
                                 const std::vector<canopy::OpticalCoefficients>& coefficients,
                                 const canopy::SkyDome& dome, double s, std::size_t w) {
  using Key = std::tuple<long long, long long, long long>;
  std::vector<double> out(cloud.size(), 0.0);
  for (const auto& node : dome.nodes) {
    const double len = std::sqrt(node.direction.x * node.direction.x + node.direction.y * node.direction.y +
                                 node.direction.z * node.direction.z);
    double wx = node.direction.x / len, wy = node.direction.y / len, wz = node.direction.z / len;
    double ux, uy, uz;
    if (std::abs(wz) > 1.0 - 1e-12) {
      wx = 0.0;
      wy = 0.0;
      wz = wz > 0.0 ? 1.0 : -1.0;
      ux = 1.0;
      uy = 0.0;
      uz = 0.0;
    } else {
      const double h = std::sqrt(wx * wx + wy * wy);
      ux = -wy / h;
      uy = wx / h;
      uz = 0.0;
    }
    const double vx = wy * uz - wz * uy, vy = wz * ux - wx * uz, vz = wx * uy - wy * ux;

    std::vector<std::array<double, 3>> q(cloud.size());
    double lo[3] = {1e300, 1e300, 1e300};
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      const auto& p = cloud.points[i].position;
      q[i] = {p.x * ux + p.y * uy + p.z * uz, p.x * vx + p.y * vy + p.z * vz, p.x * wx + p.y * wy + p.z * wz};
      for (int a = 0; a < 3; ++a) lo[a] = std::min(lo[a], q[i][a]);
    }
    std::vector<Key> cell(cloud.size());
    std::map<Key, Bin> bins;
    long long top = 0;
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      cell[i] = {static_cast<long long>(std::floor((q[i][0] - lo[0]) / s)),
                 static_cast<long long>(std::floor((q[i][1] - lo[1]) / s)),
                 static_cast<long long>(std::floor((q[i][2] - lo[2]) / s))};
      auto& b = bins[cell[i]];
      ++b.count;
      b.alpha_sum += coefficients[i].alpha;
      b.beta_sum += coefficients[i].beta;
      top = std::max(top, std::get<2>(cell[i]));
    }
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      const Bin& own = bins.at(cell[i]);
      if (own.count < w || own.count == 0) continue;
      double light = node.value;
      const auto [iu, iv, layer] = cell[i];
      for (long long l = layer + 1; l <= top; ++l) {
        const auto it = bins.find({iu, iv, l});
        if (it == bins.end() || it->second.count < w) continue;
        light *= it->second.beta_sum / static_cast<double>(it->second.count);
      }
      out[i] += own.alpha_sum / static_cast<double>(own.count) * light;
    }
  }
  return out;
}

}  // namespace oracle
