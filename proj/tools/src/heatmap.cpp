#include "canopy_app/heatmap.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace canopy::app {

Rgb colour_ramp(double t) {
  static constexpr std::array<std::array<double, 3>, 5> stops = {{
      {0, 0, 0},
      {87, 16, 110},
      {188, 55, 84},
      {249, 142, 9},
      {252, 255, 164},
  }};
  if (!(t > 0.0)) return {};
  t = std::min(t, 1.0) * static_cast<double>(stops.size() - 1);
  const auto i = std::min(static_cast<std::size_t>(t), stops.size() - 2);
  const double f = t - static_cast<double>(i);
  const auto mix = [&](int c) {
    return static_cast<std::uint8_t>(std::lround(stops[i][c] + f * (stops[i + 1][c] - stops[i][c])));
  };
  return {mix(0), mix(1), mix(2)};
}

bool Image::blank() const {
  return std::all_of(pixels.begin(), pixels.end(), [](const Rgb& p) { return p == Rgb{}; });
}

std::string Image::to_ppm() const {
  std::string out = "P6\n" + std::to_string(width) + ' ' + std::to_string(height) + "\n255\n";
  out.reserve(out.size() + pixels.size() * 3);
  for (const auto& p : pixels) {
    out += static_cast<char>(p.r);
    out += static_cast<char>(p.g);
    out += static_cast<char>(p.b);
  }
  return out;
}

Image render_dome(const SkyDome& dome, std::size_t size) {
  Image img(size, size);
  std::vector<Vec3> dirs;
  std::vector<double> values;
  double peak = 0.0;
  for (const auto& n : dome.nodes) {
    if (n.kind != NodeKind::diffuse) continue;
    dirs.push_back(n.direction);
    values.push_back(n.value);
    peak = std::max(peak, n.value);
  }
  const double half = static_cast<double>(size) / 2.0;
  const auto to_disc = [&](std::size_t i) { return (static_cast<double>(i) + 0.5) / half - 1.0; };
  if (peak > 0.0 && !dirs.empty()) {
    for (std::size_t j = 0; j < size; ++j) {
      for (std::size_t i = 0; i < size; ++i) {
        const double x = to_disc(i), y = -to_disc(j);
        const double r = std::hypot(x, y);
        if (r > 1.0) continue;
        const Vec3 d = direction_from_angles(rad2deg(std::atan2(x, y)), 90.0 - 90.0 * r);
        img.at(i, j) = colour_ramp(values[nearest_direction(dirs, d)] / peak);
      }
    }
  }
  for (const auto& n : dome.nodes) {
    if (n.kind != NodeKind::sun || !(n.value > 0.0)) continue;
    const double r = std::clamp(n.zenith / 90.0, 0.0, 1.0);
    const double a = deg2rad(n.azimuth);
    const double cx = (r * std::sin(a) + 1.0) * half, cy = (1.0 - r * std::cos(a)) * half;
    const double disc = std::max(2.0, static_cast<double>(size) / 64.0);
    for (std::size_t j = 0; j < size; ++j)
      for (std::size_t i = 0; i < size; ++i)
        if (std::hypot(static_cast<double>(i) + 0.5 - cx, static_cast<double>(j) + 0.5 - cy) <= disc)
          img.at(i, j) = {255, 255, 255};
  }
  return img;
}

Image render_grid(const std::vector<double>& values, std::size_t nx, std::size_t ny, std::size_t scale) {
  scale = std::max<std::size_t>(scale, 1);
  Image img(nx * scale, ny * scale);
  double peak = 0.0;
  for (double v : values) peak = std::max(peak, v);
  if (!(peak > 0.0)) return img;
  for (std::size_t iy = 0; iy < ny; ++iy) {
    for (std::size_t ix = 0; ix < nx; ++ix) {
      const Rgb c = colour_ramp(values[iy * nx + ix] / peak);
      const std::size_t top = (ny - 1 - iy) * scale;
      for (std::size_t dy = 0; dy < scale; ++dy)
        for (std::size_t dx = 0; dx < scale; ++dx) img.at(ix * scale + dx, top + dy) = c;
    }
  }
  return img;
}

Image render_ground(const EnergyField& field) {
  const std::size_t side = std::max<std::size_t>({field.ground.nx, field.ground.ny, 1});
  const std::size_t scale = std::max<std::size_t>(1, (256 + side - 1) / side);
  return render_grid(field.ground_projected, field.ground.nx, field.ground.ny, scale);
}

}  // namespace canopy::app
