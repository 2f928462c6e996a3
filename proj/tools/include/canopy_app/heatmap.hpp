#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <canopy/radiance.hpp>
#include <canopy/skydome.hpp>

namespace canopy::app {

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  bool operator==(const Rgb&) const = default;
};

// Black at 0 through purple and orange to pale yellow at 1.
Rgb colour_ramp(double t);

struct Image {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<Rgb> pixels;  // row-major, top row first

  Image(std::size_t w, std::size_t h) : width(w), height(h), pixels(w * h) {}
  Rgb& at(std::size_t x, std::size_t y) { return pixels[y * width + x]; }
  const Rgb& at(std::size_t x, std::size_t y) const { return pixels[y * width + x]; }
  bool blank() const;
  std::string to_ppm() const;  // binary P6
};

// Azimuthal equidistant view of the dome from above: zenith at the centre,
// horizon on the rim, north up, east right. Each pixel takes the value of the
// nearest diffuse node; the sun node is drawn as a white disc.
Image render_dome(const SkyDome& dome, std::size_t size = 256);

// Row-major grid (row 0 = southernmost) scaled to [0, max], north up.
Image render_grid(const std::vector<double>& values, std::size_t nx, std::size_t ny, std::size_t scale);

// Projected ground irradiance, north up; scaled so the long side is at least
// 256 pixels.
Image render_ground(const EnergyField& field);

}  // namespace canopy::app
