#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "canopy/geometry.hpp"
#include "canopy/timeutil.hpp"
#include "canopy/weather.hpp"

namespace canopy {

enum class NodeKind { diffuse, sun };
enum class SkyMode { instantaneous, composite };

const char* to_string(NodeKind kind);

struct SkyNode {
  Vec3 direction;      // unit vector toward the node, ENU
  double zenith = 0.0;   // degrees
  double azimuth = 0.0;  // degrees clockwise from north
  double value = 0.0;    // W m^-2 (instantaneous) or J m^-2 (composite)
  NodeKind kind = NodeKind::diffuse;

  double elevation() const { return 90.0 - zenith; }
};

SkyNode make_node(const Vec3& direction, double value, NodeKind kind);

// Geodesic hemisphere: icosahedron (vertex at the zenith) subdivided at
// `frequency`, projected to the unit sphere and cut at the horizon.
struct Hemisphere {
  int frequency = 1;
  std::vector<Vec3> directions;  // sorted by descending elevation, then azimuth
};

Hemisphere hemisphere_at_frequency(int frequency);

// Smallest subdivision frequency with at least `target_resolution` nodes on
// or above the horizon.
Hemisphere build_hemisphere(std::size_t target_resolution);

struct CieParameters {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double d = 0.0;
  double e = 0.0;
  int sky_type = 0;
};

// CIE standard sky chosen from the diffuse fraction: 12 (clear),
// 11 (white-blue), 7 (partly cloudy), 1 (overcast).
CieParameters cie_parameters(double d_frac);

// Zenith angle clamp inside the luminance gradation, degrees.
inline constexpr double kMaxGradationZenith = 89.5;

// Scattering indicatrix f(chi), chi in radians.
double scattering_indicatrix(double chi, const CieParameters& p);
// Luminance gradation phi(Z), Z in degrees (clamped to kMaxGradationZenith).
double luminance_gradation(double zenith_deg, const CieParameters& p);
// Great-circle angle between the sun and a sky element, radians.
double sun_distance(double node_zenith_deg, double sun_zenith_deg, double azimuth_delta_deg);

double relative_luminance(double node_zenith_deg, double sun_zenith_deg, double azimuth_delta_deg,
                          const CieParameters& p);

// Shares `diffuse_total` over `directions` proportionally to relative
// luminance. The sun zenith is clamped to [0, 90] degrees.
std::vector<double> distribute_diffuse(double diffuse_total, std::span<const Vec3> directions,
                                       const SolarPosition& sun, const CieParameters& p);

struct SkyOptions {
  std::size_t resolution = 19;
  bool dedicated_sun = true;    // false: direct light goes to the nearest diffuse node
  bool include_diffuse = true;  // false: all light in a single sun node
};

struct SkyDome {
  std::vector<SkyNode> nodes;
  std::size_t resolution = 0;  // number of diffuse nodes
  int frequency = 0;
  SkyMode mode = SkyMode::instantaneous;
  Instant start{};
  Instant end{};
  GeoLocation location;

  double total() const;
  double diffuse_total() const;
  std::size_t sun_node_count() const;

  // `azimuth_deg,elevation_deg,value,kind`
  std::string to_csv() const;
};

// Index of the direction with the largest dot product with `target`;
// ties go to the lowest index.
std::size_t nearest_direction(std::span<const Vec3> directions, const Vec3& target);

SkyDome instantaneous_sky(const IrradianceSplit& split, const SolarPosition& sun, const Hemisphere& hemisphere,
                          const SkyOptions& options);
SkyDome instantaneous_sky(const IrradianceSplit& split, const SolarPosition& sun, const SkyOptions& options);

// Convenience: decomposition, solar position and dome for one instant.
SkyDome sky_at(const WeatherSeries& series, Instant t, const SkyOptions& options,
               const DecomposeOptions& decompose_options = {});

// Time integral over [start, end) in steps of `step`; each step is a snapped
// (no dedicated sun) instantaneous sky scaled by the step length in seconds.
SkyDome composite_sky(const WeatherSeries& series, Instant start, Instant end, Seconds step,
                      std::size_t resolution, const DecomposeOptions& decompose_options = {});

// Node-wise sum of two composite domes on the same hemisphere.
SkyDome add_composite(const SkyDome& a, const SkyDome& b);

}  // namespace canopy
