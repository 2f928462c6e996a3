#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "canopy/tuner.hpp"

// Synthetic trees, weather and ceptometer surveys for self-consistency
// experiments. Every generator is deterministic for a given seed.
namespace canopy::scene {

// Bundaberg, Queensland; UTC+10.
GeoLocation orchard_location();

// Points on a cubic lattice inside a sphere, all labelled branch.
LabeledCloud opaque_ball(const Vec3& centre, double radius, double spacing);

// Random foliage points in a spherical shell.
LabeledCloud foliage_shell(const Vec3& centre, double outer_radius, double thickness, double density,
                           std::uint64_t seed);

// Trunk plus an L-shaped crown with arms toward +x and -y; strongly
// asymmetric under rotation about the trunk.
LabeledCloud l_canopy(const Vec3& base, double density, std::uint64_t seed);

// Trunk plus a spherical crown whose bottom sits 1.2 m above the base.
LabeledCloud round_tree(const Vec3& base, double density, std::uint64_t seed, double crown_radius = 1.1);

// Flat crown made of small foliage clumps separated by gaps.
LabeledCloud dappled_canopy(const Vec3& base, double clump_radius, std::uint64_t seed);

// Clear-sky global irradiance tau * H0 * sin(elevation) for `days` local
// days starting at `first_day`.
WeatherSeries clear_sky_series(const GeoLocation& location, std::chrono::sys_days first_day, int days,
                               double transmittance = 0.75, Seconds cadence = Seconds{1800});

struct SurveySpec {
  CeptometerLayout layout;
  int rows = 8;
  int cols = 6;
  double row_spacing = 1.0;
  double col_spacing = 0.8;
  std::vector<Instant> times;
};

struct TruthModel {
  ParameterPoint params;      // offsets are the planted ceptometer misalignment
  double noise_sd = 0.0;      // additive, umol s^-1 m^-2
  double position_jitter = 0.0;  // metres, uniform in [-j, j] per reading
  double sample_radius = kDefaultSampleRadius;
  std::uint64_t seed = 1;
};

// Builds a dataset whose readings are the engine's own predictions under
// `truth`, plus noise. The open-air log equals kParPerWatt times the open-air
// irradiance of the truth sky.
Dataset synthesize_dataset(const std::string& id, const LabeledCloud& cloud, const WeatherSeries& weather,
                           const SurveySpec& survey, const TruthModel& truth);

}  // namespace canopy::scene
