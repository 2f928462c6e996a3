#pragma once

#include <chrono>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "canopy/timeutil.hpp"

namespace canopy {

struct GeoLocation {
  double latitude = 0.0;         // degrees, +N
  double longitude = 0.0;        // degrees, +E
  double timezone_offset = 0.0;  // hours from UTC, used for the local calendar day

  // Throws std::invalid_argument when out of range.
  void validate() const;
};

struct WeatherSample {
  Instant timestamp;
  double global_irradiance = 0.0;  // W m^-2 on the horizontal
};

// Time-ordered global irradiance records at one location.
class WeatherSeries {
 public:
  WeatherSeries() = default;
  // Throws std::invalid_argument unless timestamps are strictly increasing
  // and irradiance is non-negative.
  WeatherSeries(GeoLocation location, std::vector<WeatherSample> samples);

  const GeoLocation& location() const noexcept { return location_; }
  std::span<const WeatherSample> samples() const noexcept { return samples_; }
  bool empty() const noexcept { return samples_.empty(); }

  // Linear interpolation in time. Throws CoverageError outside the series.
  double irradiance_at(Instant t) const;

  // Samples whose local calendar day is `day`.
  std::span<const WeatherSample> day_samples(std::chrono::sys_days day) const;

  // Union of two series; on equal timestamps `this` wins.
  WeatherSeries merged(const WeatherSeries& other) const;

  // CSV with header `timestamp_iso8601,global_wm2`.
  static WeatherSeries load_csv(const std::string& path, const GeoLocation& location);
  std::string to_csv() const;

 private:
  GeoLocation location_;
  std::vector<WeatherSample> samples_;
};

struct SolarPosition {
  double azimuth = 0.0;    // degrees clockwise from true north
  double elevation = 0.0;  // degrees above horizon
  double zenith = 90.0;    // 90 - elevation
};

// NOAA solar calculator (Meeus low-precision ephemeris). Geometric position,
// no refraction correction; below-horizon results have negative elevation.
SolarPosition solar_position(const GeoLocation& location, Instant t);

// Equation-of-time correction in minutes for day of year `n`:
// 9.87 sin(2B) - 7.67 sin(B + 78.7), B = 360 (n - 81) / 365 degrees.
double equation_of_time_minutes(int n);

// Apparent solar time in decimal hours, wrapped to [0, 24).
double apparent_solar_time(Instant t, const GeoLocation& location);

// Extraterrestrial normal irradiance for day of year n in [1, 366].
// Throws std::out_of_range otherwise.
double extraterrestrial_irradiance(int n);

inline constexpr double kSolarConstant = 1370.0;

// Terms of the logistic diffuse-fraction model.
struct DiffuseFractionInputs {
  double clearness = 0.0;            // k_t
  double daily_clearness = 0.0;      // K_t
  double persistence = 0.0;          // phi
  double apparent_solar_time = 0.0;  // hours
  double solar_elevation = 0.0;      // degrees
};

double diffuse_fraction(const DiffuseFractionInputs& in);

struct IrradianceSplit {
  double diffuse_fraction = 1.0;
  double direct = 0.0;
  double diffuse = 0.0;
  double clearness = 0.0;
  double daily_clearness = 0.0;
  double persistence = 0.0;

  double global() const { return direct + diffuse; }
};

// Splits `global` so that direct + diffuse == global.
IrradianceSplit split_global(double global, double d_frac);

struct DecomposeOptions {
  // Project H0 onto the horizontal (H0 sin(elevation)) when forming k_t and
  // K_t. Off by default: H0 is used as the normal-incidence value.
  bool horizontal_extraterrestrial = false;
};

// Direct/diffuse decomposition of the global irradiance at `t`.
// Throws CoverageError when the local day holds no samples or `t` lies
// outside the series.
IrradianceSplit decompose(const WeatherSeries& series, Instant t, const DecomposeOptions& options = {});

// Daily global exposure in MJ m^-2 keyed by local calendar day.
using DailyExposure = std::map<std::chrono::sys_days, double>;

// CSV with header `date_iso8601,exposure_mj_m2`.
DailyExposure load_daily_exposure(const std::string& path);

// Fills days that are present in `daily` but absent from `overlap` with a
// scaled copy of the mean diurnal profile of the days present in both. The
// result holds only the synthesized days. Throws CoverageError when no day
// overlaps.
WeatherSeries synthesize_from_daily(const DailyExposure& daily, const WeatherSeries& overlap,
                                    Seconds cadence = Seconds{1800});

}  // namespace canopy
