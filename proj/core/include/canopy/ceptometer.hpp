#pragma once

#include <optional>
#include <string>
#include <vector>

#include "canopy/radiance.hpp"
#include "canopy/skydome.hpp"
#include "canopy/timeutil.hpp"

namespace canopy {

// W m^-2 to umol s^-1 m^-2 for a fixed solar spectrum.
inline constexpr double kParPerWatt = 1.72;

struct CeptometerReading {
  Instant timestamp;
  double row = 0.0;  // metres along the orchard row
  double col = 0.0;  // metres across the row
  double par = 0.0;  // umol s^-1 m^-2, mean of the probe's sensors
};

// CSV `timestamp_iso8601,row_m,col_m,par_umol`.
std::vector<CeptometerReading> load_readings(const std::string& path);
std::string readings_to_csv(const std::vector<CeptometerReading>& readings);

// Unshaded reference probe logging at one-minute cadence.
class OpenAirLog {
 public:
  struct Entry {
    Instant timestamp;
    double par = 0.0;
  };

  OpenAirLog() = default;
  explicit OpenAirLog(std::vector<Entry> entries);

  // Nearest entry within `tolerance`; CoverageError otherwise.
  double par_at(Instant t, Seconds tolerance = Seconds{60}) const;
  const std::vector<Entry>& entries() const { return entries_; }

  // CSV `timestamp_iso8601,par_umol`.
  static OpenAirLog load_csv(const std::string& path);
  std::string to_csv() const;

 private:
  std::vector<Entry> entries_;
};

// Maps grid coordinates (row, col) to ground-plane positions.
struct CeptometerLayout {
  double origin_x = 0.0;
  double origin_y = 0.0;
  double row_azimuth = 90.0;  // degrees clockwise from north of the +row axis

  Vec3 position(double row, double col) const;
};

double par_from_irradiance(double irradiance);

// Irradiance seen by an unshaded horizontal sensor: sum of value * cos(zenith).
// Throws std::invalid_argument for composite domes.
double open_air_irradiance(const SkyDome& dome);

// model_irr * O_PAR / O_irr, or par_from_irradiance(model_irr) without a log.
double calibrated_par(double model_irradiance, const OpenAirLog* log, Instant t, const SkyDome& dome);

inline constexpr double kDefaultSampleRadius = 0.4;

// Mean projected ground irradiance over cells whose centres lie within
// `radius` of (x, y); the cell under (x, y) when none is in range. Throws
// CoverageError outside the raster.
double sample_virtual(const EnergyField& field, double x, double y, double radius = kDefaultSampleRadius);

}  // namespace canopy
