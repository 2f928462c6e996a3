#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace canopy {

struct PairedSample {
  double measured = 0.0;
  double modelled = 0.0;
  double x = 0.0;  // ground position, metres
  double y = 0.0;
  int dataset = 0;
  int survey = 0;  // one measurement instant within the dataset
};

enum class ResidualMode { perpendicular, vertical };

struct FitReport {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  double rmse = 0.0;  // to the best-fit line, per `residuals`
  double rmse_perpendicular = 0.0;
  double rmse_vertical = 0.0;
  double rmse_identity = 0.0;  // vertical distance to y = x
  std::size_t n = 0;
  ResidualMode residuals = ResidualMode::perpendicular;

  // `m=`, `intercept=`, `r2=`, `rmse=`, ... one key per line.
  std::string to_record() const;
  static FitReport from_record(const std::string& text);
};

// Least squares of modelled on measured. Needs n >= 3 and spread in the
// measured values (std::invalid_argument otherwise). The result does not
// depend on sample order.
FitReport fit(std::vector<PairedSample> pairs, ResidualMode residuals = ResidualMode::perpendicular);

// Replaces every sample by the mean over samples of the same survey inside
// the axis-aligned square of side `window` centred on it (boundary included).
std::vector<PairedSample> window_average(const std::vector<PairedSample>& pairs, double window);

}  // namespace canopy
