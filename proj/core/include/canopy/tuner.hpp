#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "canopy/ceptometer.hpp"
#include "canopy/cloud.hpp"
#include "canopy/metrics.hpp"
#include "canopy/radiance.hpp"
#include "canopy/skydome.hpp"
#include "canopy/weather.hpp"

namespace canopy {

struct ParameterPoint {
  double beta_f = 0.8;
  double voxel_size = 0.1;
  std::size_t min_weight = 1;
  std::size_t sky_resolution = 19;
  double offset_x = 0.0;
  double offset_y = 0.0;
  bool dedicated_sun = true;

  void validate() const;
};

// One tree with its weather record and a ceptometer survey.
struct Dataset {
  std::string id;
  LabeledCloud cloud;
  WeatherSeries weather;
  std::vector<CeptometerReading> readings;
  std::optional<OpenAirLog> open_air;
  CeptometerLayout layout;
  bool exclude_north = false;  // drop readings north of the cloud centroid
};

struct EvaluationOptions {
  double sample_radius = kDefaultSampleRadius;
  std::size_t workers = 1;  // accumulate workers per evaluation
  DecomposeOptions decompose;
  ResidualMode residuals = ResidualMode::perpendicular;
};

// Exactly one model component swapped out; the default swaps nothing.
struct Substitution {
  Seconds sky_time_shift{0};
  double rotation_deg = 0.0;
  std::optional<bool> dedicated_sun;
  bool include_diffuse = true;
};

// Modelled fields for every measurement instant of every dataset; sampling
// at different ceptometer offsets reuses them.
class PreparedModel {
 public:
  PreparedModel(std::span<const Dataset> datasets, const ParameterPoint& params, const EvaluationOptions& options,
                const Substitution& substitution = {}, double offset_reach = 0.0);

  std::vector<PairedSample> pairs(double dx, double dy) const;

 private:
  struct Survey {
    int dataset = 0;
    Instant time;
    SkyDome dome;
    EnergyField field;
    const OpenAirLog* open_air = nullptr;
    std::vector<CeptometerReading> readings;
    std::vector<Vec3> positions;
  };
  std::vector<Survey> surveys_;
  double radius_;
};

// Moves `cloud` so its horizontal centroid and ground height coincide with
// those of `reference`.
LabeledCloud recentre_onto(const LabeledCloud& cloud, const LabeledCloud& reference);

// Readings that take part in the comparison (north filter applied).
std::vector<CeptometerReading> active_readings(const Dataset& dataset);

struct ExperimentResult {
  std::string label;
  int stage = 0;
  ParameterPoint params;
  FitReport fit;
  double cpu_seconds = 0.0;
  double wall_seconds = 0.0;
};

ExperimentResult evaluate(std::span<const Dataset> datasets, const ParameterPoint& params,
                          const EvaluationOptions& options, const Substitution& substitution = {},
                          std::string label = "baseline");

struct StagePlan {
  ParameterPoint base;
  std::vector<double> beta_values;
  std::vector<double> voxel_sizes;
  std::vector<std::size_t> min_weights;
  std::vector<std::size_t> sky_resolutions;
  bool compare_sun_modes = true;

  // beta 0.50..0.95 step 0.05; s_vox 0.01..0.5 log-spaced; w_vox {0,1,2,4,8};
  // S {19, 121, 315}.
  static StagePlan defaults();
};

struct GridSearchResult {
  std::vector<ExperimentResult> results;  // evaluation order
  ParameterPoint best;

  // Descending R^2; ties keep evaluation order.
  std::vector<ExperimentResult> ranked() const;
};

// Stage 1 sweeps beta_f x s_vox, stage 2 sweeps w_vox with the stage-1
// winner, stage 3 sweeps S with and without a dedicated sun node. Each stage
// keeps the configuration with the highest R^2. `parallel` evaluations run
// concurrently (each single-threaded internally).
GridSearchResult grid_search(std::span<const Dataset> datasets, const StagePlan& plan,
                             const EvaluationOptions& options, std::size_t parallel = 1);

struct OffsetHeatmap {
  double range = 1.0;
  double step = 0.1;
  std::size_t per_axis = 0;
  std::vector<double> rmse;  // row-major, dy outer, dx inner, both ascending
  std::vector<double> r_squared;
  double best_dx = 0.0;
  double best_dy = 0.0;
  FitReport best;

  double offset(std::size_t k) const { return -range + step * static_cast<double>(k); }
  std::string to_csv() const;  // `dx,dy,rmse,r2`
};

// RMSE over translations of the virtual ceptometer grid in [-range, range]^2.
// `step` must divide `range`.
OffsetHeatmap offset_search(std::span<const Dataset> datasets, const ParameterPoint& params,
                            const EvaluationOptions& options, double range = 1.0, double step = 0.1);

enum class AblationKind { none, wrong_cloud, wrong_time, wrong_date, rotation, no_sun_node, no_diffuse };

struct Ablation {
  AblationKind kind = AblationKind::none;
  double rotation_deg = 0.0;

  std::string label() const;
  static Ablation parse(const std::string& text);  // e.g. "rotation(90)"
};

struct AblationInputs {
  // Used for wrong_cloud; otherwise each dataset borrows the next dataset's cloud.
  std::optional<LabeledCloud> alternate_cloud;
  Seconds time_shift{2 * 3600};
  int date_shift_days = 7;
};

ExperimentResult ablate(std::span<const Dataset> datasets, const ParameterPoint& params, const Ablation& ablation,
                        const EvaluationOptions& options, const AblationInputs& inputs = {});

// `beta_f,s_vox,w_vox,S,dx,dy,dedicated_sun,stage,label,m,r2,rmse,n,cpu_seconds`
std::string results_to_csv(std::span<const ExperimentResult> results);

}  // namespace canopy
