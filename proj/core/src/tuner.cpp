#include "canopy/tuner.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <ctime>
#include <limits>
#include <map>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "canopy/error.hpp"
#include "canopy/textio.hpp"

namespace canopy {

void ParameterPoint::validate() const {
  if (!(beta_f > 0.0 && beta_f <= 1.0)) throw std::invalid_argument("beta_f must lie in (0, 1]");
  if (!(voxel_size > 0.0)) throw std::invalid_argument("s_vox must be positive");
  if (sky_resolution < 1) throw std::invalid_argument("sky resolution must be >= 1");
  if (!std::isfinite(offset_x) || !std::isfinite(offset_y)) throw std::invalid_argument("offset must be finite");
}

LabeledCloud recentre_onto(const LabeledCloud& cloud, const LabeledCloud& reference) {
  const Vec3 from = cloud.horizontal_centroid();
  const Vec3 to = reference.horizontal_centroid();
  LabeledCloud out = offset(cloud, to.x - from.x, to.y - from.y);
  const double dz = reference.ground_z - cloud.ground_z;
  for (auto& p : out.points) p.position.z += dz;
  out.ground_z = reference.ground_z;
  return out;
}

std::vector<CeptometerReading> active_readings(const Dataset& dataset) {
  if (!dataset.exclude_north) return dataset.readings;
  const double north_limit = dataset.cloud.horizontal_centroid().y;
  std::vector<CeptometerReading> out;
  for (const auto& r : dataset.readings)
    if (dataset.layout.position(r.row, r.col).y <= north_limit) out.push_back(r);
  return out;
}

PreparedModel::PreparedModel(std::span<const Dataset> datasets, const ParameterPoint& params,
                             const EvaluationOptions& options, const Substitution& substitution, double offset_reach)
    : radius_(options.sample_radius) {
  params.validate();
  const SkyOptions sky_options{params.sky_resolution, substitution.dedicated_sun.value_or(params.dedicated_sun),
                               substitution.include_diffuse};
  for (std::size_t d = 0; d < datasets.size(); ++d) {
    const Dataset& ds = datasets[d];
    const LabeledCloud cloud =
        substitution.rotation_deg != 0.0 ? rotate_about_trunk(ds.cloud, substitution.rotation_deg) : ds.cloud;
    const auto coefficients = assign_coefficients(cloud, params.beta_f);

    std::map<Instant, std::vector<CeptometerReading>> by_time;
    for (const auto& r : active_readings(ds)) by_time[r.timestamp].push_back(r);

    for (auto& [time, readings] : by_time) {
      Survey s;
      s.dataset = static_cast<int>(d);
      s.time = time;
      s.open_air = ds.open_air ? &*ds.open_air : nullptr;
      s.readings = std::move(readings);
      double x_lo = std::numeric_limits<double>::infinity(), x_hi = -x_lo, y_lo = x_lo, y_hi = -x_lo;
      for (const auto& r : s.readings) {
        const Vec3 p = ds.layout.position(r.row, r.col);
        s.positions.push_back(p);
        x_lo = std::min(x_lo, p.x + params.offset_x);
        x_hi = std::max(x_hi, p.x + params.offset_x);
        y_lo = std::min(y_lo, p.y + params.offset_y);
        y_hi = std::max(y_hi, p.y + params.offset_y);
      }
      const double pad = radius_ + offset_reach + params.voxel_size;
      AccumulateOptions acc;
      acc.workers = options.workers;
      acc.ground = make_ground(x_lo - pad, x_hi + pad, y_lo - pad, y_hi + pad, cloud.ground_z, params.voxel_size);
      s.dome = sky_at(ds.weather, time + substitution.sky_time_shift, sky_options, options.decompose);
      s.field = accumulate(cloud, coefficients, s.dome, params.voxel_size, params.min_weight, acc);
      surveys_.push_back(std::move(s));
    }
  }
}

std::vector<PairedSample> PreparedModel::pairs(double dx, double dy) const {
  std::vector<PairedSample> out;
  for (std::size_t k = 0; k < surveys_.size(); ++k) {
    const Survey& s = surveys_[k];
    for (std::size_t i = 0; i < s.readings.size(); ++i) {
      const Vec3& p = s.positions[i];
      const double irr = sample_virtual(s.field, p.x + dx, p.y + dy, radius_);
      PairedSample ps;
      ps.measured = s.readings[i].par;
      ps.modelled = calibrated_par(irr, s.open_air, s.time, s.dome);
      ps.x = p.x;
      ps.y = p.y;
      ps.dataset = s.dataset;
      ps.survey = static_cast<int>(k);
      out.push_back(ps);
    }
  }
  return out;
}

namespace {

double thread_cpu_seconds() {
  timespec ts{};
  clock_gettime(CLOCK_THREAD_CPUTIME_ID, &ts);
  return static_cast<double>(ts.tv_sec) + 1e-9 * static_cast<double>(ts.tv_nsec);
}

double process_cpu_seconds() {
  timespec ts{};
  clock_gettime(CLOCK_PROCESS_CPUTIME_ID, &ts);
  return static_cast<double>(ts.tv_sec) + 1e-9 * static_cast<double>(ts.tv_nsec);
}

ExperimentResult evaluate_timed(std::span<const Dataset> datasets, const ParameterPoint& params,
                                const EvaluationOptions& options, const Substitution& substitution, std::string label,
                                bool per_thread_clock) {
  const auto cpu = per_thread_clock ? thread_cpu_seconds : process_cpu_seconds;
  const double cpu0 = cpu();
  const auto wall0 = std::chrono::steady_clock::now();
  ExperimentResult r;
  r.label = std::move(label);
  r.params = params;
  const PreparedModel model(datasets, params, options, substitution);
  r.fit = fit(model.pairs(params.offset_x, params.offset_y), options.residuals);
  r.cpu_seconds = cpu() - cpu0;
  r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0).count();
  return r;
}

// Evaluates `points` with up to `parallel` concurrent single-threaded runs;
// results keep the order of `points`.
std::vector<ExperimentResult> evaluate_all(std::span<const Dataset> datasets, const std::vector<ParameterPoint>& points,
                                           const EvaluationOptions& options, int stage, std::size_t parallel) {
  std::vector<ExperimentResult> out(points.size());
  const std::string label = "stage" + std::to_string(stage);
  if (parallel <= 1 || points.size() <= 1) {
    for (std::size_t i = 0; i < points.size(); ++i)
      out[i] = evaluate_timed(datasets, points[i], options, {}, label, false);
  } else {
    EvaluationOptions single = options;
    single.workers = 1;
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex mutex;
    {
      std::vector<std::jthread> pool;
      for (std::size_t w = 0; w < std::min(parallel, points.size()); ++w) {
        pool.emplace_back([&] {
          for (std::size_t i = next++; i < points.size(); i = next++) {
            try {
              out[i] = evaluate_timed(datasets, points[i], single, {}, label, true);
            } catch (...) {
              std::lock_guard lock(mutex);
              if (!failure) failure = std::current_exception();
            }
          }
        });
      }
    }
    if (failure) std::rethrow_exception(failure);
  }
  for (auto& r : out) r.stage = stage;
  return out;
}

std::size_t best_index(std::span<const ExperimentResult> results) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < results.size(); ++i)
    if (results[i].fit.r_squared > results[best].fit.r_squared) best = i;
  return best;
}

}  // namespace

ExperimentResult evaluate(std::span<const Dataset> datasets, const ParameterPoint& params,
                          const EvaluationOptions& options, const Substitution& substitution, std::string label) {
  return evaluate_timed(datasets, params, options, substitution, std::move(label), false);
}

StagePlan StagePlan::defaults() {
  StagePlan plan;
  for (int k = 0; k < 10; ++k) plan.beta_values.push_back(0.5 + 0.05 * k);
  for (int k = 0; k < 7; ++k) plan.voxel_sizes.push_back(0.01 * std::pow(50.0, k / 6.0));
  plan.min_weights = {0, 1, 2, 4, 8};
  plan.sky_resolutions = {19, 121, 315};
  return plan;
}

std::vector<ExperimentResult> GridSearchResult::ranked() const {
  std::vector<ExperimentResult> out = results;
  std::stable_sort(out.begin(), out.end(), [](const ExperimentResult& a, const ExperimentResult& b) {
    return a.fit.r_squared > b.fit.r_squared;
  });
  return out;
}

GridSearchResult grid_search(std::span<const Dataset> datasets, const StagePlan& plan,
                             const EvaluationOptions& options, std::size_t parallel) {
  if (datasets.empty()) throw std::invalid_argument("grid search needs at least one dataset");
  GridSearchResult out;
  ParameterPoint best = plan.base;

  const auto run_stage = [&](int stage, const std::vector<ParameterPoint>& points) {
    if (points.empty()) return;
    auto results = evaluate_all(datasets, points, options, stage, parallel);
    best = results[best_index(results)].params;
    out.results.insert(out.results.end(), results.begin(), results.end());
  };

  std::vector<ParameterPoint> stage1;
  const std::vector<double> betas = plan.beta_values.empty() ? std::vector<double>{best.beta_f} : plan.beta_values;
  const std::vector<double> sizes =
      plan.voxel_sizes.empty() ? std::vector<double>{best.voxel_size} : plan.voxel_sizes;
  for (double b : betas) {
    for (double s : sizes) {
      ParameterPoint p = best;
      p.beta_f = b;
      p.voxel_size = s;
      stage1.push_back(p);
    }
  }
  run_stage(1, stage1);

  std::vector<ParameterPoint> stage2;
  for (std::size_t w : plan.min_weights) {
    ParameterPoint p = best;
    p.min_weight = w;
    stage2.push_back(p);
  }
  run_stage(2, stage2);

  std::vector<ParameterPoint> stage3;
  for (std::size_t s : plan.sky_resolutions) {
    for (bool sun : {true, false}) {
      if (!plan.compare_sun_modes && sun != plan.base.dedicated_sun) continue;
      ParameterPoint p = best;
      p.sky_resolution = s;
      p.dedicated_sun = sun;
      stage3.push_back(p);
    }
  }
  run_stage(3, stage3);

  out.best = best;
  return out;
}

std::string OffsetHeatmap::to_csv() const {
  std::string out = "dx,dy,rmse,r2\n";
  for (std::size_t j = 0; j < per_axis; ++j) {
    for (std::size_t i = 0; i < per_axis; ++i) {
      const std::size_t k = j * per_axis + i;
      out += textio::format_double(offset(i)) + ',' + textio::format_double(offset(j)) + ',' +
             textio::format_double(rmse[k]) + ',' + textio::format_double(r_squared[k]) + '\n';
    }
  }
  return out;
}

OffsetHeatmap offset_search(std::span<const Dataset> datasets, const ParameterPoint& params,
                            const EvaluationOptions& options, double range, double step) {
  if (!(step > 0.0) || !(range >= 0.0)) throw std::invalid_argument("offset range/step must be positive");
  const double ratio = range / step;
  if (std::abs(ratio - std::round(ratio)) > 1e-6) throw std::invalid_argument("offset step must divide the range");

  OffsetHeatmap map;
  map.range = range;
  map.step = step;
  map.per_axis = 2 * static_cast<std::size_t>(std::llround(ratio)) + 1;
  ParameterPoint centred = params;
  centred.offset_x = centred.offset_y = 0.0;
  const PreparedModel model(datasets, centred, options, {}, range);

  double best_rmse = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < map.per_axis; ++j) {
    for (std::size_t i = 0; i < map.per_axis; ++i) {
      const FitReport f = fit(model.pairs(map.offset(i), map.offset(j)), options.residuals);
      map.rmse.push_back(f.rmse);
      map.r_squared.push_back(f.r_squared);
      if (f.rmse < best_rmse) {
        best_rmse = f.rmse;
        map.best_dx = map.offset(i);
        map.best_dy = map.offset(j);
        map.best = f;
      }
    }
  }
  return map;
}

std::string Ablation::label() const {
  switch (kind) {
    case AblationKind::none: return "baseline";
    case AblationKind::wrong_cloud: return "wrong_cloud";
    case AblationKind::wrong_time: return "wrong_time";
    case AblationKind::wrong_date: return "wrong_date";
    case AblationKind::rotation: return "rotation(" + textio::format_double(rotation_deg) + ")";
    case AblationKind::no_sun_node: return "no_sun_node";
    case AblationKind::no_diffuse: return "no_diffuse";
  }
  return "unknown";
}

Ablation Ablation::parse(const std::string& text) {
  const std::string_view t = textio::trim(text);
  if (t == "baseline" || t == "none") return {AblationKind::none, 0.0};
  if (t == "wrong_cloud") return {AblationKind::wrong_cloud, 0.0};
  if (t == "wrong_time") return {AblationKind::wrong_time, 0.0};
  if (t == "wrong_date") return {AblationKind::wrong_date, 0.0};
  if (t == "no_sun_node") return {AblationKind::no_sun_node, 0.0};
  if (t == "no_diffuse") return {AblationKind::no_diffuse, 0.0};
  if (t.starts_with("rotation(") && t.ends_with(")")) {
    return {AblationKind::rotation, textio::parse_double(t.substr(9, t.size() - 10), 0)};
  }
  throw std::invalid_argument("unknown ablation '" + text + "'");
}

ExperimentResult ablate(std::span<const Dataset> datasets, const ParameterPoint& params, const Ablation& ablation,
                        const EvaluationOptions& options, const AblationInputs& inputs) {
  Substitution sub;
  std::vector<Dataset> swapped;
  std::span<const Dataset> used = datasets;
  switch (ablation.kind) {
    case AblationKind::none:
      break;
    case AblationKind::wrong_cloud:
      if (!inputs.alternate_cloud && datasets.size() < 2)
        throw std::invalid_argument("wrong_cloud needs an alternate cloud or a second dataset");
      swapped.assign(datasets.begin(), datasets.end());
      for (std::size_t i = 0; i < swapped.size(); ++i) {
        const LabeledCloud& other =
            inputs.alternate_cloud ? *inputs.alternate_cloud : datasets[(i + 1) % datasets.size()].cloud;
        swapped[i].cloud = recentre_onto(other, datasets[i].cloud);
      }
      used = swapped;
      break;
    case AblationKind::wrong_time:
      sub.sky_time_shift = inputs.time_shift;
      break;
    case AblationKind::wrong_date:
      sub.sky_time_shift = std::chrono::days{inputs.date_shift_days};
      break;
    case AblationKind::rotation:
      sub.rotation_deg = ablation.rotation_deg;
      break;
    case AblationKind::no_sun_node:
      sub.dedicated_sun = false;
      break;
    case AblationKind::no_diffuse:
      sub.include_diffuse = false;
      break;
  }
  return evaluate(used, params, options, sub, ablation.label());
}

std::string results_to_csv(std::span<const ExperimentResult> results) {
  std::string out = "beta_f,s_vox,w_vox,S,dx,dy,dedicated_sun,stage,label,m,r2,rmse,n,cpu_seconds\n";
  for (const auto& r : results) {
    const auto& p = r.params;
    out += textio::format_double(p.beta_f) + ',' + textio::format_double(p.voxel_size) + ',' +
           std::to_string(p.min_weight) + ',' + std::to_string(p.sky_resolution) + ',' +
           textio::format_double(p.offset_x) + ',' + textio::format_double(p.offset_y) + ',' +
           (p.dedicated_sun ? "1" : "0") + ',' + std::to_string(r.stage) + ',' + r.label + ',' +
           textio::format_double(r.fit.slope) + ',' + textio::format_double(r.fit.r_squared) + ',' +
           textio::format_double(r.fit.rmse) + ',' + std::to_string(r.fit.n) + ',' +
           textio::format_double(r.cpu_seconds) + '\n';
  }
  return out;
}

}  // namespace canopy
