#include "canopy/scene.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

namespace canopy::scene {

GeoLocation orchard_location() { return {-24.85, 152.35, 10.0}; }

LabeledCloud opaque_ball(const Vec3& centre, double radius, double spacing) {
  std::vector<LabeledPoint> pts;
  const int n = static_cast<int>(std::ceil(radius / spacing));
  for (int i = -n; i <= n; ++i)
    for (int j = -n; j <= n; ++j)
      for (int k = -n; k <= n; ++k) {
        const Vec3 d{i * spacing, j * spacing, k * spacing};
        if (norm(d) <= radius) pts.push_back({centre + d, Label::branch});
      }
  return LabeledCloud::from_points(std::move(pts), 0.0);
}

namespace {

void add_box(std::vector<LabeledPoint>& pts, std::mt19937_64& rng, const Vec3& lo, const Vec3& hi, double density,
             Label label) {
  const double volume = (hi.x - lo.x) * (hi.y - lo.y) * (hi.z - lo.z);
  const auto count = static_cast<std::size_t>(std::llround(volume * density));
  std::uniform_real_distribution<double> ux(lo.x, hi.x), uy(lo.y, hi.y), uz(lo.z, hi.z);
  for (std::size_t i = 0; i < count; ++i) {
    const double x = ux(rng), y = uy(rng), z = uz(rng);
    pts.push_back({{x, y, z}, label});
  }
}

void add_trunk(std::vector<LabeledPoint>& pts, const Vec3& base, double radius, double height) {
  for (double z = 0.0; z <= height; z += 0.03)
    for (int a = 0; a < 24; ++a) {
      const double t = 2.0 * kPi * a / 24.0;
      pts.push_back({{base.x + radius * std::cos(t), base.y + radius * std::sin(t), base.z + z}, Label::branch});
    }
}

void add_branch(std::vector<LabeledPoint>& pts, const Vec3& from, const Vec3& to) {
  const double len = norm(to - from);
  const int steps = std::max(1, static_cast<int>(len / 0.02));
  for (int s = 0; s <= steps; ++s) pts.push_back({from + (to - from) * (static_cast<double>(s) / steps), Label::branch});
}

}  // namespace

LabeledCloud foliage_shell(const Vec3& centre, double outer_radius, double thickness, double density,
                           std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<LabeledPoint> pts;
  const Vec3 r{outer_radius, outer_radius, outer_radius};
  std::vector<LabeledPoint> box;
  add_box(box, rng, centre - r, centre + r, density, Label::foliage);
  for (const auto& p : box) {
    const double d = norm(p.position - centre);
    if (d <= outer_radius && d >= outer_radius - thickness) pts.push_back(p);
  }
  return LabeledCloud::from_points(std::move(pts), centre.z - outer_radius - 1.0);
}

LabeledCloud l_canopy(const Vec3& base, double density, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<LabeledPoint> pts;
  add_trunk(pts, base, 0.12, 1.6);
  // East arm, long and high.
  add_box(pts, rng, base + Vec3{-0.6, -0.6, 1.4}, base + Vec3{2.8, 0.6, 3.0}, density, Label::foliage);
  // South arm, shorter and lower.
  add_box(pts, rng, base + Vec3{-0.6, -2.4, 1.2}, base + Vec3{0.6, -0.6, 2.4}, density, Label::foliage);
  add_branch(pts, base + Vec3{0.0, 0.0, 1.5}, base + Vec3{2.4, 0.0, 2.5});
  add_branch(pts, base + Vec3{0.0, 0.0, 1.4}, base + Vec3{0.0, -2.0, 2.0});
  return LabeledCloud::from_points(std::move(pts), base.z);
}

LabeledCloud round_tree(const Vec3& base, double density, std::uint64_t seed, double crown_radius) {
  std::mt19937_64 rng(seed);
  std::vector<LabeledPoint> pts;
  add_trunk(pts, base, 0.12, 1.2 + 0.3 * crown_radius);
  std::vector<LabeledPoint> box;
  const Vec3 centre = base + Vec3{0.0, 0.0, 1.2 + crown_radius};
  const Vec3 r{crown_radius, crown_radius, crown_radius};
  add_box(box, rng, centre - r, centre + r, density, Label::foliage);
  for (const auto& p : box)
    if (norm(p.position - centre) <= crown_radius) pts.push_back(p);
  return LabeledCloud::from_points(std::move(pts), base.z);
}

LabeledCloud dappled_canopy(const Vec3& base, double clump_radius, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<LabeledPoint> pts;
  add_trunk(pts, base, 0.1, 2.0);
  std::uniform_real_distribution<double> pos(-2.5, 2.5), height(2.0, 2.8), keep(0.0, 1.0);
  for (int c = 0; c < 160; ++c) {
    const Vec3 centre = base + Vec3{pos(rng), pos(rng), height(rng)};
    std::vector<LabeledPoint> box;
    const Vec3 r{clump_radius, clump_radius, clump_radius};
    add_box(box, rng, centre - r, centre + r, 4000.0, Label::foliage);
    for (const auto& p : box)
      if (norm(p.position - centre) <= clump_radius) pts.push_back(p);
  }
  return LabeledCloud::from_points(std::move(pts), base.z);
}

WeatherSeries clear_sky_series(const GeoLocation& location, std::chrono::sys_days first_day, int days,
                               double transmittance, Seconds cadence) {
  std::vector<WeatherSample> samples;
  for (int d = 0; d < days; ++d) {
    const auto day = first_day + std::chrono::days{d};
    const Instant start = local_day_start(day, location.timezone_offset);
    const double h0 = extraterrestrial_irradiance(day_of_year(day));
    for (Instant t = start; t < start + std::chrono::days{1}; t += cadence) {
      const double el = solar_position(location, t).elevation;
      samples.push_back({t, el > 0.0 ? transmittance * h0 * std::sin(deg2rad(el)) : 0.0});
    }
  }
  return WeatherSeries(location, std::move(samples));
}

Dataset synthesize_dataset(const std::string& id, const LabeledCloud& cloud, const WeatherSeries& weather,
                           const SurveySpec& survey, const TruthModel& truth) {
  truth.params.validate();
  std::mt19937_64 rng(truth.seed);
  std::uniform_real_distribution<double> jitter(-truth.position_jitter, truth.position_jitter);
  std::normal_distribution<double> noise(0.0, truth.noise_sd);

  Dataset ds;
  ds.id = id;
  ds.cloud = cloud;
  ds.weather = weather;
  ds.layout = survey.layout;

  const SkyOptions sky{truth.params.sky_resolution, truth.params.dedicated_sun, true};
  const auto coefficients = assign_coefficients(cloud, truth.params.beta_f);
  const std::set<Instant> times(survey.times.begin(), survey.times.end());
  std::vector<OpenAirLog::Entry> log;
  const double reach = truth.sample_radius + truth.position_jitter + truth.params.voxel_size +
                       std::max(std::abs(truth.params.offset_x), std::abs(truth.params.offset_y));

  for (const Instant t : times) {
    const SkyDome dome = sky_at(weather, t, sky);
    const double open_irr = open_air_irradiance(dome);
    log.push_back({t, par_from_irradiance(open_irr)});

    const Vec3 first = survey.layout.position(0.0, 0.0);
    double x_lo = first.x, x_hi = first.x, y_lo = first.y, y_hi = first.y;
    for (int r = 0; r < survey.rows; ++r)
      for (int c = 0; c < survey.cols; ++c) {
        const Vec3 p = survey.layout.position(r * survey.row_spacing, c * survey.col_spacing);
        x_lo = std::min(x_lo, p.x);
        x_hi = std::max(x_hi, p.x);
        y_lo = std::min(y_lo, p.y);
        y_hi = std::max(y_hi, p.y);
      }
    AccumulateOptions acc;
    acc.workers = 1;
    acc.ground = make_ground(x_lo - reach, x_hi + reach, y_lo - reach, y_hi + reach, cloud.ground_z,
                             truth.params.voxel_size);
    const EnergyField field =
        accumulate(cloud, coefficients, dome, truth.params.voxel_size, truth.params.min_weight, acc);

    for (int r = 0; r < survey.rows; ++r)
      for (int c = 0; c < survey.cols; ++c) {
        CeptometerReading reading;
        reading.timestamp = t;
        reading.row = r * survey.row_spacing;
        reading.col = c * survey.col_spacing;
        const Vec3 p = survey.layout.position(reading.row, reading.col);
        const double jx = truth.position_jitter > 0.0 ? jitter(rng) : 0.0;
        const double jy = truth.position_jitter > 0.0 ? jitter(rng) : 0.0;
        const double irr = sample_virtual(field, p.x + truth.params.offset_x + jx, p.y + truth.params.offset_y + jy,
                                          truth.sample_radius);
        const double eps = truth.noise_sd > 0.0 ? noise(rng) : 0.0;
        reading.par = std::max(0.0, par_from_irradiance(irr) + eps);
        ds.readings.push_back(reading);
      }
  }
  ds.open_air = OpenAirLog(std::move(log));
  return ds;
}

}  // namespace canopy::scene
