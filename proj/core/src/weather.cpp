#include "canopy/weather.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "canopy/error.hpp"
#include "canopy/geometry.hpp"
#include "canopy/textio.hpp"

namespace canopy {

void GeoLocation::validate() const {
  if (!(latitude >= -90.0 && latitude <= 90.0)) throw std::invalid_argument("latitude outside [-90, 90]");
  if (!(longitude >= -180.0 && longitude <= 180.0)) throw std::invalid_argument("longitude outside [-180, 180]");
  if (!(timezone_offset >= -14.0 && timezone_offset <= 14.0))
    throw std::invalid_argument("timezone offset outside [-14, 14] hours");
}

WeatherSeries::WeatherSeries(GeoLocation location, std::vector<WeatherSample> samples)
    : location_(location), samples_(std::move(samples)) {
  location_.validate();
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    if (!(samples_[i].global_irradiance >= 0.0) || !std::isfinite(samples_[i].global_irradiance))
      throw std::invalid_argument("negative or non-finite global irradiance at " +
                                  format_instant(samples_[i].timestamp));
    if (i > 0 && !(samples_[i - 1].timestamp < samples_[i].timestamp))
      throw std::invalid_argument("weather timestamps not strictly increasing at " +
                                  format_instant(samples_[i].timestamp));
  }
}

double WeatherSeries::irradiance_at(Instant t) const {
  if (samples_.empty() || t < samples_.front().timestamp || t > samples_.back().timestamp)
    throw CoverageError("weather series does not cover " + format_instant(t));
  const auto it = std::lower_bound(samples_.begin(), samples_.end(), t,
                                   [](const WeatherSample& s, Instant v) { return s.timestamp < v; });
  if (it->timestamp == t) return it->global_irradiance;
  const auto& hi = *it;
  const auto& lo = *(it - 1);
  const double span = static_cast<double>((hi.timestamp - lo.timestamp).count());
  const double w = static_cast<double>((t - lo.timestamp).count()) / span;
  return lo.global_irradiance + w * (hi.global_irradiance - lo.global_irradiance);
}

std::span<const WeatherSample> WeatherSeries::day_samples(std::chrono::sys_days day) const {
  const Instant start = local_day_start(day, location_.timezone_offset);
  const Instant end = start + std::chrono::days{1};
  const auto cmp = [](const WeatherSample& s, Instant v) { return s.timestamp < v; };
  const auto lo = std::lower_bound(samples_.begin(), samples_.end(), start, cmp);
  const auto hi = std::lower_bound(lo, samples_.end(), end, cmp);
  return {lo, hi};
}

WeatherSeries WeatherSeries::merged(const WeatherSeries& other) const {
  std::vector<WeatherSample> out;
  out.reserve(samples_.size() + other.samples_.size());
  std::size_t i = 0, j = 0;
  while (i < samples_.size() || j < other.samples_.size()) {
    if (j == other.samples_.size() || (i < samples_.size() && samples_[i].timestamp < other.samples_[j].timestamp)) {
      out.push_back(samples_[i++]);
    } else if (i == samples_.size() || other.samples_[j].timestamp < samples_[i].timestamp) {
      out.push_back(other.samples_[j++]);
    } else {
      out.push_back(samples_[i++]);
      ++j;
    }
  }
  return WeatherSeries(location_, std::move(out));
}

WeatherSeries WeatherSeries::load_csv(const std::string& path, const GeoLocation& location) {
  const auto lines = textio::read_lines(path);
  std::vector<WeatherSample> samples;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto line = textio::trim(lines[i]);
    if (line.empty() || line.front() == '#') continue;
    const auto fields = textio::split_fields(line);
    if (fields.size() == 2 && fields[0] == "timestamp_iso8601") continue;
    if (fields.size() != 2) throw ParseError(i + 1, "expected 2 fields 'timestamp_iso8601,global_wm2'");
    WeatherSample s;
    try {
      s.timestamp = parse_instant(fields[0]);
    } catch (const ParseError&) {
      throw;
    } catch (const Error& e) {
      throw ParseError(i + 1, e.what());
    }
    s.global_irradiance = textio::parse_double(fields[1], i + 1);
    if (s.global_irradiance < 0.0) throw ParseError(i + 1, "negative irradiance");
    if (!samples.empty() && !(samples.back().timestamp < s.timestamp))
      throw ParseError(i + 1, "timestamps must be strictly increasing");
    samples.push_back(s);
  }
  return WeatherSeries(location, std::move(samples));
}

std::string WeatherSeries::to_csv() const {
  std::string out = "timestamp_iso8601,global_wm2\n";
  for (const auto& s : samples_) {
    out += format_instant(s.timestamp);
    out += ',';
    out += textio::format_double(s.global_irradiance);
    out += '\n';
  }
  return out;
}

SolarPosition solar_position(const GeoLocation& location, Instant t) {
  const double unix_seconds = static_cast<double>(t.time_since_epoch().count());
  const double julian_day = unix_seconds / 86400.0 + 2440587.5;
  const double jc = (julian_day - 2451545.0) / 36525.0;

  const double mean_long = std::fmod(280.46646 + jc * (36000.76983 + jc * 0.0003032), 360.0);
  const double mean_anom = 357.52911 + jc * (35999.05029 - 0.0001537 * jc);
  const double ecc = 0.016708634 - jc * (0.000042037 + 0.0000001267 * jc);
  const double m = deg2rad(mean_anom);
  const double centre = std::sin(m) * (1.914602 - jc * (0.004817 + 0.000014 * jc)) +
                        std::sin(2.0 * m) * (0.019993 - 0.000101 * jc) + std::sin(3.0 * m) * 0.000289;
  const double true_long = mean_long + centre;
  const double omega = deg2rad(125.04 - 1934.136 * jc);
  const double app_long = true_long - 0.00569 - 0.00478 * std::sin(omega);
  const double mean_obliq = 23.0 + (26.0 + (21.448 - jc * (46.815 + jc * (0.00059 - jc * 0.001813))) / 60.0) / 60.0;
  const double obliq = deg2rad(mean_obliq + 0.00256 * std::cos(omega));
  const double decl = std::asin(std::sin(obliq) * std::sin(deg2rad(app_long)));

  const double y = std::pow(std::tan(obliq / 2.0), 2);
  const double l0 = deg2rad(mean_long);
  const double eot_minutes =
      4.0 * rad2deg(y * std::sin(2.0 * l0) - 2.0 * ecc * std::sin(m) +
                    4.0 * ecc * y * std::sin(m) * std::cos(2.0 * l0) - 0.5 * y * y * std::sin(4.0 * l0) -
                    1.25 * ecc * ecc * std::sin(2.0 * m));

  double true_solar_minutes = std::fmod(utc_hours(t) * 60.0 + eot_minutes + 4.0 * location.longitude, 1440.0);
  if (true_solar_minutes < 0.0) true_solar_minutes += 1440.0;
  const double hour_angle = deg2rad(true_solar_minutes / 4.0 - 180.0);

  const double lat = deg2rad(location.latitude);
  const double cos_zenith = std::clamp(
      std::sin(lat) * std::sin(decl) + std::cos(lat) * std::cos(decl) * std::cos(hour_angle), -1.0, 1.0);
  const double zenith = rad2deg(std::acos(cos_zenith));
  double azimuth = rad2deg(std::atan2(-std::sin(hour_angle) * std::cos(decl),
                                      std::sin(decl) * std::cos(lat) -
                                          std::cos(decl) * std::sin(lat) * std::cos(hour_angle)));
  if (azimuth < 0.0) azimuth += 360.0;

  SolarPosition pos;
  pos.azimuth = azimuth;
  pos.zenith = zenith;
  pos.elevation = 90.0 - zenith;
  return pos;
}

double equation_of_time_minutes(int n) {
  const double b = deg2rad(360.0 * (n - 81) / 365.0);
  return 9.87 * std::sin(2.0 * b) - 7.67 * std::sin(b + deg2rad(78.7));
}

double apparent_solar_time(Instant t, const GeoLocation& location) {
  const int n = day_of_year(local_day(t, location.timezone_offset));
  const double mean_solar = utc_hours(t) + location.longitude / 15.0;
  double ast = std::fmod(mean_solar + equation_of_time_minutes(n) / 60.0, 24.0);
  if (ast < 0.0) ast += 24.0;
  return ast;
}

double extraterrestrial_irradiance(int n) {
  if (n < 1 || n > 366) throw std::out_of_range("day of year must lie in [1, 366]");
  return kSolarConstant * (1.0 + 0.033412 * std::cos(2.0 * kPi * (n - 3) / 365.0));
}

double diffuse_fraction(const DiffuseFractionInputs& in) {
  const double exponent = -5.38 + 6.63 * in.clearness + 0.006 * in.apparent_solar_time -
                          0.007 * in.solar_elevation + 1.75 * in.daily_clearness + 1.31 * in.persistence;
  return 1.0 / (1.0 + std::exp(exponent));
}

IrradianceSplit split_global(double global, double d_frac) {
  IrradianceSplit s;
  s.diffuse_fraction = d_frac;
  s.diffuse = d_frac * global;
  s.direct = global - s.diffuse;
  return s;
}

namespace {

struct ClearnessContext {
  const GeoLocation& location;
  double h0;
  bool horizontal;

  // Extraterrestrial reference for an instant; zero at night in horizontal mode.
  double reference(Instant t) const {
    if (!horizontal) return h0;
    const double el = solar_position(location, t).elevation;
    return el > 0.0 ? h0 * std::sin(deg2rad(el)) : 0.0;
  }

  double clearness(double global, Instant t) const {
    const double ref = reference(t);
    return ref > 0.0 ? global / ref : 0.0;
  }
};

}  // namespace

IrradianceSplit decompose(const WeatherSeries& series, Instant t, const DecomposeOptions& options) {
  const GeoLocation& loc = series.location();
  const auto day = local_day(t, loc.timezone_offset);
  const auto samples = series.day_samples(day);
  if (samples.empty()) throw CoverageError("no weather samples on local day " + format_date(day));

  const double global = series.irradiance_at(t);
  const SolarPosition sun = solar_position(loc, t);
  const ClearnessContext ctx{loc, extraterrestrial_irradiance(day_of_year(day)), options.horizontal_extraterrestrial};

  double global_sum = 0.0;
  double reference_sum = 0.0;
  for (const auto& s : samples) {
    global_sum += s.global_irradiance;
    reference_sum += ctx.reference(s.timestamp);
  }

  IrradianceSplit split;
  if (sun.elevation <= 0.0) {
    split = split_global(global, 1.0);
  } else {
    const double kt = ctx.clearness(global, t);
    const double daily = reference_sum > 0.0 ? global_sum / reference_sum : 0.0;

    // Nearest daylight neighbours strictly before and after t on the same day.
    const auto is_day = [&](const WeatherSample& s) { return solar_position(loc, s.timestamp).elevation > 0.0; };
    const WeatherSample* prev = nullptr;
    const WeatherSample* next = nullptr;
    for (const auto& s : samples) {
      if (s.timestamp < t && is_day(s)) prev = &s;
      if (s.timestamp > t && is_day(s)) {
        next = &s;
        break;
      }
    }
    double persistence = kt;
    if (prev && next) {
      persistence = 0.5 * (ctx.clearness(prev->global_irradiance, prev->timestamp) +
                           ctx.clearness(next->global_irradiance, next->timestamp));
    } else if (prev) {
      persistence = ctx.clearness(prev->global_irradiance, prev->timestamp);
    } else if (next) {
      persistence = ctx.clearness(next->global_irradiance, next->timestamp);
    }

    const double d_frac = diffuse_fraction({kt, daily, persistence, apparent_solar_time(t, loc), sun.elevation});
    split = split_global(global, d_frac);
    split.clearness = kt;
    split.daily_clearness = daily;
    split.persistence = persistence;
  }
  return split;
}

DailyExposure load_daily_exposure(const std::string& path) {
  const auto lines = textio::read_lines(path);
  DailyExposure out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto line = textio::trim(lines[i]);
    if (line.empty() || line.front() == '#') continue;
    const auto fields = textio::split_fields(line);
    if (fields.size() == 2 && fields[0] == "date_iso8601") continue;
    if (fields.size() != 2) throw ParseError(i + 1, "expected 2 fields 'date_iso8601,exposure_mj_m2'");
    std::chrono::sys_days day;
    try {
      day = parse_date(fields[0]);
    } catch (const Error& e) {
      throw ParseError(i + 1, e.what());
    }
    const double mj = textio::parse_double(fields[1], i + 1);
    if (mj < 0.0) throw ParseError(i + 1, "negative exposure");
    if (!out.emplace(day, mj).second) throw ParseError(i + 1, "duplicate date " + std::string(fields[0]));
  }
  return out;
}

WeatherSeries synthesize_from_daily(const DailyExposure& daily, const WeatherSeries& overlap, Seconds cadence) {
  if (cadence.count() <= 0 || std::chrono::days{1} % cadence != Seconds{0})
    throw std::invalid_argument("cadence must be positive and divide one day");
  const double tz = overlap.location().timezone_offset;
  const auto slots = static_cast<std::size_t>(std::chrono::days{1} / cadence);

  std::vector<double> sum(slots, 0.0);
  std::vector<int> count(slots, 0);
  int overlap_days = 0;
  for (const auto& [day, mj] : daily) {
    const auto samples = overlap.day_samples(day);
    if (samples.empty()) continue;
    ++overlap_days;
    const Instant start = local_day_start(day, tz);
    for (const auto& s : samples) {
      const auto slot = static_cast<std::size_t>((s.timestamp - start) / cadence);
      sum[slot] += s.global_irradiance;
      ++count[slot];
    }
  }
  if (overlap_days == 0) throw CoverageError("daily exposure record shares no day with the weather series");

  std::vector<double> profile(slots, 0.0);
  double profile_mj = 0.0;
  for (std::size_t k = 0; k < slots; ++k) {
    if (count[k] > 0) profile[k] = sum[k] / count[k];
    profile_mj += profile[k] * static_cast<double>(cadence.count()) / 1e6;
  }

  std::vector<WeatherSample> out;
  for (const auto& [day, mj] : daily) {
    if (!overlap.day_samples(day).empty()) continue;
    if (profile_mj <= 0.0 && mj > 0.0)
      throw CoverageError("overlap days carry no irradiance; cannot scale to " + format_date(day));
    const double scale = profile_mj > 0.0 ? mj / profile_mj : 0.0;
    const Instant start = local_day_start(day, tz);
    for (std::size_t k = 0; k < slots; ++k) {
      if (count[k] == 0) continue;
      out.push_back({start + cadence * static_cast<long>(k), profile[k] * scale});
    }
  }
  return WeatherSeries(overlap.location(), std::move(out));
}

}  // namespace canopy
