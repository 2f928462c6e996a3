#include "canopy/ceptometer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "canopy/error.hpp"
#include "canopy/textio.hpp"

namespace canopy {

namespace {

Instant parse_instant_at(std::string_view field, std::size_t line) {
  try {
    return parse_instant(field);
  } catch (const Error& e) {
    throw ParseError(line, e.what());
  }
}

}  // namespace

std::vector<CeptometerReading> load_readings(const std::string& path) {
  const auto lines = textio::read_lines(path);
  std::vector<CeptometerReading> out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto line = textio::trim(lines[i]);
    if (line.empty() || line.front() == '#') continue;
    const auto f = textio::split_fields(line);
    if (f.size() == 4 && f[0] == "timestamp_iso8601") continue;
    if (f.size() != 4) throw ParseError(i + 1, "expected 'timestamp_iso8601,row_m,col_m,par_umol'");
    CeptometerReading r;
    r.timestamp = parse_instant_at(f[0], i + 1);
    r.row = textio::parse_double(f[1], i + 1);
    r.col = textio::parse_double(f[2], i + 1);
    r.par = textio::parse_double(f[3], i + 1);
    if (!(r.par >= 0.0)) throw ParseError(i + 1, "negative PAR");
    out.push_back(r);
  }
  return out;
}

std::string readings_to_csv(const std::vector<CeptometerReading>& readings) {
  std::string out = "timestamp_iso8601,row_m,col_m,par_umol\n";
  for (const auto& r : readings) {
    out += format_instant(r.timestamp) + ',' + textio::format_double(r.row) + ',' + textio::format_double(r.col) +
           ',' + textio::format_double(r.par) + '\n';
  }
  return out;
}

OpenAirLog::OpenAirLog(std::vector<Entry> entries) : entries_(std::move(entries)) {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (!(entries_[i].par >= 0.0)) throw std::invalid_argument("negative open-air PAR");
    if (i > 0 && !(entries_[i - 1].timestamp < entries_[i].timestamp))
      throw std::invalid_argument("open-air log timestamps must increase");
  }
}

double OpenAirLog::par_at(Instant t, Seconds tolerance) const {
  const auto it = std::lower_bound(entries_.begin(), entries_.end(), t,
                                   [](const Entry& e, Instant v) { return e.timestamp < v; });
  const Entry* best = nullptr;
  Seconds best_gap{0};
  if (it != entries_.end()) {
    best = &*it;
    best_gap = it->timestamp - t;
  }
  if (it != entries_.begin()) {
    const auto& prev = *(it - 1);
    if (!best || t - prev.timestamp <= best_gap) {
      best = &prev;
      best_gap = t - prev.timestamp;
    }
  }
  if (!best || best_gap > tolerance) throw CoverageError("open-air log has no entry near " + format_instant(t));
  return best->par;
}

OpenAirLog OpenAirLog::load_csv(const std::string& path) {
  const auto lines = textio::read_lines(path);
  std::vector<Entry> out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto line = textio::trim(lines[i]);
    if (line.empty() || line.front() == '#') continue;
    const auto f = textio::split_fields(line);
    if (f.size() == 2 && f[0] == "timestamp_iso8601") continue;
    if (f.size() != 2) throw ParseError(i + 1, "expected 'timestamp_iso8601,par_umol'");
    Entry e{parse_instant_at(f[0], i + 1), textio::parse_double(f[1], i + 1)};
    if (!(e.par >= 0.0)) throw ParseError(i + 1, "negative PAR");
    if (!out.empty() && !(out.back().timestamp < e.timestamp))
      throw ParseError(i + 1, "timestamps must be strictly increasing");
    out.push_back(e);
  }
  return OpenAirLog(std::move(out));
}

std::string OpenAirLog::to_csv() const {
  std::string out = "timestamp_iso8601,par_umol\n";
  for (const auto& e : entries_) out += format_instant(e.timestamp) + ',' + textio::format_double(e.par) + '\n';
  return out;
}

Vec3 CeptometerLayout::position(double row, double col) const {
  const Vec3 along = direction_from_angles(row_azimuth, 0.0);
  const Vec3 across = direction_from_angles(row_azimuth + 90.0, 0.0);
  return {origin_x + row * along.x + col * across.x, origin_y + row * along.y + col * across.y, 0.0};
}

double par_from_irradiance(double irradiance) {
  if (!(irradiance >= 0.0)) throw std::invalid_argument("irradiance must be non-negative");
  return kParPerWatt * irradiance;
}

double open_air_irradiance(const SkyDome& dome) {
  if (dome.mode != SkyMode::instantaneous)
    throw std::invalid_argument("open-air irradiance needs an instantaneous dome");
  double sum = 0.0;
  for (const auto& n : dome.nodes) sum += n.value * std::max(0.0, std::cos(deg2rad(n.zenith)));
  return sum;
}

double calibrated_par(double model_irradiance, const OpenAirLog* log, Instant t, const SkyDome& dome) {
  if (!(model_irradiance >= 0.0)) throw std::invalid_argument("modelled irradiance must be non-negative");
  if (!log) return par_from_irradiance(model_irradiance);
  const double open_par = log->par_at(t);
  const double open_irr = open_air_irradiance(dome);
  if (!(open_irr > 0.0)) {
    if (open_par > 0.0)
      throw CalibrationError("sky model has no open-air irradiance at " + format_instant(t) +
                             " while the reference probe reads " + textio::format_double(open_par));
    return 0.0;
  }
  if (model_irradiance == 0.0) return 0.0;
  return model_irradiance * (open_par / open_irr);
}

double sample_virtual(const EnergyField& field, double x, double y, double radius) {
  const GroundGrid& g = field.ground;
  if (!g.contains(x, y)) throw CoverageError("sample location outside the ground raster");
  if (!(radius >= 0.0)) throw std::invalid_argument("sample radius must be non-negative");
  const auto clamp_index = [](double v, std::size_t n) {
    return static_cast<std::size_t>(std::clamp(v, 0.0, static_cast<double>(n - 1)));
  };
  const std::size_t ix0 = clamp_index(std::floor((x - radius - g.x0) / g.cell), g.nx);
  const std::size_t ix1 = clamp_index(std::floor((x + radius - g.x0) / g.cell), g.nx);
  const std::size_t iy0 = clamp_index(std::floor((y - radius - g.y0) / g.cell), g.ny);
  const std::size_t iy1 = clamp_index(std::floor((y + radius - g.y0) / g.cell), g.ny);
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t iy = iy0; iy <= iy1; ++iy) {
    for (std::size_t ix = ix0; ix <= ix1; ++ix) {
      const Vec3 c = g.center(ix, iy);
      if (std::hypot(c.x - x, c.y - y) > radius) continue;
      sum += field.ground_projected[g.index(ix, iy)];
      ++count;
    }
  }
  // Radius below the cell pitch: the cell under the sample point.
  if (count == 0)
    return field.ground_projected[g.index(clamp_index(std::floor((x - g.x0) / g.cell), g.nx),
                                          clamp_index(std::floor((y - g.y0) / g.cell), g.ny))];
  return sum / static_cast<double>(count);
}

}  // namespace canopy
