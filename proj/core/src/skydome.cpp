#include "canopy/skydome.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <stdexcept>
#include <tuple>

#include "canopy/error.hpp"
#include "canopy/textio.hpp"

namespace canopy {

const char* to_string(NodeKind kind) { return kind == NodeKind::sun ? "sun" : "diffuse"; }

SkyNode make_node(const Vec3& direction, double value, NodeKind kind) {
  SkyNode n;
  n.direction = direction;
  n.zenith = 90.0 - elevation_of(direction);
  n.azimuth = azimuth_of(direction);
  n.value = value;
  n.kind = kind;
  return n;
}

namespace {

std::array<Vec3, 12> icosahedron_vertices() {
  std::array<Vec3, 12> v{};
  const double ring_z = 1.0 / std::sqrt(5.0);
  const double ring_r = 2.0 / std::sqrt(5.0);
  v[0] = {0.0, 0.0, 1.0};
  for (int k = 0; k < 5; ++k) {
    const double up = deg2rad(72.0 * k);
    const double down = deg2rad(36.0 + 72.0 * k);
    v[1 + k] = {ring_r * std::sin(up), ring_r * std::cos(up), ring_z};
    v[6 + k] = {ring_r * std::sin(down), ring_r * std::cos(down), -ring_z};
  }
  v[11] = {0.0, 0.0, -1.0};
  return v;
}

std::vector<std::array<int, 3>> icosahedron_faces() {
  std::vector<std::array<int, 3>> f;
  for (int k = 0; k < 5; ++k) {
    const int u0 = 1 + k, u1 = 1 + (k + 1) % 5;
    const int l0 = 6 + k, l1 = 6 + (k + 1) % 5;
    f.push_back({0, u0, u1});
    f.push_back({u0, l0, u1});
    f.push_back({u1, l0, l1});
    f.push_back({11, l1, l0});
  }
  return f;
}

}  // namespace

Hemisphere hemisphere_at_frequency(int frequency) {
  if (frequency < 1) throw std::invalid_argument("geodesic frequency must be >= 1");
  const auto verts = icosahedron_vertices();
  const double f = frequency;

  // Quantized (-z, azimuth) key gives deduplication and a stable order.
  std::map<std::tuple<long long, long long, long long>, Vec3> unique;
  for (const auto& face : icosahedron_faces()) {
    const Vec3& a = verts[face[0]];
    const Vec3& b = verts[face[1]];
    const Vec3& c = verts[face[2]];
    for (int i = 0; i <= frequency; ++i) {
      for (int j = 0; i + j <= frequency; ++j) {
        Vec3 p = normalized(a + (b - a) * (i / f) + (c - a) * (j / f));
        if (std::abs(p.z) < 1e-12) p = normalized(Vec3{p.x, p.y, 0.0});
        if (p.z < 0.0) continue;
        const auto key = std::make_tuple(std::llround(-p.z * 1e9), std::llround(p.x * 1e9), std::llround(p.y * 1e9));
        unique.emplace(key, p);
      }
    }
  }
  Hemisphere h;
  h.frequency = frequency;
  h.directions.reserve(unique.size());
  for (const auto& [key, p] : unique) h.directions.push_back(p);
  std::stable_sort(h.directions.begin(), h.directions.end(), [](const Vec3& l, const Vec3& r) {
    const auto kl = std::make_pair(std::llround(-l.z * 1e9), std::llround(azimuth_of(l) * 1e6));
    const auto kr = std::make_pair(std::llround(-r.z * 1e9), std::llround(azimuth_of(r) * 1e6));
    return kl < kr;
  });
  return h;
}

Hemisphere build_hemisphere(std::size_t target_resolution) {
  for (int f = 1;; ++f) {
    Hemisphere h = hemisphere_at_frequency(f);
    if (h.directions.size() >= target_resolution) return h;
    if (f > 512) throw std::invalid_argument("sky resolution too large");
  }
}

CieParameters cie_parameters(double d_frac) {
  if (!(d_frac >= 0.0 && d_frac <= 1.0)) throw std::invalid_argument("diffuse fraction outside [0, 1]");
  if (d_frac <= 0.25) return {-1.0, -0.32, 10.0, -3.0, 0.45, 12};
  if (d_frac <= 0.50) return {-1.0, -0.55, 10.0, -3.0, 0.45, 11};
  if (d_frac <= 0.75) return {0.0, -1.0, 5.0, -2.5, 0.30, 7};
  return {4.0, -0.7, 2.0, -1.5, 0.15, 1};
}

double scattering_indicatrix(double chi, const CieParameters& p) {
  const double cos_chi = std::cos(chi);
  return 1.0 + p.c * (std::exp(p.d * chi) - std::exp(p.d * kPi / 2.0)) + p.e * cos_chi * cos_chi;
}

double luminance_gradation(double zenith_deg, const CieParameters& p) {
  const double z = deg2rad(std::clamp(zenith_deg, 0.0, kMaxGradationZenith));
  return 1.0 + p.a * std::exp(p.b / std::cos(z));
}

double sun_distance(double node_zenith_deg, double sun_zenith_deg, double azimuth_delta_deg) {
  const double z = deg2rad(node_zenith_deg);
  const double zs = deg2rad(sun_zenith_deg);
  const double c = std::cos(zs) * std::cos(z) + std::sin(zs) * std::sin(z) * std::cos(deg2rad(azimuth_delta_deg));
  return std::acos(std::clamp(c, -1.0, 1.0));
}

double relative_luminance(double node_zenith_deg, double sun_zenith_deg, double azimuth_delta_deg,
                          const CieParameters& p) {
  const double chi = sun_distance(node_zenith_deg, sun_zenith_deg, azimuth_delta_deg);
  return scattering_indicatrix(chi, p) * luminance_gradation(node_zenith_deg, p);
}

std::vector<double> distribute_diffuse(double diffuse_total, std::span<const Vec3> directions,
                                       const SolarPosition& sun, const CieParameters& p) {
  if (!(diffuse_total >= 0.0)) throw std::invalid_argument("diffuse total must be non-negative");
  if (directions.empty()) throw std::invalid_argument("no sky nodes to distribute over");
  const double sun_zenith = std::clamp(sun.zenith, 0.0, 90.0);
  std::vector<double> lum(directions.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < directions.size(); ++i) {
    const double zenith = std::clamp(90.0 - elevation_of(directions[i]), 0.0, 90.0);
    lum[i] = relative_luminance(zenith, sun_zenith, azimuth_of(directions[i]) - sun.azimuth, p);
    sum += lum[i];
  }
  std::vector<double> out(directions.size());
  if (!(sum > 0.0) || !std::isfinite(sum)) {
    std::fill(out.begin(), out.end(), diffuse_total / static_cast<double>(directions.size()));
    return out;
  }
  for (std::size_t i = 0; i < directions.size(); ++i) out[i] = diffuse_total * (lum[i] / sum);
  return out;
}

double SkyDome::total() const {
  double t = 0.0;
  for (const auto& n : nodes) t += n.value;
  return t;
}

double SkyDome::diffuse_total() const {
  double t = 0.0;
  for (const auto& n : nodes)
    if (n.kind == NodeKind::diffuse) t += n.value;
  return t;
}

std::size_t SkyDome::sun_node_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes.begin(), nodes.end(), [](const SkyNode& n) { return n.kind == NodeKind::sun; }));
}

std::string SkyDome::to_csv() const {
  std::string out = "azimuth_deg,elevation_deg,value,kind\n";
  for (const auto& n : nodes) {
    out += textio::format_double(n.azimuth) + ',' + textio::format_double(n.elevation()) + ',' +
           textio::format_double(n.value) + ',' + to_string(n.kind) + '\n';
  }
  return out;
}

std::size_t nearest_direction(std::span<const Vec3> directions, const Vec3& target) {
  std::size_t best = 0;
  double best_dot = -2.0;
  for (std::size_t i = 0; i < directions.size(); ++i) {
    const double d = dot(directions[i], target);
    if (d > best_dot) {
      best_dot = d;
      best = i;
    }
  }
  return best;
}

SkyDome instantaneous_sky(const IrradianceSplit& split, const SolarPosition& sun, const Hemisphere& hemisphere,
                          const SkyOptions& options) {
  SkyDome dome;
  dome.mode = SkyMode::instantaneous;
  dome.frequency = hemisphere.frequency;
  const bool sun_up = sun.elevation > 0.0;
  // A sun below the horizon is pinned to it so no light is lost.
  const Vec3 sun_dir = direction_from_angles(sun.azimuth, std::max(sun.elevation, 0.0));

  if (!options.include_diffuse) {
    const double all = split.global();
    if (all > 0.0) dome.nodes.push_back(make_node(sun_dir, all, NodeKind::sun));
    return dome;
  }

  const auto values =
      distribute_diffuse(split.diffuse, hemisphere.directions, sun, cie_parameters(split.diffuse_fraction));
  dome.nodes.reserve(values.size() + 1);
  for (std::size_t i = 0; i < values.size(); ++i)
    dome.nodes.push_back(make_node(hemisphere.directions[i], values[i], NodeKind::diffuse));
  dome.resolution = values.size();

  if (split.direct > 0.0) {
    if (options.dedicated_sun && sun_up) {
      dome.nodes.push_back(make_node(sun_dir, split.direct, NodeKind::sun));
    } else {
      dome.nodes[nearest_direction(hemisphere.directions, sun_dir)].value += split.direct;
    }
  }
  return dome;
}

SkyDome instantaneous_sky(const IrradianceSplit& split, const SolarPosition& sun, const SkyOptions& options) {
  return instantaneous_sky(split, sun, build_hemisphere(options.resolution), options);
}

SkyDome sky_at(const WeatherSeries& series, Instant t, const SkyOptions& options,
               const DecomposeOptions& decompose_options) {
  const auto split = decompose(series, t, decompose_options);
  const auto sun = solar_position(series.location(), t);
  SkyDome dome = instantaneous_sky(split, sun, options);
  dome.start = dome.end = t;
  dome.location = series.location();
  return dome;
}

SkyDome composite_sky(const WeatherSeries& series, Instant start, Instant end, Seconds step,
                      std::size_t resolution, const DecomposeOptions& decompose_options) {
  if (step.count() <= 0) throw std::invalid_argument("composite step must be positive");
  if (!(start < end)) throw std::invalid_argument("composite timespan is empty");
  const Hemisphere hemisphere = build_hemisphere(resolution);
  const SkyOptions snapped{resolution, false, true};
  const double dt = static_cast<double>(step.count());

  SkyDome dome;
  dome.mode = SkyMode::composite;
  dome.frequency = hemisphere.frequency;
  dome.resolution = hemisphere.directions.size();
  dome.start = start;
  dome.end = end;
  dome.location = series.location();
  for (const auto& d : hemisphere.directions) dome.nodes.push_back(make_node(d, 0.0, NodeKind::diffuse));

  for (Instant t = start; t < end; t += step) {
    const auto split = decompose(series, t, decompose_options);
    const auto sun = solar_position(series.location(), t);
    const SkyDome inst = instantaneous_sky(split, sun, hemisphere, snapped);
    for (std::size_t i = 0; i < inst.nodes.size(); ++i) dome.nodes[i].value += inst.nodes[i].value * dt;
  }
  return dome;
}

SkyDome add_composite(const SkyDome& a, const SkyDome& b) {
  if (a.mode != SkyMode::composite || b.mode != SkyMode::composite)
    throw std::invalid_argument("add_composite needs two composite domes");
  if (a.frequency != b.frequency || a.nodes.size() != b.nodes.size())
    throw std::invalid_argument("composite domes use different hemispheres");
  SkyDome out = a;
  for (std::size_t i = 0; i < out.nodes.size(); ++i) out.nodes[i].value += b.nodes[i].value;
  out.start = std::min(a.start, b.start);
  out.end = std::max(a.end, b.end);
  return out;
}

}  // namespace canopy
