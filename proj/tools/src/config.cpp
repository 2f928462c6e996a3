#include "canopy_app/config.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>

#include <canopy/textio.hpp>

namespace canopy::app {

namespace fs = std::filesystem;

const std::vector<KeyInfo>& known_keys() {
  static const std::vector<KeyInfo> keys = {
      {"latitude", "site latitude, degrees north"},
      {"longitude", "site longitude, degrees east"},
      {"timezone", "hours from UTC of the local calendar day"},
      {"weather", "global irradiance CSV (timestamp_iso8601,global_wm2)", true},
      {"daily_exposure", "daily exposure CSV used to extend the weather record", true},
      {"horizontal_h0", "project extraterrestrial irradiance onto the horizontal (true/false)"},
      {"cloud", "labelled point cloud CSV (x,y,z,label)", true},
      {"alternate_cloud", "cloud swapped in by the wrong_cloud ablation", true},
      {"ceptometer", "ceptometer readings CSV (timestamp_iso8601,row_m,col_m,par_umol)", true},
      {"open_air", "open-air PAR log CSV (timestamp_iso8601,par_umol)", true},
      {"manifest", "dataset table: id,cloud,ceptometer,open_air,layout_x,layout_y,row_azimuth[,exclude_north]", true},
      {"layout_x", "east coordinate of ceptometer grid origin, metres"},
      {"layout_y", "north coordinate of ceptometer grid origin, metres"},
      {"row_azimuth", "bearing of the ceptometer +row axis, degrees"},
      {"exclude_north", "drop readings north of the tree centroid (true/false)"},
      {"sample_radius", "virtual ceptometer sampling radius, metres"},
      {"residuals", "RMSE residuals: perpendicular or vertical"},
      {"beta_f", "foliage transmission coefficient"},
      {"s_vox", "voxel side, metres"},
      {"w_vox", "minimum points per voxel"},
      {"sky_resolution", "minimum number of diffuse sky nodes"},
      {"dedicated_sun", "separate sun node instead of snapping (true/false)"},
      {"offset_x", "ceptometer grid offset east, metres"},
      {"offset_y", "ceptometer grid offset north, metres"},
      {"mode", "instantaneous or composite"},
      {"time", "instant for instantaneous mode (ISO 8601)"},
      {"start", "composite start (ISO 8601)"},
      {"end", "composite end (ISO 8601)"},
      {"step", "composite step, seconds"},
      {"ground_x_min", "ground raster west edge, metres"},
      {"ground_x_max", "ground raster east edge, metres"},
      {"ground_y_min", "ground raster south edge, metres"},
      {"ground_y_max", "ground raster north edge, metres"},
      {"ground_z", "ground raster height, metres (default: cloud ground)"},
      {"ground_cell", "ground raster cell, metres (default: s_vox)"},
      {"ground_margin", "padding around the cloud when no raster is given, metres"},
      {"image_size", "sky heatmap side, pixels"},
      {"beta_values", "tune: comma-separated beta_f values"},
      {"voxel_sizes", "tune: comma-separated s_vox values"},
      {"min_weights", "tune: comma-separated w_vox values"},
      {"sky_resolutions", "tune: comma-separated S values"},
      {"compare_sun_modes", "tune: try snapped sun nodes in stage 3 (true/false)"},
      {"offset_range", "tune: offset search half-width, metres (0 skips it)"},
      {"offset_step", "tune: offset search step, metres"},
      {"ablations", "ablate: comma-separated list, e.g. rotation(90),wrong_time"},
      {"time_shift", "ablate: wrong_time shift, seconds"},
      {"date_shift", "ablate: wrong_date shift, days"},
      {"output", "output directory", true},
      {"workers", "worker threads (0: all cores)"},
      {"window", "sliding-window side for validation, metres (0: off)"},
  };
  return keys;
}

namespace {

const KeyInfo* find_key(const std::string& key) {
  const auto& keys = known_keys();
  const auto it = std::find_if(keys.begin(), keys.end(), [&](const KeyInfo& k) { return key == k.name; });
  return it == keys.end() ? nullptr : &*it;
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::string item;
  int depth = 0;
  for (char c : value) {
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if (c == ',' && depth == 0) {
      out.emplace_back(textio::trim(item));
      item.clear();
    } else {
      item += c;
    }
  }
  if (!textio::trim(item).empty() || !out.empty()) out.emplace_back(textio::trim(item));
  return out;
}

}  // namespace

Config Config::load(const std::string& path) {
  if (!fs::is_regular_file(path)) throw ConfigError("config file not found: " + path);
  try {
    return parse(textio::read_lines(path), fs::path(path).parent_path().string());
  } catch (const ParseError& e) {
    throw ConfigError(path + ": line " + std::to_string(e.line()) + ": " + e.detail());
  }
}

Config Config::parse(const std::vector<std::string>& lines, const std::string& base_dir) {
  Config c;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto line = textio::trim(lines[i]);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError(i + 1, "expected 'key = value'");
    const std::string key(textio::trim(line.substr(0, eq)));
    const std::string value(textio::trim(line.substr(eq + 1)));
    if (!find_key(key)) throw ParseError(i + 1, "unknown key '" + key + "'");
    if (c.has(key)) throw ParseError(i + 1, "duplicate key '" + key + "'");
    c.entries_[key] = {value, base_dir};
  }
  return c;
}

void Config::set(const std::string& key, const std::string& value, const std::string& base_dir) {
  if (!find_key(key)) throw ConfigError("unknown key '" + key + "'");
  entries_[key] = {value, base_dir};
}

bool Config::has(const std::string& key) const {
  const auto it = entries_.find(key);
  return it != entries_.end() && !it->second.value.empty();
}

std::string Config::get(const std::string& key) const {
  if (!has(key)) throw ConfigError("missing required key '" + key + "'");
  return entries_.at(key).value;
}

std::string Config::get_or(const std::string& key, const std::string& fallback) const {
  return has(key) ? get(key) : fallback;
}

double Config::get_double(const std::string& key) const {
  const auto v = get(key);
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size())
    throw ConfigError("key '" + key + "': expected a number, got '" + v + "'");
  return out;
}

double Config::get_double_or(const std::string& key, double fallback) const {
  return has(key) ? get_double(key) : fallback;
}

std::size_t Config::get_size_or(const std::string& key, std::size_t fallback) const {
  if (!has(key)) return fallback;
  const auto v = get(key);
  std::size_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size())
    throw ConfigError("key '" + key + "': expected a non-negative integer, got '" + v + "'");
  return out;
}

bool Config::get_bool_or(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const auto v = get(key);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("key '" + key + "': expected true or false, got '" + v + "'");
}

std::vector<std::string> Config::get_list(const std::string& key) const {
  return has(key) ? split_list(get(key)) : std::vector<std::string>{};
}

std::vector<double> Config::get_doubles(const std::string& key) const {
  std::vector<double> out;
  for (const auto& item : get_list(key)) {
    Config one;
    one.set(key, item);
    out.push_back(one.get_double(key));
  }
  return out;
}

std::vector<std::size_t> Config::get_sizes(const std::string& key) const {
  std::vector<std::size_t> out;
  for (const auto& item : get_list(key)) {
    Config one;
    one.set(key, item);
    out.push_back(one.get_size_or(key, 0));
  }
  return out;
}

std::string Config::path(const std::string& key, bool must_exist) const {
  const auto& e = entries_.find(key);
  if (!has(key)) throw ConfigError("missing required key '" + key + "'");
  fs::path p(e->second.value);
  if (p.is_relative() && !e->second.base_dir.empty()) p = fs::path(e->second.base_dir) / p;
  if (must_exist && !fs::is_regular_file(p)) throw ConfigError(key + " file not found: " + p.string());
  return p.string();
}

std::optional<std::string> Config::optional_path(const std::string& key) const {
  if (!has(key)) return std::nullopt;
  return path(key, true);
}

}  // namespace canopy::app
