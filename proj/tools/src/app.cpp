#include "canopy_app/app.hpp"

#include <algorithm>
#include <filesystem>
#include <ostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include <canopy/ceptometer.hpp>
#include <canopy/cloud.hpp>
#include <canopy/metrics.hpp>
#include <canopy/radiance.hpp>
#include <canopy/skydome.hpp>
#include <canopy/textio.hpp>
#include <canopy/tuner.hpp>
#include <canopy/weather.hpp>

#include "canopy_app/heatmap.hpp"

namespace canopy::app {

namespace fs = std::filesystem;
using textio::format_double;

namespace {

GeoLocation location_of(const Config& c) {
  GeoLocation loc{c.get_double("latitude"), c.get_double("longitude"), c.get_double_or("timezone", 0.0)};
  try {
    loc.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return loc;
}

WeatherSeries weather_of(const Config& c) {
  auto series = WeatherSeries::load_csv(c.path("weather"), location_of(c));
  if (const auto daily = c.optional_path("daily_exposure"))
    series = series.merged(synthesize_from_daily(load_daily_exposure(*daily), series));
  return series;
}

DecomposeOptions decompose_of(const Config& c) { return {c.get_bool_or("horizontal_h0", false)}; }

ParameterPoint params_of(const Config& c) {
  ParameterPoint p;
  p.beta_f = c.get_double_or("beta_f", p.beta_f);
  p.voxel_size = c.get_double_or("s_vox", p.voxel_size);
  p.min_weight = c.get_size_or("w_vox", p.min_weight);
  p.sky_resolution = c.get_size_or("sky_resolution", p.sky_resolution);
  p.dedicated_sun = c.get_bool_or("dedicated_sun", p.dedicated_sun);
  p.offset_x = c.get_double_or("offset_x", p.offset_x);
  p.offset_y = c.get_double_or("offset_y", p.offset_y);
  try {
    p.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return p;
}

std::size_t workers_of(const Config& c) {
  const auto w = c.get_size_or("workers", 0);
  return w > 0 ? w : std::max(1u, std::thread::hardware_concurrency());
}

Instant instant_of(const Config& c, const std::string& key) {
  try {
    return parse_instant(c.get(key));
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError("key '" + key + "': " + e.what());
  }
}

SkyDome dome_of(const Config& c, const WeatherSeries& weather, const ParameterPoint& p) {
  const auto mode = c.get_or("mode", "instantaneous");
  if (mode == "instantaneous")
    return sky_at(weather, instant_of(c, "time"), SkyOptions{p.sky_resolution, p.dedicated_sun, true},
                  decompose_of(c));
  if (mode == "composite") {
    const double step = c.get_double_or("step", 1800.0);
    if (!(step > 0.0)) throw ConfigError("key 'step': must be positive");
    return composite_sky(weather, instant_of(c, "start"), instant_of(c, "end"),
                         Seconds{static_cast<Seconds::rep>(step)}, p.sky_resolution, decompose_of(c));
  }
  throw ConfigError("key 'mode': expected instantaneous or composite, got '" + mode + "'");
}

std::string output_file(const Config& c, const std::string& name) {
  const fs::path dir = c.has("output") ? fs::path(c.path("output", false)) : fs::path(".");
  fs::create_directories(dir);
  return (dir / name).string();
}

void emit(CommandOutput& out, const Config& c, const std::string& name, const std::string& content) {
  const auto path = output_file(c, name);
  textio::write_file(path, content);
  out.files.push_back(path);
}

std::string describe(const ParameterPoint& p) {
  return "beta_f=" + format_double(p.beta_f) + "\ns_vox=" + format_double(p.voxel_size) +
         "\nw_vox=" + std::to_string(p.min_weight) + "\nsky_resolution=" + std::to_string(p.sky_resolution) +
         "\ndedicated_sun=" + (p.dedicated_sun ? "true" : "false") + "\noffset_x=" + format_double(p.offset_x) +
         "\noffset_y=" + format_double(p.offset_y) + '\n';
}

std::string fit_line(const FitReport& f) {
  return "m=" + format_double(f.slope) + " r2=" + format_double(f.r_squared) + " rmse=" + format_double(f.rmse) +
         " n=" + std::to_string(f.n);
}

Dataset dataset_from(const std::string& id, const std::string& cloud, const std::string& ceptometer,
                     const std::optional<std::string>& open_air, const WeatherSeries& weather,
                     CeptometerLayout layout, bool exclude_north) {
  Dataset d;
  d.id = id;
  d.cloud = load_cloud(cloud);
  d.weather = weather;
  d.readings = load_readings(ceptometer);
  if (open_air) d.open_air = OpenAirLog::load_csv(*open_air);
  d.layout = layout;
  d.exclude_north = exclude_north;
  return d;
}

std::vector<Dataset> datasets_of(const Config& c) {
  const auto weather = weather_of(c);
  std::vector<Dataset> out;
  if (c.has("manifest")) {
    const auto manifest = c.path("manifest");
    const fs::path base = fs::path(manifest).parent_path();
    const auto resolve = [&](std::string_view field, const char* what, std::size_t line) {
      fs::path p{std::string(field)};
      if (p.is_relative()) p = base / p;
      if (!fs::is_regular_file(p))
        throw ConfigError(manifest + ": line " + std::to_string(line) + ": " + what + " file not found: " +
                          p.string());
      return p.string();
    };
    const auto lines = textio::read_lines(manifest);
    for (std::size_t i = 0; i < lines.size(); ++i) {
      const auto line = textio::trim(lines[i]);
      if (line.empty() || line.front() == '#') continue;
      const auto f = textio::split_fields(line);
      if (f.size() >= 2 && f[0] == "id") continue;
      if (f.size() != 7 && f.size() != 8)
        throw ParseError(i + 1, "manifest rows need id,cloud,ceptometer,open_air,layout_x,layout_y,row_azimuth"
                                "[,exclude_north]");
      std::optional<std::string> open_air;
      if (!f[3].empty()) open_air = resolve(f[3], "open_air", i + 1);
      const CeptometerLayout layout{textio::parse_double(f[4], i + 1), textio::parse_double(f[5], i + 1),
                                    textio::parse_double(f[6], i + 1)};
      const bool north = f.size() == 8 && (f[7] == "true" || f[7] == "1");
      out.push_back(dataset_from(std::string(f[0]), resolve(f[1], "cloud", i + 1),
                                 resolve(f[2], "ceptometer", i + 1), open_air, weather, layout, north));
    }
    if (out.empty()) throw ConfigError("manifest lists no datasets: " + manifest);
  } else {
    const CeptometerLayout layout{c.get_double_or("layout_x", 0.0), c.get_double_or("layout_y", 0.0),
                                  c.get_double_or("row_azimuth", 90.0)};
    out.push_back(dataset_from("dataset", c.path("cloud"), c.path("ceptometer"), c.optional_path("open_air"),
                               weather, layout, c.get_bool_or("exclude_north", false)));
  }
  return out;
}

EvaluationOptions evaluation_of(const Config& c) {
  EvaluationOptions o;
  o.sample_radius = c.get_double_or("sample_radius", o.sample_radius);
  o.workers = workers_of(c);
  o.decompose = decompose_of(c);
  const auto residuals = c.get_or("residuals", "perpendicular");
  if (residuals == "vertical")
    o.residuals = ResidualMode::vertical;
  else if (residuals != "perpendicular")
    throw ConfigError("key 'residuals': expected perpendicular or vertical, got '" + residuals + "'");
  return o;
}

}  // namespace

CommandOutput cmd_sky(const Config& c) {
  const auto weather = weather_of(c);
  const auto params = params_of(c);
  const auto dome = dome_of(c, weather, params);
  CommandOutput out;
  emit(out, c, "dome.csv", dome.to_csv());
  emit(out, c, "sky.ppm", render_dome(dome, c.get_size_or("image_size", 256)).to_ppm());

  std::ostringstream s;
  s << "nodes=" << dome.nodes.size() << " diffuse_nodes=" << dome.resolution << " sun_nodes=" << dome.sun_node_count()
    << '\n'
    << "total=" << format_double(dome.total()) << " diffuse=" << format_double(dome.diffuse_total()) << '\n';
  const SkyNode* brightest = nullptr;
  for (const auto& n : dome.nodes)
    if (n.kind == NodeKind::diffuse && (!brightest || n.value > brightest->value)) brightest = &n;
  if (brightest && brightest->value > 0.0)
    s << "brightest_diffuse azimuth=" << format_double(brightest->azimuth)
      << " elevation=" << format_double(brightest->elevation()) << '\n';
  out.summary = s.str();
  return out;
}

CommandOutput cmd_trace(const Config& c) {
  const auto weather = weather_of(c);
  const auto params = params_of(c);
  const auto cloud = load_cloud(c.path("cloud"));
  const auto dome = dome_of(c, weather, params);

  AccumulateOptions opts;
  opts.workers = workers_of(c);
  opts.ground_margin = c.get_double_or("ground_margin", opts.ground_margin);
  const bool explicit_ground =
      c.has("ground_x_min") || c.has("ground_x_max") || c.has("ground_y_min") || c.has("ground_y_max");
  if (explicit_ground) {
    opts.ground = make_ground(c.get_double("ground_x_min"), c.get_double("ground_x_max"), c.get_double("ground_y_min"),
                              c.get_double("ground_y_max"), c.get_double_or("ground_z", cloud.ground_z),
                              c.get_double_or("ground_cell", params.voxel_size));
  } else if (cloud.empty()) {
    throw ConfigError("cloud is empty; set ground_x_min, ground_x_max, ground_y_min and ground_y_max");
  } else if (c.has("ground_cell") || c.has("ground_z")) {
    auto g = ground_around(cloud, c.get_double_or("ground_cell", params.voxel_size), opts.ground_margin);
    g.z = c.get_double_or("ground_z", g.z);
    opts.ground = g;
  }

  const auto coeffs = assign_coefficients(cloud, params.beta_f);
  const auto field = accumulate(cloud, coeffs, dome, params.voxel_size, params.min_weight, opts);

  CommandOutput out;
  emit(out, c, "energy_cloud.csv", cloud_to_csv(cloud, field.energy));
  emit(out, c, "ground.csv", ground_to_csv(field));
  emit(out, c, "shadow.ppm", render_ground(field).to_ppm());

  double absorbed = 0.0;
  for (double e : field.energy) absorbed += e;
  double lo = 0.0, hi = 0.0;
  if (!field.ground_projected.empty()) {
    const auto [a, b] = std::minmax_element(field.ground_projected.begin(), field.ground_projected.end());
    lo = *a;
    hi = *b;
  }
  std::ostringstream s;
  s << "points=" << cloud.size() << " nodes=" << field.nodes_traced << '\n'
    << "absorbed_total=" << format_double(absorbed) << (dome.mode == SkyMode::composite ? " J" : " W") << '\n'
    << "ground cells=" << field.ground.size() << " min=" << format_double(lo) << " max=" << format_double(hi) << '\n';
  out.summary = s.str();
  return out;
}

CommandOutput cmd_validate(const Config& c) {
  const auto datasets = datasets_of(c);
  const auto params = params_of(c);
  const auto options = evaluation_of(c);
  const double window = c.get_double_or("window", 0.0);
  if (window < 0.0) throw ConfigError("key 'window': must be non-negative");

  const PreparedModel model(datasets, params, options);
  const auto raw = model.pairs(params.offset_x, params.offset_y);
  const auto pairs = window > 0.0 ? window_average(raw, window) : raw;
  const auto report = fit(pairs, options.residuals);

  std::string scatter = "dataset,survey,x,y,measured,modelled\n";
  for (const auto& p : pairs)
    scatter += datasets[static_cast<std::size_t>(p.dataset)].id + ',' + std::to_string(p.survey) + ',' +
               format_double(p.x) + ',' + format_double(p.y) + ',' + format_double(p.measured) + ',' +
               format_double(p.modelled) + '\n';

  CommandOutput out;
  emit(out, c, "fit.txt", report.to_record());
  emit(out, c, "scatter.csv", scatter);
  std::ostringstream s;
  if (window > 0.0) s << "unwindowed " << fit_line(fit(raw, options.residuals)) << '\n';
  s << (window > 0.0 ? "windowed " : "") << fit_line(report) << '\n';
  out.summary = s.str();
  return out;
}

CommandOutput cmd_tune(const Config& c) {
  const auto datasets = datasets_of(c);
  auto options = evaluation_of(c);
  const std::size_t parallel = options.workers;
  options.workers = 1;

  StagePlan plan = StagePlan::defaults();
  plan.base = params_of(c);
  if (c.has("beta_values")) plan.beta_values = c.get_doubles("beta_values");
  if (c.has("voxel_sizes")) plan.voxel_sizes = c.get_doubles("voxel_sizes");
  if (c.has("min_weights")) plan.min_weights = c.get_sizes("min_weights");
  if (c.has("sky_resolutions")) plan.sky_resolutions = c.get_sizes("sky_resolutions");
  plan.compare_sun_modes = c.get_bool_or("compare_sun_modes", plan.compare_sun_modes);

  const auto grid = grid_search(datasets, plan, options, parallel);
  CommandOutput out;
  emit(out, c, "grid.csv", results_to_csv(grid.results));

  std::ostringstream s;
  s << "evaluations=" << grid.results.size() << '\n';
  ParameterPoint best = grid.best;
  FitReport best_fit = grid.ranked().front().fit;
  const double range = c.get_double_or("offset_range", 1.0);
  if (range > 0.0) {
    options.workers = parallel;
    const auto heat = offset_search(datasets, grid.best, options, range, c.get_double_or("offset_step", 0.1));
    emit(out, c, "offset.csv", heat.to_csv());
    const std::size_t scale = std::max<std::size_t>(1, 256 / heat.per_axis);
    std::vector<double> closeness(heat.rmse.size());
    const double worst = *std::max_element(heat.rmse.begin(), heat.rmse.end());
    for (std::size_t i = 0; i < closeness.size(); ++i) closeness[i] = worst - heat.rmse[i];
    emit(out, c, "offset.ppm", render_grid(closeness, heat.per_axis, heat.per_axis, scale).to_ppm());
    best.offset_x = heat.best_dx;
    best.offset_y = heat.best_dy;
    best_fit = heat.best;
    s << "offset dx=" << format_double(heat.best_dx) << " dy=" << format_double(heat.best_dy) << '\n';
  }
  emit(out, c, "best.txt", describe(best) + best_fit.to_record());
  s << "best beta_f=" << format_double(best.beta_f) << " s_vox=" << format_double(best.voxel_size)
    << " w_vox=" << best.min_weight << " S=" << best.sky_resolution
    << " dedicated_sun=" << (best.dedicated_sun ? "true" : "false") << '\n'
    << fit_line(best_fit) << '\n';
  out.summary = s.str();
  return out;
}

CommandOutput cmd_ablate(const Config& c) {
  const auto datasets = datasets_of(c);
  const auto params = params_of(c);
  const auto options = evaluation_of(c);

  AblationInputs inputs;
  if (const auto alt = c.optional_path("alternate_cloud")) inputs.alternate_cloud = load_cloud(*alt);
  inputs.time_shift = Seconds{static_cast<Seconds::rep>(c.get_double_or("time_shift", 7200.0))};
  inputs.date_shift_days = static_cast<int>(c.get_double_or("date_shift", 7.0));

  auto names = c.get_list("ablations");
  if (names.empty())
    names = {"wrong_cloud", "wrong_time", "wrong_date", "rotation(90)", "rotation(180)", "no_sun_node", "no_diffuse"};
  std::vector<Ablation> ablations;
  for (const auto& n : names) {
    try {
      ablations.push_back(Ablation::parse(n));
    } catch (const std::exception& e) {
      throw ConfigError("key 'ablations': " + std::string(e.what()));
    }
  }

  std::vector<ExperimentResult> results{evaluate(datasets, params, options)};
  for (const auto& a : ablations) results.push_back(ablate(datasets, params, a, options, inputs));

  CommandOutput out;
  emit(out, c, "ablation.csv", results_to_csv(results));
  std::ostringstream s;
  for (const auto& r : results) s << r.label << ' ' << fit_line(r.fit) << '\n';
  out.summary = s.str();
  return out;
}

namespace {

std::string one_line(std::string text) {
  std::replace(text.begin(), text.end(), '\n', ' ');
  return text;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App cli{"Solar energy interception by a voxelized tree canopy"};
  cli.set_version_flag("--version", "canopy 1.0.0");
  cli.require_subcommand(1);

  struct Sub {
    const char* name;
    const char* help;
    CommandOutput (*fn)(const Config&);
  };
  const Sub subs[] = {
      {"sky", "build a sky dome and render its heatmap", cmd_sky},
      {"trace", "trace a dome through the canopy; energy per point and ground shadow", cmd_trace},
      {"validate", "compare modelled and measured PAR", cmd_validate},
      {"tune", "parameter grid search and ceptometer offset search", cmd_tune},
      {"ablate", "degrade one model component at a time", cmd_ablate},
  };

  std::string config_path;
  std::map<std::string, std::string> overrides;
  std::map<std::string, CLI::Option*> flags;
  std::vector<std::pair<CLI::App*, const Sub*>> commands;
  for (const auto& sub : subs) {
    auto* cmd = cli.add_subcommand(sub.name, sub.help);
    cmd->add_option("--config", config_path, "flat key = value settings file");
    for (const auto& k : known_keys()) {
      const std::string key = k.name;
      auto* opt = cmd->add_option("--" + key, overrides[key], k.help);
      flags[key + "/" + sub.name] = opt;
    }
    commands.emplace_back(cmd, &sub);
  }

  try {
    cli.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << cli.help(e.get_name() == "--help" ? "" : "");
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << "canopy 1.0.0\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: usage: " << one_line(e.what()) << '\n';
    return 2;
  }

  try {
    for (const auto& [cmd, sub] : commands) {
      if (!cmd->parsed()) continue;
      Config config = config_path.empty() ? Config{} : Config::load(config_path);
      for (const auto& k : known_keys())
        if (flags.at(std::string(k.name) + "/" + sub->name)->count() > 0) config.set(k.name, overrides.at(k.name));
      const auto result = sub->fn(config);
      out << result.summary;
      for (const auto& f : result.files) out << "wrote " << f << '\n';
      return 0;
    }
  } catch (const ConfigError& e) {
    err << "error: config: " << one_line(e.what()) << '\n';
    return 1;
  } catch (const ParseError& e) {
    err << "error: parse: " << one_line(e.what()) << '\n';
    return 1;
  } catch (const CoverageError& e) {
    err << "error: coverage: " << one_line(e.what()) << '\n';
    return 1;
  } catch (const EmptyGridError& e) {
    err << "error: empty-grid: " << one_line(e.what()) << '\n';
    return 1;
  } catch (const CalibrationError& e) {
    err << "error: calibration: " << one_line(e.what()) << '\n';
    return 1;
  } catch (const Error& e) {
    err << "error: io: " << one_line(e.what()) << '\n';
    return 1;
  } catch (const std::invalid_argument& e) {
    err << "error: invalid: " << one_line(e.what()) << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: internal: " << one_line(e.what()) << '\n';
    return 1;
  }
  err << "error: usage: no subcommand\n";
  return 2;
}

}  // namespace canopy::app
