#include <benchmark/benchmark.h>

#include <canopy/radiance.hpp>
#include <canopy/scene.hpp>
#include <canopy/skydome.hpp>

using namespace canopy;

namespace {

const LabeledCloud& tree() {
  static const auto cloud = scene::l_canopy({0, 0, 0}, 3000.0, 1);
  return cloud;
}

SkyDome dome(std::size_t resolution) {
  const auto loc = scene::orchard_location();
  const auto weather = scene::clear_sky_series(loc, parse_date("2016-11-15"), 3);
  return sky_at(weather, parse_instant("2016-11-16T11:00:00+10:00"), SkyOptions{resolution, true, true});
}

}  // namespace

static void BM_Voxelize(benchmark::State& state) {
  const auto& cloud = tree();
  const auto coeffs = assign_coefficients(cloud, 0.8);
  const double s = static_cast<double>(state.range(0)) / 1000.0;
  const Vec3 ray = normalized(Vec3{0.3, -0.2, -1.0});
  for (auto _ : state) benchmark::DoNotOptimize(voxelize(cloud, coeffs, s, 1, ray));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(cloud.size()));
}
BENCHMARK(BM_Voxelize)->Arg(50)->Arg(100)->Arg(200)->Unit(benchmark::kMillisecond);

static void BM_TraceNode(benchmark::State& state) {
  const auto& cloud = tree();
  const auto coeffs = assign_coefficients(cloud, 0.8);
  const Vec3 toward = normalized(Vec3{0.3, -0.2, 1.0});
  const auto grid = voxelize(cloud, coeffs, 0.1, 1, toward * -1.0);
  for (auto _ : state) benchmark::DoNotOptimize(trace_node(grid, 500.0, toward));
}
BENCHMARK(BM_TraceNode)->Unit(benchmark::kMicrosecond);

static void BM_Accumulate(benchmark::State& state) {
  const auto& cloud = tree();
  const auto coeffs = assign_coefficients(cloud, 0.8);
  const auto sky = dome(static_cast<std::size_t>(state.range(0)));
  AccumulateOptions opts;
  opts.workers = static_cast<std::size_t>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(accumulate(cloud, coeffs, sky, 0.1, 1, opts));
  state.counters["nodes"] = static_cast<double>(sky.nodes.size());
}
BENCHMARK(BM_Accumulate)->Args({19, 1})->Args({121, 1})->Args({19, 4})->Unit(benchmark::kMillisecond);

static void BM_Sky(benchmark::State& state) {
  const auto loc = scene::orchard_location();
  const auto weather = scene::clear_sky_series(loc, parse_date("2016-11-15"), 3);
  const auto t = parse_instant("2016-11-16T11:00:00+10:00");
  const SkyOptions opts{static_cast<std::size_t>(state.range(0)), true, true};
  for (auto _ : state) benchmark::DoNotOptimize(sky_at(weather, t, opts));
}
BENCHMARK(BM_Sky)->Arg(19)->Arg(315)->Unit(benchmark::kMicrosecond);
BENCHMARK_MAIN();
