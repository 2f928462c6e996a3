#include <canopy/error.hpp>
#include <canopy/scene.hpp>
#include <canopy/skydome.hpp>

#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

using namespace canopy;
using namespace std::chrono;

namespace {

const GeoLocation kBundaberg{-24.85, 152.35, 10.0};

double angle_between(const Vec3& a, const Vec3& b) { return std::acos(std::clamp(dot(a, b), -1.0, 1.0)); }

}  // namespace

TEST(Hemisphere, UnitDirectionsAboveHorizon) {
  for (int f = 1; f <= 10; ++f) {
    const auto h = hemisphere_at_frequency(f);
    for (const auto& d : h.directions) {
      EXPECT_NEAR(norm(d), 1.0, 1e-12);
      EXPECT_GE(d.z, 0.0);
    }
  }
}

TEST(Hemisphere, QuasiUniformSpacing) {
  for (int f = 1; f <= 10; ++f) {
    const auto h = hemisphere_at_frequency(f);
    double lo = 1e9, hi = 0.0;
    for (std::size_t i = 0; i < h.directions.size(); ++i) {
      double nearest = 1e9;
      for (std::size_t j = 0; j < h.directions.size(); ++j)
        if (i != j) nearest = std::min(nearest, angle_between(h.directions[i], h.directions[j]));
      lo = std::min(lo, nearest);
      hi = std::max(hi, nearest);
    }
    EXPECT_LT(hi / lo, 1.5) << "frequency " << f;
  }
}

TEST(Hemisphere, NoDuplicates) {
  const auto h = hemisphere_at_frequency(6);
  for (std::size_t i = 0; i < h.directions.size(); ++i)
    for (std::size_t j = i + 1; j < h.directions.size(); ++j)
      EXPECT_GT(angle_between(h.directions[i], h.directions[j]), 1e-6);
}

TEST(Hemisphere, SmallestFrequencyReachingTarget) {
  for (std::size_t target : {12u, 19u, 121u, 315u, 500u}) {
    const auto h = build_hemisphere(target);
    EXPECT_GE(h.directions.size(), target);
    if (h.frequency > 1) EXPECT_LT(hemisphere_at_frequency(h.frequency - 1).directions.size(), target);
  }
}

TEST(Hemisphere, Deterministic) {
  const auto a = hemisphere_at_frequency(5);
  const auto b = hemisphere_at_frequency(5);
  ASSERT_EQ(a.directions.size(), b.directions.size());
  for (std::size_t i = 0; i < a.directions.size(); ++i) {
    EXPECT_EQ(a.directions[i].x, b.directions[i].x);
    EXPECT_EQ(a.directions[i].y, b.directions[i].y);
    EXPECT_EQ(a.directions[i].z, b.directions[i].z);
  }
  EXPECT_EQ(a.directions.front().z, 1.0);
}

TEST(CieParameters, ClearSky) {
  const auto p = cie_parameters(0.10);
  EXPECT_EQ(p.sky_type, 12);
  EXPECT_EQ(p.a, -1.0);
  EXPECT_EQ(p.b, -0.32);
  EXPECT_EQ(p.c, 10.0);
  EXPECT_EQ(p.d, -3.0);
  EXPECT_EQ(p.e, 0.45);
}

TEST(CieParameters, Overcast) {
  const auto p = cie_parameters(0.90);
  EXPECT_EQ(p.sky_type, 1);
  EXPECT_EQ(p.a, 4.0);
  EXPECT_EQ(p.b, -0.7);
  EXPECT_EQ(p.c, 2.0);
  EXPECT_EQ(p.d, -1.5);
  EXPECT_EQ(p.e, 0.15);
}

TEST(CieParameters, BinEdgesAreClosedAbove) {
  EXPECT_EQ(cie_parameters(0.0).sky_type, 12);
  EXPECT_EQ(cie_parameters(0.25).sky_type, 12);
  EXPECT_EQ(cie_parameters(0.2500001).sky_type, 11);
  EXPECT_EQ(cie_parameters(0.5).sky_type, 11);
  EXPECT_EQ(cie_parameters(0.6).sky_type, 7);
  EXPECT_EQ(cie_parameters(0.75).sky_type, 7);
  EXPECT_EQ(cie_parameters(1.0).sky_type, 1);
  EXPECT_THROW(cie_parameters(-0.01), std::invalid_argument);
  EXPECT_THROW(cie_parameters(1.01), std::invalid_argument);
  EXPECT_THROW(cie_parameters(std::nan("")), std::invalid_argument);
}

TEST(RelativeLuminance, CoincidentNodeHasZeroDistance) {
  for (double zs : {0.0, 10.0, 45.0, 80.0}) EXPECT_NEAR(sun_distance(zs, zs, 0.0), 0.0, 1e-7);
}

TEST(RelativeLuminance, IndicatrixAtRightAngleIsOne) {
  for (double d : {0.1, 0.3, 0.6, 0.9}) EXPECT_NEAR(scattering_indicatrix(kPi / 2.0, cie_parameters(d)), 1.0, 1e-12);
}

TEST(RelativeLuminance, OvercastZenithGradation) {
  const auto p = cie_parameters(0.9);
  EXPECT_NEAR(luminance_gradation(0.0, p), 1.0 + 4.0 * std::exp(-0.7), 1e-12);
  EXPECT_NEAR(luminance_gradation(0.0, p), 2.9863, 1e-4);
  const double zs = 30.0;
  EXPECT_NEAR(relative_luminance(0.0, zs, 0.0, p),
              scattering_indicatrix(deg2rad(zs), p) * (1.0 + 4.0 * std::exp(-0.7)), 1e-12);
}

TEST(RelativeLuminance, HorizonClampIsFinite) {
  for (double d : {0.1, 0.4, 0.6, 0.9}) {
    const auto p = cie_parameters(d);
    EXPECT_TRUE(std::isfinite(luminance_gradation(90.0, p)));
    EXPECT_NEAR(luminance_gradation(90.0, p), luminance_gradation(kMaxGradationZenith, p), 0.0);
  }
}

TEST(DistributeDiffuse, ZeroTotal) {
  const auto h = hemisphere_at_frequency(3);
  const auto v = distribute_diffuse(0.0, h.directions, {40.0, 50.0, 40.0}, cie_parameters(0.2));
  for (double x : v) EXPECT_EQ(x, 0.0);
}

TEST(DistributeDiffuse, SumsToTotal) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    const auto h = hemisphere_at_frequency(1 + i % 8);
    const double el = -10.0 + 100.0 * u(rng);
    const SolarPosition sun{360.0 * u(rng), el, 90.0 - el};
    const double total = 1000.0 * u(rng) + 1e-3;
    const auto v = distribute_diffuse(total, h.directions, sun, cie_parameters(u(rng)));
    double sum = 0.0;
    for (double x : v) {
      sum += x;
      EXPECT_GE(x, 0.0);
    }
    EXPECT_NEAR(sum, total, 1e-9 * total);
  }
}

TEST(DistributeDiffuse, ClearSkyConcentratesNearSun) {
  const auto h = hemisphere_at_frequency(4);
  const SolarPosition sun{120.0, 50.0, 40.0};
  const Vec3 s = direction_from_angles(sun.azimuth, sun.elevation);
  const auto v = distribute_diffuse(300.0, h.directions, sun, cie_parameters(0.1));
  std::size_t near = 0, far = 0;
  for (std::size_t i = 1; i < h.directions.size(); ++i) {
    if (dot(h.directions[i], s) > dot(h.directions[near], s)) near = i;
    if (dot(h.directions[i], s) < dot(h.directions[far], s)) far = i;
  }
  EXPECT_GT(v[near], v[far]);
}

TEST(InstantaneousSky, NoDirectNoSunNode) {
  const auto split = split_global(200.0, 1.0);
  const auto dome = instantaneous_sky(split, {30.0, 60.0, 30.0}, SkyOptions{19, true, true});
  EXPECT_EQ(dome.sun_node_count(), 0u);
  EXPECT_NEAR(dome.total(), 200.0, 1e-9);
}

TEST(InstantaneousSky, TotalIsDirectPlusDiffuse) {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    const auto split = split_global(1000.0 * u(rng), u(rng));
    const double el = 90.0 * u(rng) - 5.0;
    const SolarPosition sun{360.0 * u(rng), el, 90.0 - el};
    for (bool dedicated : {true, false}) {
      const auto dome = instantaneous_sky(split, sun, SkyOptions{19, dedicated, true});
      EXPECT_NEAR(dome.total(), split.direct + split.diffuse, 1e-12 * (split.global() + 1.0));
      EXPECT_LE(dome.sun_node_count(), 1u);
      for (const auto& n : dome.nodes) {
        EXPECT_NEAR(norm(n.direction), 1.0, 1e-12);
        EXPECT_GE(n.elevation(), 0.0);
      }
    }
  }
}

TEST(InstantaneousSky, DedicatedSunKeepsDiffuseSum) {
  const auto split = split_global(800.0, 0.3);
  const auto dome = instantaneous_sky(split, {45.0, 55.0, 35.0}, SkyOptions{121, true, true});
  EXPECT_EQ(dome.sun_node_count(), 1u);
  EXPECT_NEAR(dome.diffuse_total(), split.diffuse, 1e-9 * split.diffuse);
  EXPECT_EQ(dome.nodes.back().value, split.direct);
  EXPECT_NEAR(dome.nodes.back().azimuth, 45.0, 1e-9);
  EXPECT_NEAR(dome.nodes.back().elevation(), 55.0, 1e-9);
  EXPECT_EQ(dome.resolution, build_hemisphere(121).directions.size());
}

TEST(InstantaneousSky, SnappedNodeMaximisesDotProduct) {
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 50; ++i) {
    const auto split = split_global(900.0, 0.2);
    const double el = 5.0 + 80.0 * u(rng);
    const SolarPosition sun{360.0 * u(rng), el, 90.0 - el};
    const auto hemi = build_hemisphere(19);
    const auto plain = instantaneous_sky(split, sun, hemi, SkyOptions{19, true, true});
    const auto snapped = instantaneous_sky(split, sun, hemi, SkyOptions{19, false, true});
    EXPECT_EQ(snapped.sun_node_count(), 0u);
    const Vec3 s = direction_from_angles(sun.azimuth, sun.elevation);
    std::size_t best = 0;
    for (std::size_t k = 0; k < hemi.directions.size(); ++k)
      if (dot(hemi.directions[k], s) > dot(hemi.directions[best], s)) best = k;
    for (std::size_t k = 0; k < hemi.directions.size(); ++k) {
      const double extra = snapped.nodes[k].value - plain.nodes[k].value;
      if (k == best)
        EXPECT_NEAR(extra, split.direct, 1e-9);
      else
        EXPECT_EQ(extra, 0.0);
    }
  }
}

TEST(InstantaneousSky, NoDiffuseSingleNode) {
  const auto split = split_global(700.0, 0.3);
  const auto dome = instantaneous_sky(split, {200.0, 40.0, 50.0}, SkyOptions{19, true, false});
  ASSERT_EQ(dome.nodes.size(), 1u);
  EXPECT_EQ(dome.nodes[0].kind, NodeKind::sun);
  EXPECT_DOUBLE_EQ(dome.nodes[0].value, 700.0);
}

TEST(InstantaneousSky, NearestDirectionTieGoesLow) {
  const std::vector<Vec3> dirs{{1, 0, 0}, {0, 1, 0}};
  EXPECT_EQ(nearest_direction(dirs, normalized(Vec3{1, 1, 0})), 0u);
}

TEST(InstantaneousSky, CsvHeader) {
  const auto dome = instantaneous_sky(split_global(100.0, 0.5), {10.0, 20.0, 70.0}, SkyOptions{});
  const auto csv = dome.to_csv();
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "azimuth_deg,elevation_deg,value,kind");
  EXPECT_EQ(static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')), dome.nodes.size() + 1);
}

TEST(SkyAt, ClearDayBrightestDiffuseNearSun) {
  const auto series = scene::clear_sky_series(kBundaberg, parse_date("2016-11-16"), 1);
  const Instant t = parse_instant("2016-11-16T09:00:00+10:00");
  const auto dome = sky_at(series, t, SkyOptions{121, true, true});
  const auto sun = solar_position(kBundaberg, t);
  const SkyNode* best = nullptr;
  for (const auto& n : dome.nodes)
    if (n.kind == NodeKind::diffuse && (!best || n.value > best->value)) best = &n;
  ASSERT_NE(best, nullptr);
  EXPECT_LT(rad2deg(angle_between(best->direction, direction_from_angles(sun.azimuth, sun.elevation))), 15.0);
}

TEST(CompositeSky, SingleStepIsScaledSnappedSky) {
  const auto series = scene::clear_sky_series(kBundaberg, parse_date("2016-11-16"), 1);
  const Instant t = parse_instant("2016-11-16T10:00:00+10:00");
  const auto comp = composite_sky(series, t, t + minutes{30}, minutes{30}, 19);
  const auto inst = sky_at(series, t, SkyOptions{19, false, true});
  ASSERT_EQ(comp.nodes.size(), inst.nodes.size());
  EXPECT_EQ(comp.mode, SkyMode::composite);
  for (std::size_t i = 0; i < comp.nodes.size(); ++i) EXPECT_NEAR(comp.nodes[i].value, 1800.0 * inst.nodes[i].value, 1e-9);
}

TEST(CompositeSky, AddingIdenticalDoubles) {
  const auto series = scene::clear_sky_series(kBundaberg, parse_date("2016-11-16"), 1);
  const Instant t = parse_instant("2016-11-16T10:00:00+10:00");
  const auto comp = composite_sky(series, t, t + hours{2}, minutes{30}, 19);
  const auto twice = add_composite(comp, comp);
  for (std::size_t i = 0; i < comp.nodes.size(); ++i) EXPECT_EQ(twice.nodes[i].value, 2.0 * comp.nodes[i].value);
}

TEST(CompositeSky, FullDayIntegral) {
  const auto series = scene::clear_sky_series(kBundaberg, parse_date("2016-11-16"), 1);
  const Instant start = local_day_start(parse_date("2016-11-16"), 10.0);
  const auto comp = composite_sky(series, start, start + hours{24} - minutes{30} + seconds{1}, minutes{30}, 121);
  double expected = 0.0;
  for (const auto& s : series.samples()) expected += s.global_irradiance * 1800.0;
  EXPECT_NEAR(comp.total(), expected, 1e-6 * expected);
}

TEST(CompositeSky, RejectsBadSpan) {
  const auto series = scene::clear_sky_series(kBundaberg, parse_date("2016-11-16"), 1);
  const Instant t = parse_instant("2016-11-16T10:00:00+10:00");
  EXPECT_THROW(composite_sky(series, t, t, minutes{30}, 19), std::invalid_argument);
  EXPECT_THROW(composite_sky(series, t, t + hours{1}, seconds{0}, 19), std::invalid_argument);
  const auto inst = sky_at(series, t, SkyOptions{});
  EXPECT_THROW(add_composite(inst, inst), std::invalid_argument);
}
