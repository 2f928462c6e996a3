#include <canopy/error.hpp>
#include <canopy/scene.hpp>
#include <canopy/textio.hpp>
#include <canopy/weather.hpp>

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "scratch_dir.hpp"

using namespace canopy;
using namespace std::chrono;

namespace {

const GeoLocation kBundaberg{-24.85, 152.35, 10.0};

// Frozen from tests/oracles/solar_position_oracle.py (NREL SPA, no refraction).
struct AlmanacPoint {
  const char* label;
  double lat, lon;
  const char* utc;
  double azimuth, elevation;
};
constexpr AlmanacPoint kAlmanac[] = {
    {"bundaberg_morning", -24.85, 152.35, "2016-11-15T22:00:00Z", 94.2678, 39.9538},
    {"bundaberg_noon", -24.85, 152.35, "2016-11-16T02:00:00Z", 315.4183, 81.6818},
    {"bundaberg_afternoon", -24.85, 152.35, "2017-03-02T05:30:00Z", 280.5459, 37.4979},
    {"bundaberg_winter", -24.85, 152.35, "2017-06-21T01:15:00Z", 11.3464, 40.8737},
    {"bundaberg_late", -24.85, 152.35, "2017-01-10T07:45:00Z", 251.1511, 11.8307},
    {"equator_equinox", 0.0, 0.0, "2017-03-20T12:07:00Z", 74.6458, 89.8981},
    {"sydney_noon", -33.87, 151.21, "2016-12-21T02:00:00Z", 351.4924, 79.4593},
    {"greenwich_summer", 51.48, 0.0, "2017-06-21T15:00:00Z", 247.6943, 45.9250},
};

double angle_diff(double a, double b) {
  double d = std::fmod(std::abs(a - b), 360.0);
  return d > 180.0 ? 360.0 - d : d;
}

WeatherSeries flat_day(double value, int cadence_minutes = 30) {
  std::vector<WeatherSample> s;
  const Instant start = local_day_start(parse_date("2016-11-16"), 10.0);
  for (int m = 0; m < 24 * 60; m += cadence_minutes) s.push_back({start + minutes{m}, value});
  return WeatherSeries(kBundaberg, std::move(s));
}

}  // namespace

TEST(SolarPosition, MatchesAlmanacOracle) {
  for (const auto& p : kAlmanac) {
    const auto pos = solar_position({p.lat, p.lon, 0.0}, parse_instant(p.utc));
    EXPECT_LT(std::abs(pos.elevation - p.elevation), 0.5) << p.label;
    // Azimuth is ill-conditioned near the zenith.
    if (p.elevation < 85.0) EXPECT_LT(angle_diff(pos.azimuth, p.azimuth), 0.5) << p.label;
    EXPECT_NEAR(pos.zenith, 90.0 - pos.elevation, 1e-12);
  }
}

TEST(SolarPosition, EquatorEquinoxNoonIsOverhead) {
  const auto pos = solar_position({0.0, 0.0, 0.0}, parse_instant("2017-03-20T12:07:00Z"));
  EXPECT_NEAR(pos.elevation, 90.0, 2.0);
}

TEST(SolarPosition, LocalMidnightIsDark) {
  const auto pos = solar_position(kBundaberg, parse_instant("2016-11-16T00:00:00+10:00"));
  EXPECT_LT(pos.elevation, 0.0);
}

TEST(SolarPosition, AzimuthInRange) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> minute(0, 365 * 24 * 60);
  for (int i = 0; i < 500; ++i) {
    const auto pos = solar_position(kBundaberg, parse_instant("2017-01-01T00:00:00Z") + minutes{minute(rng)});
    EXPECT_GE(pos.azimuth, 0.0);
    EXPECT_LT(pos.azimuth, 360.0);
    EXPECT_GE(pos.elevation, -90.0);
    EXPECT_LE(pos.elevation, 90.0);
  }
}

TEST(GeoLocation, Validates) {
  EXPECT_THROW((GeoLocation{91.0, 0.0, 0.0}.validate()), std::invalid_argument);
  EXPECT_THROW((GeoLocation{0.0, 181.0, 0.0}.validate()), std::invalid_argument);
  EXPECT_NO_THROW(kBundaberg.validate());
}

TEST(EquationOfTime, SpringReference) {
  EXPECT_NEAR(equation_of_time_minutes(81), -7.67 * std::sin(deg2rad(78.7)), 1e-12);
  EXPECT_NEAR(equation_of_time_minutes(81), -7.52, 0.01);
}

TEST(EquationOfTime, QuarterYearKillsDoubleAngleTerm) {
  const double n = 81 + 365.0 / 4.0;
  const double b = deg2rad(360.0 * (n - 81) / 365.0);
  EXPECT_NEAR(std::sin(2 * b), 0.0, 1e-12);
  // Integer day 172 sits a quarter degree short of B = 90.
  const double b172 = deg2rad(360.0 * 91 / 365.0);
  EXPECT_NEAR(equation_of_time_minutes(172), -7.67 * std::sin(b172 + deg2rad(78.7)), 0.1);
}

TEST(EquationOfTime, Periodic) {
  for (int n = 1; n <= 366; ++n)
    EXPECT_LT(std::abs(equation_of_time_minutes(n) - equation_of_time_minutes(n + 365)), 1e-9);
}

TEST(ApparentSolarTime, UsesLongitudeAndCorrection) {
  const Instant t = parse_instant("2017-03-22T02:00:00Z");  // local day 81
  const double expected = 2.0 + 152.35 / 15.0 + equation_of_time_minutes(81) / 60.0;
  EXPECT_NEAR(apparent_solar_time(t, kBundaberg), expected, 1e-12);
}

TEST(ApparentSolarTime, WrapsIntoDay) {
  for (int h = 0; h < 48; ++h) {
    const double ast = apparent_solar_time(parse_instant("2017-03-22T00:00:00Z") + hours{h}, kBundaberg);
    EXPECT_GE(ast, 0.0);
    EXPECT_LT(ast, 24.0);
  }
}

TEST(ExtraterrestrialIrradiance, PerihelionAndAphelion) {
  EXPECT_NEAR(extraterrestrial_irradiance(3), 1370.0 * 1.033412, 1e-9);
  EXPECT_NEAR(extraterrestrial_irradiance(3), 1415.77, 0.01);
  EXPECT_NEAR(extraterrestrial_irradiance(186), 1324.2, 0.1);
}

TEST(ExtraterrestrialIrradiance, BoundedAndChecked) {
  for (int n = 1; n <= 366; ++n) {
    const double h0 = extraterrestrial_irradiance(n);
    EXPECT_GE(h0, 1324.2 - 0.05);
    EXPECT_LE(h0, 1415.8);
  }
  EXPECT_THROW(extraterrestrial_irradiance(0), std::out_of_range);
  EXPECT_THROW(extraterrestrial_irradiance(367), std::out_of_range);
}

TEST(DiffuseFraction, AllZeroInputs) {
  EXPECT_NEAR(diffuse_fraction({}), 1.0 / (1.0 + std::exp(-5.38)), 1e-15);
  EXPECT_NEAR(diffuse_fraction({}), 0.99541, 1e-5);
}

TEST(DiffuseFraction, StrictlyDecreasingInClearness) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u01(0.0, 1.0), ast(0.0, 24.0), el(0.0, 90.0);
  for (int i = 0; i < 1000; ++i) {
    DiffuseFractionInputs in{0.0, u01(rng), u01(rng), ast(rng), el(rng)};
    double a = u01(rng), b = u01(rng);
    if (a == b) continue;
    if (a > b) std::swap(a, b);
    in.clearness = a;
    const double da = diffuse_fraction(in);
    in.clearness = b;
    EXPECT_GT(da, diffuse_fraction(in));
  }
}

TEST(SplitGlobal, ZeroGlobal) {
  const auto s = split_global(0.0, 0.37);
  EXPECT_EQ(s.direct, 0.0);
  EXPECT_EQ(s.diffuse, 0.0);
}

TEST(SplitGlobal, SumsExactly) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> g(0.0, 1200.0), d(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const double global = g(rng);
    const auto s = split_global(global, d(rng));
    EXPECT_NEAR(s.direct + s.diffuse, global, 1e-12 * global);
    EXPECT_GE(s.direct, 0.0);
    EXPECT_GE(s.diffuse, 0.0);
  }
}

TEST(Decompose, NightIsAllDiffuse) {
  const auto series = flat_day(50.0);
  const auto s = decompose(series, parse_instant("2016-11-16T01:00:00+10:00"));
  EXPECT_EQ(s.diffuse_fraction, 1.0);
  EXPECT_EQ(s.direct, 0.0);
  EXPECT_DOUBLE_EQ(s.diffuse, 50.0);
}

TEST(Decompose, ZeroGlobalGivesZeroComponents) {
  const auto s = decompose(flat_day(0.0), parse_instant("2016-11-16T12:00:00+10:00"));
  EXPECT_EQ(s.direct, 0.0);
  EXPECT_EQ(s.diffuse, 0.0);
}

TEST(Decompose, ClearDayIsMostlyDirect) {
  const auto series = scene::clear_sky_series(kBundaberg, parse_date("2016-11-16"), 1);
  const Instant noon = parse_instant("2016-11-16T12:00:00+10:00");
  const auto s = decompose(series, noon);
  // Normal-incidence H0 keeps k_t and K_t low, so a clear sky only reaches
  // the second clear bin; the horizontal projection reaches the first.
  EXPECT_LT(s.diffuse_fraction, 0.5);
  EXPECT_LT(decompose(series, noon, {true}).diffuse_fraction, 0.25);
  EXPECT_NEAR(s.global(), series.irradiance_at(noon), 1e-9);
  EXPECT_GT(s.clearness, 0.5);
  EXPECT_GT(s.daily_clearness, 0.0);
}

TEST(Decompose, MatchesDirectEvaluation) {
  const auto series = scene::clear_sky_series(kBundaberg, parse_date("2016-11-16"), 1);
  const Instant t = parse_instant("2016-11-16T10:00:00+10:00");
  const auto s = decompose(series, t);
  const double h0 = extraterrestrial_irradiance(day_of_year(parse_date("2016-11-16")));
  double gsum = 0.0;
  for (const auto& x : series.samples()) gsum += x.global_irradiance;
  const double daily = gsum / (h0 * static_cast<double>(series.samples().size()));
  const double kt = series.irradiance_at(t) / h0;
  const double prev = series.irradiance_at(t - minutes{30}) / h0;
  const double next = series.irradiance_at(t + minutes{30}) / h0;
  const double expected = diffuse_fraction(
      {kt, daily, 0.5 * (prev + next), apparent_solar_time(t, kBundaberg), solar_position(kBundaberg, t).elevation});
  EXPECT_NEAR(s.diffuse_fraction, expected, 1e-12);
  EXPECT_NEAR(s.daily_clearness, daily, 1e-12);
}

TEST(Decompose, OutsideSeriesThrows) {
  const auto series = flat_day(100.0);
  EXPECT_THROW(decompose(series, parse_instant("2016-11-20T12:00:00+10:00")), CoverageError);
}

TEST(WeatherSeries, RejectsUnorderedOrNegative) {
  const Instant t = parse_instant("2016-11-16T00:00:00Z");
  EXPECT_THROW(WeatherSeries(kBundaberg, {{t, 1.0}, {t, 2.0}}), std::invalid_argument);
  EXPECT_THROW(WeatherSeries(kBundaberg, {{t, -1.0}}), std::invalid_argument);
}

TEST(WeatherSeries, Interpolates) {
  const Instant t = parse_instant("2016-11-16T00:00:00Z");
  const WeatherSeries s(kBundaberg, {{t, 100.0}, {t + minutes{30}, 200.0}});
  EXPECT_DOUBLE_EQ(s.irradiance_at(t + minutes{15}), 150.0);
  EXPECT_DOUBLE_EQ(s.irradiance_at(t), 100.0);
  EXPECT_DOUBLE_EQ(s.irradiance_at(t + minutes{30}), 200.0);
  EXPECT_THROW(s.irradiance_at(t + minutes{31}), CoverageError);
}

TEST(WeatherSeries, CsvRoundTrip) {
  ScratchDir dir;
  const auto series = scene::clear_sky_series(kBundaberg, parse_date("2016-11-16"), 2);
  textio::write_file(dir.file("w.csv"), series.to_csv());
  const auto back = WeatherSeries::load_csv(dir.file("w.csv"), kBundaberg);
  ASSERT_EQ(back.samples().size(), series.samples().size());
  for (std::size_t i = 0; i < back.samples().size(); ++i) {
    EXPECT_EQ(back.samples()[i].timestamp, series.samples()[i].timestamp);
    EXPECT_EQ(back.samples()[i].global_irradiance, series.samples()[i].global_irradiance);
  }
}

TEST(WeatherSeries, CsvErrorsNameLine) {
  ScratchDir dir;
  textio::write_file(dir.file("w.csv"), "timestamp_iso8601,global_wm2\n2016-11-16T00:00:00Z,1\n2016-11-16T00:30:00Z,abc\n");
  try {
    WeatherSeries::load_csv(dir.file("w.csv"), kBundaberg);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
}

TEST(SynthesizeFromDaily, IdenticalExposureCopiesProfile) {
  const auto overlap = scene::clear_sky_series(kBundaberg, parse_date("2016-11-16"), 1);
  double mj = 0.0;
  for (const auto& s : overlap.samples()) mj += s.global_irradiance * 1800.0 / 1e6;
  const DailyExposure daily{{parse_date("2016-11-16"), mj}, {parse_date("2016-11-17"), mj}};
  const auto out = synthesize_from_daily(daily, overlap);
  ASSERT_EQ(out.samples().size(), overlap.samples().size());
  for (std::size_t i = 0; i < out.samples().size(); ++i) {
    EXPECT_EQ(out.samples()[i].timestamp, overlap.samples()[i].timestamp + days{1});
    EXPECT_NEAR(out.samples()[i].global_irradiance, overlap.samples()[i].global_irradiance, 1e-9);
  }
}

TEST(SynthesizeFromDaily, DoubleExposureDoublesSamples) {
  const auto overlap = scene::clear_sky_series(kBundaberg, parse_date("2016-11-16"), 1);
  double mj = 0.0;
  for (const auto& s : overlap.samples()) mj += s.global_irradiance * 1800.0 / 1e6;
  const DailyExposure daily{{parse_date("2016-11-16"), mj}, {parse_date("2016-11-20"), 2.0 * mj}};
  const auto out = synthesize_from_daily(daily, overlap);
  ASSERT_EQ(out.samples().size(), overlap.samples().size());
  for (std::size_t i = 0; i < out.samples().size(); ++i)
    EXPECT_NEAR(out.samples()[i].global_irradiance, 2.0 * overlap.samples()[i].global_irradiance, 1e-9);
}

TEST(SynthesizeFromDaily, IntegralMatchesExposure) {
  const auto overlap = scene::clear_sky_series(kBundaberg, parse_date("2016-11-14"), 3);
  const DailyExposure daily{{parse_date("2016-11-14"), 25.0}, {parse_date("2016-12-01"), 17.3},
                            {parse_date("2016-12-02"), 31.9}};
  const auto out = synthesize_from_daily(daily, overlap);
  for (const auto& day : {parse_date("2016-12-01"), parse_date("2016-12-02")}) {
    double mj = 0.0;
    for (const auto& s : out.day_samples(day)) mj += s.global_irradiance * 1800.0 / 1e6;
    EXPECT_NEAR(mj, daily.at(day), 1e-3 * daily.at(day));
  }
}

TEST(SynthesizeFromDaily, NoOverlapThrows) {
  const auto overlap = scene::clear_sky_series(kBundaberg, parse_date("2016-11-16"), 1);
  EXPECT_THROW(synthesize_from_daily({{parse_date("2017-01-01"), 20.0}}, overlap), CoverageError);
}

TEST(DailyExposure, LoadsCsv) {
  ScratchDir dir;
  textio::write_file(dir.file("d.csv"), "date_iso8601,exposure_mj_m2\n2016-11-16,25.5\n2016-11-17,12\n");
  const auto d = load_daily_exposure(dir.file("d.csv"));
  ASSERT_EQ(d.size(), 2u);
  EXPECT_EQ(d.at(parse_date("2016-11-17")), 12.0);
}
