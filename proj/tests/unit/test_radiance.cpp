#include <canopy/error.hpp>
#include <canopy/radiance.hpp>
#include <canopy/scene.hpp>

#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "march_oracle.hpp"

using namespace canopy;

using fixtures::jittered_lattice;
using fixtures::random_dome;
using fixtures::rel_diff;
using fixtures::single_node;

TEST(TraceNode, GeometricAttenuation) {
  const auto c = LabeledCloud::from_points(
      {{{0.05, 0.05, 3.0}, Label::foliage}, {{0.05, 0.05, 2.0}, Label::foliage}, {{0.05, 0.05, 1.0}, Label::foliage}},
      0.0);
  const auto g = voxelize(c, assign_coefficients(c, 0.8), 0.1, 1, {0, 0, -1});
  const auto t = trace_node(g, 1000.0, {0, 0, 1});
  ASSERT_EQ(g.columns.size(), 1u);
  const auto col = t.column(g, 0);
  ASSERT_EQ(col.incident.size(), 3u);
  EXPECT_DOUBLE_EQ(col.incident[0], 1000.0);
  EXPECT_DOUBLE_EQ(col.incident[1], 800.0);
  EXPECT_NEAR(col.incident[2], 640.0, 1e-9);
  EXPECT_NEAR(col.absorbed[2], 0.2 * 640.0, 1e-9);
  EXPECT_NEAR(col.ground_arrival, 512.0, 1e-9);
}

TEST(TraceNode, BranchBlocksEverythingBelow) {
  const auto c = LabeledCloud::from_points(
      {{{0.05, 0.05, 3.0}, Label::foliage}, {{0.05, 0.05, 2.0}, Label::branch}, {{0.05, 0.05, 1.0}, Label::foliage}},
      0.0);
  const auto g = voxelize(c, assign_coefficients(c, 0.8), 0.1, 1, {0, 0, -1});
  const auto t = trace_node(g, 1000.0, {0, 0, 1});
  const auto col = t.column(g, 0);
  EXPECT_EQ(col.absorbed[1], 0.0);
  EXPECT_EQ(col.incident[2], 0.0);
  EXPECT_EQ(col.ground_arrival, 0.0);
}

TEST(TraceNode, FoliageColumnsConserveEnergy) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 50; ++trial) {
    std::uniform_real_distribution<double> u(-1.0, 1.0), z(0.0, 2.0), b(0.05, 1.0);
    std::vector<LabeledPoint> pts;
    for (int i = 0; i < 400; ++i) pts.push_back({{u(rng), u(rng), z(rng)}, Label::foliage});
    const auto c = LabeledCloud::from_points(pts, -0.5);
    const Vec3 dir = direction_from_angles(360.0 * (b(rng)), 10.0 + 80.0 * b(rng));
    const auto g = voxelize(c, assign_coefficients(c, b(rng)), 0.2, 1, -dir);
    const double i0 = 1000.0 * b(rng);
    const auto t = trace_node(g, i0, dir);
    for (std::size_t k = 0; k < g.columns.size(); ++k) {
      const auto col = t.column(g, k);
      double absorbed = 0.0;
      for (double a : col.absorbed) absorbed += a;
      EXPECT_LT(rel_diff(absorbed + col.ground_arrival, i0), 1e-12);
    }
  }
}

TEST(TraceNode, RejectsMisorientedGrid) {
  const auto c = LabeledCloud::from_points({{{0, 0, 1}, Label::foliage}}, 0.0);
  const auto g = voxelize(c, assign_coefficients(c, 0.8), 0.1, 1, {0, 0, -1});
  EXPECT_THROW(trace_node(g, 1.0, normalized(Vec3{0, 1, 1})), std::invalid_argument);
}

TEST(VoxelEnergy, Product) {
  EXPECT_NEAR(voxel_energy(100.0, 0.1, 1800.0), 1800.0, 1e-9);
  EXPECT_EQ(voxel_energy(100.0, 0.1, 0.0), 0.0);
  EXPECT_NEAR(voxel_energy(200.0, 0.1, 1800.0), 2.0 * voxel_energy(100.0, 0.1, 1800.0), 1e-9);
  EXPECT_NEAR(voxel_energy(100.0, 0.1, 3600.0), 2.0 * voxel_energy(100.0, 0.1, 1800.0), 1e-9);
  EXPECT_THROW(voxel_energy(-1.0, 0.1, 1.0), std::invalid_argument);
}

TEST(Accumulate, ZeroDomeGivesZero) {
  std::mt19937_64 rng(1);
  const auto c = jittered_lattice(rng, 5, 0.2, 0.2);
  auto dome = random_dome(rng, 5);
  for (auto& n : dome.nodes) n.value = 0.0;
  const auto f = accumulate(c, assign_coefficients(c, 0.8), dome, 0.1, 1);
  for (double e : f.energy) EXPECT_EQ(e, 0.0);
  for (double e : f.ground_total) EXPECT_EQ(e, 0.0);
}

TEST(Accumulate, SingleNodeMatchesTrace) {
  std::mt19937_64 rng(2);
  const auto c = jittered_lattice(rng, 6, 0.15, 0.1);
  const auto k = assign_coefficients(c, 0.75);
  const Vec3 dir = direction_from_angles(123.0, 57.0);
  const auto f = accumulate(c, k, single_node(dir, 700.0), 0.2, 1, {1});
  const auto g = voxelize(c, k, 0.2, 1, -dir);
  const auto t = trace_node(g, 700.0, dir);
  for (std::size_t v = 0; v < g.voxels.size(); ++v)
    for (auto p : g.voxel_points(g.voxels[v])) {
      EXPECT_EQ(f.irradiance[p], t.absorbed[v]);
      EXPECT_DOUBLE_EQ(f.energy[p], t.absorbed[v] * 0.04 / g.voxels[v].weight);
    }
}

TEST(Accumulate, MatchesMarchingOracle) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    std::mt19937_64 rng(seed);
    const auto c = jittered_lattice(rng, 5, 0.25, 0.15);
    const double beta = std::uniform_real_distribution<double>(0.3, 0.95)(rng);
    const auto k = assign_coefficients(c, beta);
    const auto dome = random_dome(rng, 3);
    const double s = 0.3;
    const std::size_t w = seed % 3;
    const auto f = accumulate(c, k, dome, s, w, {2});
    const auto expected = oracle::march(c, k, dome, s, w);
    for (std::size_t i = 0; i < c.size(); ++i) {
      if (expected[i] == 0.0)
        EXPECT_EQ(f.irradiance[i], 0.0);
      else
        EXPECT_LT(rel_diff(f.irradiance[i], expected[i]), 1e-12) << "seed " << seed << " point " << i;
    }
  }
}

TEST(Accumulate, IndependentOfWorkersAndNodeOrder) {
  std::mt19937_64 rng(5);
  const auto c = jittered_lattice(rng, 8, 0.12, 0.2);
  const auto k = assign_coefficients(c, 0.8);
  auto dome = random_dome(rng, 12);
  const auto ref = accumulate(c, k, dome, 0.1, 1, {1});
  std::shuffle(dome.nodes.begin(), dome.nodes.end(), rng);
  for (std::size_t workers : {1u, 2u, 4u, 8u}) {
    const auto f = accumulate(c, k, dome, 0.1, 1, {workers});
    EXPECT_EQ(f.energy, ref.energy);
    EXPECT_EQ(f.irradiance, ref.irradiance);
    EXPECT_EQ(f.ground_projected, ref.ground_projected);
    EXPECT_EQ(f.ground_total, ref.ground_total);
  }
}

TEST(Accumulate, EmptyCloudGivesUniformGround) {
  const LabeledCloud empty;
  AccumulateOptions opts;
  opts.ground = make_ground(-1, 1, -1, 1, 0.0, 0.1);
  SkyDome dome = single_node({0, 0, 1}, 300.0);
  dome.nodes.push_back(make_node(direction_from_angles(90.0, 30.0), 100.0, NodeKind::diffuse));
  const auto f = accumulate(empty, {}, dome, 0.1, 1, opts);
  ASSERT_EQ(f.ground_projected.size(), 400u);
  for (double v : f.ground_projected) EXPECT_NEAR(v, 300.0 + 100.0 * 0.5, 1e-9);
  for (double v : f.ground_total) EXPECT_DOUBLE_EQ(v, 400.0);
}

TEST(Accumulate, GroundOutsideShadowIsUnattenuated) {
  const auto ball = scene::opaque_ball({0, 0, 2}, 0.3, 0.02);
  const auto k = assign_coefficients(ball, 0.8);
  AccumulateOptions opts;
  opts.ground = make_ground(-2, 2, -2, 2, 0.0, 0.05);
  const auto f = accumulate(ball, k, single_node({0, 0, 1}, 500.0), 0.05, 1, opts);
  const auto& g = f.ground;
  for (std::size_t iy = 0; iy < g.ny; ++iy)
    for (std::size_t ix = 0; ix < g.nx; ++ix) {
      const Vec3 c = g.center(ix, iy);
      const double r = std::hypot(c.x, c.y);
      const double v = f.ground_total[g.index(ix, iy)];
      if (r > 0.4) EXPECT_EQ(v, 500.0);
      if (r < 0.2) EXPECT_EQ(v, 0.0);
    }
}

TEST(Accumulate, ObliqueShadowOfBall) {
  const double r = 0.5;
  const auto ball = scene::opaque_ball({0, 0, 2}, r, 0.02);
  const auto k = assign_coefficients(ball, 0.8);
  const double s = 0.025;
  AccumulateOptions opts;
  opts.ground = make_ground(-1.5, 1.5, -3.5, 0.5, 0.0, s);
  // Sun due north at 45 degrees: the shadow falls 2 m south.
  const auto f = accumulate(ball, k, single_node(direction_from_angles(0.0, 45.0), 800.0), s, 1, opts);
  double dark = 0.0, cy = 0.0;
  for (std::size_t iy = 0; iy < f.ground.ny; ++iy)
    for (std::size_t ix = 0; ix < f.ground.nx; ++ix)
      if (f.ground_total[f.ground.index(ix, iy)] == 0.0) {
        dark += s * s;
        cy += f.ground.center(ix, iy).y * s * s;
      }
  const double expected = kPi * r * r / std::sin(deg2rad(45.0));
  EXPECT_NEAR(dark, expected, 0.1 * expected);
  EXPECT_NEAR(cy / dark, -2.0, 0.05);
}

TEST(Accumulate, CanonicalOrderIgnoresInputOrder) {
  std::mt19937_64 rng(9);
  auto dome = random_dome(rng, 7);
  const auto a = canonical_node_order(dome);
  std::vector<Vec3> sorted_a;
  for (auto i : a) sorted_a.push_back(dome.nodes[i].direction);
  std::reverse(dome.nodes.begin(), dome.nodes.end());
  const auto b = canonical_node_order(dome);
  for (std::size_t i = 0; i < b.size(); ++i) EXPECT_EQ(dome.nodes[b[i]].direction.x, sorted_a[i].x);
}

TEST(Ground, MakeGroundCoversExtent) {
  const auto g = make_ground(0.0, 1.0, 0.0, 0.55, 0.0, 0.1);
  EXPECT_EQ(g.nx, 10u);
  EXPECT_EQ(g.ny, 6u);
  EXPECT_TRUE(g.contains(0.99, 0.54));
  EXPECT_FALSE(g.contains(-0.01, 0.2));
  EXPECT_THROW(make_ground(0, 1, 0, 1, 0, 0.0), std::invalid_argument);
}

TEST(Ground, CsvLayout) {
  const LabeledCloud empty;
  AccumulateOptions opts;
  opts.ground = make_ground(0, 0.2, 0, 0.1, 0.0, 0.1);
  const auto f = accumulate(empty, {}, single_node({0, 0, 1}, 10.0), 0.1, 1, opts);
  EXPECT_EQ(ground_to_csv(f), "x,y,value\n0.05,0.05,10\n0.15000000000000002,0.05,10\n");
}
