#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "canopy/cloud.hpp"
#include "canopy/skydome.hpp"

namespace canopy {

// One column's attenuation profile, voxels top-down.
struct ColumnTraversal {
  std::span<const Voxel> voxels;
  std::span<const double> incident;  // I_n
  std::span<const double> absorbed;  // alpha_n I_n
  double ground_arrival = 0.0;       // residual below the last voxel
};

struct NodeTrace {
  double node_value = 0.0;
  Vec3 node_direction;
  std::vector<double> incident;  // per voxel, grid order
  std::vector<double> absorbed;  // per voxel
  std::vector<double> residual;  // per column

  ColumnTraversal column(const VoxelGrid& grid, std::size_t c) const;
};

// Attenuates `node_value` down every column of `grid`. The grid must have
// been voxelized along -node_direction; std::invalid_argument otherwise.
NodeTrace trace_node(const VoxelGrid& grid, double node_value, const Vec3& node_direction);

// E = I_abs * s_vox^2 * dt. Inputs must be non-negative.
double voxel_energy(double absorbed, double s_vox, double dt);

// Axis-aligned horizontal raster at height z; (x0, y0) is the minimum corner.
struct GroundGrid {
  double x0 = 0.0;
  double y0 = 0.0;
  double z = 0.0;
  double cell = 0.1;
  std::size_t nx = 0;
  std::size_t ny = 0;

  std::size_t size() const { return nx * ny; }
  std::size_t index(std::size_t ix, std::size_t iy) const { return iy * nx + ix; }
  Vec3 center(std::size_t ix, std::size_t iy) const {
    return {x0 + (static_cast<double>(ix) + 0.5) * cell, y0 + (static_cast<double>(iy) + 0.5) * cell, z};
  }
  bool contains(double x, double y) const {
    return x >= x0 && y >= y0 && x <= x0 + cell * static_cast<double>(nx) && y <= y0 + cell * static_cast<double>(ny);
  }
};

// Covers [x_min, x_max] x [y_min, y_max] with whole cells.
GroundGrid make_ground(double x_min, double x_max, double y_min, double y_max, double z, double cell);

// Horizontal bounding box of the cloud padded by `margin`.
GroundGrid ground_around(const LabeledCloud& cloud, double cell, double margin);

// Per-node arrival raster.
struct GroundLayer {
  Vec3 direction;  // toward the node
  double node_value = 0.0;
  std::vector<double> arrival;  // incident value along the ray, per cell
};

struct EnergyField {
  SkyMode mode = SkyMode::instantaneous;
  double voxel_size = 0.0;
  // Per point, summed over nodes: the absorbed value of the voxel holding the
  // point (every point receives the voxel total). Units of the dome values.
  std::vector<double> irradiance;
  // Per point, summed over nodes: voxel absorbed value * s_vox^2 shared evenly
  // among the voxel's points. W for instantaneous domes, J for composite.
  std::vector<double> energy;
  GroundGrid ground;
  std::vector<double> ground_projected;  // sum over nodes of cos(zenith) * arrival
  std::vector<double> ground_total;      // sum over nodes of arrival
  std::vector<GroundLayer> layers;       // canonical node order; empty unless kept
  std::size_t nodes_traced = 0;
};

struct AccumulateOptions {
  std::size_t workers = 0;                // 0: hardware concurrency
  std::optional<GroundGrid> ground;       // default: ground_around(cloud, s_vox, ground_margin)
  double ground_margin = 2.0;
  bool keep_layers = false;
};

// Order in which nodes are reduced; independent of the dome's node order.
std::vector<std::size_t> canonical_node_order(const SkyDome& dome);

// Traces every sky node through a grid re-voxelized toward it and writes the
// results back to the original points and the ground raster. Output does not
// depend on the worker count or the dome's node order.
EnergyField accumulate(const LabeledCloud& cloud, std::span<const OpticalCoefficients> coefficients,
                       const SkyDome& dome, double s_vox, std::size_t w_vox, const AccumulateOptions& options = {});

// `x,y,value` rows of ground_projected at cell centres.
std::string ground_to_csv(const EnergyField& field);

}  // namespace canopy
