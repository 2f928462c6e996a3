#include "canopy/radiance.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <condition_variable>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>
#include <tuple>

#include "canopy/error.hpp"
#include "canopy/textio.hpp"

namespace canopy {

ColumnTraversal NodeTrace::column(const VoxelGrid& grid, std::size_t c) const {
  const auto& col = grid.columns[c];
  return {grid.column_voxels(c), std::span<const double>(incident).subspan(col.first_voxel, col.voxel_count),
          std::span<const double>(absorbed).subspan(col.first_voxel, col.voxel_count), residual[c]};
}

NodeTrace trace_node(const VoxelGrid& grid, double node_value, const Vec3& node_direction) {
  const double len = norm(node_direction);
  if (!(len > 0.0) || std::abs(dot(grid.ray_direction, node_direction) / len + 1.0) > 1e-9)
    throw std::invalid_argument("voxel grid is not oriented toward the sky node");
  NodeTrace t;
  t.node_value = node_value;
  t.node_direction = node_direction * (1.0 / len);
  t.incident.resize(grid.voxels.size());
  t.absorbed.resize(grid.voxels.size());
  t.residual.resize(grid.columns.size());
  for (std::size_t c = 0; c < grid.columns.size(); ++c) {
    const auto& col = grid.columns[c];
    double available = node_value;
    for (std::uint32_t k = col.first_voxel; k < col.first_voxel + col.voxel_count; ++k) {
      const Voxel& v = grid.voxels[k];
      t.incident[k] = available;
      t.absorbed[k] = v.alpha * available;
      available *= v.beta;
    }
    t.residual[c] = available;
  }
  return t;
}

double voxel_energy(double absorbed, double s_vox, double dt) {
  if (absorbed < 0.0 || s_vox < 0.0 || dt < 0.0) throw std::invalid_argument("voxel_energy inputs must be >= 0");
  return absorbed * s_vox * s_vox * dt;
}

GroundGrid make_ground(double x_min, double x_max, double y_min, double y_max, double z, double cell) {
  if (!(cell > 0.0)) throw std::invalid_argument("ground cell size must be positive");
  if (!(x_max >= x_min && y_max >= y_min)) throw std::invalid_argument("ground extent is inverted");
  GroundGrid g;
  g.x0 = x_min;
  g.y0 = y_min;
  g.z = z;
  g.cell = cell;
  g.nx = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil((x_max - x_min) / cell - 1e-9)));
  g.ny = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil((y_max - y_min) / cell - 1e-9)));
  return g;
}

GroundGrid ground_around(const LabeledCloud& cloud, double cell, double margin) {
  if (cloud.empty()) throw std::invalid_argument("ground extent of an empty cloud is undefined");
  double x_lo = cloud.points.front().position.x, x_hi = x_lo;
  double y_lo = cloud.points.front().position.y, y_hi = y_lo;
  for (const auto& p : cloud.points) {
    x_lo = std::min(x_lo, p.position.x);
    x_hi = std::max(x_hi, p.position.x);
    y_lo = std::min(y_lo, p.position.y);
    y_hi = std::max(y_hi, p.position.y);
  }
  return make_ground(x_lo - margin, x_hi + margin, y_lo - margin, y_hi + margin, cloud.ground_z, cell);
}

std::vector<std::size_t> canonical_node_order(const SkyDome& dome) {
  std::vector<std::size_t> order(dome.nodes.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const SkyNode& l = dome.nodes[a];
    const SkyNode& r = dome.nodes[b];
    return std::make_tuple(l.direction.x, l.direction.y, l.direction.z, l.value, static_cast<int>(l.kind)) <
           std::make_tuple(r.direction.x, r.direction.y, r.direction.z, r.value, static_cast<int>(r.kind));
  });
  return order;
}

namespace {

struct NodeContribution {
  std::optional<VoxelGrid> grid;
  NodeTrace trace;
  std::vector<double> arrival;
  double cos_zenith = 0.0;
};

// Arrival at each ground cell: walk back from the cell centre along the ray
// and take the light left after the voxels above the cell in its column.
void ground_arrivals(const VoxelGrid* grid, const NodeTrace& trace, const GroundGrid& ground,
                     std::vector<double>& out) {
  out.assign(ground.size(), trace.node_value);
  if (!grid) return;
  for (std::size_t iy = 0; iy < ground.ny; ++iy) {
    for (std::size_t ix = 0; ix < ground.nx; ++ix) {
      const auto cell = grid->cell_of(ground.center(ix, iy));
      const auto c = grid->find_column(cell.iu, cell.iv);
      if (!c) continue;
      const auto& col = grid->columns[*c];
      double value = trace.residual[*c];
      for (std::uint32_t k = col.first_voxel; k < col.first_voxel + col.voxel_count; ++k) {
        if (grid->voxels[k].layer < cell.layer) {
          value = trace.incident[k];
          break;
        }
      }
      out[ground.index(ix, iy)] = value;
    }
  }
}

NodeContribution trace_one(const LabeledCloud& cloud, std::span<const OpticalCoefficients> coefficients,
                           const SkyNode& node, double s_vox, std::size_t w_vox, const GroundGrid& ground) {
  NodeContribution nc;
  const Vec3 dir = normalized(node.direction);
  nc.cos_zenith = std::max(0.0, dir.z);
  if (!cloud.empty()) {
    nc.grid = voxelize(cloud, coefficients, s_vox, w_vox, -dir);
    nc.trace = trace_node(*nc.grid, node.value, dir);
  } else {
    nc.trace.node_value = node.value;
    nc.trace.node_direction = dir;
  }
  ground_arrivals(nc.grid ? &*nc.grid : nullptr, nc.trace, ground, nc.arrival);
  return nc;
}

void merge(EnergyField& field, NodeContribution& nc, double s_vox, bool keep_layers) {
  if (nc.grid) {
    const VoxelGrid& g = *nc.grid;
    const double area = s_vox * s_vox;
    for (std::size_t k = 0; k < g.voxels.size(); ++k) {
      const Voxel& v = g.voxels[k];
      const double absorbed = nc.trace.absorbed[k];
      const double share = absorbed * area / static_cast<double>(v.weight);
      for (std::uint32_t p : g.voxel_points(v)) {
        field.irradiance[p] += absorbed;
        field.energy[p] += share;
      }
    }
  }
  for (std::size_t c = 0; c < nc.arrival.size(); ++c) {
    field.ground_projected[c] += nc.cos_zenith * nc.arrival[c];
    field.ground_total[c] += nc.arrival[c];
  }
  if (keep_layers) field.layers.push_back({nc.trace.node_direction, nc.trace.node_value, std::move(nc.arrival)});
  ++field.nodes_traced;
}

}  // namespace

EnergyField accumulate(const LabeledCloud& cloud, std::span<const OpticalCoefficients> coefficients,
                       const SkyDome& dome, double s_vox, std::size_t w_vox, const AccumulateOptions& options) {
  if (!(s_vox > 0.0)) throw std::invalid_argument("voxel size must be positive");
  if (coefficients.size() != cloud.size()) throw std::invalid_argument("one coefficient pair per point required");

  EnergyField field;
  field.mode = dome.mode;
  field.voxel_size = s_vox;
  field.ground = options.ground ? *options.ground : ground_around(cloud, s_vox, options.ground_margin);
  field.irradiance.assign(cloud.size(), 0.0);
  field.energy.assign(cloud.size(), 0.0);
  field.ground_projected.assign(field.ground.size(), 0.0);
  field.ground_total.assign(field.ground.size(), 0.0);

  std::vector<std::size_t> order;
  for (std::size_t i : canonical_node_order(dome))
    if (dome.nodes[i].value != 0.0) order.push_back(i);
  if (order.empty()) return field;

  std::size_t workers = options.workers ? options.workers : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, order.size());

  std::atomic<std::size_t> next{0};
  std::mutex mutex;
  std::condition_variable turn_changed;
  std::size_t turn = 0;
  std::exception_ptr failure;

  // Each worker traces nodes independently; partial results are merged in
  // canonical order so the floating-point sums never depend on scheduling.
  auto work = [&] {
    for (std::size_t k = next++; k < order.size(); k = next++) {
      std::optional<NodeContribution> nc;
      try {
        nc.emplace(trace_one(cloud, coefficients, dome.nodes[order[k]], s_vox, w_vox, field.ground));
      } catch (...) {
        std::lock_guard lock(mutex);
        if (!failure) failure = std::current_exception();
        turn_changed.notify_all();
        return;
      }
      std::unique_lock lock(mutex);
      turn_changed.wait(lock, [&] { return turn == k || failure; });
      if (failure) return;
      merge(field, *nc, s_vox, options.keep_layers);
      ++turn;
      turn_changed.notify_all();
    }
  };

  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  if (failure) std::rethrow_exception(failure);
  return field;
}

std::string ground_to_csv(const EnergyField& field) {
  std::string out = "x,y,value\n";
  const GroundGrid& g = field.ground;
  for (std::size_t iy = 0; iy < g.ny; ++iy) {
    for (std::size_t ix = 0; ix < g.nx; ++ix) {
      const Vec3 c = g.center(ix, iy);
      out += textio::format_double(c.x) + ',' + textio::format_double(c.y) + ',' +
             textio::format_double(field.ground_projected[g.index(ix, iy)]) + '\n';
    }
  }
  return out;
}

}  // namespace canopy
