#include "vxae/voxel_grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace vxae {

VoxelGrid::VoxelGrid(int d) : dim(d) {
  if (d < 1) throw std::invalid_argument("voxel grid dim must be >= 1, got " + std::to_string(d));
  occupancy.assign(static_cast<std::size_t>(d) * d * d, 0);
}

std::size_t VoxelGrid::occupied_count() const {
  return static_cast<std::size_t>(std::count(occupancy.begin(), occupancy.end(), std::uint8_t{1}));
}

double VoxelGrid::occupied_fraction() const {
  return occupancy.empty() ? 0.0 : static_cast<double>(occupied_count()) / static_cast<double>(occupancy.size());
}

void VoxelGrid::validate() const {
  if (dim < 1) throw std::invalid_argument("voxel grid dim must be >= 1");
  if (occupancy.size() != static_cast<std::size_t>(dim) * dim * dim)
    throw std::invalid_argument("voxel grid holds " + std::to_string(occupancy.size()) + " cells, expected dim^3 = " +
                                std::to_string(static_cast<std::size_t>(dim) * dim * dim));
  if (std::any_of(occupancy.begin(), occupancy.end(), [](std::uint8_t v) { return v > 1; }))
    throw std::invalid_argument("voxel grid occupancy values must be 0 or 1");
  if (!(scale > 0) || !std::isfinite(scale)) throw std::invalid_argument("voxel grid scale must be positive and finite");
}

VoxelGrid downsample(const VoxelGrid& grid, int factor) {
  if (factor < 1 || grid.dim % factor != 0)
    throw std::invalid_argument("cannot downsample dim " + std::to_string(grid.dim) + " by " + std::to_string(factor));
  VoxelGrid out(grid.dim / factor);
  out.translate = grid.translate;
  out.scale = grid.scale;
  out.surface_only = grid.surface_only;
  const int block = factor * factor * factor;
  for (int x = 0; x < out.dim; ++x)
    for (int y = 0; y < out.dim; ++y)
      for (int z = 0; z < out.dim; ++z) {
        int count = 0;
        for (int i = 0; i < factor; ++i)
          for (int j = 0; j < factor; ++j)
            for (int k = 0; k < factor; ++k) count += grid.at(x * factor + i, y * factor + j, z * factor + k);
        out.set(x, y, z, 2 * count >= block);
      }
  return out;
}

}  // namespace vxae
