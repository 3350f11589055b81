#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace vxae {

// Dense cubic occupancy grid. Cell (x, y, z) lives at index (x * dim + y) * dim + z.
// Model-space position of grid coordinate g is translate + scale * g / dim.
struct VoxelGrid {
  int dim = 0;
  std::vector<std::uint8_t> occupancy;  // values in {0, 1}
  std::array<double, 3> translate{0, 0, 0};
  double scale = 1.0;
  // Set when the source mesh was not watertight and only its surface was voxelized.
  bool surface_only = false;

  VoxelGrid() = default;
  explicit VoxelGrid(int dim);

  std::size_t index(int x, int y, int z) const {
    return (static_cast<std::size_t>(x) * dim + y) * dim + z;
  }
  std::uint8_t at(int x, int y, int z) const { return occupancy[index(x, y, z)]; }
  void set(int x, int y, int z, bool value) { occupancy[index(x, y, z)] = value ? 1 : 0; }

  std::size_t voxel_count() const { return occupancy.size(); }
  std::size_t occupied_count() const;
  double occupied_fraction() const;

  // Throws std::invalid_argument when the invariants (dim >= 1, dim^3 cells, binary
  // values, positive scale) do not hold.
  void validate() const;

  bool operator==(const VoxelGrid&) const = default;
};

// Majority-vote block downsampling by an integer factor (ties count as occupied).
VoxelGrid downsample(const VoxelGrid& grid, int factor);

}  // namespace vxae
