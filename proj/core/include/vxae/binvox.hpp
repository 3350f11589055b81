#pragma once

#include <filesystem>
#include <span>

#include "vxae/fs_util.hpp"
#include "vxae/voxel_grid.hpp"

namespace vxae {

// binvox v1: text header ("#binvox 1", "dim d d d", "translate tx ty tz", "scale s",
// "data") followed by (value, count) byte pairs with 1 <= count <= 255. Voxels are
// linearized as x * dim^2 + z * dim + y. The encoder always emits maximal runs.
Bytes write_binvox(const VoxelGrid& grid);
// Throws FormatError on a bad magic line, non-cubic dims, run overrun or underrun,
// zero-length runs, values other than 0/1 and trailing bytes.
VoxelGrid read_binvox(std::span<const std::uint8_t> bytes);

VoxelGrid read_binvox_file(const std::filesystem::path& path);
void write_binvox_file(const std::filesystem::path& path, const VoxelGrid& grid);

}  // namespace vxae
