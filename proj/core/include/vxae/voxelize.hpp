#pragma once

#include "vxae/mesh.hpp"
#include "vxae/voxel_grid.hpp"

namespace vxae {

struct VoxelizeOptions {
  // Empty voxels kept between the mesh bounding box and each grid face. Zero makes the
  // bounding box's longest side span the whole grid.
  int margin = 1;
  // Voxelize the surface of meshes that are not closed instead of rejecting them.
  bool surface_fallback = true;
};

// True when every edge (vertices welded by exact coordinates) is shared by exactly two
// triangles.
bool is_watertight(const TriangleMesh& mesh);

// Scales the mesh uniformly into the grid (aspect ratio kept, centered) and marks a
// voxel occupied when its center is inside under parity ray casting along x, y and z
// with a 2-of-3 majority vote. Meshes that are not watertight get a triangle/voxel
// overlap surface voxelization and `surface_only` set. An empty mesh yields an all-zero
// grid with identity transform and a warning.
VoxelGrid voxelize(const TriangleMesh& mesh, int dim, const VoxelizeOptions& options = {});

}  // namespace vxae
