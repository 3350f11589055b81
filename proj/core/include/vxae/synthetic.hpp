#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "vxae/mesh.hpp"
#include "vxae/rng.hpp"

namespace vxae {

// Sphere produces an ellipsoid with random semi-axes.
enum class PrimitiveKind { Box, Sphere, Cylinder, Torus, BoxPair };

// Closed mesh of the given kind with proportions drawn from `rng`. Cylinders and tori
// get a random axis.
TriangleMesh random_primitive(PrimitiveKind kind, Rng& rng);
TriangleMesh random_primitive(Rng& rng);

// Writes `count` voxelized random primitives as shape_NNNN.binvox into `dir`
// (created if needed) and returns the written paths.
std::vector<std::filesystem::path> write_synthetic_corpus(const std::filesystem::path& dir, int count, int dim,
                                                          std::uint64_t seed);

}  // namespace vxae
