#include "vxae/synthetic.hpp"

#include <cstdio>
#include <string>

#include "vxae/binvox.hpp"
#include "vxae/voxelize.hpp"

namespace vxae {

namespace {

double between(Rng& rng, double lo, double hi) { return lo + (hi - lo) * rng.uniform(); }

// Rotates coordinates so the primitive's z axis becomes `axis`.
TriangleMesh along_axis(TriangleMesh mesh, int axis) {
  if (axis == 2) return mesh;
  for (auto& t : mesh.triangles)
    for (auto& v : t.vertices) v = axis == 0 ? Vec3f{v[2], v[0], v[1]} : Vec3f{v[1], v[2], v[0]};
  recompute_normals(mesh);
  return mesh;
}

}  // namespace

TriangleMesh random_primitive(PrimitiveKind kind, Rng& rng) {
  switch (kind) {
    case PrimitiveKind::Box:
      return make_box({0, 0, 0}, {between(rng, 0.3, 1.0), between(rng, 0.3, 1.0), between(rng, 0.3, 1.0)});
    case PrimitiveKind::Sphere: {
      // Ellipsoid with random semi-axes.
      TriangleMesh mesh = make_icosphere(3, 1.0);
      const Vec3f axes{float(between(rng, 0.5, 1.0)), float(between(rng, 0.5, 1.0)), float(between(rng, 0.5, 1.0))};
      for (auto& t : mesh.triangles)
        for (auto& v : t.vertices)
          for (int a = 0; a < 3; ++a) v[a] *= axes[a];
      recompute_normals(mesh);
      return mesh;
    }
    case PrimitiveKind::Cylinder:
      return along_axis(make_cylinder(between(rng, 0.2, 0.5), between(rng, 0.4, 1.0), 32),
                        static_cast<int>(rng.below(3)));
    case PrimitiveKind::Torus: {
      const double major = 1.0, minor = between(rng, 0.25, 0.5);
      return along_axis(make_torus(major, minor, 32, 16), static_cast<int>(rng.below(3)));
    }
    case PrimitiveKind::BoxPair: {
      const double a = between(rng, 0.3, 0.6), b = between(rng, 0.3, 0.6), gap = between(rng, 0.15, 0.4);
      return merged(make_box({0, 0, 0}, {a, a, 1.0}), make_box({a + gap, 0, 0}, {a + gap + b, b, between(rng, 0.4, 1.0)}));
    }
  }
  return {};
}

TriangleMesh random_primitive(Rng& rng) { return random_primitive(static_cast<PrimitiveKind>(rng.below(5)), rng); }

std::vector<std::filesystem::path> write_synthetic_corpus(const std::filesystem::path& dir, int count, int dim,
                                                          std::uint64_t seed) {
  std::filesystem::create_directories(dir);
  Rng rng(seed);
  std::vector<std::filesystem::path> paths;
  for (int i = 0; i < count; ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "shape_%04d.binvox", i);
    paths.push_back(dir / name);
    write_binvox_file(paths.back(), voxelize(random_primitive(rng), dim));
  }
  return paths;
}

}  // namespace vxae
