#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace vxae {

using Vec3f = std::array<float, 3>;

struct Triangle {
  Vec3f normal{};  // as stored in the source file; zero when absent
  std::array<Vec3f, 3> vertices{};
};

// Triangle soup in model units.
struct TriangleMesh {
  std::vector<Triangle> triangles;

  bool empty() const noexcept { return triangles.empty(); }
  std::size_t size() const noexcept { return triangles.size(); }
  // Throws std::invalid_argument when any coordinate is NaN or infinite.
  void validate() const;
};

struct Aabb {
  std::array<double, 3> min{};
  std::array<double, 3> max{};
};

Aabb bounding_box(const TriangleMesh& mesh);

// Recomputes every face normal from the winding order.
void recompute_normals(TriangleMesh& mesh);
TriangleMesh translated(TriangleMesh mesh, const std::array<double, 3>& offset);
TriangleMesh scaled(TriangleMesh mesh, double factor);
TriangleMesh merged(const TriangleMesh& a, const TriangleMesh& b);

// Closed primitives with outward winding. Used for synthetic corpora and tests.
TriangleMesh make_box(const std::array<double, 3>& min, const std::array<double, 3>& max);
// Icosahedron subdivided `subdivisions` times and projected onto the sphere.
TriangleMesh make_icosphere(int subdivisions, double radius = 1.0, const std::array<double, 3>& center = {0, 0, 0});
TriangleMesh make_cylinder(double radius, double height, int segments, const std::array<double, 3>& center = {0, 0, 0});
TriangleMesh make_torus(double major_radius, double minor_radius, int major_segments, int minor_segments,
                        const std::array<double, 3>& center = {0, 0, 0});

}  // namespace vxae
