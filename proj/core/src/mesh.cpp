#include "vxae/mesh.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <stdexcept>
#include <string>

namespace vxae {

namespace {

using Vec3d = std::array<double, 3>;

Vec3f to_f(const Vec3d& v) {
  return {static_cast<float>(v[0]), static_cast<float>(v[1]), static_cast<float>(v[2])};
}

void push(TriangleMesh& mesh, const Vec3d& a, const Vec3d& b, const Vec3d& c) {
  Triangle t;
  t.vertices = {to_f(a), to_f(b), to_f(c)};
  mesh.triangles.push_back(t);
}

Vec3d normalize(Vec3d v) {
  const double n = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
  return {v[0] / n, v[1] / n, v[2] / n};
}

}  // namespace

void TriangleMesh::validate() const {
  for (std::size_t i = 0; i < triangles.size(); ++i)
    for (const auto& v : triangles[i].vertices)
      for (float c : v)
        if (!std::isfinite(c)) throw std::invalid_argument("triangle " + std::to_string(i) + " has a non-finite coordinate");
}

Aabb bounding_box(const TriangleMesh& mesh) {
  Aabb box;
  box.min.fill(std::numeric_limits<double>::infinity());
  box.max.fill(-std::numeric_limits<double>::infinity());
  for (const auto& t : mesh.triangles)
    for (const auto& v : t.vertices)
      for (int a = 0; a < 3; ++a) {
        box.min[a] = std::min(box.min[a], static_cast<double>(v[a]));
        box.max[a] = std::max(box.max[a], static_cast<double>(v[a]));
      }
  return box;
}

void recompute_normals(TriangleMesh& mesh) {
  for (auto& t : mesh.triangles) {
    const auto& [a, b, c] = t.vertices;
    const Vec3d u{double(b[0]) - a[0], double(b[1]) - a[1], double(b[2]) - a[2]};
    const Vec3d v{double(c[0]) - a[0], double(c[1]) - a[1], double(c[2]) - a[2]};
    const Vec3d n{u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]};
    const double len = std::sqrt(n[0] * n[0] + n[1] * n[1] + n[2] * n[2]);
    t.normal = len > 0 ? to_f({n[0] / len, n[1] / len, n[2] / len}) : Vec3f{0, 0, 0};
  }
}

TriangleMesh translated(TriangleMesh mesh, const std::array<double, 3>& offset) {
  for (auto& t : mesh.triangles)
    for (auto& v : t.vertices)
      for (int a = 0; a < 3; ++a) v[a] = static_cast<float>(v[a] + offset[a]);
  return mesh;
}

TriangleMesh scaled(TriangleMesh mesh, double factor) {
  for (auto& t : mesh.triangles)
    for (auto& v : t.vertices)
      for (auto& c : v) c = static_cast<float>(c * factor);
  return mesh;
}

TriangleMesh merged(const TriangleMesh& a, const TriangleMesh& b) {
  TriangleMesh out = a;
  out.triangles.insert(out.triangles.end(), b.triangles.begin(), b.triangles.end());
  return out;
}

TriangleMesh make_box(const std::array<double, 3>& lo, const std::array<double, 3>& hi) {
  auto corner = [&](int i) -> Vec3d {
    return {(i & 1) ? hi[0] : lo[0], (i & 2) ? hi[1] : lo[1], (i & 4) ? hi[2] : lo[2]};
  };
  // Quads as corner indices, counter-clockwise seen from outside.
  static constexpr int faces[6][4] = {{0, 4, 6, 2}, {1, 3, 7, 5}, {0, 1, 5, 4}, {2, 6, 7, 3}, {0, 2, 3, 1}, {4, 5, 7, 6}};
  TriangleMesh mesh;
  for (const auto& f : faces) {
    push(mesh, corner(f[0]), corner(f[1]), corner(f[2]));
    push(mesh, corner(f[0]), corner(f[2]), corner(f[3]));
  }
  recompute_normals(mesh);
  return mesh;
}

TriangleMesh make_icosphere(int subdivisions, double radius, const std::array<double, 3>& center) {
  if (subdivisions < 0) throw std::invalid_argument("icosphere: subdivisions must be >= 0");
  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3d> verts = {{-1, phi, 0}, {1, phi, 0}, {-1, -phi, 0}, {1, -phi, 0}, {0, -1, phi}, {0, 1, phi},
                              {0, -1, -phi}, {0, 1, -phi}, {phi, 0, -1}, {phi, 0, 1}, {-phi, 0, -1}, {-phi, 0, 1}};
  for (auto& v : verts) v = normalize(v);
  std::vector<std::array<int, 3>> faces = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                                           {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                                           {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                                           {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
  for (int s = 0; s < subdivisions; ++s) {
    std::map<std::pair<int, int>, int> midpoint;
    auto mid = [&](int a, int b) {
      const auto key = std::minmax(a, b);
      auto it = midpoint.find(key);
      if (it != midpoint.end()) return it->second;
      const Vec3d m{(verts[a][0] + verts[b][0]) / 2, (verts[a][1] + verts[b][1]) / 2, (verts[a][2] + verts[b][2]) / 2};
      verts.push_back(normalize(m));
      const int id = static_cast<int>(verts.size()) - 1;
      midpoint.emplace(key, id);
      return id;
    };
    std::vector<std::array<int, 3>> next;
    next.reserve(faces.size() * 4);
    for (const auto& f : faces) {
      const int a = mid(f[0], f[1]), b = mid(f[1], f[2]), c = mid(f[2], f[0]);
      next.push_back({f[0], a, c});
      next.push_back({f[1], b, a});
      next.push_back({f[2], c, b});
      next.push_back({a, b, c});
    }
    faces = std::move(next);
  }
  TriangleMesh mesh;
  mesh.triangles.reserve(faces.size());
  auto place = [&](const Vec3d& v) -> Vec3d {
    return {center[0] + radius * v[0], center[1] + radius * v[1], center[2] + radius * v[2]};
  };
  for (const auto& f : faces) push(mesh, place(verts[f[0]]), place(verts[f[1]]), place(verts[f[2]]));
  recompute_normals(mesh);
  return mesh;
}

TriangleMesh make_cylinder(double radius, double height, int segments, const std::array<double, 3>& center) {
  if (segments < 3) throw std::invalid_argument("cylinder: needs at least 3 segments");
  TriangleMesh mesh;
  const double z0 = center[2] - height / 2, z1 = center[2] + height / 2;
  auto rim = [&](int i, double z) -> Vec3d {
    const double a = 2.0 * std::numbers::pi * (i % segments) / segments;
    return {center[0] + radius * std::cos(a), center[1] + radius * std::sin(a), z};
  };
  const Vec3d bottom{center[0], center[1], z0}, top{center[0], center[1], z1};
  for (int i = 0; i < segments; ++i) {
    push(mesh, rim(i, z0), rim(i + 1, z0), rim(i + 1, z1));
    push(mesh, rim(i, z0), rim(i + 1, z1), rim(i, z1));
    push(mesh, bottom, rim(i + 1, z0), rim(i, z0));
    push(mesh, top, rim(i, z1), rim(i + 1, z1));
  }
  recompute_normals(mesh);
  return mesh;
}

TriangleMesh make_torus(double major_radius, double minor_radius, int major_segments, int minor_segments,
                        const std::array<double, 3>& center) {
  if (major_segments < 3 || minor_segments < 3) throw std::invalid_argument("torus: needs at least 3 segments per ring");
  auto point = [&](int i, int j) -> Vec3d {
    const double u = 2.0 * std::numbers::pi * (i % major_segments) / major_segments;
    const double v = 2.0 * std::numbers::pi * (j % minor_segments) / minor_segments;
    const double r = major_radius + minor_radius * std::cos(v);
    return {center[0] + r * std::cos(u), center[1] + r * std::sin(u), center[2] + minor_radius * std::sin(v)};
  };
  TriangleMesh mesh;
  for (int i = 0; i < major_segments; ++i)
    for (int j = 0; j < minor_segments; ++j) {
      push(mesh, point(i, j), point(i + 1, j), point(i + 1, j + 1));
      push(mesh, point(i, j), point(i + 1, j + 1), point(i, j + 1));
    }
  recompute_normals(mesh);
  return mesh;
}

}  // namespace vxae
