#include "vxae/voxelize.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "vxae/log.hpp"

namespace vxae {

namespace {

using Vec3d = std::array<double, 3>;
using Tri = std::array<Vec3d, 3>;

// Ray offsets inside a voxel column, distinct per axis so rays avoid mesh edges and
// vertices that sit on exact voxel-center coordinates.
constexpr double kRayJitter[3] = {1.3e-7, 2.9e-7, 4.7e-7};

std::vector<int> inside_along_axis(const std::vector<Tri>& tris, int dim, int axis) {
  const int u = (axis + 1) % 3, v = (axis + 2) % 3;
  std::vector<std::vector<double>> hits(static_cast<std::size_t>(dim) * dim);
  for (const auto& t : tris) {
    double umin = t[0][u], umax = t[0][u], vmin = t[0][v], vmax = t[0][v];
    for (int i = 1; i < 3; ++i) {
      umin = std::min(umin, t[i][u]);
      umax = std::max(umax, t[i][u]);
      vmin = std::min(vmin, t[i][v]);
      vmax = std::max(vmax, t[i][v]);
    }
    const double ju = kRayJitter[u], jv = kRayJitter[v];
    const int i0 = std::max(0, static_cast<int>(std::ceil(umin - 0.5 - ju)));
    const int i1 = std::min(dim - 1, static_cast<int>(std::floor(umax - 0.5 - ju)));
    const int j0 = std::max(0, static_cast<int>(std::ceil(vmin - 0.5 - jv)));
    const int j1 = std::min(dim - 1, static_cast<int>(std::floor(vmax - 0.5 - jv)));
    if (i0 > i1 || j0 > j1) continue;
    const double area = (t[1][u] - t[0][u]) * (t[2][v] - t[0][v]) - (t[2][u] - t[0][u]) * (t[1][v] - t[0][v]);
    if (area == 0) continue;  // parallel to the ray
    for (int i = i0; i <= i1; ++i) {
      const double pu = i + 0.5 + ju;
      for (int j = j0; j <= j1; ++j) {
        const double pv = j + 0.5 + jv;
        double w[3];
        for (int e = 0; e < 3; ++e) {
          const auto& a = t[(e + 1) % 3];
          const auto& b = t[(e + 2) % 3];
          w[e] = (b[u] - a[u]) * (pv - a[v]) - (b[v] - a[v]) * (pu - a[u]);
        }
        const bool pos = w[0] >= 0 && w[1] >= 0 && w[2] >= 0;
        const bool neg = w[0] <= 0 && w[1] <= 0 && w[2] <= 0;
        if (!pos && !neg) continue;
        const double s = w[0] + w[1] + w[2];
        const double depth = (w[0] * t[0][axis] + w[1] * t[1][axis] + w[2] * t[2][axis]) / s;
        hits[static_cast<std::size_t>(i) * dim + j].push_back(depth);
      }
    }
  }
  // inside[(index along axis, i, j)] flattened as grid order later.
  std::vector<int> inside(static_cast<std::size_t>(dim) * dim * dim, 0);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) {
      auto& h = hits[static_cast<std::size_t>(i) * dim + j];
      std::sort(h.begin(), h.end());
      std::size_t crossed = 0;
      for (int k = 0; k < dim; ++k) {
        const double center = k + 0.5;
        while (crossed < h.size() && h[crossed] < center) ++crossed;
        if (crossed % 2 == 1) {
          int c[3];
          c[axis] = k;
          c[u] = i;
          c[v] = j;
          inside[(static_cast<std::size_t>(c[0]) * dim + c[1]) * dim + c[2]] = 1;
        }
      }
    }
  return inside;
}

// Separating-axis overlap test between a triangle and the axis-aligned box
// [center - half, center + half].
bool triangle_box_overlap(const Tri& tri, const Vec3d& center, double half) {
  Vec3d v[3];
  for (int i = 0; i < 3; ++i)
    for (int a = 0; a < 3; ++a) v[i][a] = tri[i][a] - center[a];
  const Vec3d e[3] = {{v[1][0] - v[0][0], v[1][1] - v[0][1], v[1][2] - v[0][2]},
                      {v[2][0] - v[1][0], v[2][1] - v[1][1], v[2][2] - v[1][2]},
                      {v[0][0] - v[2][0], v[0][1] - v[2][1], v[0][2] - v[2][2]}};
  auto separated = [&](const Vec3d& axis) {
    double lo = 1e300, hi = -1e300;
    for (const auto& p : v) {
      const double d = p[0] * axis[0] + p[1] * axis[1] + p[2] * axis[2];
      lo = std::min(lo, d);
      hi = std::max(hi, d);
    }
    const double r = half * (std::abs(axis[0]) + std::abs(axis[1]) + std::abs(axis[2]));
    return lo > r || hi < -r;
  };
  for (int a = 0; a < 3; ++a) {
    Vec3d axis{0, 0, 0};
    axis[a] = 1;
    if (separated(axis)) return false;
  }
  const Vec3d n{e[0][1] * e[1][2] - e[0][2] * e[1][1], e[0][2] * e[1][0] - e[0][0] * e[1][2],
                e[0][0] * e[1][1] - e[0][1] * e[1][0]};
  if (separated(n)) return false;
  for (const auto& edge : e)
    for (int a = 0; a < 3; ++a) {
      Vec3d unit{0, 0, 0};
      unit[a] = 1;
      const Vec3d axis{unit[1] * edge[2] - unit[2] * edge[1], unit[2] * edge[0] - unit[0] * edge[2],
                       unit[0] * edge[1] - unit[1] * edge[0]};
      if (axis[0] == 0 && axis[1] == 0 && axis[2] == 0) continue;
      if (separated(axis)) return false;
    }
  return true;
}

void surface_voxelize(const std::vector<Tri>& tris, VoxelGrid& grid) {
  const int dim = grid.dim;
  for (const auto& t : tris) {
    int lo[3], hi[3];
    for (int a = 0; a < 3; ++a) {
      const double mn = std::min({t[0][a], t[1][a], t[2][a]});
      const double mx = std::max({t[0][a], t[1][a], t[2][a]});
      lo[a] = std::clamp(static_cast<int>(std::floor(mn)), 0, dim - 1);
      hi[a] = std::clamp(static_cast<int>(std::floor(mx)), 0, dim - 1);
    }
    for (int x = lo[0]; x <= hi[0]; ++x)
      for (int y = lo[1]; y <= hi[1]; ++y)
        for (int z = lo[2]; z <= hi[2]; ++z)
          if (!grid.at(x, y, z) && triangle_box_overlap(t, {x + 0.5, y + 0.5, z + 0.5}, 0.5)) grid.set(x, y, z, true);
  }
}

}  // namespace

bool is_watertight(const TriangleMesh& mesh) {
  if (mesh.empty()) return false;
  std::map<Vec3f, int> ids;
  auto id_of = [&](const Vec3f& p) { return ids.emplace(p, static_cast<int>(ids.size())).first->second; };
  std::map<std::pair<int, int>, int> edge_uses;
  for (const auto& t : mesh.triangles) {
    const int a = id_of(t.vertices[0]), b = id_of(t.vertices[1]), c = id_of(t.vertices[2]);
    for (auto [p, q] : {std::pair{a, b}, std::pair{b, c}, std::pair{c, a}}) ++edge_uses[std::minmax(p, q)];
  }
  return std::all_of(edge_uses.begin(), edge_uses.end(), [](const auto& kv) { return kv.second == 2; });
}

VoxelGrid voxelize(const TriangleMesh& mesh, int dim, const VoxelizeOptions& options) {
  if (dim < 2) throw std::invalid_argument("voxelize: dim must be >= 2, got " + std::to_string(dim));
  if (options.margin < 0 || 2 * options.margin >= dim)
    throw std::invalid_argument("voxelize: margin " + std::to_string(options.margin) + " leaves no room in a " +
                                std::to_string(dim) + "^3 grid");
  mesh.validate();
  VoxelGrid grid(dim);
  if (mesh.empty()) {
    log::warn("voxelize: empty mesh, returning an all-zero grid");
    return grid;
  }

  const Aabb box = bounding_box(mesh);
  double extent = 0;
  for (int a = 0; a < 3; ++a) extent = std::max(extent, box.max[a] - box.min[a]);
  if (!(extent > 0)) extent = 1.0;
  const double scale = extent * dim / (dim - 2 * options.margin);
  for (int a = 0; a < 3; ++a) grid.translate[a] = 0.5 * (box.min[a] + box.max[a]) - 0.5 * scale;
  grid.scale = scale;

  std::vector<Tri> tris;
  tris.reserve(mesh.size());
  for (const auto& t : mesh.triangles) {
    Tri g;
    for (int i = 0; i < 3; ++i)
      for (int a = 0; a < 3; ++a) g[i][a] = (static_cast<double>(t.vertices[i][a]) - grid.translate[a]) / scale * dim;
    tris.push_back(g);
  }

  if (!is_watertight(mesh)) {
    if (!options.surface_fallback) throw std::invalid_argument("voxelize: mesh is not watertight");
    log::warn("voxelize: mesh is not watertight, voxelizing its surface only");
    surface_voxelize(tris, grid);
    grid.surface_only = true;
    return grid;
  }

  std::vector<int> votes(grid.voxel_count(), 0);
  for (int axis = 0; axis < 3; ++axis) {
    const auto inside = inside_along_axis(tris, dim, axis);
    for (std::size_t i = 0; i < votes.size(); ++i) votes[i] += inside[i];
  }
  for (std::size_t i = 0; i < votes.size(); ++i) grid.occupancy[i] = votes[i] >= 2 ? 1 : 0;
  return grid;
}

}  // namespace vxae
