#include "sdfprox/geometry/marching_cubes.hpp"

#include <algorithm>
#include <array>
#include <cstdint>
#include <stdexcept>
#include <unordered_map>
#include <vector>

namespace sdfprox::geom {

namespace {

// Corner c = cx + 2*cy + 4*cz. Edges in canonical order: 4 x-edges, 4
// y-edges, 4 z-edges, identified by (axis, low corner).
constexpr int kEdgeCorner[12][2] = {
    {0, 1}, {2, 3}, {4, 5}, {6, 7},  // x-edges 0..3
    {0, 2}, {1, 3}, {4, 6}, {5, 7},  // y-edges 4..7
    {0, 4}, {1, 5}, {2, 6}, {3, 7},  // z-edges 8..11
};

// Face corner cycles, counterclockwise as seen from outside the cell.
constexpr int kFaceCycle[6][4] = {
    {0, 2, 3, 1},  // z = 0
    {4, 5, 7, 6},  // z = 1
    {0, 1, 5, 4},  // y = 0
    {2, 6, 7, 3},  // y = 1
    {0, 4, 6, 2},  // x = 0
    {1, 3, 7, 5},  // x = 1
};

int edge_between(int a, int b) {
  for (int e = 0; e < 12; ++e) {
    if ((kEdgeCorner[e][0] == a && kEdgeCorner[e][1] == b) ||
        (kEdgeCorner[e][0] == b && kEdgeCorner[e][1] == a)) {
      return e;
    }
  }
  throw std::logic_error("corners do not share an edge");
}

using CaseLoops = std::vector<std::vector<std::uint8_t>>;

std::array<CaseLoops, 256> build_case_table() {
  std::array<CaseLoops, 256> table;
  for (int mask = 0; mask < 256; ++mask) {
    if (mask == 0 || mask == 255) continue;
    auto inside = [mask](int corner) { return (mask >> corner) & 1; };

    // Face-by-face marching-squares segments. Walking each face cycle
    // (CCW from outside), a segment opens at an inside->outside crossing
    // and closes at the next outside->inside crossing.
    int next_of[12];
    bool has_start[12] = {};
    for (auto& v : next_of) v = -1;
    for (const auto& cycle : kFaceCycle) {
      int open_edge = -1;
      int first_close = -1;
      bool pending_from_wrap = false;
      for (int k = 0; k < 4; ++k) {
        const int u = cycle[k];
        const int v = cycle[(k + 1) % 4];
        if (inside(u) == inside(v)) continue;
        const int e = edge_between(u, v);
        if (inside(u)) {  // opening
          open_edge = e;
        } else {  // closing
          if (open_edge >= 0) {
            next_of[open_edge] = e;
            has_start[open_edge] = true;
            open_edge = -1;
          } else {
            first_close = e;  // pairs with the opening found later in the walk
            pending_from_wrap = true;
          }
        }
      }
      if (pending_from_wrap) {
        if (open_edge < 0) throw std::logic_error("unbalanced face crossings");
        next_of[open_edge] = first_close;
        has_start[open_edge] = true;
      }
    }

    // Every cut cell edge opens a segment on one adjacent face and closes
    // one on the other, so next_of is a permutation of the cut edges.
    for (int e = 0; e < 12; ++e) {
      const bool cut = inside(kEdgeCorner[e][0]) != inside(kEdgeCorner[e][1]);
      if (cut != has_start[e]) throw std::logic_error("cut edge missing from case table");
    }

    // Chain the per-face segments into closed loops; then reverse so that
    // triangle normals point toward field > iso.
    bool used[12] = {};
    CaseLoops loops;
    for (int e = 0; e < 12; ++e) {
      if (!has_start[e] || used[e]) continue;
      std::vector<std::uint8_t> loop;
      int cur = e;
      while (!used[cur]) {
        used[cur] = true;
        loop.push_back(static_cast<std::uint8_t>(cur));
        cur = next_of[cur];
        if (cur < 0) throw std::logic_error("broken segment chain in case table");
      }
      if (cur != e) throw std::logic_error("segment chain does not close");
      if (loop.size() < 3) throw std::logic_error("degenerate loop in case table");
      std::reverse(loop.begin(), loop.end());
      loops.push_back(std::move(loop));
    }
    table[mask] = std::move(loops);
  }
  return table;
}

const std::array<CaseLoops, 256>& case_table() {
  static const std::array<CaseLoops, 256> table = build_case_table();
  return table;
}

}  // namespace

TriangleMesh marching_cubes(const std::function<double(const Eigen::Vector3d&)>& field,
                            const McGrid& grid, double iso) {
  const int nx = grid.points.x(), ny = grid.points.y(), nz = grid.points.z();
  if (nx < 2 || ny < 2 || nz < 2) {
    throw std::runtime_error("marching_cubes: need at least 2 grid points per axis");
  }
  const Eigen::Vector3d step((grid.max.x() - grid.min.x()) / (nx - 1),
                             (grid.max.y() - grid.min.y()) / (ny - 1),
                             (grid.max.z() - grid.min.z()) / (nz - 1));

  auto point_at = [&](int ix, int iy, int iz) {
    return Eigen::Vector3d(grid.min.x() + ix * step.x(), grid.min.y() + iy * step.y(),
                           grid.min.z() + iz * step.z());
  };
  auto value_index = [&](int ix, int iy, int iz) {
    return (static_cast<std::size_t>(iz) * ny + iy) * nx + ix;
  };

  std::vector<double> values(static_cast<std::size_t>(nx) * ny * nz);
  for (int iz = 0; iz < nz; ++iz) {
    for (int iy = 0; iy < ny; ++iy) {
      for (int ix = 0; ix < nx; ++ix) {
        values[value_index(ix, iy, iz)] = field(point_at(ix, iy, iz));
      }
    }
  }

  TriangleMesh mesh;
  std::unordered_map<std::uint64_t, int> edge_vertex;

  // Global edge key: low grid point index * 3 + axis.
  auto vertex_on_edge = [&](int ix, int iy, int iz, int axis) {
    const std::uint64_t key = static_cast<std::uint64_t>(value_index(ix, iy, iz)) * 3 + axis;
    const auto it = edge_vertex.find(key);
    if (it != edge_vertex.end()) return it->second;
    const int jx = ix + (axis == 0), jy = iy + (axis == 1), jz = iz + (axis == 2);
    const double fu = values[value_index(ix, iy, iz)];
    const double fv = values[value_index(jx, jy, jz)];
    double t = (iso - fu) / (fv - fu);
    t = std::clamp(t, 0.0, 1.0);
    const Eigen::Vector3d pu = point_at(ix, iy, iz);
    const Eigen::Vector3d pv = point_at(jx, jy, jz);
    const int id = static_cast<int>(mesh.vertices.size());
    mesh.vertices.push_back(pu + t * (pv - pu));
    edge_vertex.emplace(key, id);
    return id;
  };

  const auto& table = case_table();
  for (int iz = 0; iz + 1 < nz; ++iz) {
    for (int iy = 0; iy + 1 < ny; ++iy) {
      for (int ix = 0; ix + 1 < nx; ++ix) {
        int mask = 0;
        for (int c = 0; c < 8; ++c) {
          const int cx = ix + (c & 1), cy = iy + ((c >> 1) & 1), cz = iz + ((c >> 2) & 1);
          if (values[value_index(cx, cy, cz)] < iso) mask |= 1 << c;
        }
        if (mask == 0 || mask == 255) continue;
        for (const auto& loop : table[mask]) {
          std::vector<int> ids;
          ids.reserve(loop.size());
          for (const std::uint8_t e : loop) {
            const int low = kEdgeCorner[e][0];
            const int axis = e < 4 ? 0 : (e < 8 ? 1 : 2);
            ids.push_back(vertex_on_edge(ix + (low & 1), iy + ((low >> 1) & 1),
                                         iz + ((low >> 2) & 1), axis));
          }
          for (std::size_t k = 1; k + 1 < ids.size(); ++k) {
            mesh.triangles.emplace_back(ids[0], ids[k], ids[k + 1]);
          }
        }
      }
    }
  }
  return mesh;
}

}  // namespace sdfprox::geom
