#include "sdfprox/geometry/bvh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace sdfprox::geom {

Eigen::Vector3d closest_point_triangle(const Eigen::Vector3d& p, const Eigen::Vector3d& a,
                                       const Eigen::Vector3d& b, const Eigen::Vector3d& c) {
  const Eigen::Vector3d ab = b - a;
  const Eigen::Vector3d ac = c - a;
  const Eigen::Vector3d ap = p - a;
  const double d1 = ab.dot(ap);
  const double d2 = ac.dot(ap);
  if (d1 <= 0.0 && d2 <= 0.0) return a;

  const Eigen::Vector3d bp = p - b;
  const double d3 = ab.dot(bp);
  const double d4 = ac.dot(bp);
  if (d3 >= 0.0 && d4 <= d3) return b;

  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) {
    const double v = d1 / (d1 - d3);
    return a + v * ab;
  }

  const Eigen::Vector3d cp = p - c;
  const double d5 = ab.dot(cp);
  const double d6 = ac.dot(cp);
  if (d6 >= 0.0 && d5 <= d6) return c;

  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) {
    const double w = d2 / (d2 - d6);
    return a + w * ac;
  }

  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
    const double w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
    return b + w * (c - b);
  }

  const double denom = 1.0 / (va + vb + vc);
  const double v = vb * denom;
  const double w = vc * denom;
  return a + ab * v + ac * w;
}

double triangle_solid_angle(const Eigen::Vector3d& p, const Eigen::Vector3d& a,
                            const Eigen::Vector3d& b, const Eigen::Vector3d& c) {
  const Eigen::Vector3d va = a - p;
  const Eigen::Vector3d vb = b - p;
  const Eigen::Vector3d vc = c - p;
  const double la = va.norm(), lb = vb.norm(), lc = vc.norm();
  const double num = va.dot(vb.cross(vc));
  const double den =
      la * lb * lc + va.dot(vb) * lc + vb.dot(vc) * la + vc.dot(va) * lb;
  return 2.0 * std::atan2(num, den);
}

Bvh::Bvh(const TriangleMesh& mesh, int leaf_size) : mesh_(&mesh) {
  const int n = static_cast<int>(mesh.triangles.size());
  tri_boxes_.resize(n);
  tri_centroids_.resize(n);
  for (int t = 0; t < n; ++t) {
    const auto& tri = mesh.triangles[t];
    Eigen::AlignedBox3d box;
    box.extend(mesh.vertices[tri[0]]);
    box.extend(mesh.vertices[tri[1]]);
    box.extend(mesh.vertices[tri[2]]);
    tri_boxes_[t] = box;
    tri_centroids_[t] =
        (mesh.vertices[tri[0]] + mesh.vertices[tri[1]] + mesh.vertices[tri[2]]) / 3.0;
  }
  prim_.resize(n);
  std::iota(prim_.begin(), prim_.end(), 0);
  nodes_.reserve(static_cast<std::size_t>(2 * n));
  build(prim_, 0, n, std::max(1, leaf_size), 0);
}

int Bvh::build(std::vector<int>& prims, int first, int count, int leaf_size, int depth) {
  const int index = static_cast<int>(nodes_.size());
  nodes_.emplace_back();

  Eigen::AlignedBox3d box;
  Eigen::Vector3d dipole = Eigen::Vector3d::Zero();
  Eigen::Vector3d weighted_centroid = Eigen::Vector3d::Zero();
  double total_area = 0;
  for (int i = first; i < first + count; ++i) {
    const int t = prims[i];
    box.extend(tri_boxes_[t]);
    const Eigen::Vector3d an = mesh_->triangle_area_normal(t);
    const double area = an.norm();
    dipole += an;
    weighted_centroid += area * tri_centroids_[t];
    total_area += area;
  }
  const Eigen::Vector3d centroid =
      total_area > 0 ? Eigen::Vector3d(weighted_centroid / total_area) : box.center();
  double radius = 0;
  for (int corner = 0; corner < 8; ++corner) {
    const Eigen::Vector3d c(corner & 1 ? box.max().x() : box.min().x(),
                            corner & 2 ? box.max().y() : box.min().y(),
                            corner & 4 ? box.max().z() : box.min().z());
    radius = std::max(radius, (c - centroid).norm());
  }

  Node& node = nodes_[index];
  node.box = box;
  node.dipole = dipole;
  node.centroid = centroid;
  node.radius = radius;
  node.first = first;
  node.count = count;

  if (count <= leaf_size) return index;

  // Binned SAH along the widest centroid axis.
  Eigen::AlignedBox3d cbox;
  for (int i = first; i < first + count; ++i) cbox.extend(tri_centroids_[prims[i]]);
  int axis;
  cbox.sizes().maxCoeff(&axis);
  const double extent = cbox.sizes()[axis];
  if (extent <= 0) return index;  // all centroids coincide; keep as leaf

  constexpr int kBins = 16;
  struct Bin {
    Eigen::AlignedBox3d box;
    int count = 0;
  };
  Bin bins[kBins];
  const double inv = kBins / extent;
  auto bin_of = [&](int t) {
    int b = static_cast<int>((tri_centroids_[t][axis] - cbox.min()[axis]) * inv);
    return std::clamp(b, 0, kBins - 1);
  };
  for (int i = first; i < first + count; ++i) {
    const int t = prims[i];
    Bin& b = bins[bin_of(t)];
    b.box.extend(tri_boxes_[t]);
    ++b.count;
  }

  auto half_area = [](const Eigen::AlignedBox3d& b) {
    if (b.isEmpty()) return 0.0;
    const Eigen::Vector3d s = b.sizes();
    return s.x() * s.y() + s.y() * s.z() + s.z() * s.x();
  };

  double best_cost = std::numeric_limits<double>::infinity();
  int best_split = -1;
  Eigen::AlignedBox3d left_boxes[kBins];
  int left_counts[kBins];
  {
    Eigen::AlignedBox3d acc;
    int cnt = 0;
    for (int b = 0; b < kBins; ++b) {
      acc.extend(bins[b].box);
      cnt += bins[b].count;
      left_boxes[b] = acc;
      left_counts[b] = cnt;
    }
  }
  {
    Eigen::AlignedBox3d acc;
    int cnt = 0;
    for (int b = kBins - 1; b >= 1; --b) {
      acc.extend(bins[b].box);
      cnt += bins[b].count;
      const int lc = left_counts[b - 1];
      if (lc == 0 || cnt == 0) continue;
      const double cost = half_area(left_boxes[b - 1]) * lc + half_area(acc) * cnt;
      if (cost < best_cost) {
        best_cost = cost;
        best_split = b;  // bins [0, b) left, [b, kBins) right
      }
    }
  }

  auto begin = prims.begin() + first;
  auto end = begin + count;
  std::vector<int>::iterator mid;
  if (depth > 48) best_split = -1;  // force balanced split; bounds tree height
  if (best_split < 0) {
    mid = begin + count / 2;
    std::nth_element(begin, mid, end, [&](int ta, int tb) {
      return tri_centroids_[ta][axis] < tri_centroids_[tb][axis];
    });
  } else {
    mid = std::partition(begin, end, [&](int t) { return bin_of(t) < best_split; });
    if (mid == begin || mid == end) {
      mid = begin + count / 2;
      std::nth_element(begin, mid, end, [&](int ta, int tb) {
        return tri_centroids_[ta][axis] < tri_centroids_[tb][axis];
      });
    }
  }

  const int left_count = static_cast<int>(mid - begin);
  const int left = build(prims, first, left_count, leaf_size, depth + 1);
  const int right = build(prims, first + left_count, count - left_count, leaf_size, depth + 1);
  nodes_[index].left = left;
  nodes_[index].right = right;
  return index;
}

Bvh::Closest Bvh::closest(const Eigen::Vector3d& p) const {
  Closest best;
  best.dist = std::numeric_limits<double>::infinity();
  best.second_distinct = std::numeric_limits<double>::infinity();
  if (!valid() || nodes_.empty()) return best;

  // Margin keeps near-ties alive so second_distinct is exact at the
  // 1e-9 ambiguity tolerance used by the oracle.
  constexpr double kMargin = 1e-8;
  const double feature_tol = 1e-8 * (1.0 + nodes_[0].box.diagonal().norm());

  int stack[128];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const Node& node = nodes_[stack[--top]];
    const double box_dist = node.box.exteriorDistance(p);
    if (box_dist > best.dist + kMargin) continue;
    if (node.is_leaf()) {
      for (int i = node.first; i < node.first + node.count; ++i) {
        const int t = prim_[i];
        const auto& tri = mesh_->triangles[t];
        const Eigen::Vector3d q = closest_point_triangle(
            p, mesh_->vertices[tri[0]], mesh_->vertices[tri[1]], mesh_->vertices[tri[2]]);
        const double d = (p - q).norm();
        if (d < best.dist) {
          if (best.triangle >= 0 && (q - best.point).norm() > feature_tol) {
            best.second_distinct = best.dist;
          }
          best.dist = d;
          best.point = q;
          best.triangle = t;
        } else if (d < best.second_distinct && (q - best.point).norm() > feature_tol) {
          best.second_distinct = d;
        }
      }
    } else {
      // Visit nearer child first.
      const double dl = nodes_[node.left].box.exteriorDistance(p);
      const double dr = nodes_[node.right].box.exteriorDistance(p);
      if (dl < dr) {
        stack[top++] = node.right;
        stack[top++] = node.left;
      } else {
        stack[top++] = node.left;
        stack[top++] = node.right;
      }
    }
  }
  return best;
}

double Bvh::winding_recursive(int index, const Eigen::Vector3d& p, double beta) const {
  const Node& node = nodes_[index];
  if (beta > 0) {
    const double dist = (p - node.centroid).norm();
    if (dist > beta * node.radius && dist > 0) {
      // First-order (dipole) approximation of the node's solid angle sum.
      return node.dipole.dot(node.centroid - p) / (4.0 * M_PI * dist * dist * dist);
    }
  }
  if (node.is_leaf()) {
    double w = 0;
    for (int i = node.first; i < node.first + node.count; ++i) {
      const auto& tri = mesh_->triangles[prim_[i]];
      w += triangle_solid_angle(p, mesh_->vertices[tri[0]], mesh_->vertices[tri[1]],
                                mesh_->vertices[tri[2]]);
    }
    return w / (4.0 * M_PI);
  }
  return winding_recursive(node.left, p, beta) + winding_recursive(node.right, p, beta);
}

double Bvh::winding_number(const Eigen::Vector3d& p, double beta) const {
  if (!valid() || nodes_.empty()) return 0;
  return winding_recursive(0, p, beta);
}

namespace {

bool ray_box(const Eigen::Vector3d& o, const Eigen::Vector3d& inv_dir,
             const Eigen::AlignedBox3d& box) {
  double tmin = 0;
  double tmax = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 3; ++k) {
    double t0 = (box.min()[k] - o[k]) * inv_dir[k];
    double t1 = (box.max()[k] - o[k]) * inv_dir[k];
    if (inv_dir[k] < 0) std::swap(t0, t1);
    tmin = std::max(tmin, t0);
    tmax = std::min(tmax, t1);
    if (tmin > tmax) return false;
  }
  return true;
}

}  // namespace

int Bvh::ray_crossings(const Eigen::Vector3d& origin, const Eigen::Vector3d& dir) const {
  if (!valid() || nodes_.empty()) return 0;
  const Eigen::Vector3d inv_dir = dir.cwiseInverse();
  int crossings = 0;
  int stack[128];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const Node& node = nodes_[stack[--top]];
    if (!ray_box(origin, inv_dir, node.box)) continue;
    if (node.is_leaf()) {
      for (int i = node.first; i < node.first + node.count; ++i) {
        const auto& tri = mesh_->triangles[prim_[i]];
        // Moller-Trumbore.
        const Eigen::Vector3d& a = mesh_->vertices[tri[0]];
        const Eigen::Vector3d e1 = mesh_->vertices[tri[1]] - a;
        const Eigen::Vector3d e2 = mesh_->vertices[tri[2]] - a;
        const Eigen::Vector3d pv = dir.cross(e2);
        const double det = e1.dot(pv);
        if (std::abs(det) < 1e-14) continue;
        const double inv_det = 1.0 / det;
        const Eigen::Vector3d tv = origin - a;
        const double u = tv.dot(pv) * inv_det;
        if (u < 0.0 || u > 1.0) continue;
        const Eigen::Vector3d qv = tv.cross(e1);
        const double v = dir.dot(qv) * inv_det;
        if (v < 0.0 || u + v > 1.0) continue;
        const double t = e2.dot(qv) * inv_det;
        if (t > 1e-12) ++crossings;
      }
    } else {
      stack[top++] = node.left;
      stack[top++] = node.right;
    }
  }
  return crossings;
}

}  // namespace sdfprox::geom
