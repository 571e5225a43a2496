#pragma once

#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "sdfprox/geometry/mesh.hpp"

namespace sdfprox::geom {

/// Closest point on triangle (a,b,c) to p, by barycentric region classification.
Eigen::Vector3d closest_point_triangle(const Eigen::Vector3d& p, const Eigen::Vector3d& a,
                                       const Eigen::Vector3d& b, const Eigen::Vector3d& c);

/// Signed solid angle of oriented triangle (a,b,c) seen from p
/// (van Oosterom-Strackee). Positive when the triangle's outward normal
/// faces away from p, so a watertight outward-oriented mesh sums to 4*pi
/// from inside and 0 from outside.
double triangle_solid_angle(const Eigen::Vector3d& p, const Eigen::Vector3d& a,
                            const Eigen::Vector3d& b, const Eigen::Vector3d& c);

/**
 * Bounding-volume hierarchy over mesh triangles (binned SAH build).
 *
 * Supports closest-point queries (with second-closest tracking for
 * ambiguity detection), generalized winding number (exact solid angles at
 * leaves, dipole far-field approximation for distant nodes), and ray
 * crossing counts. Immutable after construction; concurrent queries are safe.
 */
class Bvh {
 public:
  Bvh() = default;
  explicit Bvh(const TriangleMesh& mesh, int leaf_size = 4);

  struct Closest {
    double dist = 0;              // unsigned distance
    Eigen::Vector3d point{0, 0, 0};  // closest surface point
    int triangle = -1;
    // Distance to the nearest candidate whose closest point differs from
    // `point` by more than a feature tolerance; infinity if none found.
    double second_distinct = 0;
  };

  Closest closest(const Eigen::Vector3d& p) const;

  /// Generalized winding number; beta is the Barnes-Hut opening factor
  /// (node treated as a dipole when dist > beta * node radius).
  /// beta <= 0 forces fully exact evaluation.
  double winding_number(const Eigen::Vector3d& p, double beta = 2.0) const;

  /// Number of ray-triangle intersections with t > 0.
  int ray_crossings(const Eigen::Vector3d& origin, const Eigen::Vector3d& dir) const;

  bool valid() const { return mesh_ != nullptr; }

 private:
  struct Node {
    Eigen::AlignedBox3d box;
    Eigen::Vector3d dipole{0, 0, 0};    // sum of area-weighted normals
    Eigen::Vector3d centroid{0, 0, 0};  // area-weighted triangle centroid
    double radius = 0;                  // max distance from centroid to box corner
    int left = -1;                      // internal: child index; leaf: -1
    int right = -1;
    int first = 0;  // leaf: range into prim_
    int count = 0;

    bool is_leaf() const { return left < 0; }
  };

  int build(std::vector<int>& prims, int first, int count, int leaf_size, int depth);
  double winding_recursive(int node, const Eigen::Vector3d& p, double beta) const;

  const TriangleMesh* mesh_ = nullptr;
  std::vector<Node> nodes_;
  std::vector<int> prim_;
  std::vector<Eigen::AlignedBox3d> tri_boxes_;
  std::vector<Eigen::Vector3d> tri_centroids_;
};

}  // namespace sdfprox::geom
