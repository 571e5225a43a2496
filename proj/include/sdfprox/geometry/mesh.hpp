#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace sdfprox::geom {

/**
 * Indexed triangle soup in the target body frame, units meters.
 *
 * Loaders guarantee: all indices in range, no triangle with area below
 * 1e-12 m^2 (degenerate faces are dropped with a counter), and a bounding
 * box with strictly positive extent on every axis.
 */
struct TriangleMesh {
  std::vector<Eigen::Vector3d> vertices;
  std::vector<Eigen::Vector3i> triangles;
  std::size_t dropped_degenerate = 0;

  Eigen::AlignedBox3d bounding_box() const;

  double triangle_area(int t) const;
  Eigen::Vector3d triangle_normal(int t) const;       // unit length
  Eigen::Vector3d triangle_area_normal(int t) const;  // area-weighted (cross/2)
  double total_area() const;

  /// Every edge shared by exactly two triangles with opposite orientation.
  bool is_watertight() const;

  /// Signed volume by divergence theorem; positive for outward orientation.
  double signed_volume() const;
};

/// Parse Wavefront OBJ text (v and f records; polygons fan-triangulated,
/// negative indices relative to the current vertex count). Throws
/// std::runtime_error with a line number on malformed input.
TriangleMesh parse_obj(const std::string& text);

TriangleMesh load_mesh(const std::string& path);

/// Write OBJ. `comment` lines are emitted with a leading "# ".
void write_obj(const TriangleMesh& mesh, const std::string& path,
               const std::string& comment = {});

std::string obj_text(const TriangleMesh& mesh, const std::string& comment = {});

}  // namespace sdfprox::geom
