#pragma once

#include <functional>

#include <Eigen/Core>

#include "sdfprox/geometry/mesh.hpp"

namespace sdfprox::geom {

struct McGrid {
  Eigen::Vector3d min;
  Eigen::Vector3d max;
  Eigen::Vector3i points;  // grid points per axis, each >= 2
};

/**
 * Extract the iso-level set of a scalar field as a triangle mesh.
 *
 * Connectivity comes from case tables built at startup by chaining
 * marching-squares segments across cell faces (every cut cell edge is the
 * start of exactly one segment and the end of exactly one, so segments close
 * into loops; a startup self-check asserts this for all 256 cases). Shared
 * cell faces produce identical segments in both neighbors, so the surface is
 * watertight wherever the field is well resolved, and triangles are oriented
 * with normals toward field > iso (outward for SDF conventions).
 *
 * Every emitted vertex lies on a grid edge whose endpoint values straddle
 * iso and is placed by linear interpolation. Returns an empty mesh when no
 * sign crossing exists.
 */
TriangleMesh marching_cubes(const std::function<double(const Eigen::Vector3d&)>& field,
                            const McGrid& grid, double iso = 0.0);

}  // namespace sdfprox::geom
