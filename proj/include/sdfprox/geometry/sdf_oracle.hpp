#pragma once

#include <memory>
#include <stdexcept>

#include <Eigen/Core>

#include "sdfprox/geometry/bvh.hpp"
#include "sdfprox/geometry/mesh.hpp"

namespace sdfprox::geom {

enum class SignMethod { winding_number, ray_parity };

/// Raised when the winding number lands in the 0.5 +/- 0.01 ambiguity band
/// (point numerically on the surface of an imperfect mesh).
struct SignAmbiguityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/**
 * Exact mesh signed-distance oracle: BVH closest-point magnitude, sign by
 * generalized winding number (default) or 3-ray parity majority vote.
 * Convention: negative strictly inside, positive strictly outside.
 * Immutable after construction; concurrent queries are safe.
 */
class SdfOracle {
 public:
  explicit SdfOracle(TriangleMesh mesh, SignMethod method = SignMethod::winding_number);

  struct Unsigned {
    double d;
    Eigen::Vector3d q;  // closest surface point
  };
  Unsigned unsigned_distance(const Eigen::Vector3d& p) const;

  /// -1 strictly inside, +1 outside (surface points resolve to +1 side of
  /// the winding threshold unless ambiguous).
  int sign(const Eigen::Vector3d& p) const;

  double signed_distance(const Eigen::Vector3d& p) const;

  struct Gradient {
    Eigen::Vector3d g{0, 0, 0};
    bool at_surface = false;   // unsigned distance < 1e-9: direction undefined
    bool ambiguous = false;    // multiple closest features within 1e-9
  };
  /// Unit gradient of the signed distance: s * (p - q) / |p - q|.
  /// When `ambiguous`, an arbitrary member of the subgradient set is returned.
  Gradient gradient(const Eigen::Vector3d& p) const;

  double winding_number(const Eigen::Vector3d& p) const { return bvh_.winding_number(p); }

  const TriangleMesh& mesh() const { return *mesh_; }
  const Bvh& bvh() const { return bvh_; }
  SignMethod method() const { return method_; }

 private:
  std::unique_ptr<TriangleMesh> mesh_;  // stable address for the BVH
  Bvh bvh_;
  SignMethod method_;
};

}  // namespace sdfprox::geom
