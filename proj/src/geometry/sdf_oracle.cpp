#include "sdfprox/geometry/sdf_oracle.hpp"

#include <cmath>

namespace sdfprox::geom {

SdfOracle::SdfOracle(TriangleMesh mesh, SignMethod method)
    : mesh_(std::make_unique<TriangleMesh>(std::move(mesh))),
      bvh_(*mesh_),
      method_(method) {}

SdfOracle::Unsigned SdfOracle::unsigned_distance(const Eigen::Vector3d& p) const {
  const Bvh::Closest c = bvh_.closest(p);
  return {c.dist, c.point};
}

int SdfOracle::sign(const Eigen::Vector3d& p) const {
  if (method_ == SignMethod::winding_number) {
    // The dipole approximation is good to a few percent; that is plenty for
    // a 0/1 decision but not near the threshold, so re-evaluate exactly
    // whenever the fast estimate lands anywhere close to 0.5.
    double w = bvh_.winding_number(p);
    if (std::abs(w - 0.5) <= 0.1) w = bvh_.winding_number(p, 0.0);
    if (std::abs(w - 0.5) <= 0.01) {
      throw SignAmbiguityError("winding number " + std::to_string(w) +
                               " inside ambiguity band 0.5 +/- 0.01");
    }
    return w > 0.5 ? -1 : 1;
  }
  // Ray parity with a majority vote over three fixed, irrationally tilted
  // directions (robust against edge grazing).
  static const Eigen::Vector3d dirs[3] = {
      Eigen::Vector3d(0.57321, 0.33112, 0.74953).normalized(),
      Eigen::Vector3d(-0.29117, 0.83191, 0.47237).normalized(),
      Eigen::Vector3d(0.40412, -0.56323, 0.72111).normalized(),
  };
  int inside_votes = 0;
  for (const auto& d : dirs) {
    if (bvh_.ray_crossings(p, d) % 2 == 1) ++inside_votes;
  }
  return inside_votes >= 2 ? -1 : 1;
}

double SdfOracle::signed_distance(const Eigen::Vector3d& p) const {
  const Unsigned u = unsigned_distance(p);
  if (u.d == 0.0) return 0.0;
  return sign(p) * u.d;
}

SdfOracle::Gradient SdfOracle::gradient(const Eigen::Vector3d& p) const {
  Gradient out;
  const Bvh::Closest c = bvh_.closest(p);
  if (c.dist < 1e-9) {
    out.at_surface = true;
    out.g = Eigen::Vector3d::Zero();
    return out;
  }
  out.ambiguous = (c.second_distinct - c.dist) < 1e-9;
  const Eigen::Vector3d dir = (p - c.point) / c.dist;
  out.g = sign(p) > 0 ? dir : Eigen::Vector3d(-dir);
  return out;
}

}  // namespace sdfprox::geom
