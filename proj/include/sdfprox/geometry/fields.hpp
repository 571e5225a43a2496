#pragma once

#include <memory>
#include <vector>

#include <Eigen/Core>

#include "sdfprox/geometry/sdf_oracle.hpp"

namespace sdfprox::geom {

/// Value + gradient evaluator shared by analytic shapes, mesh oracles and
/// trained networks. Values follow the signed-distance convention
/// (negative inside) but are only required to be exact where documented.
class ScalarField {
 public:
  virtual ~ScalarField() = default;
  virtual double value(const Eigen::Vector3d& p) const = 0;
  virtual Eigen::Vector3d gradient(const Eigen::Vector3d& p) const = 0;
};

class SphereField final : public ScalarField {
 public:
  SphereField(const Eigen::Vector3d& center, double radius)
      : center_(center), radius_(radius) {}
  double value(const Eigen::Vector3d& p) const override {
    return (p - center_).norm() - radius_;
  }
  Eigen::Vector3d gradient(const Eigen::Vector3d& p) const override {
    const Eigen::Vector3d d = p - center_;
    const double n = d.norm();
    return n > 1e-12 ? Eigen::Vector3d(d / n) : Eigen::Vector3d::UnitX();
  }

 private:
  Eigen::Vector3d center_;
  double radius_;
};

/// Axis-aligned box; exact SDF inside and outside.
class BoxField final : public ScalarField {
 public:
  BoxField(const Eigen::Vector3d& center, const Eigen::Vector3d& half_extents)
      : center_(center), half_(half_extents) {}
  double value(const Eigen::Vector3d& p) const override;
  Eigen::Vector3d gradient(const Eigen::Vector3d& p) const override;

 private:
  Eigen::Vector3d center_;
  Eigen::Vector3d half_;
};

/// Union of solids: min of member fields. Exact SDF everywhere outside the
/// union; a lower bound (still negative) inside overlaps, which is the side
/// that matters for keep-out control. Gradient comes from the active member.
class UnionField final : public ScalarField {
 public:
  void add(std::unique_ptr<ScalarField> f) { parts_.push_back(std::move(f)); }
  double value(const Eigen::Vector3d& p) const override;
  Eigen::Vector3d gradient(const Eigen::Vector3d& p) const override;

 private:
  std::vector<std::unique_ptr<ScalarField>> parts_;
};

/// Mesh-oracle-backed field (exact w.r.t. the mesh).
class MeshOracleField final : public ScalarField {
 public:
  explicit MeshOracleField(const SdfOracle& oracle) : oracle_(&oracle) {}
  double value(const Eigen::Vector3d& p) const override {
    return oracle_->signed_distance(p);
  }
  Eigen::Vector3d gradient(const Eigen::Vector3d& p) const override {
    return oracle_->gradient(p).g;
  }

 private:
  const SdfOracle* oracle_;
};

/// Built-in test target: sphere r=2 m at the origin plus two 6 x 0.1 x 2 m
/// panels. One panel sits behind the sphere as a wall spanning the approach
/// corridor (gives the guidance layer a genuine local-minimum trap), the
/// other is a conventional +x solar wing.
std::unique_ptr<ScalarField> make_sphere_with_panels();

/// Built-in test target: unit-scale sphere (r=2 m) alone.
std::unique_ptr<ScalarField> make_sphere_target();

/// Resolve an analytic target by tag ("sphere" | "sphere_panels"); throws on
/// unknown tags.
std::unique_ptr<ScalarField> make_analytic_target(const std::string& tag);

}  // namespace sdfprox::geom
