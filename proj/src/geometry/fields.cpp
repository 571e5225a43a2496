#include "sdfprox/geometry/fields.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace sdfprox::geom {

double BoxField::value(const Eigen::Vector3d& p) const {
  const Eigen::Vector3d q = (p - center_).cwiseAbs() - half_;
  const double outside = q.cwiseMax(0.0).norm();
  const double inside = std::min(q.maxCoeff(), 0.0);
  return outside + inside;
}

Eigen::Vector3d BoxField::gradient(const Eigen::Vector3d& p) const {
  const Eigen::Vector3d rel = p - center_;
  const Eigen::Vector3d q = rel.cwiseAbs() - half_;
  const Eigen::Vector3d qpos = q.cwiseMax(0.0);
  const double outside = qpos.norm();
  Eigen::Vector3d g = Eigen::Vector3d::Zero();
  if (outside > 1e-12) {
    for (int k = 0; k < 3; ++k) {
      g[k] = (rel[k] < 0 ? -1.0 : 1.0) * qpos[k] / outside;
    }
    return g;
  }
  int axis;
  q.maxCoeff(&axis);
  g[axis] = rel[axis] < 0 ? -1.0 : 1.0;
  return g;
}

double UnionField::value(const Eigen::Vector3d& p) const {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& f : parts_) best = std::min(best, f->value(p));
  return best;
}

Eigen::Vector3d UnionField::gradient(const Eigen::Vector3d& p) const {
  double best = std::numeric_limits<double>::infinity();
  const ScalarField* active = nullptr;
  for (const auto& f : parts_) {
    const double v = f->value(p);
    if (v < best) {
      best = v;
      active = f.get();
    }
  }
  return active ? active->gradient(p) : Eigen::Vector3d::UnitX();
}

std::unique_ptr<ScalarField> make_sphere_with_panels() {
  auto u = std::make_unique<UnionField>();
  u->add(std::make_unique<SphereField>(Eigen::Vector3d::Zero(), 2.0));
  // Trap wall behind the sphere: 2 x 0.1 x 6 m (x, y, z extents).
  u->add(std::make_unique<BoxField>(Eigen::Vector3d(0.0, -2.8, -2.3),
                                    Eigen::Vector3d(1.0, 0.05, 3.0)));
  // Solar wing on +x: 6 x 0.1 x 2 m.
  u->add(std::make_unique<BoxField>(Eigen::Vector3d(4.9, 0.0, 0.0),
                                    Eigen::Vector3d(3.0, 0.05, 1.0)));
  return u;
}

std::unique_ptr<ScalarField> make_sphere_target() {
  return std::make_unique<SphereField>(Eigen::Vector3d::Zero(), 2.0);
}

std::unique_ptr<ScalarField> make_analytic_target(const std::string& tag) {
  if (tag == "sphere") return make_sphere_target();
  if (tag == "sphere_panels") return make_sphere_with_panels();
  throw std::runtime_error("unknown analytic target tag: " + tag);
}

}  // namespace sdfprox::geom
