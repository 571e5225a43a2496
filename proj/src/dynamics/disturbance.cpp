#include "sdfprox/dynamics/disturbance.hpp"

#include <cmath>
#include <stdexcept>

#include <unsupported/Eigen/MatrixFunctions>

namespace sdfprox::dynamics {

DisturbanceModel DisturbanceModel::make_none() { return {}; }

DisturbanceModel DisturbanceModel::make_sinusoid(
    const Eigen::Vector3d& amplitudes, const Eigen::Vector3d& frequencies,
    const Eigen::Vector3d& phases) {
  DisturbanceModel model;
  model.kind = Kind::sinusoid;
  model.amplitudes = amplitudes;
  model.frequencies = frequencies;
  model.phases = phases;
  return model;
}

DisturbanceModel DisturbanceModel::make_exosystem(const Eigen::MatrixXd& A,
                                                  const Eigen::MatrixXd& C,
                                                  const Eigen::VectorXd& xi0) {
  DisturbanceModel model;
  model.kind = Kind::exosystem;
  model.A = A;
  model.C = C;
  model.xi0 = xi0;
  model.validate();
  return model;
}

void DisturbanceModel::validate() const {
  if (kind != Kind::exosystem) {
    return;
  }
  const Eigen::Index q = A.rows();
  if (q < 1 || A.cols() != q || C.rows() != 3 || C.cols() != q ||
      xi0.size() != q) {
    throw std::invalid_argument(
        "DisturbanceModel: inconsistent exosystem dimensions");
  }
}

Eigen::Vector3d disturbance_signal(const DisturbanceModel& model, double t) {
  switch (model.kind) {
    case DisturbanceModel::Kind::none:
      return Eigen::Vector3d::Zero();
    case DisturbanceModel::Kind::sinusoid: {
      Eigen::Vector3d d;
      for (int i = 0; i < 3; ++i) {
        d(i) = model.amplitudes(i) *
               std::sin(model.frequencies(i) * t + model.phases(i));
      }
      return d;
    }
    case DisturbanceModel::Kind::exosystem: {
      model.validate();
      const Eigen::MatrixXd exp_at = (model.A * t).exp();
      return model.C * (exp_at * model.xi0);
    }
  }
  throw std::logic_error("disturbance_signal: unknown kind");
}

}  // namespace sdfprox::dynamics
