#include "sdfprox/control/observer.hpp"

#include <Eigen/Eigenvalues>

#include <stdexcept>

namespace sdfprox::control {

ObserverState observer_init(const Eigen::MatrixXd& A, const Eigen::MatrixXd& C,
                            const Eigen::MatrixXd& L,
                            const dynamics::RelState& state, double m) {
  if (!(m > 0.0)) {
    throw std::invalid_argument("observer_init: m must be positive");
  }
  const Eigen::Index q = A.rows();
  if (q < 1 || A.cols() != q) {
    throw std::invalid_argument("observer_init: A must be square");
  }
  if (C.rows() != 3 || C.cols() != q) {
    throw std::invalid_argument("observer_init: C must be 3 x q");
  }
  if (L.rows() != q || L.cols() != 3) {
    throw std::invalid_argument("observer_init: L must be q x 3");
  }
  const Eigen::MatrixXd error_matrix = A - (L * C) / m;
  const Eigen::EigenSolver<Eigen::MatrixXd> eig(error_matrix);
  if (eig.info() != Eigen::Success) {
    throw std::runtime_error("observer_init: eigenvalue computation failed");
  }
  if (eig.eigenvalues().real().maxCoeff() >= 0.0) {
    throw std::invalid_argument(
        "observer_init: A - L C / m must be Hurwitz (all eigenvalue real "
        "parts negative)");
  }

  ObserverState obs;
  obs.A = A;
  obs.C = C;
  obs.L = L;
  obs.z = -(L * state.v);
  obs.xi_hat = obs.z + L * state.v;
  obs.d_hat = C * obs.xi_hat;
  return obs;
}

Eigen::VectorXd observer_derivative(const ObserverState& obs,
                                    const Eigen::VectorXd& z,
                                    const PlantSample& sample, double m) {
  const Eigen::VectorXd xi = z + obs.L * sample.v;
  const Eigen::Vector3d n = -(sample.coeffs.C1 * sample.v) -
                            sample.coeffs.C2 * sample.r + sample.coeffs.g +
                            sample.F / m;
  return obs.A * xi - obs.L * (n + (obs.C * xi) / m);
}

ObserverState observer_step(const ObserverState& obs, const PlantSampler& plant,
                            double m, double dt) {
  if (!(dt > 0.0)) {
    throw std::invalid_argument("observer_step: dt must be positive");
  }
  if (!(m > 0.0)) {
    throw std::invalid_argument("observer_step: m must be positive");
  }
  if (!plant) {
    throw std::invalid_argument("observer_step: plant sampler is empty");
  }
  const PlantSample s0 = plant(0.0);
  const PlantSample sm = plant(0.5 * dt);
  const PlantSample s1 = plant(dt);

  const Eigen::VectorXd k1 = observer_derivative(obs, obs.z, s0, m);
  const Eigen::VectorXd k2 =
      observer_derivative(obs, obs.z + (0.5 * dt) * k1, sm, m);
  const Eigen::VectorXd k3 =
      observer_derivative(obs, obs.z + (0.5 * dt) * k2, sm, m);
  const Eigen::VectorXd k4 = observer_derivative(obs, obs.z + dt * k3, s1, m);

  ObserverState next = obs;
  next.z = obs.z + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  next.xi_hat = next.z + obs.L * s1.v;
  next.d_hat = obs.C * next.xi_hat;
  if (!next.z.allFinite() || !next.d_hat.allFinite()) {
    throw std::runtime_error("observer_step: state became non-finite");
  }
  return next;
}

ObserverState observer_step(const ObserverState& obs,
                            const dynamics::RelState& state,
                            const PlantCoefficients& coeffs,
                            const Eigen::Vector3d& F, double m, double dt) {
  PlantSample sample;
  sample.r = state.r;
  sample.v = state.v;
  sample.coeffs = coeffs;
  sample.F = F;
  return observer_step(
      obs, [&sample](double) { return sample; }, m, dt);
}

}  // namespace sdfprox::control
