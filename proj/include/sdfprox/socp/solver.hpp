#pragma once

#include <Eigen/Core>

#include "sdfprox/socp/cone_program.hpp"

namespace sdfprox::socp {

struct SolverOptions {
  int max_iterations = 100;
  double tolerance = 1e-9;      ///< relative primal/dual/gap stopping threshold
  double step_fraction = 0.99;  ///< fraction of the distance to the cone boundary
};

/**
 * Dense primal-dual interior-point solver (Mehrotra predictor-corrector with
 * Nesterov-Todd scaling on the second-order cone blocks), sized for small
 * problems solved at control rate.
 *
 * Deterministic: identical inputs produce identical iterate sequences. One
 * instance is reusable across solves but holds internal workspaces, so it must
 * not be shared across threads; independent instances may run in parallel.
 */
class ConeSolver {
 public:
  explicit ConeSolver(SolverOptions options = {}) : options_(options) {}

  /// warm_start, when given, seeds the primal iterate (useful across control
  /// steps where consecutive programs are near-identical).
  ConeSolution solve(const ConeProgram& prog,
                     const Eigen::VectorXd* warm_start = nullptr);

  const SolverOptions& options() const { return options_; }

 private:
  SolverOptions options_;
};

}  // namespace sdfprox::socp
