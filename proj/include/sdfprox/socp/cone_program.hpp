#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

namespace sdfprox::socp {

/// One second-order cone row: ‖A x + b‖ ≤ cᵀx + d.
struct SocConstraint {
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  Eigen::VectorXd c;
  double d = 0.0;
};

/**
 * Dense convex program
 *
 *   minimize    ½ xᵀQx + qᵀx
 *   subject to  ‖Aᵢx + bᵢ‖ ≤ cᵢᵀx + dᵢ   (second-order cone rows)
 *               G x ≤ h                   (linear rows)
 *
 * with Q symmetric positive semidefinite. Either constraint family may be
 * empty; an entirely unconstrained program is allowed.
 */
struct ConeProgram {
  Eigen::MatrixXd Q;
  Eigen::VectorXd q;
  std::vector<SocConstraint> soc_constraints;
  Eigen::MatrixXd G;
  Eigen::VectorXd h;

  Eigen::Index var_count() const { return q.size(); }

  /// Throws std::invalid_argument on dimension mismatch, asymmetric Q, or
  /// indefinite Q (checked by attempted factorization).
  void validate() const;
};

enum class SolveStatus { optimal, infeasible, max_iter, numerical_failure };

const char* to_string(SolveStatus status);

struct KktResiduals {
  double stationarity = 0.0;  ///< ‖Qx + q + G̃ᵀz‖∞ over the stacked cone rows
  double primal = 0.0;        ///< worst constraint violation in original geometry
  double dual = 0.0;          ///< worst cone violation of the multipliers
  double gap = 0.0;           ///< |sᵀz| complementarity over the stacked slacks
};

struct ConeSolution {
  Eigen::VectorXd x;
  Eigen::VectorXd duals;  ///< stacked multipliers: linear rows, then SOC blocks
  SolveStatus status = SolveStatus::numerical_failure;
  KktResiduals kkt_residuals;
  int iterations = 0;
  double solve_time = 0.0;  ///< seconds
};

/**
 * The conic-form stacking used by the solver and by verify_kkt: linear rows
 * first, then one block of size rows(Aᵢ)+1 per SOC constraint, written as
 * G̃x + s = h̃ with s in the product cone (nonnegative orthant × SOC blocks).
 */
struct ConicStack {
  Eigen::MatrixXd G;
  Eigen::VectorXd h;
  Eigen::Index linear_rows = 0;
  std::vector<Eigen::Index> soc_dims;  ///< block sizes, each ≥ 1

  Eigen::Index total_rows() const { return G.rows(); }
  /// Cone degree: one per linear row plus one per SOC block.
  Eigen::Index degree() const {
    return linear_rows + static_cast<Eigen::Index>(soc_dims.size());
  }
};

ConicStack stack_cones(const ConeProgram& prog);

/**
 * Pure KKT residual report for a candidate primal point and stacked
 * multipliers (layout of ConicStack / ConeSolution::duals).
 * Throws std::invalid_argument on dimension mismatch.
 */
KktResiduals verify_kkt(const ConeProgram& prog, const Eigen::VectorXd& x,
                        const Eigen::VectorXd& duals);

/// Full program data (Q,q and every constraint row) as a JSON document so an
/// instance can be reproduced offline.
std::string program_to_json(const ConeProgram& prog);

}  // namespace sdfprox::socp
