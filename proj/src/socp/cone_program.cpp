#include "sdfprox/socp/cone_program.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Cholesky>
#include <nlohmann/json.hpp>

namespace sdfprox::socp {

namespace {

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

nlohmann::json vector_to_json(const Eigen::VectorXd& v) {
  nlohmann::json out = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

}  // namespace

void ConeProgram::validate() const {
  const Eigen::Index n = var_count();
  if (n < 1) throw std::invalid_argument("cone program: empty variable vector");
  if (Q.rows() != n || Q.cols() != n) {
    throw std::invalid_argument("cone program: Q must be n x n");
  }
  const double scale = std::max(1.0, Q.cwiseAbs().maxCoeff());
  if ((Q - Q.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw std::invalid_argument("cone program: Q is not symmetric");
  }
  Eigen::LDLT<Eigen::MatrixXd> ldlt(Q);
  if (ldlt.info() != Eigen::Success ||
      (ldlt.vectorD().array() < -1e-10 * scale).any()) {
    throw std::invalid_argument("cone program: Q is not positive semidefinite");
  }
  if (G.rows() != h.size() || (G.rows() > 0 && G.cols() != n)) {
    throw std::invalid_argument("cone program: linear rows G/h mismatch");
  }
  for (const SocConstraint& soc : soc_constraints) {
    if (soc.A.cols() != n || soc.c.size() != n || soc.b.size() != soc.A.rows()) {
      throw std::invalid_argument("cone program: SOC row dimension mismatch");
    }
  }
}

const char* to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::infeasible: return "infeasible";
    case SolveStatus::max_iter: return "max_iter";
    case SolveStatus::numerical_failure: return "numerical_failure";
  }
  return "unknown";
}

ConicStack stack_cones(const ConeProgram& prog) {
  const Eigen::Index n = prog.var_count();
  ConicStack stack;
  stack.linear_rows = prog.G.rows();
  Eigen::Index total = stack.linear_rows;
  for (const SocConstraint& soc : prog.soc_constraints) {
    stack.soc_dims.push_back(soc.A.rows() + 1);
    total += soc.A.rows() + 1;
  }
  stack.G.resize(total, n);
  stack.h.resize(total);
  if (stack.linear_rows > 0) {
    stack.G.topRows(stack.linear_rows) = prog.G;
    stack.h.head(stack.linear_rows) = prog.h;
  }
  Eigen::Index row = stack.linear_rows;
  // ‖Ax+b‖ ≤ cᵀx+d becomes the slack block s = (cᵀx+d, Ax+b) in the second-
  // order cone, i.e. rows (-cᵀ; -A) with right-hand side (d; b).
  for (const SocConstraint& soc : prog.soc_constraints) {
    stack.G.row(row) = -soc.c.transpose();
    stack.h(row) = soc.d;
    stack.G.middleRows(row + 1, soc.A.rows()) = -soc.A;
    stack.h.segment(row + 1, soc.A.rows()) = soc.b;
    row += soc.A.rows() + 1;
  }
  return stack;
}

KktResiduals verify_kkt(const ConeProgram& prog, const Eigen::VectorXd& x,
                        const Eigen::VectorXd& duals) {
  const ConicStack stack = stack_cones(prog);
  if (x.size() != prog.var_count() || duals.size() != stack.total_rows()) {
    throw std::invalid_argument("verify_kkt: dimension mismatch");
  }

  KktResiduals res;
  const Eigen::VectorXd stat = prog.Q * x + prog.q + stack.G.transpose() * duals;
  res.stationarity = stat.size() > 0 ? stat.cwiseAbs().maxCoeff() : 0.0;

  for (Eigen::Index i = 0; i < prog.G.rows(); ++i) {
    res.primal = std::max(res.primal, prog.G.row(i).dot(x) - prog.h(i));
  }
  for (const SocConstraint& soc : prog.soc_constraints) {
    const double margin = (soc.A * x + soc.b).norm() - (soc.c.dot(x) + soc.d);
    res.primal = std::max(res.primal, margin);
  }
  res.primal = std::max(res.primal, 0.0);

  for (Eigen::Index i = 0; i < stack.linear_rows; ++i) {
    res.dual = std::max(res.dual, -duals(i));
  }
  Eigen::Index row = stack.linear_rows;
  for (const Eigen::Index dim : stack.soc_dims) {
    res.dual = std::max(res.dual,
                        duals.segment(row + 1, dim - 1).norm() - duals(row));
    row += dim;
  }
  res.dual = std::max(res.dual, 0.0);

  const Eigen::VectorXd s = stack.h - stack.G * x;
  res.gap = std::abs(s.dot(duals));
  return res;
}

std::string program_to_json(const ConeProgram& prog) {
  nlohmann::json doc;
  doc["Q"] = matrix_to_json(prog.Q);
  doc["q"] = vector_to_json(prog.q);
  doc["soc_constraints"] = nlohmann::json::array();
  for (const SocConstraint& soc : prog.soc_constraints) {
    nlohmann::json row;
    row["A"] = matrix_to_json(soc.A);
    row["b"] = vector_to_json(soc.b);
    row["c"] = vector_to_json(soc.c);
    row["d"] = soc.d;
    doc["soc_constraints"].push_back(std::move(row));
  }
  doc["G"] = matrix_to_json(prog.G);
  doc["h"] = vector_to_json(prog.h);
  return doc.dump(2);
}

}  // namespace sdfprox::socp
