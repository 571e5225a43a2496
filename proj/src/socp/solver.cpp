#include "sdfprox/socp/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Cholesky>
#include <Eigen/LU>

namespace sdfprox::socp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// All block helpers below operate on vectors stacked per the ConicStack
// layout: linear entries first, then each second-order block (u0, u1).

Eigen::VectorXd cone_identity(const ConicStack& stack) {
  Eigen::VectorXd e = Eigen::VectorXd::Zero(stack.total_rows());
  e.head(stack.linear_rows).setOnes();
  Eigen::Index row = stack.linear_rows;
  for (const Eigen::Index dim : stack.soc_dims) {
    e(row) = 1.0;
    row += dim;
  }
  return e;
}

bool in_cone_interior(const Eigen::VectorXd& u, const ConicStack& stack) {
  if ((u.head(stack.linear_rows).array() <= 0.0).any()) return false;
  Eigen::Index row = stack.linear_rows;
  for (const Eigen::Index dim : stack.soc_dims) {
    const double u0 = u(row);
    if (u0 <= 0.0 || u0 * u0 - u.segment(row + 1, dim - 1).squaredNorm() <= 0.0) {
      return false;
    }
    row += dim;
  }
  return true;
}

/// Shifts an arbitrary vector to a point comfortably inside the cone,
/// keeping whatever geometry of the input is already usable.
Eigen::VectorXd push_interior(const Eigen::VectorXd& raw, const ConicStack& stack) {
  Eigen::VectorXd u = raw;
  for (Eigen::Index i = 0; i < stack.linear_rows; ++i) u(i) = std::max(u(i), 1.0);
  Eigen::Index row = stack.linear_rows;
  for (const Eigen::Index dim : stack.soc_dims) {
    const double norm1 = u.segment(row + 1, dim - 1).norm();
    u(row) = std::max(u(row), norm1 + 1.0);
    row += dim;
  }
  return u;
}

/// Jordan product u∘v: elementwise on the linear block, (uᵀv, u0·v1 + v0·u1)
/// on each second-order block.
Eigen::VectorXd jordan_product(const Eigen::VectorXd& u, const Eigen::VectorXd& v,
                               const ConicStack& stack) {
  Eigen::VectorXd out(stack.total_rows());
  out.head(stack.linear_rows) =
      u.head(stack.linear_rows).cwiseProduct(v.head(stack.linear_rows));
  Eigen::Index row = stack.linear_rows;
  for (const Eigen::Index dim : stack.soc_dims) {
    const auto u1 = u.segment(row + 1, dim - 1);
    const auto v1 = v.segment(row + 1, dim - 1);
    out(row) = u(row) * v(row) + u1.dot(v1);
    out.segment(row + 1, dim - 1) = u(row) * v1 + v(row) * u1;
    row += dim;
  }
  return out;
}

/// Solves lambda∘y = d for y (inverse of the arrowhead operator per block).
Eigen::VectorXd jordan_inverse_apply(const Eigen::VectorXd& lambda,
                                     const Eigen::VectorXd& d,
                                     const ConicStack& stack) {
  Eigen::VectorXd y(stack.total_rows());
  y.head(stack.linear_rows) =
      d.head(stack.linear_rows).cwiseQuotient(lambda.head(stack.linear_rows));
  Eigen::Index row = stack.linear_rows;
  for (const Eigen::Index dim : stack.soc_dims) {
    const double l0 = lambda(row);
    const auto l1 = lambda.segment(row + 1, dim - 1);
    const double d0 = d(row);
    const auto d1 = d.segment(row + 1, dim - 1);
    const double det = l0 * l0 - l1.squaredNorm();
    y(row) = (l0 * d0 - l1.dot(d1)) / det;
    y.segment(row + 1, dim - 1) =
        (-d0 * l1 + (det * d1 + l1 * l1.dot(d1)) / l0) / det;
    row += dim;
  }
  return y;
}

/// Largest t ≥ 0 with u + t·du still in the (closed) cone.
double max_step(const Eigen::VectorXd& u, const Eigen::VectorXd& du,
                const ConicStack& stack) {
  double t = kInf;
  for (Eigen::Index i = 0; i < stack.linear_rows; ++i) {
    if (du(i) < 0.0) t = std::min(t, -u(i) / du(i));
  }
  Eigen::Index row = stack.linear_rows;
  for (const Eigen::Index dim : stack.soc_dims) {
    const double u0 = u(row), du0 = du(row);
    const auto u1 = u.segment(row + 1, dim - 1);
    const auto du1 = du.segment(row + 1, dim - 1);
    // Boundary crossing of (u0+t·du0)² − ‖u1+t·du1‖² with u0+t·du0 ≥ 0.
    const double c2 = du0 * du0 - du1.squaredNorm();
    const double c1 = 2.0 * (u0 * du0 - u1.dot(du1));
    const double c0 = u0 * u0 - u1.squaredNorm();
    if (std::abs(c2) < 1e-300) {
      if (c1 < 0.0) t = std::min(t, -c0 / c1);
    } else {
      const double disc = c1 * c1 - 4.0 * c2 * c0;
      if (disc >= 0.0) {
        const double sq = std::sqrt(disc);
        const double qq = -(c1 + (c1 >= 0.0 ? sq : -sq)) / 2.0;
        for (const double root : {qq / c2, c0 / qq}) {
          if (std::isfinite(root) && root > 0.0) t = std::min(t, root);
        }
      }
    }
    if (du0 < 0.0) t = std::min(t, -u0 / du0);
    row += dim;
  }
  return t;
}

struct PolishOutcome {
  bool ok = false;
  Eigen::VectorXd x;
  Eigen::VectorXd duals;
  KktResiduals residuals;
};

/**
 * Active-set refinement. The interior-point iteration pins the argmin only to
 * about sqrt(gap); holding the constraints identified as active (dual larger
 * than slack) as equalities and running Newton on that reduced KKT system
 * lands on the exact optimum. The result is accepted only after verification:
 * original feasibility, nonnegative multipliers, small stationarity.
 */
struct ActiveSet {
  std::vector<Eigen::Index> linear;
  std::vector<std::size_t> soc;
  bool operator==(const ActiveSet&) const = default;
};

PolishOutcome attempt_polish(const ConeProgram& prog, const ConicStack& stack,
                             const Eigen::VectorXd& x_in, const Eigen::VectorXd& z,
                             const ActiveSet& act, double q_scale,
                             double h_scale) {
  PolishOutcome out;
  const Eigen::Index n = prog.var_count();
  const std::vector<Eigen::Index>& active_linear = act.linear;
  const std::vector<std::size_t>& active_soc = act.soc;
  std::vector<Eigen::Index> soc_offsets;
  {
    Eigen::Index row = stack.linear_rows;
    for (std::size_t j = 0; j < stack.soc_dims.size(); ++j) {
      soc_offsets.push_back(row);
      row += stack.soc_dims[j];
    }
  }
  const auto k = static_cast<Eigen::Index>(active_linear.size());
  const auto m = static_cast<Eigen::Index>(active_soc.size());
  const Eigen::Index dim = n + k + m;

  Eigen::VectorXd w(dim);
  w.head(n) = x_in;
  for (Eigen::Index i = 0; i < k; ++i) w(n + i) = z(active_linear[i]);
  for (Eigen::Index j = 0; j < m; ++j) {
    w(n + k + j) = z(soc_offsets[active_soc[j]]);
  }

  Eigen::VectorXd F(dim);
  Eigen::MatrixXd J(dim, dim);
  for (int newton = 0; newton < 8; ++newton) {
    const Eigen::VectorXd x = w.head(n);
    F.head(n) = prog.Q * x + prog.q;
    J.setZero();
    J.topLeftCorner(n, n) = prog.Q;
    for (Eigen::Index i = 0; i < k; ++i) {
      const auto g = prog.G.row(active_linear[i]).transpose();
      F.head(n) += w(n + i) * g;
      F(n + i) = prog.G.row(active_linear[i]).dot(x) - prog.h(active_linear[i]);
      J.block(0, n + i, n, 1) = g;
      J.block(n + i, 0, 1, n) = g.transpose();
    }
    for (Eigen::Index j = 0; j < m; ++j) {
      const SocConstraint& soc = prog.soc_constraints[active_soc[j]];
      const Eigen::VectorXd r = soc.A * x + soc.b;
      const double rn = r.norm();
      // At the cone apex the boundary has no gradient; leave this set alone.
      if (rn <= 1e-12 * (1.0 + h_scale)) return out;
      const Eigen::VectorXd u = r / rn;
      const Eigen::VectorXd grad = soc.A.transpose() * u - soc.c;
      const double nu = w(n + k + j);
      F.head(n) += nu * grad;
      F(n + k + j) = rn - soc.c.dot(x) - soc.d;
      const Eigen::VectorXd au = soc.A.transpose() * u;
      J.topLeftCorner(n, n) +=
          nu * (soc.A.transpose() * soc.A - au * au.transpose()) / rn;
      J.block(0, n + k + j, n, 1) = grad;
      J.block(n + k + j, 0, 1, n) = grad.transpose();
    }
    if (!F.allFinite()) return out;
    if (F.cwiseAbs().maxCoeff() <= 1e-13 * (q_scale + h_scale)) break;
    const Eigen::VectorXd dw = Eigen::PartialPivLU<Eigen::MatrixXd>(J).solve(-F);
    if (!dw.allFinite()) return out;
    w += dw;
  }

  out.x = w.head(n);
  if (!out.x.allFinite()) return out;
  out.duals = Eigen::VectorXd::Zero(stack.total_rows());
  double most_negative = 0.0;
  for (Eigen::Index i = 0; i < k; ++i) {
    most_negative = std::min(most_negative, w(n + i));
    out.duals(active_linear[i]) = std::max(w(n + i), 0.0);
  }
  for (Eigen::Index j = 0; j < m; ++j) {
    const SocConstraint& soc = prog.soc_constraints[active_soc[j]];
    const Eigen::VectorXd r = soc.A * out.x + soc.b;
    if (r.norm() <= 0.0) return out;
    const double nu = std::max(w(n + k + j), 0.0);
    most_negative = std::min(most_negative, w(n + k + j));
    const Eigen::Index row = soc_offsets[active_soc[j]];
    out.duals(row) = nu;
    out.duals.segment(row + 1, stack.soc_dims[active_soc[j]] - 1) =
        -nu * r / r.norm();
  }
  const double dual_scale = 1.0 + out.duals.cwiseAbs().maxCoeff();
  if (most_negative < -1e-9 * dual_scale) return out;

  out.residuals = verify_kkt(prog, out.x, out.duals);
  out.ok = out.residuals.stationarity <= 1e-8 * (q_scale + dual_scale) &&
           out.residuals.primal <= 1e-9 * (1.0 + h_scale) &&
           out.residuals.dual <= 1e-12 * dual_scale &&
           out.residuals.gap <= 1e-9 * (1.0 + h_scale) * dual_scale;
  return out;
}

/**
 * Activity detection from a near-converged iterate is ambiguous for weakly
 * binding rows, so several candidate active sets are tried in a fixed order:
 * multipliers dominating the boundary distance first, then everything within
 * an absolute slack band. The first verified polish wins.
 */
PolishOutcome polish_candidates(const ConeProgram& prog, const ConicStack& stack,
                                const Eigen::VectorXd& x, const Eigen::VectorXd& s,
                                const Eigen::VectorXd& z, double q_scale,
                                double h_scale) {
  std::vector<Eigen::Index> soc_offsets;
  {
    Eigen::Index row = stack.linear_rows;
    for (std::size_t j = 0; j < stack.soc_dims.size(); ++j) {
      soc_offsets.push_back(row);
      row += stack.soc_dims[j];
    }
  }
  auto boundary_margin = [&](const Eigen::VectorXd& u, std::size_t j) {
    const Eigen::Index row = soc_offsets[j];
    return u(row) - u.segment(row + 1, stack.soc_dims[j] - 1).norm();
  };

  std::vector<ActiveSet> candidates;
  ActiveSet by_dual;
  for (Eigen::Index i = 0; i < stack.linear_rows; ++i) {
    if (z(i) > s(i)) by_dual.linear.push_back(i);
  }
  for (std::size_t j = 0; j < stack.soc_dims.size(); ++j) {
    if (z(soc_offsets[j]) > boundary_margin(s, j)) by_dual.soc.push_back(j);
  }
  candidates.push_back(std::move(by_dual));
  for (const double tol : {1e-6, 1e-4}) {
    ActiveSet by_slack;
    for (Eigen::Index i = 0; i < stack.linear_rows; ++i) {
      if (s(i) <= tol * (1.0 + h_scale)) by_slack.linear.push_back(i);
    }
    for (std::size_t j = 0; j < stack.soc_dims.size(); ++j) {
      if (boundary_margin(s, j) <= tol * (1.0 + h_scale)) by_slack.soc.push_back(j);
    }
    if (std::find(candidates.begin(), candidates.end(), by_slack) ==
        candidates.end()) {
      candidates.push_back(std::move(by_slack));
    }
  }

  for (const ActiveSet& act : candidates) {
    const PolishOutcome out =
        attempt_polish(prog, stack, x, z, act, q_scale, h_scale);
    if (out.ok) return out;
  }
  return {};
}

/// Nesterov-Todd scaling: fills block-diagonal W and W⁻¹ with the symmetric
/// scaling satisfying W z = W⁻¹ s, and returns lambda = W z.
Eigen::VectorXd nt_scaling(const Eigen::VectorXd& s, const Eigen::VectorXd& z,
                           const ConicStack& stack, Eigen::MatrixXd& W,
                           Eigen::MatrixXd& Winv) {
  const Eigen::Index total = stack.total_rows();
  W.setZero(total, total);
  Winv.setZero(total, total);
  Eigen::VectorXd lambda(total);
  for (Eigen::Index i = 0; i < stack.linear_rows; ++i) {
    const double w = std::sqrt(s(i) / z(i));
    W(i, i) = w;
    Winv(i, i) = 1.0 / w;
    lambda(i) = std::sqrt(s(i) * z(i));
  }
  Eigen::Index row = stack.linear_rows;
  for (const Eigen::Index dim : stack.soc_dims) {
    const auto sb = s.segment(row, dim);
    const auto zb = z.segment(row, dim);
    const double ds = sb(0) * sb(0) - sb.tail(dim - 1).squaredNorm();
    const double dz = zb(0) * zb(0) - zb.tail(dim - 1).squaredNorm();
    const Eigen::VectorXd sbar = sb / std::sqrt(ds);
    const Eigen::VectorXd zbar = zb / std::sqrt(dz);
    const double gamma = std::sqrt((1.0 + sbar.dot(zbar)) / 2.0);
    Eigen::VectorXd wbar(dim);
    wbar(0) = (sbar(0) + zbar(0)) / (2.0 * gamma);
    wbar.tail(dim - 1) =
        (sbar.tail(dim - 1) - zbar.tail(dim - 1)) / (2.0 * gamma);
    const double eta = std::pow(ds / dz, 0.25);

    Eigen::MatrixXd Wbar(dim, dim);
    Wbar(0, 0) = wbar(0);
    Wbar.row(0).tail(dim - 1) = wbar.tail(dim - 1).transpose();
    Wbar.col(0).tail(dim - 1) = wbar.tail(dim - 1);
    Wbar.bottomRightCorner(dim - 1, dim - 1) =
        Eigen::MatrixXd::Identity(dim - 1, dim - 1) +
        wbar.tail(dim - 1) * wbar.tail(dim - 1).transpose() / (1.0 + wbar(0));
    // wbar has unit hyperbolic norm, so the inverse is the reflection J·Wbar·J.
    Eigen::MatrixXd Wbar_inv = Wbar;
    Wbar_inv.row(0).tail(dim - 1) *= -1.0;
    Wbar_inv.col(0).tail(dim - 1) *= -1.0;

    W.block(row, row, dim, dim) = eta * Wbar;
    Winv.block(row, row, dim, dim) = Wbar_inv / eta;
    lambda.segment(row, dim) = W.block(row, row, dim, dim) * zb;
    row += dim;
  }
  return lambda;
}

}  // namespace

ConeSolution ConeSolver::solve(const ConeProgram& prog,
                               const Eigen::VectorXd* warm_start) {
  const auto t_start = std::chrono::steady_clock::now();
  prog.validate();
  const Eigen::Index n = prog.var_count();
  const ConicStack stack = stack_cones(prog);
  const Eigen::Index total = stack.total_rows();
  const double degree = static_cast<double>(stack.degree());

  ConeSolution sol;
  auto finish = [&](SolveStatus status) {
    sol.status = status;
    sol.solve_time = std::chrono::duration<double>(
                         std::chrono::steady_clock::now() - t_start)
                         .count();
    return sol;
  };

  sol.x = Eigen::VectorXd::Zero(n);
  if (warm_start != nullptr && warm_start->size() == n &&
      warm_start->allFinite()) {
    sol.x = *warm_start;
  }

  if (total == 0) {
    // Unconstrained quadratic: a single symmetric solve.
    Eigen::LDLT<Eigen::MatrixXd> ldlt(prog.Q);
    sol.x = ldlt.solve(-prog.q);
    sol.duals.resize(0);
    const double stat = (prog.Q * sol.x + prog.q).cwiseAbs().maxCoeff();
    sol.kkt_residuals = {stat, 0.0, 0.0, 0.0};
    if (ldlt.info() != Eigen::Success || !sol.x.allFinite() ||
        stat > options_.tolerance * (1.0 + prog.q.cwiseAbs().maxCoeff())) {
      return finish(SolveStatus::numerical_failure);
    }
    return finish(SolveStatus::optimal);
  }

  const Eigen::VectorXd e = cone_identity(stack);
  Eigen::VectorXd s = push_interior(stack.h - stack.G * sol.x, stack);
  Eigen::VectorXd z = e;

  const double h_scale = 1.0 + stack.h.cwiseAbs().maxCoeff();
  const double q_scale = 1.0 + prog.q.cwiseAbs().maxCoeff();
  const double g_scale =
      std::max(1.0, stack.G.cwiseAbs().maxCoeff());

  Eigen::MatrixXd W, Winv;
  for (int iter = 0;; ++iter) {
    sol.iterations = iter;
    sol.duals = z;
    const Eigen::VectorXd rx = prog.Q * sol.x + prog.q + stack.G.transpose() * z;
    const Eigen::VectorXd rz = stack.G * sol.x + s - stack.h;
    const double gap = s.dot(z);
    const double obj = 0.5 * sol.x.dot(prog.Q * sol.x) + prog.q.dot(sol.x);

    sol.kkt_residuals.stationarity = rx.cwiseAbs().maxCoeff();
    sol.kkt_residuals.primal = rz.cwiseAbs().maxCoeff();
    sol.kkt_residuals.dual = 0.0;
    sol.kkt_residuals.gap = gap;

    if (!sol.x.allFinite() || !s.allFinite() || !z.allFinite()) {
      return finish(SolveStatus::numerical_failure);
    }
    // Near-solved iterates are finished off by active-set polishing, which
    // pins the argmin far more tightly than the interior path itself can.
    const bool converged =
        sol.kkt_residuals.stationarity <= options_.tolerance * q_scale &&
        sol.kkt_residuals.primal <= options_.tolerance * h_scale &&
        gap <= options_.tolerance * (1.0 + std::abs(obj));
    const bool near_solved =
        sol.kkt_residuals.primal <= 1e-6 * h_scale &&
        gap <= 1e-6 * (1.0 + std::abs(obj));
    if (converged || (near_solved && iter >= options_.max_iterations)) {
      const PolishOutcome polished =
          polish_candidates(prog, stack, sol.x, s, z, q_scale, h_scale);
      if (polished.ok) {
        sol.x = polished.x;
        sol.duals = polished.duals;
        sol.kkt_residuals = polished.residuals;
        return finish(SolveStatus::optimal);
      }
      if (converged) {
        sol.kkt_residuals = verify_kkt(prog, sol.x, z);
        return finish(SolveStatus::optimal);
      }
    }

    // Dual certificate of primal infeasibility: z in the cone with G̃ᵀz ≈ 0
    // and h̃ᵀz < 0 proves no x satisfies the constraints.
    const double z_inf = z.cwiseAbs().maxCoeff();
    if (z_inf > 0.0) {
      const Eigen::VectorXd zn = z / z_inf;
      if ((stack.G.transpose() * zn).cwiseAbs().maxCoeff() <= 1e-8 * g_scale &&
          stack.h.dot(zn) < -1e-8) {
        sol.duals = z;
        return finish(SolveStatus::infeasible);
      }
    }
    if (iter >= options_.max_iterations) {
      sol.duals = z;
      return finish(SolveStatus::max_iter);
    }

    const Eigen::VectorXd lambda = nt_scaling(s, z, stack, W, Winv);
    const Eigen::MatrixXd M = Winv * stack.G;
    const Eigen::MatrixXd K = prog.Q + M.transpose() * M;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(K);
    if (ldlt.info() != Eigen::Success) {
      // The scaled system goes numerically indefinite once the barrier
      // parameter is tiny; if the iterate is essentially solved, polishing
      // still extracts the verified optimum.
      if (near_solved) {
        const PolishOutcome polished =
            polish_candidates(prog, stack, sol.x, s, z, q_scale, h_scale);
        if (polished.ok) {
          sol.x = polished.x;
          sol.duals = polished.duals;
          sol.kkt_residuals = polished.residuals;
          return finish(SolveStatus::optimal);
        }
      }
      return finish(SolveStatus::numerical_failure);
    }

    // Search direction for a given scaled complementarity right-hand side u,
    // from eliminating ds and dz out of the Newton system.
    const Eigen::VectorXd winv_rz = Winv * rz;
    auto direction = [&](const Eigen::VectorXd& u, Eigen::VectorXd& dx,
                         Eigen::VectorXd& ds, Eigen::VectorXd& dz) {
      dx = ldlt.solve(-rx + M.transpose() * (u - winv_rz));
      ds = -rz - stack.G * dx;
      dz = Winv * (Winv * (stack.G * dx + rz) - u);
    };

    Eigen::VectorXd dx_aff(n), ds_aff(total), dz_aff(total);
    direction(lambda, dx_aff, ds_aff, dz_aff);

    const double mu = gap / degree;
    const double alpha_aff =
        std::min(1.0, std::min(max_step(s, ds_aff, stack),
                               max_step(z, dz_aff, stack)));
    const double mu_aff = (s + alpha_aff * ds_aff).dot(z + alpha_aff * dz_aff) /
                          degree;
    const double sigma =
        std::clamp(std::pow(std::max(mu_aff, 0.0) / mu, 3.0), 0.0, 1.0);

    const Eigen::VectorXd correction =
        jordan_product(Winv * ds_aff, W * dz_aff, stack) - sigma * mu * e;
    const Eigen::VectorXd u =
        lambda + jordan_inverse_apply(lambda, correction, stack);

    Eigen::VectorXd dx(n), ds(total), dz(total);
    direction(u, dx, ds, dz);

    double alpha = std::min(
        1.0, options_.step_fraction *
                 std::min(max_step(s, ds, stack), max_step(z, dz, stack)));
    while (alpha > 1e-14 &&
           (!in_cone_interior(s + alpha * ds, stack) ||
            !in_cone_interior(z + alpha * dz, stack))) {
      alpha *= 0.9;
    }
    if (alpha <= 1e-14) {
      // Step collapse on the cone boundary; if the iterate is already close,
      // polishing can still deliver the verified optimum.
      if (near_solved) {
        const PolishOutcome polished =
            polish_candidates(prog, stack, sol.x, s, z, q_scale, h_scale);
        if (polished.ok) {
          sol.x = polished.x;
          sol.duals = polished.duals;
          sol.kkt_residuals = polished.residuals;
          return finish(SolveStatus::optimal);
        }
      }
      return finish(SolveStatus::numerical_failure);
    }

    sol.x += alpha * dx;
    s += alpha * ds;
    z += alpha * dz;
  }
}

}  // namespace sdfprox::socp
