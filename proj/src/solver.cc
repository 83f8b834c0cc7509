#include "stableid/solver.hpp"

#include <algorithm>
#include <cmath>

namespace stableid {

void SolverConfig::validate() const {
  if (!(rho_bar > 0.0)) throw InvariantViolation("solver config: rho_bar must be positive");
  if (!(rho_init > 0.0)) throw InvariantViolation("solver config: rho_init must be positive");
  if (!(eps_pen > 0.0)) throw InvariantViolation("solver config: eps_pen must be positive");
  if (!(beta > 0.0 && beta < 1.0)) throw InvariantViolation("solver config: beta must lie in (0, 1)");
  if (!(sigma > 0.0 && sigma < 1.0)) {
    throw InvariantViolation("solver config: sigma must lie in (0, 1)");
  }
  if (max_iter < 0) throw InvariantViolation("solver config: max_iter must be nonnegative");
  if (max_ls_trials < 0) throw InvariantViolation("solver config: max_ls_trials must be nonnegative");
}

double multiplier_bound(const Vector& ineq_mult, const Vector& eq_mult) {
  double lam = 0.0;
  bool any = false;
  if (ineq_mult.size() > 0) {
    lam = ineq_mult.maxCoeff();
    any = true;
  }
  if (eq_mult.size() > 0) {
    const double m = eq_mult.cwiseAbs().maxCoeff();
    lam = any ? std::max(lam, m) : m;
  }
  return lam;
}

double penalty_update(double rho_prev, const Vector& ineq_mult, const Vector& eq_mult,
                      double eps) {
  const double lam = multiplier_bound(ineq_mult, eq_mult);
  return rho_prev >= lam ? rho_prev : lam + eps;
}

Matrix metric_operator(HChoice choice, Eigen::Index dim) {
  switch (choice) {
    case HChoice::Identity:
      return Matrix::Identity(dim, dim);
  }
  throw InvariantViolation("metric_operator: unknown choice");
}

Direction compute_direction(const QpProblem& qp, const SolverConfig& config) {
  QpOptions opts = config.qp;
  opts.best_effort = !config.elastic_enabled;
  Direction dir;
  QpSolution sol = solve_qp(qp, opts);
  if (sol.status == QpStatus::Infeasible) {
    dir.phase1_violation = sol.phase1_violation;
    if (config.elastic_enabled) {
      sol = solve_elastic(build_elastic(qp, config.rho_bar), opts);
      dir.elastic = true;
      dir.slack_norm = std::sqrt(sol.slack_v.squaredNorm() + sol.slack_w_plus.squaredNorm() +
                                 sol.slack_w_minus.squaredNorm());
    }
  }
  dir.status = sol.status;
  dir.z = std::move(sol.z);
  dir.ineq_mult = std::move(sol.ineq_mult);
  dir.eq_mult = std::move(sol.eq_mult);
  dir.qp_kkt = sol.kkt_residual;
  return dir;
}

double l1_violation(const Vector& ineq_values, const Vector& eq_values) {
  return ineq_values.cwiseMax(0.0).sum() + eq_values.cwiseAbs().sum();
}

double kkt_residual(const Linearization& lin, const Vector& ineq_mult, const Vector& eq_mult) {
  if (ineq_mult.size() != lin.ineq_values.size() || eq_mult.size() != lin.eq_values.size()) {
    throw DimensionError("kkt_residual: multipliers do not match the constraint list");
  }
  Vector grad_l = lin.grad;
  if (ineq_mult.size() > 0) grad_l.noalias() += lin.ineq_jacobian.transpose() * ineq_mult;
  if (eq_mult.size() > 0) grad_l.noalias() += lin.eq_jacobian.transpose() * eq_mult;
  const double cstr = lin.ineq_values.cwiseMax(0.0).squaredNorm() + lin.eq_values.squaredNorm();
  const double mult = (-ineq_mult).cwiseMax(0.0).squaredNorm();
  const double compl_err = ineq_mult.cwiseProduct(lin.ineq_values).squaredNorm();
  return std::sqrt(grad_l.squaredNorm() + cstr + mult + compl_err);
}

}  // namespace stableid
