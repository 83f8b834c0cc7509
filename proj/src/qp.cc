#include "stableid/qp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>

#include "stableid/errors.hpp"
#include "stableid/ipm.hpp"

namespace stableid {
namespace {

IpmOptions ipm_options(const QpOptions& opts) {
  IpmOptions o;
  o.max_iter = opts.max_iter;
  o.tol = opts.ipm_tol;
  return o;
}

// kkt_tol is relative to the multiplier size.
bool kkt_acceptable(double residual, const IpmResult& res, const QpOptions& opts) {
  double scale = 1.0;
  if (res.lambda.size()) scale = std::max(scale, res.lambda.cwiseAbs().maxCoeff());
  if (res.mu.size()) scale = std::max(scale, res.mu.cwiseAbs().maxCoeff());
  return residual <= opts.kkt_tol * scale;
}

std::string failure_message(const char* who, double residual, int iterations) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%s: interior-point method stopped at KKT residual %.3e after %d iterations",
                who, residual, iterations);
  return buf;
}

IpmProblem to_ipm(const QpProblem& qp) {
  return {qp.H, qp.g, qp.A_ineq, qp.b_ineq, qp.A_eq, qp.b_eq};
}

// Variables (z, v, w+, w-).
IpmProblem elastic_to_ipm(const ElasticQpProblem& eqp) {
  const QpProblem& b = eqp.base;
  const Eigen::Index d = b.dim();
  const Eigen::Index mi = b.num_ineq();
  const Eigen::Index me = b.num_eq();
  const Eigen::Index nx = d + mi + 2 * me;

  IpmProblem p;
  p.P = Matrix::Zero(nx, nx);
  p.P.topLeftCorner(d, d) = b.H;
  p.q = Vector::Constant(nx, -eqp.rho_bar);
  p.q.head(d) = b.g;

  const Eigen::Index rows = 2 * mi + 2 * me;
  p.G = Matrix::Zero(rows, nx);
  p.h = Vector::Zero(rows);
  p.G.block(0, 0, mi, d) = b.A_ineq;
  p.G.block(0, d, mi, mi).setIdentity();
  p.h.head(mi) = b.b_ineq;
  p.G.block(mi, d, mi, mi).setIdentity();
  p.G.block(2 * mi, d + mi, 2 * me, 2 * me).setIdentity();

  p.E = Matrix::Zero(me, nx);
  p.E.leftCols(d) = b.A_eq;
  p.E.block(0, d + mi, me, me).setIdentity();
  p.E.block(0, d + mi + me, me, me) = -Matrix::Identity(me, me);
  p.e = b.b_eq;
  return p;
}

double max_or_zero(const Vector& v) { return v.size() == 0 ? 0.0 : v.maxCoeff(); }

}  // namespace

const char* to_string(QpStatus s) {
  switch (s) {
    case QpStatus::Solved:
      return "solved";
    case QpStatus::Infeasible:
      return "infeasible";
    case QpStatus::ElasticSolved:
      return "elastic";
  }
  return "unknown";
}

void QpProblem::validate() const {
  const Eigen::Index d = dim();
  if (H.rows() != d || H.cols() != d) throw DimensionError("qp: H must be dim x dim");
  if (A_ineq.rows() != num_ineq() || (num_ineq() > 0 && A_ineq.cols() != d)) {
    throw DimensionError("qp: inequality block has the wrong shape");
  }
  if (A_eq.rows() != num_eq() || (num_eq() > 0 && A_eq.cols() != d)) {
    throw DimensionError("qp: equality block has the wrong shape");
  }
  if (!H.allFinite() || !g.allFinite() || !A_ineq.allFinite() || !b_ineq.allFinite() ||
      !A_eq.allFinite() || !b_eq.allFinite()) {
    throw NumericError("qp: non-finite data");
  }
  if (d > 0 && (H - H.transpose()).cwiseAbs().maxCoeff() > 1e-10) {
    throw InvariantViolation("qp: H is not symmetric");
  }
  if (d > 0 && Eigen::LLT<Matrix>(H).info() != Eigen::Success) {
    throw InvariantViolation("qp: H is not positive definite");
  }
}

QpProblem build_subproblem(const Vector& grad, const Vector& ineq_values,
                           const Matrix& ineq_jacobian, const Vector& eq_values,
                           const Matrix& eq_jacobian, const Matrix& H) {
  const Eigen::Index d = grad.size();
  if (H.rows() != d || H.cols() != d || ineq_jacobian.rows() != ineq_values.size() ||
      eq_jacobian.rows() != eq_values.size() ||
      (ineq_values.size() > 0 && ineq_jacobian.cols() != d) ||
      (eq_values.size() > 0 && eq_jacobian.cols() != d)) {
    throw DimensionError("build_subproblem: coordinate dimensions disagree");
  }
  QpProblem qp;
  qp.H = H;
  qp.g = grad;
  qp.A_ineq = ineq_jacobian;
  qp.b_ineq = ineq_values;
  qp.A_eq = eq_jacobian;
  qp.b_eq = eq_values;
  if (qp.A_ineq.size() == 0) qp.A_ineq.resize(ineq_values.size(), d);
  if (qp.A_eq.size() == 0) qp.A_eq.resize(eq_values.size(), d);
  return qp;
}

double qp_kkt_residual(const QpProblem& qp, const Vector& z, const Vector& ineq_mult,
                       const Vector& eq_mult) {
  return ipm_kkt_residual(to_ipm(qp), z, ineq_mult, eq_mult);
}

FeasibilityResult detect_feasibility(const QpProblem& qp, const QpOptions& opts) {
  const Eigen::Index d = qp.dim();
  const Eigen::Index mi = qp.num_ineq();
  const Eigen::Index me = qp.num_eq();
  FeasibilityResult out;
  out.z = Vector::Zero(d);
  auto violation_at = [&](const Vector& z) {
    double v = 0.0;
    if (mi > 0) v += (qp.A_ineq * z + qp.b_ineq).cwiseMax(0.0).sum();
    if (me > 0) v += (qp.A_eq * z + qp.b_eq).cwiseAbs().sum();
    return v;
  };
  if (mi + me == 0) return out;

  // Work in the row space of the stacked constraint matrix so the LP has a
  // full-column-rank coefficient block.
  Matrix C(mi + me, d);
  C << qp.A_ineq, qp.A_eq;
  Eigen::BDCSVD<Matrix> svd(C, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& sv = svd.singularValues();
  Eigen::Index r = 0;
  const double smax = sv.size() ? sv(0) : 0.0;
  while (r < sv.size() && sv(r) > 1e-10 * std::max(1.0, smax)) ++r;

  Vector z = Vector::Zero(d);
  if (r > 0) {
    const Matrix M = svd.matrixU().leftCols(r) * sv.head(r).asDiagonal();
    const Eigen::Index nx = r + mi + me;
    IpmProblem lp;
    lp.P = Matrix::Zero(nx, nx);
    lp.q = Vector::Zero(nx);
    lp.q.tail(mi + me).setOnes();
    const Eigen::Index rows = 2 * mi + 2 * me;
    lp.G = Matrix::Zero(rows, nx);
    lp.h = Vector::Zero(rows);
    lp.G.block(0, 0, mi, r) = M.topRows(mi);
    lp.G.block(0, r, mi, mi) = -Matrix::Identity(mi, mi);
    lp.h.head(mi) = qp.b_ineq;
    lp.G.block(mi, r, mi, mi) = -Matrix::Identity(mi, mi);
    lp.G.block(2 * mi, 0, me, r) = M.bottomRows(me);
    lp.G.block(2 * mi, r + mi, me, me) = -Matrix::Identity(me, me);
    lp.h.segment(2 * mi, me) = qp.b_eq;
    lp.G.block(2 * mi + me, 0, me, r) = -M.bottomRows(me);
    lp.G.block(2 * mi + me, r + mi, me, me) = -Matrix::Identity(me, me);
    lp.h.tail(me) = -qp.b_eq;
    lp.E.resize(0, nx);
    lp.e.resize(0);
    IpmOptions o = ipm_options(opts);
    o.tol = std::min(o.tol, 1e-12);
    const IpmResult res = solve_ipm(lp, o);
    z = svd.matrixV().leftCols(r) * res.x.head(r);
  }
  out.z = z;
  out.violation = violation_at(z);
  out.feasible = out.violation <= opts.feasibility_tol;
  return out;
}

QpSolution solve_qp(const QpProblem& qp, const QpOptions& opts) {
  qp.validate();
  QpSolution sol;
  const IpmProblem prob = to_ipm(qp);
  const FeasibilityResult feas = detect_feasibility(qp, opts);
  sol.phase1_violation = feas.violation;
  if (!feas.feasible && !opts.best_effort) {
    sol.status = QpStatus::Infeasible;
    sol.z = feas.z;
    sol.ineq_mult = Vector::Zero(qp.num_ineq());
    sol.eq_mult = Vector::Zero(qp.num_eq());
    sol.kkt_residual = std::numeric_limits<double>::infinity();
    return sol;
  }
  const IpmResult res = solve_ipm(prob, ipm_options(opts));
  sol.z = res.x;
  sol.ineq_mult = res.lambda;
  sol.eq_mult = res.mu;
  sol.iterations = res.iterations;
  sol.kkt_residual = ipm_kkt_residual(prob, res.x, res.lambda, res.mu);
  if (!feas.feasible || res.status == IpmStatus::Diverged ||
      res.status == IpmStatus::EqualityInconsistent) {
    sol.status = QpStatus::Infeasible;
    return sol;
  }
  if (!kkt_acceptable(sol.kkt_residual, res, opts)) {
    throw SolverFailure(failure_message("solve_qp", sol.kkt_residual, res.iterations));
  }
  sol.status = QpStatus::Solved;
  return sol;
}

ElasticQpProblem build_elastic(const QpProblem& qp, double rho_bar) {
  if (!(rho_bar > 0.0)) throw InvariantViolation("build_elastic: rho_bar must be positive");
  return {qp, rho_bar};
}

ElasticPoint elastic_feasible_point(const Vector& ineq_values, const Vector& eq_values,
                                    Eigen::Index dim) {
  ElasticPoint p;
  p.z = Vector::Zero(dim);
  p.v = -ineq_values.cwiseMax(0.0);
  p.w_plus = Vector::Zero(eq_values.size());
  p.w_minus = Vector::Zero(eq_values.size());
  for (Eigen::Index i = 0; i < eq_values.size(); ++i) {
    if (eq_values(i) > 0.0) {
      p.w_plus(i) = -eq_values(i);
    } else if (eq_values(i) < 0.0) {
      p.w_minus(i) = eq_values(i);
    }
  }
  return p;
}

double elastic_violation(const ElasticQpProblem& eqp, const ElasticPoint& p) {
  const QpProblem& b = eqp.base;
  double v = 0.0;
  if (b.num_ineq() > 0) {
    v = std::max(v, max_or_zero(b.A_ineq * p.z + b.b_ineq + p.v));
    v = std::max(v, max_or_zero(p.v));
  }
  if (b.num_eq() > 0) {
    v = std::max(v, max_or_zero(p.w_plus));
    v = std::max(v, max_or_zero(p.w_minus));
    v = std::max(v, (b.A_eq * p.z + b.b_eq + p.w_plus - p.w_minus).cwiseAbs().maxCoeff());
  }
  return v;
}

QpSolution solve_elastic(const ElasticQpProblem& eqp, const QpOptions& opts) {
  eqp.base.validate();
  if (!(eqp.rho_bar > 0.0)) throw InvariantViolation("solve_elastic: rho_bar must be positive");
  const QpProblem& b = eqp.base;
  const Eigen::Index d = b.dim();
  const Eigen::Index mi = b.num_ineq();
  const Eigen::Index me = b.num_eq();

  const IpmProblem prob = elastic_to_ipm(eqp);
  const ElasticPoint start = elastic_feasible_point(b.b_ineq, b.b_eq, d);
  Vector x0(prob.dim());
  x0 << start.z, start.v, start.w_plus, start.w_minus;
  // Multipliers that make the stationarity rows of the slacks exact.
  Vector lam0(prob.num_ineq());
  lam0.head(2 * mi).setConstant(0.5 * eqp.rho_bar);
  lam0.tail(2 * me).setConstant(eqp.rho_bar);
  const IpmResult res = solve_ipm(prob, ipm_options(opts), &x0, &lam0);

  QpSolution sol;
  sol.status = QpStatus::ElasticSolved;
  sol.iterations = res.iterations;
  sol.z = res.x.head(d);
  sol.slack_v = res.x.segment(d, mi);
  sol.slack_w_plus = res.x.segment(d + mi, me);
  sol.slack_w_minus = res.x.tail(me);
  sol.ineq_mult = res.lambda.head(mi);
  sol.eq_mult = res.mu;
  sol.kkt_residual = ipm_kkt_residual(prob, res.x, res.lambda, res.mu);
  if (res.status == IpmStatus::Diverged || res.status == IpmStatus::EqualityInconsistent ||
      !kkt_acceptable(sol.kkt_residual, res, opts)) {
    throw SolverFailure(failure_message("solve_elastic", sol.kkt_residual, res.iterations));
  }
  return sol;
}

double elastic_kkt_residual(const ElasticQpProblem& eqp, const QpSolution& sol) {
  const IpmProblem prob = elastic_to_ipm(eqp);
  const Eigen::Index mi = eqp.base.num_ineq();
  const Eigen::Index me = eqp.base.num_eq();
  Vector x(prob.dim());
  x << sol.z, sol.slack_v, sol.slack_w_plus, sol.slack_w_minus;
  // Multipliers of the bound rows follow from stationarity in the slacks.
  Vector lambda(prob.num_ineq());
  lambda.head(mi) = sol.ineq_mult;
  lambda.segment(mi, mi) = Vector::Constant(mi, eqp.rho_bar) - sol.ineq_mult;
  lambda.segment(2 * mi, me) = Vector::Constant(me, eqp.rho_bar) - sol.eq_mult;
  lambda.tail(me) = Vector::Constant(me, eqp.rho_bar) + sol.eq_mult;
  return ipm_kkt_residual(prob, x, lambda, sol.eq_mult);
}

}  // namespace stableid
