#pragma once

// Strongly convex quadratic subproblems in tangent coordinates:
//
//   min 1/2 z'Hz + g'z   s.t.  A_ineq z + b_ineq <= 0,  A_eq z + b_eq = 0
//
// together with phase-I feasibility detection and the elastic
// reformulation.

#include <iosfwd>

#include "stableid/manifold.hpp"

namespace stableid {

struct QpProblem {
  Matrix H;
  Vector g;
  Matrix A_ineq;  // one row per inequality
  Vector b_ineq;
  Matrix A_eq;
  Vector b_eq;

  Eigen::Index dim() const { return g.size(); }
  Eigen::Index num_ineq() const { return b_ineq.size(); }
  Eigen::Index num_eq() const { return b_eq.size(); }

  // Shapes, finiteness, H symmetric within 1e-10 and positive definite.
  void validate() const;
};

enum class QpStatus { Solved, Infeasible, ElasticSolved };
const char* to_string(QpStatus s);

struct QpSolution {
  Vector z;
  Vector ineq_mult;
  Vector eq_mult;
  // Elastic only: v per inequality, (w+, w-) per equality.
  Vector slack_v;
  Vector slack_w_plus;
  Vector slack_w_minus;
  QpStatus status = QpStatus::Infeasible;
  double kkt_residual = 0.0;
  double phase1_violation = 0.0;  // minimal total violation found by phase I
  int iterations = 0;
};

struct QpOptions {
  double kkt_tol = 1e-8;  // scaled by max(1, largest multiplier)
  double feasibility_tol = 1e-9;
  int max_iter = 200;
  double ipm_tol = 1e-11;
  // On an infeasible subproblem, still run the interior-point method and
  // return its last iterate with status Infeasible (plain RSQO emulation).
  bool best_effort = false;
};

// Rows reproduce the constraint values at z = 0.
QpProblem build_subproblem(const Vector& grad, const Vector& ineq_values,
                           const Matrix& ineq_jacobian, const Vector& eq_values,
                           const Matrix& eq_jacobian, const Matrix& H);

struct FeasibilityResult {
  bool feasible = true;
  double violation = 0.0;  // minimal sum of max(0, row) + |eq row|
  Vector z;                // a minimizer of the total violation
};

// Phase-I LP: min sum(s) + sum(t) s.t. A z + b <= s, s >= 0, |A_eq z + b_eq| <= t.
FeasibilityResult detect_feasibility(const QpProblem& qp, const QpOptions& opts = {});

// Throws SolverFailure if the interior-point method does not reach kkt_tol on
// a feasible problem.
QpSolution solve_qp(const QpProblem& qp, const QpOptions& opts = {});

// max of stationarity norm, primal violation, negative multipliers,
// complementarity products, equality residual.
double qp_kkt_residual(const QpProblem& qp, const Vector& z, const Vector& ineq_mult,
                       const Vector& eq_mult);

struct ElasticQpProblem {
  QpProblem base;
  double rho_bar = 0.0;
};

ElasticQpProblem build_elastic(const QpProblem& qp, double rho_bar);

struct ElasticPoint {
  Vector z;
  Vector v;
  Vector w_plus;
  Vector w_minus;
};

// z = 0, v = -max(0, g), (w+, w-) = (-h, 0) for h > 0, (0, 0) for h = 0, (0, h) for h < 0.
ElasticPoint elastic_feasible_point(const Vector& ineq_values, const Vector& eq_values,
                                    Eigen::Index dim);

// Largest violation of the elastic rows at a point (0 means feasible).
double elastic_violation(const ElasticQpProblem& eqp, const ElasticPoint& p);

// Returns the multipliers of the softened rows as ineq_mult / eq_mult.
QpSolution solve_elastic(const ElasticQpProblem& eqp, const QpOptions& opts = {});

// KKT residual of the full elastic problem (slacks included).
double elastic_kkt_residual(const ElasticQpProblem& eqp, const QpSolution& sol);

// Plain-text dump: a `dim nineq neq` line, H rows, g, then `a... b` per row.
void write_qp_text(std::ostream& os, const QpProblem& qp);
QpProblem read_qp_text(std::istream& is);

}  // namespace stableid
