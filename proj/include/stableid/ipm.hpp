#pragma once

// Dense primal-dual interior-point method (Mehrotra predictor-corrector) for
//
//   min  1/2 x'Px + q'x   s.t.  Gx + h <= 0,  Ex + e = 0
//
// with P positive semidefinite and P + G'WG positive definite on the null
// space of E for every positive diagonal W.  Equalities are eliminated up
// front through a QR factorization of E'.

#include "stableid/manifold.hpp"

namespace stableid {

struct IpmProblem {
  Matrix P;
  Vector q;
  Matrix G;
  Vector h;
  Matrix E;
  Vector e;

  Eigen::Index dim() const { return q.size(); }
  Eigen::Index num_ineq() const { return h.size(); }
  Eigen::Index num_eq() const { return e.size(); }
};

enum class IpmStatus {
  Converged,
  Diverged,             // multipliers blew up; the inequality system is (numerically) empty
  EqualityInconsistent, // Ex + e = 0 has no solution
  NotConverged,         // iteration cap or stall; returns the most accurate iterate
};

struct IpmOptions {
  int max_iter = 200;
  double tol = 1e-11;             // residual tolerance, scaled by the data magnitude
  double divergence_bound = 1e10; // |lambda| beyond this signals an empty region
};

struct IpmResult {
  IpmStatus status = IpmStatus::NotConverged;
  Vector x;
  Vector lambda;  // inequality multipliers, > 0
  Vector mu;      // equality multipliers
  int iterations = 0;
};

// Starts from a least-squares point, or from warm_x when given.  Initial
// multipliers are all ones unless warm_lambda (positive) is given.
IpmResult solve_ipm(const IpmProblem& prob, const IpmOptions& opts = {},
                    const Vector* warm_x = nullptr, const Vector* warm_lambda = nullptr);

// max of ||Px + q + G'l + E'm||_2, max(0, Gx + h), max(0, -l), |l (Gx + h)|
// and |Ex + e|.
double ipm_kkt_residual(const IpmProblem& prob, const Vector& x, const Vector& lambda,
                        const Vector& mu);

}  // namespace stableid
