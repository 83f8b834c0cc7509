#pragma once

// Brute-force reference solvers.  Exponential in the number of constraints;
// meant for tiny instances in tests and diagnostics only.

#include "stableid/qp.hpp"

namespace stableid {

struct OracleSolution {
  bool feasible = false;
  Vector z;
  Vector ineq_mult;
  Vector eq_mult;
  int active_sets_tried = 0;
};

// Enumerates every subset of the inequality rows as the active set, solves
// the equality-constrained KKT system and keeps the primal- and dual-feasible
// candidate with the lowest objective.
OracleSolution brute_force_qp(const QpProblem& qp, double tol = 1e-9);

}  // namespace stableid
