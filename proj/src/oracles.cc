#include "stableid/oracles.hpp"

#include <limits>

#include "stableid/errors.hpp"

namespace stableid {

OracleSolution brute_force_qp(const QpProblem& qp, double tol) {
  const Eigen::Index d = qp.dim();
  const Eigen::Index mi = qp.num_ineq();
  const Eigen::Index me = qp.num_eq();
  if (mi > 20) throw DimensionError("brute_force_qp: too many inequality rows");

  OracleSolution best;
  double best_obj = std::numeric_limits<double>::infinity();
  for (unsigned mask = 0; mask < (1u << mi); ++mask) {
    std::vector<Eigen::Index> active;
    for (Eigen::Index i = 0; i < mi; ++i) {
      if (mask & (1u << i)) active.push_back(i);
    }
    const auto na = static_cast<Eigen::Index>(active.size());
    const Eigen::Index k = d + na + me;
    Matrix K = Matrix::Zero(k, k);
    Vector rhs = Vector::Zero(k);
    K.topLeftCorner(d, d) = qp.H;
    rhs.head(d) = -qp.g;
    for (Eigen::Index a = 0; a < na; ++a) {
      K.block(0, d + a, d, 1) = qp.A_ineq.row(active[a]).transpose();
      K.block(d + a, 0, 1, d) = qp.A_ineq.row(active[a]);
      rhs(d + a) = -qp.b_ineq(active[a]);
    }
    if (me > 0) {
      K.block(0, d + na, d, me) = qp.A_eq.transpose();
      K.block(d + na, 0, me, d) = qp.A_eq;
      rhs.tail(me) = -qp.b_eq;
    }
    ++best.active_sets_tried;
    Eigen::FullPivLU<Matrix> lu(K);
    if (!lu.isInvertible()) continue;
    const Vector sol = lu.solve(rhs);
    const Vector z = sol.head(d);
    Vector lambda = Vector::Zero(mi);
    for (Eigen::Index a = 0; a < na; ++a) lambda(active[a]) = sol(d + a);
    if (mi > 0 && ((qp.A_ineq * z + qp.b_ineq).maxCoeff() > tol || lambda.minCoeff() < -tol)) {
      continue;
    }
    const double obj = 0.5 * z.dot(qp.H * z) + qp.g.dot(z);
    if (obj < best_obj) {
      best_obj = obj;
      best.feasible = true;
      best.z = z;
      best.ineq_mult = lambda;
      best.eq_mult = sol.tail(me);
    }
  }
  return best;
}

}  // namespace stableid
