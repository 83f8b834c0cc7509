#pragma once

// Independent oracles shared by the unit tests and the acceptance binary.
// Nothing here calls the chart or gradient code under test.

#include <cmath>
#include <functional>
#include <random>

#include "stableid/manifold.hpp"
#include "stableid/model.hpp"
#include "stableid/qp.hpp"

namespace stableid::testing {

inline Matrix gaussian(Eigen::Index r, Eigen::Index c, Rng& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  Matrix m(r, c);
  for (Eigen::Index j = 0; j < c; ++j)
    for (Eigen::Index i = 0; i < r; ++i) m(i, j) = nd(rng);
  return m;
}

inline Vector gaussian_vec(Eigen::Index n, Rng& rng) { return gaussian(n, 1, rng); }

inline Matrix random_spd(Eigen::Index n, Rng& rng, double ridge = 0.5) {
  const Matrix g = gaussian(n, n, rng);
  return g * g.transpose() / static_cast<double>(n) + ridge * Matrix::Identity(n, n);
}

inline ProductPoint random_point(Eigen::Index n, Rng& rng) {
  const Matrix g = gaussian(n, n, rng);
  return {SkewMatrix(0.5 * (g - g.transpose())), SpdMatrix(random_spd(n, rng)),
          SpdMatrix(random_spd(n, rng))};
}

inline TangentVector random_tangent(Eigen::Index n, Rng& rng) {
  const Matrix a = gaussian(n, n, rng), b = gaussian(n, n, rng), c = gaussian(n, n, rng);
  return {SkewMatrix(0.5 * (a - a.transpose())), SymMatrix(0.5 * (b + b.transpose())),
          SymMatrix(0.5 * (c + c.transpose()))};
}

// Metric written out with explicit inverses.
inline double metric_oracle(const ProductPoint& x, const TangentVector& u,
                            const TangentVector& v) {
  const Matrix ri = x.R.matrix().inverse();
  const Matrix qi = x.Q.matrix().inverse();
  return (u.xi_J.matrix().transpose() * v.xi_J.matrix()).trace() +
         (ri * u.xi_R.matrix() * ri * v.xi_R.matrix()).trace() +
         (qi * u.xi_Q.matrix() * qi * v.xi_Q.matrix()).trace();
}

// Retraction written from its defining formula.
inline ProductPoint retract_oracle(const ProductPoint& x, const TangentVector& v, double t) {
  auto spd = [t](const Matrix& p, const Matrix& xi) {
    const Matrix s = t * xi;
    Matrix r = p + s + 0.5 * s * p.inverse() * s;
    return SpdMatrix(0.5 * (r + r.transpose()));
  };
  return {SkewMatrix(x.J.matrix() + t * v.xi_J.matrix()), spd(x.R.matrix(), v.xi_R.matrix()),
          spd(x.Q.matrix(), v.xi_Q.matrix())};
}

// Per-column sum of squared one-step errors divided by the stored state count.
inline double objective_oracle(const Matrix& a, const Trajectory& traj) {
  double s = 0.0;
  const Matrix step = Matrix::Identity(a.rows(), a.cols()) + traj.dt * a;
  for (Eigen::Index k = 0; k + 1 < traj.N(); ++k) {
    s += (traj.states.col(k + 1) - step * traj.states.col(k)).squaredNorm();
  }
  return s / static_cast<double>(traj.N());
}

// Central difference of t -> f(R_x(t v)) at 0.
inline double central_difference(const std::function<double(const ProductPoint&)>& f,
                                 const ProductPoint& x, const TangentVector& v, double h) {
  return (f(retract_oracle(x, v, h)) - f(retract_oracle(x, v, -h))) / (2.0 * h);
}

inline Trajectory random_trajectory(Eigen::Index n, Eigen::Index N, double dt, Rng& rng) {
  Trajectory t;
  t.dt = dt;
  t.states = gaussian(n, N, rng);
  return t;
}

// Euler-consistent data x_{k+1} = (I + dt A) x_k.
inline Trajectory euler_trajectory(const Matrix& a, const Vector& x0, double dt, Eigen::Index N) {
  Trajectory t;
  t.dt = dt;
  t.states.resize(a.rows(), N);
  t.states.col(0) = x0;
  const Matrix step = Matrix::Identity(a.rows(), a.cols()) + dt * a;
  for (Eigen::Index k = 1; k < N; ++k) t.states.col(k) = step * t.states.col(k - 1);
  return t;
}

// Strongly convex QP whose constraints are satisfied at a hidden point.
inline QpProblem random_feasible_qp(Eigen::Index d, Eigen::Index mi, Eigen::Index me, Rng& rng) {
  QpProblem qp;
  const Matrix m = gaussian(d, d, rng);
  qp.H = m * m.transpose() + 0.5 * Matrix::Identity(d, d);
  qp.g = 2.0 * gaussian_vec(d, rng);
  const Vector zbar = gaussian_vec(d, rng);
  qp.A_ineq = gaussian(mi, d, rng);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  qp.b_ineq.resize(mi);
  for (Eigen::Index i = 0; i < mi; ++i) qp.b_ineq(i) = -qp.A_ineq.row(i).dot(zbar) - u(rng);
  qp.A_eq = gaussian(me, d, rng);
  qp.b_eq = -qp.A_eq * zbar;
  return qp;
}

// Noiseless Euler data from a lightly damped rotation whose Euler map has
// unit modulus, so the data are persistently exciting and stay bounded.
struct NoiselessInstance {
  ProductPoint truth;
  Trajectory trajectory;
};

inline NoiselessInstance noiseless_rotation_instance() {
  Matrix j = Matrix::Zero(2, 2);
  j(0, 1) = 1.6;
  j(1, 0) = -1.6;
  const ProductPoint truth{SkewMatrix(j), SpdMatrix(0.8 * Matrix::Identity(2, 2)),
                           SpdMatrix::identity(2)};
  Vector x0(2);
  x0 << 1.0, 0.0;
  return {truth, euler_trajectory(assemble_A(truth), x0, 0.5, 40)};
}

inline double rel_err(double a, double b) {
  return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace stableid::testing
