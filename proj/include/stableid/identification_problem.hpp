#pragma once

// Adapters that present an identification modeling to the SQP solver in
// tangent coordinates.  A problem type P provides
//
//   using Point = ...;
//   double cost(const Point&) const;
//   Vector ineq_values(const Point&) const;   // g(x), feasible iff <= 0
//   Vector eq_values(const Point&) const;     // h(x), feasible iff == 0
//   Linearization linearize(const Point&) const;
//   Point retract(const Point&, const Vector& coords) const;
//   bool on_manifold(const Point&) const;
//   Matrix system_matrix(const Point&) const;
//   double point_norm(const Point&) const;
//
// where every coordinate vector is expressed in a metric-orthonormal chart of
// the tangent space at the point, so Riemannian inner products become dot
// products.

#include "stableid/manifold.hpp"
#include "stableid/model.hpp"

namespace stableid {

struct Linearization {
  Vector grad;           // coordinates of grad f
  Vector ineq_values;    // g(x)
  Matrix ineq_jacobian;  // row k = coordinates of grad g_k
  Vector eq_values;      // h(x)
  Matrix eq_jacobian;
};

// RNLO (and UCRO, with an empty ConstraintSpec) over Skew(n) x SPD(n) x SPD(n).
class RiemannianIdentificationProblem {
 public:
  using Point = ProductPoint;

  RiemannianIdentificationProblem(Trajectory traj, ConstraintSpec spec);

  Eigen::Index n() const { return traj_.n(); }
  Eigen::Index dim() const { return manifold_dimension(traj_.n()); }
  const Trajectory& trajectory() const { return traj_; }
  const ConstraintSpec& constraints() const { return spec_; }

  double cost(const Point& x) const;
  Vector ineq_values(const Point& x) const;
  Vector eq_values(const Point& x) const;
  Linearization linearize(const Point& x) const;
  Point retract(const Point& x, const Vector& coords) const;
  bool on_manifold(const Point& x) const;
  Matrix system_matrix(const Point& x) const { return assemble_A(x); }
  double point_norm(const Point& x) const;

 private:
  Trajectory traj_;
  ConstraintSpec spec_;
};

// ENLO: the same objective and constraints with A itself as the variable,
// treated as the trivial manifold R^{n x n} (Frobenius metric, additive
// retraction, column-major vec coordinates).
class EuclideanIdentificationProblem {
 public:
  using Point = Matrix;

  EuclideanIdentificationProblem(Trajectory traj, ConstraintSpec spec);

  Eigen::Index n() const { return traj_.n(); }
  Eigen::Index dim() const { return traj_.n() * traj_.n(); }
  const Trajectory& trajectory() const { return traj_; }
  const ConstraintSpec& constraints() const { return spec_; }

  double cost(const Point& a) const;
  Vector ineq_values(const Point& a) const;
  Vector eq_values(const Point& a) const;
  Linearization linearize(const Point& a) const;
  Point retract(const Point& a, const Vector& coords) const;
  bool on_manifold(const Point& a) const;
  Matrix system_matrix(const Point& a) const { return a; }
  double point_norm(const Point& a) const { return a.norm(); }

 private:
  Trajectory traj_;
  ConstraintSpec spec_;
};

}  // namespace stableid
