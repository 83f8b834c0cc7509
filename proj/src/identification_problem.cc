#include "stableid/identification_problem.hpp"

#include <cmath>
#include <utility>

#include "stableid/errors.hpp"

namespace stableid {
namespace {

Vector vec(const Matrix& m) { return Eigen::Map<const Vector>(m.data(), m.size()); }

bool is_valid_skew(const Matrix& m) {
  return m.allFinite() &&
         (m.size() == 0 || (m + m.transpose()).cwiseAbs().maxCoeff() <= kRepresentationTol);
}

bool is_valid_spd(const Matrix& m) {
  if (!m.allFinite()) return false;
  if (m.size() == 0) return true;
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > kRepresentationTol) return false;
  return Eigen::LLT<Matrix>(m).info() == Eigen::Success;
}

}  // namespace

RiemannianIdentificationProblem::RiemannianIdentificationProblem(Trajectory traj,
                                                                 ConstraintSpec spec)
    : traj_(std::move(traj)), spec_(std::move(spec)) {
  traj_.validate();
  spec_.validate(traj_.n());
}

double RiemannianIdentificationProblem::cost(const Point& x) const {
  return objective_value(x, traj_);
}

Vector RiemannianIdentificationProblem::ineq_values(const Point& x) const {
  return constraint_values(x, spec_).inequalities();
}

Vector RiemannianIdentificationProblem::eq_values(const Point& x) const {
  return constraint_values(x, spec_).equality;
}

Linearization RiemannianIdentificationProblem::linearize(const Point& x) const {
  if (x.n() != traj_.n()) throw DimensionError("linearize: point has the wrong size");
  const TangentChart chart(x);
  const Matrix a = assemble_A(x);
  const ConstraintValues values = constraint_values(a, spec_);

  Linearization lin;
  lin.grad = chart.gradient_coords(lift_to_blocks(x, objective_gradient_A(a, traj_)));
  lin.ineq_values = values.inequalities();
  lin.eq_values = values.equality;

  const std::vector<Matrix> grads = constraint_gradients_A(a, spec_);
  const Eigen::Index mi = spec_.num_inequalities();
  const Eigen::Index me = spec_.num_equalities();
  lin.ineq_jacobian.resize(mi, chart.dim());
  lin.eq_jacobian.resize(me, chart.dim());
  for (Eigen::Index k = 0; k < mi + me; ++k) {
    const Vector row = chart.gradient_coords(lift_to_blocks(x, grads[static_cast<size_t>(k)]));
    if (k < mi) {
      lin.ineq_jacobian.row(k) = row.transpose();
    } else {
      lin.eq_jacobian.row(k - mi) = row.transpose();
    }
  }
  return lin;
}

ProductPoint RiemannianIdentificationProblem::retract(const Point& x, const Vector& coords) const {
  return stableid::retract(x, TangentChart(x).from_coords(coords));
}

bool RiemannianIdentificationProblem::on_manifold(const Point& x) const {
  return x.n() == traj_.n() && is_valid_skew(x.J.matrix()) && is_valid_spd(x.R.matrix()) &&
         is_valid_spd(x.Q.matrix());
}

double RiemannianIdentificationProblem::point_norm(const Point& x) const {
  return std::sqrt(x.J.matrix().squaredNorm() + x.R.matrix().squaredNorm() +
                   x.Q.matrix().squaredNorm());
}

EuclideanIdentificationProblem::EuclideanIdentificationProblem(Trajectory traj,
                                                               ConstraintSpec spec)
    : traj_(std::move(traj)), spec_(std::move(spec)) {
  traj_.validate();
  spec_.validate(traj_.n());
}

double EuclideanIdentificationProblem::cost(const Point& a) const {
  return objective_value(a, traj_);
}

Vector EuclideanIdentificationProblem::ineq_values(const Point& a) const {
  return constraint_values(a, spec_).inequalities();
}

Vector EuclideanIdentificationProblem::eq_values(const Point& a) const {
  return constraint_values(a, spec_).equality;
}

Linearization EuclideanIdentificationProblem::linearize(const Point& a) const {
  if (a.rows() != traj_.n() || a.cols() != traj_.n()) {
    throw DimensionError("linearize: A has the wrong size");
  }
  const ConstraintValues values = constraint_values(a, spec_);
  Linearization lin;
  lin.grad = vec(objective_gradient_A(a, traj_));
  lin.ineq_values = values.inequalities();
  lin.eq_values = values.equality;
  const std::vector<Matrix> grads = constraint_gradients_A(a, spec_);
  const Eigen::Index mi = spec_.num_inequalities();
  const Eigen::Index me = spec_.num_equalities();
  lin.ineq_jacobian.resize(mi, dim());
  lin.eq_jacobian.resize(me, dim());
  for (Eigen::Index k = 0; k < mi; ++k) {
    lin.ineq_jacobian.row(k) = vec(grads[static_cast<size_t>(k)]).transpose();
  }
  for (Eigen::Index k = 0; k < me; ++k) {
    lin.eq_jacobian.row(k) = vec(grads[static_cast<size_t>(mi + k)]).transpose();
  }
  return lin;
}

Matrix EuclideanIdentificationProblem::retract(const Point& a, const Vector& coords) const {
  if (coords.size() != dim()) throw DimensionError("retract: wrong coordinate count");
  return a + Eigen::Map<const Matrix>(coords.data(), a.rows(), a.cols());
}

bool EuclideanIdentificationProblem::on_manifold(const Point& a) const {
  return a.rows() == traj_.n() && a.cols() == traj_.n() && a.allFinite();
}

}  // namespace stableid
