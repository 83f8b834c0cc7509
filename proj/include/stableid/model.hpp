#pragma once

// The identification problem: data generation from a stable ground truth,
// the Euler one-step prediction error, its gradients, entrywise prior
// knowledge on A, and evaluation metrics.

#include <complex>
#include <random>
#include <vector>

#include "stableid/manifold.hpp"

namespace stableid {

using Rng = std::mt19937_64;

// States x_0 .. x_{N-1} stored column-wise.  X0() and X1() are the shifted
// views (x_0 .. x_{N-2}) and (x_1 .. x_{N-1}), so both views always come
// from one sequence.
struct Trajectory {
  Matrix states;
  double dt = 0.0;

  Eigen::Index n() const { return states.rows(); }
  Eigen::Index N() const { return states.cols(); }
  auto X0() const { return states.leftCols(states.cols() - 1); }
  auto X1() const { return states.rightCols(states.cols() - 1); }

  // Throws unless dt > 0, N >= 2 and all entries are finite.
  void validate() const;
};

// l <= A_ij <= u.
struct BoxBound {
  int i = 0;
  int j = 0;
  double lower = 0.0;
  double upper = 0.0;
};

// l <= A_ij <= u and |A_ij - center| >= half_gap.
struct TwoBoxBound {
  int i = 0;
  int j = 0;
  double lower = 0.0;
  double upper = 0.0;
  double center = 0.0;
  double half_gap = 0.0;
};

// A_ij == value.
struct EqualityTarget {
  int i = 0;
  int j = 0;
  double value = 0.0;
};

// Indices are zero-based.
struct ConstraintSpec {
  std::vector<BoxBound> one_box;
  std::vector<TwoBoxBound> two_box;
  std::vector<EqualityTarget> equality;

  // Inequalities are enumerated as [lower rows | upper rows | gap rows]; the
  // lower and upper blocks run over one_box followed by two_box.
  Eigen::Index num_inequalities() const;
  Eigen::Index num_equalities() const { return static_cast<Eigen::Index>(equality.size()); }
  bool empty() const { return one_box.empty() && two_box.empty() && equality.empty(); }

  // Index range, disjointness, l < u, half_gap > 0, [c-d, c+d] inside (l, u).
  void validate(Eigen::Index n) const;
};

struct ConstraintValues {
  Vector lower;     // -A_ij + l_ij
  Vector upper;     // A_ij - u_ij
  Vector two_box;   // -(A_ij - c_ij)^2 + d_ij^2
  Vector equality;  // A_ij - b_ij

  Vector inequalities() const;
};

// Modelings compared by the experiment harness.
enum class Modeling { RNLO, ENLO, UCRO };

Matrix assemble_A(const ProductPoint& x);

Trajectory simulate_true(const Matrix& a, const Vector& x0, double dt, Eigen::Index num_samples);
// snr_db = +infinity leaves the trajectory unchanged.  Noise variance is the
// mean squared entry over the whole trajectory divided by 10^(snr_db / 10).
Trajectory add_noise(const Trajectory& traj, double snr_db, Rng& rng);
// Divides every entry by the Euclidean norm of the first state.
Trajectory scale_trajectory(const Trajectory& traj);

// f = (1/N) || X1 - (I + dt A) X0 ||_F^2 with N = traj.N().
double objective_value(const Matrix& a, const Trajectory& traj);
double objective_value(const ProductPoint& x, const Trajectory& traj);

// Euclidean gradient of the objective with respect to A.
Matrix objective_gradient_A(const Matrix& a, const Trajectory& traj);

// Chain rule from a gradient with respect to A onto the (J, R, Q) blocks:
// G_J = G_A Q^T, G_R = -G_J, G_Q = (J - R)^T G_A.
EuclideanGradient lift_to_blocks(const ProductPoint& x, const Matrix& grad_a);

EuclideanGradient objective_euclidean_gradient(const ProductPoint& x, const Trajectory& traj);
TangentVector objective_gradient(const ProductPoint& x, const Trajectory& traj);

ConstraintValues constraint_values(const Matrix& a, const ConstraintSpec& spec);
ConstraintValues constraint_values(const ProductPoint& x, const ConstraintSpec& spec);

// Gradients with respect to A of every constraint in enumeration order
// (inequalities first, then equalities).
std::vector<Matrix> constraint_gradients_A(const Matrix& a, const ConstraintSpec& spec);
std::vector<TangentVector> constraint_gradients(const ProductPoint& x, const ConstraintSpec& spec);

// max{0, all inequality values, |equality values|}.
double max_violation(const Matrix& a, const ConstraintSpec& spec);
double max_violation(const ProductPoint& x, const ConstraintSpec& spec);

// Sorted by descending real part; ties broken by descending imaginary part.
std::vector<std::complex<double>> sorted_eigenvalues(const Matrix& a);

// |Re l_i(A_opt) - Re l_i(A_true)| / |Re l_i(A_true)| with i one-based.
double eig_rel_error(const Matrix& a_opt, const Matrix& a_true, int i);

struct EigReport {
  std::vector<std::complex<double>> eigenvalues;
  std::vector<double> rel_errors;
};
EigReport eig_report(const Matrix& a_opt, const Matrix& a_true);

// J = skew(G1), R = G2^T G2 / n + 1e-3 I, Q = G3^T G3 / n + 1e-3 I with
// standard Gaussian G1, G2, G3.
ProductPoint random_stable_triple(Eigen::Index n, Rng& rng);
ProductPoint random_initial_point(Eigen::Index n, Rng& rng);

struct ConstraintGenOptions {
  int num_one_box = 10;
  int num_two_box = 5;
  int num_equality = 0;
  double rel_margin = 0.1;
  double abs_margin = 0.05;
};

// Samples disjoint entry sets uniformly without replacement and builds bounds
// around the true entries: l = a - rel|a| - abs, u = a + rel|a| + abs.  Each
// forbidden band sits on a random side of a, covering the middle half of the
// gap between a and the bound on that side.  Equality targets are the true
// entries.  The true system is strictly feasible for the inequalities.
ConstraintSpec generate_constraints(const Matrix& a_true, const ConstraintGenOptions& opts,
                                    Rng& rng);

}  // namespace stableid
