#pragma once

// Geometry of Skew(n) x SPD(n) x SPD(n): projections, the affine-invariant
// product metric, the second-order SPD retraction, Riemannian gradients,
// and a metric-orthonormal coordinate chart of the tangent space.

#include <Eigen/Dense>

#include <vector>

namespace stableid {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Entrywise tolerance for the symmetry / antisymmetry of stored matrices.
inline constexpr double kRepresentationTol = 1e-12;
// Tolerance for quantities derived through factorizations (chart Gram, round trips).
inline constexpr double kFactorTol = 1e-10;

class SkewMatrix {
 public:
  SkewMatrix() = default;
  // Throws InvariantViolation unless m + m^T == 0 within kRepresentationTol.
  explicit SkewMatrix(Matrix m);
  static SkewMatrix zero(Eigen::Index n);

  const Matrix& matrix() const { return m_; }
  Eigen::Index size() const { return m_.rows(); }

 private:
  Matrix m_;
};

class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(Matrix m);
  static SymMatrix zero(Eigen::Index n);

  const Matrix& matrix() const { return m_; }
  Eigen::Index size() const { return m_.rows(); }

 private:
  Matrix m_;
};

// Symmetric positive definite; construction runs a Cholesky factorization.
class SpdMatrix {
 public:
  SpdMatrix() = default;
  explicit SpdMatrix(Matrix m);
  static SpdMatrix identity(Eigen::Index n);

  const Matrix& matrix() const { return m_; }
  Eigen::Index size() const { return m_.rows(); }

  Matrix inverse() const;
  // Symmetric square root and inverse square root via eigendecomposition.
  Matrix sqrt() const;
  Matrix inverse_sqrt() const;

 private:
  Matrix m_;
};

// A point (J, R, Q) on the product manifold; represents the system A = (J - R) Q.
struct ProductPoint {
  SkewMatrix J;
  SpdMatrix R;
  SpdMatrix Q;

  ProductPoint() = default;
  ProductPoint(SkewMatrix j, SpdMatrix r, SpdMatrix q);

  Eigen::Index n() const { return J.size(); }
};

struct TangentVector {
  SkewMatrix xi_J;
  SymMatrix xi_R;
  SymMatrix xi_Q;

  TangentVector() = default;
  TangentVector(SkewMatrix j, SymMatrix r, SymMatrix q);
  static TangentVector zero(Eigen::Index n);

  Eigen::Index n() const { return xi_J.size(); }
};

TangentVector operator+(const TangentVector& a, const TangentVector& b);
TangentVector operator*(double t, const TangentVector& v);

// (M - M^T) / 2 and (M + M^T) / 2.  Both are exact: the results are
// bitwise (anti)symmetric.
SkewMatrix skew_project(const Matrix& m);
SymMatrix sym_project(const Matrix& m);

// tr(u_J^T v_J) + tr(R^-1 u_R R^-1 v_R) + tr(Q^-1 u_Q Q^-1 v_Q).
double metric(const ProductPoint& x, const TangentVector& u, const TangentVector& v);
double norm(const ProductPoint& x, const TangentVector& v);

// P + xi + xi P^-1 xi / 2.  Throws InvariantViolation if the result fails Cholesky.
SpdMatrix retract_spd(const SpdMatrix& p, const SymMatrix& xi);
// Identity on the skew block, retract_spd on each SPD block.
ProductPoint retract(const ProductPoint& x, const TangentVector& v);

// Euclidean gradients of a smooth extension with respect to each block.
struct EuclideanGradient {
  Matrix J;
  Matrix R;
  Matrix Q;
};

// (skew(G_J), R sym(G_R) R, Q sym(G_Q) Q).
TangentVector riem_grad_from_euclidean(const ProductPoint& x, const EuclideanGradient& g);

// n(n-1)/2 + n(n+1).
Eigen::Index manifold_dimension(Eigen::Index n);

// Metric-orthonormal basis of T_x M.  The skew block uses (E_ij - E_ji)/sqrt2
// for i < j; each SPD block uses P^{1/2} B P^{1/2} with B running over the
// Frobenius-orthonormal basis of Sym(n) (E_ii, then (E_ij + E_ji)/sqrt2 for
// i < j, row-major over the upper triangle).  Coordinates are laid out as
// [skew | R block | Q block].
class TangentChart {
 public:
  explicit TangentChart(const ProductPoint& base);

  const ProductPoint& base() const { return base_; }
  Eigen::Index dim() const { return dim_; }

  TangentVector basis_vector(Eigen::Index k) const;
  std::vector<TangentVector> basis() const;

  Vector to_coords(const TangentVector& v) const;
  TangentVector from_coords(const Vector& c) const;

  // Coordinates of riem_grad_from_euclidean(base, g) without forming the
  // tangent vector: [skew(G_J) | R^{1/2} sym(G_R) R^{1/2} | ...].
  Vector gradient_coords(const EuclideanGradient& g) const;

 private:
  ProductPoint base_;
  Eigen::Index dim_;
  Matrix r_sqrt_, r_isqrt_, q_sqrt_, q_isqrt_;
};

TangentChart build_chart(const ProductPoint& x);

// Low-level coordinate maps on the Frobenius-orthonormal bases.
Vector skew_coords(const Matrix& k);
Matrix skew_from_coords(const Vector& c, Eigen::Index n);
Vector sym_coords(const Matrix& s);
Matrix sym_from_coords(const Vector& c, Eigen::Index n);

// Largest real part of the eigenvalues of a square matrix.
double spectral_abscissa(const Matrix& a);

}  // namespace stableid
