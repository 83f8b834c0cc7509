#include "stableid/manifold.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "stableid/errors.hpp"

namespace stableid {
namespace {

constexpr double kSqrt2 = 1.41421356237309504880;

void require_square(const Matrix& m, const char* what) {
  if (m.rows() != m.cols()) {
    throw DimensionError(std::string(what) + ": expected a square matrix, got " +
                         std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  }
}

void require_same_size(Eigen::Index a, Eigen::Index b, const char* what) {
  if (a != b) {
    throw DimensionError(std::string(what) + ": size mismatch " + std::to_string(a) + " vs " +
                         std::to_string(b));
  }
}

Matrix spd_function(const Matrix& m, bool inverse) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(m);
  Vector d = eig.eigenvalues().cwiseSqrt();
  if (inverse) d = d.cwiseInverse();
  Matrix out = eig.eigenvectors() * d.asDiagonal() * eig.eigenvectors().transpose();
  return (out + out.transpose()) / 2.0;
}

// tr(P^-1 U P^-1 V) using the Cholesky factor of P.
double spd_metric(const SpdMatrix& p, const SymMatrix& u, const SymMatrix& v) {
  Eigen::LLT<Matrix> llt(p.matrix());
  const Matrix pu = llt.solve(u.matrix());
  const Matrix pv = llt.solve(v.matrix());
  // tr(X Y) = sum_ij X_ij Y_ji
  return (pu.array() * pv.transpose().array()).sum();
}

}  // namespace

SkewMatrix::SkewMatrix(Matrix m) : m_(std::move(m)) {
  require_square(m_, "SkewMatrix");
  if (!m_.allFinite() || ((m_ + m_.transpose()).cwiseAbs().maxCoeff() > kRepresentationTol &&
                          m_.size() > 0)) {
    throw InvariantViolation("SkewMatrix: matrix is not skew-symmetric");
  }
}

SkewMatrix SkewMatrix::zero(Eigen::Index n) { return SkewMatrix(Matrix::Zero(n, n)); }

SymMatrix::SymMatrix(Matrix m) : m_(std::move(m)) {
  require_square(m_, "SymMatrix");
  if (!m_.allFinite() || ((m_ - m_.transpose()).cwiseAbs().maxCoeff() > kRepresentationTol &&
                          m_.size() > 0)) {
    throw InvariantViolation("SymMatrix: matrix is not symmetric");
  }
}

SymMatrix SymMatrix::zero(Eigen::Index n) { return SymMatrix(Matrix::Zero(n, n)); }

SpdMatrix::SpdMatrix(Matrix m) : m_(std::move(m)) {
  require_square(m_, "SpdMatrix");
  if (m_.size() == 0) return;
  if (!m_.allFinite() || (m_ - m_.transpose()).cwiseAbs().maxCoeff() > kRepresentationTol) {
    throw InvariantViolation("SpdMatrix: matrix is not symmetric");
  }
  Eigen::LLT<Matrix> llt(m_);
  if (llt.info() != Eigen::Success) {
    throw InvariantViolation("SpdMatrix: Cholesky factorization failed");
  }
}

SpdMatrix SpdMatrix::identity(Eigen::Index n) { return SpdMatrix(Matrix::Identity(n, n)); }

Matrix SpdMatrix::inverse() const {
  Matrix inv = Eigen::LLT<Matrix>(m_).solve(Matrix::Identity(m_.rows(), m_.cols()));
  return (inv + inv.transpose()) / 2.0;
}

Matrix SpdMatrix::sqrt() const { return spd_function(m_, false); }
Matrix SpdMatrix::inverse_sqrt() const { return spd_function(m_, true); }

ProductPoint::ProductPoint(SkewMatrix j, SpdMatrix r, SpdMatrix q)
    : J(std::move(j)), R(std::move(r)), Q(std::move(q)) {
  require_same_size(J.size(), R.size(), "ProductPoint");
  require_same_size(J.size(), Q.size(), "ProductPoint");
}

TangentVector::TangentVector(SkewMatrix j, SymMatrix r, SymMatrix q)
    : xi_J(std::move(j)), xi_R(std::move(r)), xi_Q(std::move(q)) {
  require_same_size(xi_J.size(), xi_R.size(), "TangentVector");
  require_same_size(xi_J.size(), xi_Q.size(), "TangentVector");
}

TangentVector TangentVector::zero(Eigen::Index n) {
  return {SkewMatrix::zero(n), SymMatrix::zero(n), SymMatrix::zero(n)};
}

TangentVector operator+(const TangentVector& a, const TangentVector& b) {
  require_same_size(a.n(), b.n(), "TangentVector +");
  return {SkewMatrix(a.xi_J.matrix() + b.xi_J.matrix()),
          SymMatrix(a.xi_R.matrix() + b.xi_R.matrix()),
          SymMatrix(a.xi_Q.matrix() + b.xi_Q.matrix())};
}

TangentVector operator*(double t, const TangentVector& v) {
  return {SkewMatrix(t * v.xi_J.matrix()), SymMatrix(t * v.xi_R.matrix()),
          SymMatrix(t * v.xi_Q.matrix())};
}

SkewMatrix skew_project(const Matrix& m) {
  require_square(m, "skew_project");
  return SkewMatrix((m - m.transpose()) / 2.0);
}

SymMatrix sym_project(const Matrix& m) {
  require_square(m, "sym_project");
  return SymMatrix((m + m.transpose()) / 2.0);
}

double metric(const ProductPoint& x, const TangentVector& u, const TangentVector& v) {
  require_same_size(x.n(), u.n(), "metric");
  require_same_size(x.n(), v.n(), "metric");
  if (x.n() == 0) return 0.0;
  const double skew = (u.xi_J.matrix().array() * v.xi_J.matrix().array()).sum();
  return skew + spd_metric(x.R, u.xi_R, v.xi_R) + spd_metric(x.Q, u.xi_Q, v.xi_Q);
}

double norm(const ProductPoint& x, const TangentVector& v) { return std::sqrt(metric(x, v, v)); }

SpdMatrix retract_spd(const SpdMatrix& p, const SymMatrix& xi) {
  require_same_size(p.size(), xi.size(), "retract_spd");
  const Matrix correction = xi.matrix() * Eigen::LLT<Matrix>(p.matrix()).solve(xi.matrix());
  const Matrix out = p.matrix() + xi.matrix() + 0.5 * correction;
  const Matrix sym = (out + out.transpose()) / 2.0;
  if (!sym.allFinite()) throw InvariantViolation("retract_spd: non-finite result");
  Eigen::LLT<Matrix> llt(sym);
  if (llt.info() != Eigen::Success) {
    throw InvariantViolation("retract_spd: retracted matrix lost positive definiteness");
  }
  return SpdMatrix(sym);
}

ProductPoint retract(const ProductPoint& x, const TangentVector& v) {
  require_same_size(x.n(), v.n(), "retract");
  return {SkewMatrix(x.J.matrix() + v.xi_J.matrix()), retract_spd(x.R, v.xi_R),
          retract_spd(x.Q, v.xi_Q)};
}

TangentVector riem_grad_from_euclidean(const ProductPoint& x, const EuclideanGradient& g) {
  const Eigen::Index n = x.n();
  for (const Matrix* m : {&g.J, &g.R, &g.Q}) {
    if (m->rows() != n || m->cols() != n) throw DimensionError("riem_grad_from_euclidean");
  }
  const Matrix& r = x.R.matrix();
  const Matrix& q = x.Q.matrix();
  return {skew_project(g.J), sym_project(r * sym_project(g.R).matrix() * r),
          sym_project(q * sym_project(g.Q).matrix() * q)};
}

Eigen::Index manifold_dimension(Eigen::Index n) { return n * (n - 1) / 2 + n * (n + 1); }

Vector skew_coords(const Matrix& k) {
  const Eigen::Index n = k.rows();
  Vector c(n * (n - 1) / 2);
  Eigen::Index idx = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) c(idx++) = kSqrt2 * k(i, j);
  }
  return c;
}

Matrix skew_from_coords(const Vector& c, Eigen::Index n) {
  Matrix k = Matrix::Zero(n, n);
  Eigen::Index idx = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      k(i, j) = c(idx++) / kSqrt2;
      k(j, i) = -k(i, j);
    }
  }
  return k;
}

Vector sym_coords(const Matrix& s) {
  const Eigen::Index n = s.rows();
  Vector c(n * (n + 1) / 2);
  Eigen::Index idx = 0;
  for (Eigen::Index i = 0; i < n; ++i) c(idx++) = s(i, i);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) c(idx++) = kSqrt2 * s(i, j);
  }
  return c;
}

Matrix sym_from_coords(const Vector& c, Eigen::Index n) {
  Matrix s = Matrix::Zero(n, n);
  Eigen::Index idx = 0;
  for (Eigen::Index i = 0; i < n; ++i) s(i, i) = c(idx++);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      s(i, j) = c(idx++) / kSqrt2;
      s(j, i) = s(i, j);
    }
  }
  return s;
}

TangentChart::TangentChart(const ProductPoint& base)
    : base_(base),
      dim_(manifold_dimension(base.n())),
      r_sqrt_(base.R.sqrt()),
      r_isqrt_(base.R.inverse_sqrt()),
      q_sqrt_(base.Q.sqrt()),
      q_isqrt_(base.Q.inverse_sqrt()) {}

TangentVector TangentChart::basis_vector(Eigen::Index k) const {
  if (k < 0 || k >= dim_) throw DimensionError("TangentChart::basis_vector: index out of range");
  Vector e = Vector::Zero(dim_);
  e(k) = 1.0;
  return from_coords(e);
}

std::vector<TangentVector> TangentChart::basis() const {
  std::vector<TangentVector> out;
  out.reserve(static_cast<size_t>(dim_));
  for (Eigen::Index k = 0; k < dim_; ++k) out.push_back(basis_vector(k));
  return out;
}

Vector TangentChart::to_coords(const TangentVector& v) const {
  const Eigen::Index n = base_.n();
  require_same_size(n, v.n(), "TangentChart::to_coords");
  const Eigen::Index ns = n * (n - 1) / 2;
  const Eigen::Index np = n * (n + 1) / 2;
  Vector c(dim_);
  c.head(ns) = skew_coords(v.xi_J.matrix());
  c.segment(ns, np) = sym_coords(r_isqrt_ * v.xi_R.matrix() * r_isqrt_);
  c.tail(np) = sym_coords(q_isqrt_ * v.xi_Q.matrix() * q_isqrt_);
  return c;
}

TangentVector TangentChart::from_coords(const Vector& c) const {
  const Eigen::Index n = base_.n();
  if (c.size() != dim_) {
    throw DimensionError("TangentChart::from_coords: expected " + std::to_string(dim_) +
                         " coordinates, got " + std::to_string(c.size()));
  }
  const Eigen::Index ns = n * (n - 1) / 2;
  const Eigen::Index np = n * (n + 1) / 2;
  const Matrix sr = sym_from_coords(c.segment(ns, np), n);
  const Matrix sq = sym_from_coords(c.tail(np), n);
  return {SkewMatrix(skew_from_coords(c.head(ns), n)), sym_project(r_sqrt_ * sr * r_sqrt_),
          sym_project(q_sqrt_ * sq * q_sqrt_)};
}

Vector TangentChart::gradient_coords(const EuclideanGradient& g) const {
  const Eigen::Index n = base_.n();
  for (const Matrix* m : {&g.J, &g.R, &g.Q}) {
    if (m->rows() != n || m->cols() != n) throw DimensionError("TangentChart::gradient_coords");
  }
  const Eigen::Index ns = n * (n - 1) / 2;
  const Eigen::Index np = n * (n + 1) / 2;
  Vector c(dim_);
  c.head(ns) = skew_coords(skew_project(g.J).matrix());
  c.segment(ns, np) = sym_coords(r_sqrt_ * sym_project(g.R).matrix() * r_sqrt_);
  c.tail(np) = sym_coords(q_sqrt_ * sym_project(g.Q).matrix() * q_sqrt_);
  return c;
}

TangentChart build_chart(const ProductPoint& x) { return TangentChart(x); }

double spectral_abscissa(const Matrix& a) {
  require_square(a, "spectral_abscissa");
  if (a.size() == 0) return -std::numeric_limits<double>::infinity();
  Eigen::EigenSolver<Matrix> es(a, false);
  return es.eigenvalues().real().maxCoeff();
}

}  // namespace stableid
