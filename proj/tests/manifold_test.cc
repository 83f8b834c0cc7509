#include <gtest/gtest.h>

#include <cmath>

#include "stableid/errors.hpp"
#include "stableid/manifold.hpp"
#include "test_util.hpp"

namespace stableid {
namespace {

using testing::central_difference;
using testing::gaussian;
using testing::metric_oracle;
using testing::random_point;
using testing::random_tangent;

TEST(Projection, HandExample) {
  Matrix m(2, 2);
  m << 1, 3, 1, 2;
  Matrix skew(2, 2), sym(2, 2);
  skew << 0, 1, -1, 0;
  sym << 1, 2, 2, 2;
  EXPECT_EQ(skew_project(m).matrix(), skew);
  EXPECT_EQ(sym_project(m).matrix(), sym);
}

TEST(Projection, IdempotentAndComplementary) {
  Rng rng(3);
  for (int t = 0; t < 20; ++t) {
    const Matrix m = gaussian(4, 4, rng);
    const SkewMatrix k = skew_project(m);
    const SymMatrix s = sym_project(m);
    EXPECT_TRUE(skew_project(k.matrix()).matrix().isApprox(k.matrix(), 1e-15));
    EXPECT_TRUE(sym_project(s.matrix()).matrix().isApprox(s.matrix(), 1e-15));
    EXPECT_LE((k.matrix() + s.matrix() - m).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_LE(sym_project(k.matrix()).matrix().cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_LE(skew_project(s.matrix()).matrix().cwiseAbs().maxCoeff(), 1e-15);
  }
}

TEST(Projection, RejectsNonSquare) {
  EXPECT_THROW(skew_project(Matrix::Zero(2, 3)), DimensionError);
  EXPECT_THROW(sym_project(Matrix::Zero(3, 2)), DimensionError);
}

TEST(Types, InvariantsEnforced) {
  Matrix not_skew(2, 2);
  not_skew << 0, 1, 1, 0;
  EXPECT_THROW(SkewMatrix{not_skew}, InvariantViolation);
  Matrix not_sym(2, 2);
  not_sym << 1, 1, 0, 1;
  EXPECT_THROW(SymMatrix{not_sym}, InvariantViolation);
  Matrix indefinite(2, 2);
  indefinite << 1, 2, 2, 1;
  EXPECT_THROW(SpdMatrix{indefinite}, InvariantViolation);
  EXPECT_NO_THROW(SpdMatrix{Matrix::Identity(3, 3)});
}

TEST(Metric, MatchesTraceOracle) {
  Rng rng(11);
  for (int t = 0; t < 20; ++t) {
    const ProductPoint x = random_point(3, rng);
    const TangentVector u = random_tangent(3, rng), v = random_tangent(3, rng);
    const double a = metric(x, u, v);
    EXPECT_NEAR(a, metric_oracle(x, u, v), 1e-12 * std::max(1.0, std::abs(a)));
    EXPECT_NEAR(a, metric(x, v, u), 1e-12 * std::max(1.0, std::abs(a)));
    EXPECT_GT(metric(x, u, u), 0.0);
  }
}

TEST(Metric, ZeroAndIdentityWeights) {
  Rng rng(12);
  const ProductPoint x = random_point(3, rng);
  const TangentVector v = random_tangent(3, rng);
  EXPECT_EQ(metric(x, TangentVector::zero(3), v), 0.0);
  const ProductPoint id{SkewMatrix::zero(3), SpdMatrix::identity(3), SpdMatrix::identity(3)};
  const TangentVector u = random_tangent(3, rng);
  const double frob = (u.xi_J.matrix().array() * v.xi_J.matrix().array()).sum() +
                      (u.xi_R.matrix().array() * v.xi_R.matrix().array()).sum() +
                      (u.xi_Q.matrix().array() * v.xi_Q.matrix().array()).sum();
  EXPECT_NEAR(metric(id, u, v), frob, 1e-12);
}

TEST(Retraction, ScalarCase) {
  const SpdMatrix p(Matrix::Constant(1, 1, 2.0));
  const SymMatrix xi(Matrix::Constant(1, 1, 1.0));
  EXPECT_DOUBLE_EQ(retract_spd(p, xi).matrix()(0, 0), 3.25);
}

TEST(Retraction, ZeroIsBitIdentical) {
  Rng rng(5);
  const ProductPoint x = random_point(4, rng);
  const ProductPoint y = retract(x, TangentVector::zero(4));
  EXPECT_EQ(y.J.matrix(), x.J.matrix());
  EXPECT_EQ(y.R.matrix(), x.R.matrix());
  EXPECT_EQ(y.Q.matrix(), x.Q.matrix());
}

TEST(Retraction, StaysPositiveDefiniteForLargeSteps) {
  Rng rng(6);
  for (int t = 0; t < 200; ++t) {
    const ProductPoint x = random_point(5, rng);
    const TangentVector v = 50.0 * random_tangent(5, rng);
    const ProductPoint y = retract(x, v);
    EXPECT_EQ(Eigen::LLT<Matrix>(y.R.matrix()).info(), Eigen::Success);
    EXPECT_EQ(Eigen::LLT<Matrix>(y.Q.matrix()).info(), Eigen::Success);
  }
}

TEST(Retraction, FirstOrderRemainderIsQuadratic) {
  Rng rng(7);
  const ProductPoint x = random_point(3, rng);
  const TangentVector v = random_tangent(3, rng);
  std::vector<double> ts = {1e-1, 1e-2, 1e-3, 1e-4}, errs;
  for (double t : ts) {
    const ProductPoint y = retract(x, t * v);
    const double e = std::sqrt((y.R.matrix() - x.R.matrix() - t * v.xi_R.matrix()).squaredNorm() +
                               (y.Q.matrix() - x.Q.matrix() - t * v.xi_Q.matrix()).squaredNorm() +
                               (y.J.matrix() - x.J.matrix() - t * v.xi_J.matrix()).squaredNorm());
    errs.push_back(e);
  }
  for (size_t i = 0; i + 1 < ts.size(); ++i) {
    const double slope = std::log(errs[i] / errs[i + 1]) / std::log(ts[i] / ts[i + 1]);
    EXPECT_GE(slope, 1.9);
  }
}

TEST(RiemannianGradient, RieszPropertyOnTestFunction) {
  // f(J, R, Q) = tr(C1 J) + tr(C2 R R) + log det-free smooth part tr(C3 Q^3).
  Rng rng(8);
  for (int n : {2, 3, 5, 10}) {
    for (int t = 0; t < 20; ++t) {
      const Matrix c1 = gaussian(n, n, rng), c2 = gaussian(n, n, rng), c3 = gaussian(n, n, rng);
      auto f = [&](const ProductPoint& p) {
        const Matrix& q = p.Q.matrix();
        return (c1 * p.J.matrix()).trace() + (c2 * p.R.matrix() * p.R.matrix()).trace() +
               (c3 * q * q * q).trace();
      };
      const ProductPoint x = random_point(n, rng);
      const Matrix& r = x.R.matrix();
      const Matrix& q = x.Q.matrix();
      EuclideanGradient g;
      g.J = c1.transpose();
      g.R = (c2 * r + r * c2).transpose();
      g.Q = (c3 * q * q + q * c3 * q + q * q * c3).transpose();
      const TangentVector grad = riem_grad_from_euclidean(x, g);
      const TangentVector w = random_tangent(n, rng);
      const double lhs = metric(x, grad, w);
      const double fd = central_difference(f, x, w, 1e-5);
      EXPECT_LE(std::abs(lhs - fd), 1e-6 * std::max(1.0, std::abs(fd))) << "n=" << n;
    }
  }
}

TEST(RiemannianGradient, ZeroAndIdentityCases) {
  Rng rng(9);
  const ProductPoint x = random_point(3, rng);
  const TangentVector z = riem_grad_from_euclidean(x, {Matrix::Zero(3, 3), Matrix::Zero(3, 3),
                                                       Matrix::Zero(3, 3)});
  EXPECT_EQ(z.xi_J.matrix().cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(z.xi_R.matrix().cwiseAbs().maxCoeff(), 0.0);
  const ProductPoint id{SkewMatrix::zero(3), SpdMatrix::identity(3), SpdMatrix::identity(3)};
  const Matrix s = sym_project(gaussian(3, 3, rng)).matrix();
  const Matrix gj = gaussian(3, 3, rng);
  const TangentVector t = riem_grad_from_euclidean(id, {gj, s, s});
  EXPECT_TRUE(t.xi_J.matrix().isApprox(skew_project(gj).matrix()));
  EXPECT_TRUE(t.xi_R.matrix().isApprox(s, 1e-14));
  EXPECT_TRUE(t.xi_Q.matrix().isApprox(s, 1e-14));
}

TEST(Chart, Dimension) {
  EXPECT_EQ(manifold_dimension(1), 2);
  EXPECT_EQ(manifold_dimension(2), 7);
  EXPECT_EQ(manifold_dimension(10), 155);
  Rng rng(1);
  EXPECT_EQ(build_chart(random_point(2, rng)).dim(), 7);
}

TEST(Chart, GramIsIdentity) {
  Rng rng(13);
  for (int t = 0; t < 5; ++t) {
    const ProductPoint x = random_point(4, rng);
    const TangentChart chart(x);
    const auto basis = chart.basis();
    ASSERT_EQ(static_cast<Eigen::Index>(basis.size()), chart.dim());
    Matrix gram(chart.dim(), chart.dim());
    for (Eigen::Index i = 0; i < chart.dim(); ++i)
      for (Eigen::Index j = 0; j < chart.dim(); ++j)
        gram(i, j) = metric_oracle(x, basis[i], basis[j]);
    EXPECT_LE((gram - Matrix::Identity(chart.dim(), chart.dim())).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(Chart, RoundTripsAndMetricIsDotProduct) {
  Rng rng(14);
  const ProductPoint x = random_point(3, rng);
  const TangentChart chart(x);
  for (int t = 0; t < 20; ++t) {
    const Vector c = testing::gaussian_vec(chart.dim(), rng);
    EXPECT_LE((chart.to_coords(chart.from_coords(c)) - c).cwiseAbs().maxCoeff(), 1e-10);
    const TangentVector u = random_tangent(3, rng), v = random_tangent(3, rng);
    const double m = metric_oracle(x, u, v);
    EXPECT_NEAR(chart.to_coords(u).dot(chart.to_coords(v)), m, 1e-10 * std::max(1.0, std::abs(m)));
  }
  for (Eigen::Index k = 0; k < chart.dim(); ++k) {
    const Vector e = chart.to_coords(chart.basis_vector(k));
    EXPECT_LE((e - Vector::Unit(chart.dim(), k)).cwiseAbs().maxCoeff(), 1e-10);
  }
  EXPECT_EQ(chart.to_coords(TangentVector::zero(3)).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_THROW(chart.from_coords(Vector::Zero(chart.dim() + 1)), DimensionError);
}

TEST(Chart, GradientCoordsMatchTangentGradient) {
  Rng rng(15);
  const ProductPoint x = random_point(4, rng);
  const TangentChart chart(x);
  const EuclideanGradient g{gaussian(4, 4, rng), gaussian(4, 4, rng), gaussian(4, 4, rng)};
  const Vector direct = chart.to_coords(riem_grad_from_euclidean(x, g));
  EXPECT_LE((chart.gradient_coords(g) - direct).cwiseAbs().maxCoeff(), 1e-10 * direct.norm());
}

TEST(Chart, DegenerateSizeOne) {
  const ProductPoint x{SkewMatrix::zero(1), SpdMatrix(Matrix::Constant(1, 1, 2.0)),
                      SpdMatrix(Matrix::Constant(1, 1, 0.5))};
  const TangentChart chart(x);
  EXPECT_EQ(chart.dim(), 2);
  const TangentVector v = chart.from_coords(Vector::Ones(2));
  EXPECT_NEAR(v.xi_R.matrix()(0, 0), 2.0, 1e-15);
  EXPECT_NEAR(v.xi_Q.matrix()(0, 0), 0.5, 1e-15);
  EXPECT_EQ(v.xi_J.size(), 1);
}

}  // namespace
}  // namespace stableid
