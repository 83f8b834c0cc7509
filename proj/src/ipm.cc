#include "stableid/ipm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "stableid/errors.hpp"

namespace stableid {
namespace {

// Largest a keeping v + a dv >= 0 elementwise (may be +inf).
double max_step(const Vector& v, const Vector& dv) {
  double a = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (dv(i) < 0.0) a = std::min(a, -v(i) / dv(i));
  }
  return a;
}

double inf_norm(const Vector& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

// Factorize K = P + G' diag(w) G, retrying with a small ridge if the
// Cholesky breaks down from rounding.
Eigen::LDLT<Matrix> factor_normal(const Matrix& P, const Matrix& G, const Vector& w) {
  Matrix K = P;
  K.noalias() += G.transpose() * w.asDiagonal() * G;
  Eigen::LDLT<Matrix> ldlt(K);
  if (ldlt.info() != Eigen::Success || !(ldlt.vectorD().array() > 0.0).all()) {
    const double ridge = 1e-14 * std::max(1.0, K.diagonal().cwiseAbs().maxCoeff());
    K.diagonal().array() += ridge;
    ldlt.compute(K);
  }
  if (ldlt.info() != Eigen::Success) throw NumericError("ipm: normal matrix factorization failed");
  return ldlt;
}

// The problem restricted to x = x0 + Z y.
struct Reduced {
  Matrix Z;
  Vector x0;
  Matrix P;
  Vector q;
  Matrix G;
  Vector h;
};

}  // namespace

double ipm_kkt_residual(const IpmProblem& prob, const Vector& x, const Vector& lambda,
                        const Vector& mu) {
  Vector stat = prob.P * x + prob.q;
  if (prob.num_ineq() > 0) stat.noalias() += prob.G.transpose() * lambda;
  if (prob.num_eq() > 0) stat.noalias() += prob.E.transpose() * mu;
  double r = stat.norm();
  if (prob.num_ineq() > 0) {
    const Vector gx = prob.G * x + prob.h;
    r = std::max(r, gx.cwiseMax(0.0).maxCoeff());
    r = std::max(r, (-lambda).cwiseMax(0.0).maxCoeff());
    r = std::max(r, gx.cwiseProduct(lambda).cwiseAbs().maxCoeff());
  }
  if (prob.num_eq() > 0) r = std::max(r, inf_norm(prob.E * x + prob.e));
  return r;
}

IpmResult solve_ipm(const IpmProblem& prob, const IpmOptions& opts, const Vector* warm_x,
                    const Vector* warm_lambda) {
  const Eigen::Index n = prob.dim();
  const Eigen::Index m = prob.num_ineq();
  const Eigen::Index me = prob.num_eq();
  if (prob.P.rows() != n || prob.P.cols() != n || prob.G.rows() != m ||
      (m > 0 && prob.G.cols() != n) || prob.E.rows() != me || (me > 0 && prob.E.cols() != n)) {
    throw DimensionError("ipm: inconsistent problem dimensions");
  }

  IpmResult res;
  Reduced red;
  Eigen::ColPivHouseholderQR<Matrix> qr_et;
  if (me > 0) {
    qr_et.compute(prob.E.transpose());
    qr_et.setThreshold(1e-12);
    const Eigen::Index rank = qr_et.rank();
    const Matrix Q = qr_et.householderQ();
    const Matrix Y = Q.leftCols(rank);
    red.Z = Q.rightCols(n - rank);
    const Matrix EY = prob.E * Y;
    const Vector w = EY.colPivHouseholderQr().solve(-prob.e);
    red.x0 = Y * w;
    if (inf_norm(prob.E * red.x0 + prob.e) > 1e-9 * (1.0 + inf_norm(prob.e))) {
      res.status = IpmStatus::EqualityInconsistent;
      res.x = red.x0;
      res.lambda = Vector::Zero(m);
      res.mu = Vector::Zero(me);
      return res;
    }
    red.P = red.Z.transpose() * prob.P * red.Z;
    red.q = red.Z.transpose() * (prob.P * red.x0 + prob.q);
    red.G = prob.G * red.Z;
    red.h = prob.G * red.x0 + prob.h;
  } else {
    red.Z = Matrix::Identity(n, n);
    red.x0 = Vector::Zero(n);
    red.P = prob.P;
    red.q = prob.q;
    red.G = prob.G;
    red.h = prob.h;
  }
  const Eigen::Index nr = red.q.size();

  auto finish = [&](const Vector& y, const Vector& lambda, IpmStatus status, int iters) {
    res.status = status;
    res.iterations = iters;
    res.x = red.x0 + red.Z * y;
    res.lambda = lambda;
    if (me > 0) {
      Vector r = prob.P * res.x + prob.q;
      if (m > 0) r.noalias() += prob.G.transpose() * lambda;
      res.mu = qr_et.solve(-r);
    } else {
      res.mu = Vector::Zero(0);
    }
    return res;
  };

  if (m == 0) {
    Vector y = Vector::Zero(nr);
    if (nr > 0) {
      Eigen::LDLT<Matrix> ldlt(red.P);
      if (ldlt.info() != Eigen::Success) throw NumericError("ipm: P is not positive definite");
      y = ldlt.solve(-red.q);
    }
    return finish(y, Vector::Zero(0), IpmStatus::Converged, 0);
  }

  const double scale = 1.0 + std::max({inf_norm(red.q), inf_norm(red.h),
                                       red.P.size() ? red.P.cwiseAbs().maxCoeff() : 0.0,
                                       red.G.cwiseAbs().maxCoeff()});
  const double tol = opts.tol * scale;
  const double tol_mu = 1e-2 * tol;

  Vector y(nr);
  if (warm_x != nullptr) {
    if (warm_x->size() != n) throw DimensionError("ipm: warm start has the wrong size");
    y = red.Z.transpose() * (*warm_x - red.x0);
  } else {
    const Eigen::LDLT<Matrix> ldlt = factor_normal(red.P, red.G, Vector::Ones(m));
    y = ldlt.solve(-red.q - red.G.transpose() * red.h);
  }
  Vector s = -(red.G * y + red.h);
  Vector lambda = Vector::Ones(m);
  if (warm_lambda != nullptr) {
    if (warm_lambda->size() != m) throw DimensionError("ipm: warm multipliers have the wrong size");
    lambda = warm_lambda->cwiseMax(1e-8);
  }
  s.array() += std::max(0.0, -1.5 * s.minCoeff());
  if (s.dot(lambda) <= 0.0) s.setOnes();
  {
    const double sl = s.dot(lambda);
    const double ds = 0.5 * sl / lambda.sum();
    const double dl = 0.5 * sl / s.sum();
    s.array() += ds;
    lambda.array() += dl;
  }

  const double dm = static_cast<double>(m);
  double best = std::numeric_limits<double>::infinity();
  // Most accurate iterate seen, returned if the method stops short.
  double best_err = std::numeric_limits<double>::infinity();
  Vector best_y = y, best_lambda = lambda;
  int stalls = 0;
  int it = 0;
  for (; it < opts.max_iter; ++it) {
    const Vector rd = red.P * y + red.q + red.G.transpose() * lambda;
    const Vector rp = red.G * y + red.h + s;
    const double mu = s.dot(lambda) / dm;
    const double rdn = inf_norm(rd);
    const double rpn = inf_norm(rp);
    // Stationarity is judged relative to the size of its terms, since large
    // multipliers limit the attainable accuracy of the normal equations.
    const double tol_d =
        tol * std::max({1.0, inf_norm(red.P * y), inf_norm(red.G.transpose() * lambda)});
    if (rdn <= tol_d && rpn <= tol && s.cwiseProduct(lambda).maxCoeff() <= tol_mu) {
      return finish(y, lambda, IpmStatus::Converged, it);
    }
    if (inf_norm(lambda) > opts.divergence_bound * scale) {
      return finish(y, lambda, IpmStatus::Diverged, it);
    }
    const double err = std::max({rdn, rpn, s.cwiseProduct(lambda).maxCoeff()});
    if (err < best_err) {
      best_err = err;
      best_y = y;
      best_lambda = lambda;
    }
    const double merit = std::max({rdn, rpn, mu});
    if (merit < 0.5 * best) {
      best = merit;
      stalls = 0;
    } else if (++stalls > 30) {
      break;
    }

    const Vector w = lambda.cwiseQuotient(s);
    const Eigen::LDLT<Matrix> ldlt = factor_normal(red.P, red.G, w);

    // Solves P dy + G' dl = -r1, G dy + ds = -r2, S dl + L ds = -r3.
    auto solve_once = [&](const Vector& r1, const Vector& r2, const Vector& r3, Vector& dy,
                          Vector& dl, Vector& ds) {
      const Vector rhs = -r1 - red.G.transpose() * (w.cwiseProduct(r2) - r3.cwiseQuotient(s));
      dy = ldlt.solve(rhs);
      dl = w.cwiseProduct(red.G * dy + r2) - r3.cwiseQuotient(s);
      ds = -(r3 + s.cwiseProduct(dl)).cwiseQuotient(lambda);
    };
    // Iterative refinement recovers accuracy lost to the ill-conditioned
    // normal matrix near the solution.
    auto newton = [&](const Vector& rc, Vector& dy, Vector& dl, Vector& ds) {
      solve_once(rd, rp, rc, dy, dl, ds);
      for (int pass = 0; pass < 2; ++pass) {
        const Vector e1 = rd + red.P * dy + red.G.transpose() * dl;
        const Vector e2 = rp + red.G * dy + ds;
        const Vector e3 = rc + s.cwiseProduct(dl) + lambda.cwiseProduct(ds);
        Vector cy, cl, cs;
        solve_once(e1, e2, e3, cy, cl, cs);
        dy += cy;
        dl += cl;
        ds += cs;
      }
    };

    Vector dy, dl, ds;
    const Vector rc_aff = s.cwiseProduct(lambda);
    newton(rc_aff, dy, dl, ds);
    const double a_aff = std::min({1.0, max_step(s, ds), max_step(lambda, dl)});
    const double mu_aff = (s + a_aff * ds).dot(lambda + a_aff * dl) / dm;
    // Keep the centering target near the complementarity tolerance so that s
    // and lambda do not both collapse while the residuals are still large.
    const double sigma = std::clamp(std::pow(std::max(0.0, mu_aff) / mu, 3),
                                    std::min(1.0, 0.1 * tol_mu / mu), 1.0);

    const Vector rc = rc_aff + ds.cwiseProduct(dl) - Vector::Constant(m, sigma * mu);
    newton(rc, dy, dl, ds);
    const double a = std::min(1.0, 0.99 * std::min(max_step(s, ds), max_step(lambda, dl)));
    y += a * dy;
    s += a * ds;
    lambda += a * dl;
    if (!y.allFinite() || !s.allFinite() || !lambda.allFinite()) {
      throw NumericError("ipm: non-finite iterate");
    }
  }
  return finish(best_y, best_lambda, IpmStatus::NotConverged, it);
}

}  // namespace stableid
