#include <gtest/gtest.h>

#include <sstream>

#include "stableid/identification_problem.hpp"
#include "stableid/solver.hpp"
#include "test_util.hpp"

namespace stableid {
namespace {

using testing::noiseless_rotation_instance;
using testing::random_point;
using testing::random_tangent;
using testing::random_trajectory;

// f(x) = x^2 on the real line with the additive retraction.
struct ScalarProblem {
  using Point = double;
  double cost(double x) const { return x * x; }
  Vector ineq_values(double) const { return Vector::Zero(0); }
  Vector eq_values(double) const { return Vector::Zero(0); }
  double retract(double x, const Vector& z) const { return x + z(0); }
  bool on_manifold(double) const { return true; }
};

ProductPoint identity_point(Eigen::Index n) {
  return {SkewMatrix::zero(n), SpdMatrix::identity(n), SpdMatrix::identity(n)};
}

SolverConfig quiet_config(int iters) {
  SolverConfig c;
  c.max_iter = iters;
  return c;
}

TEST(Penalty, Branches) {
  EXPECT_EQ(penalty_update(1.0, Vector::Constant(1, 0.5), Vector::Zero(0), 1e-4), 1.0);
  EXPECT_NEAR(penalty_update(1e-3, Vector::Constant(2, 0.5), Vector::Zero(0), 1e-4), 0.5001, 1e-15);
  EXPECT_NEAR(penalty_update(1e-3, Vector::Zero(0), Vector::Constant(1, -0.7), 1e-4), 0.7001, 1e-15);
  EXPECT_EQ(penalty_update(1e-3, Vector::Zero(0), Vector::Zero(0), 1e-4), 1e-3);
  EXPECT_EQ(multiplier_bound(Vector::Zero(0), Vector::Zero(0)), 0.0);
}

TEST(Config, Validation) {
  SolverConfig c;
  EXPECT_NO_THROW(c.validate());
  c.beta = 1.0;
  EXPECT_THROW(c.validate(), InvariantViolation);
  c = SolverConfig{};
  c.rho_bar = 0.0;
  EXPECT_THROW(c.validate(), InvariantViolation);
}

TEST(Config, JsonRoundTrip) {
  SolverConfig c;
  c.rho_bar = 7.0;
  c.qp.kkt_tol = 1e-9;
  c.elastic_enabled = false;
  const SolverConfig d = solver_config_from_json(solver_config_to_json(c));
  EXPECT_EQ(d.rho_bar, 7.0);
  EXPECT_EQ(d.qp.kkt_tol, 1e-9);
  EXPECT_FALSE(d.elastic_enabled);
  EXPECT_EQ(solver_config_from_json(nlohmann::json::object()).sigma, 0.25);
}

TEST(Merit, DefinitionAndFeasibleCase) {
  Rng rng(1);
  const Trajectory t = random_trajectory(2, 10, 0.1, rng);
  ConstraintSpec s;
  s.one_box.push_back({0, 0, -2.0, -1.2});  // A_00 = -1 violates the upper bound by 0.2
  const RiemannianIdentificationProblem p(t, s);
  const ProductPoint x = identity_point(2);
  EXPECT_NEAR(merit_value(p, x, 2.0), p.cost(x) + 0.4, 1e-14);
  const RiemannianIdentificationProblem q(t, ConstraintSpec{});
  EXPECT_EQ(merit_value(q, x, 5.0), q.cost(x));
}

TEST(Merit, MatchesEnumeratedConstraints) {
  Rng rng(2);
  const ProductPoint x = random_point(3, rng);
  const Matrix a = assemble_A(x);
  ConstraintSpec s;
  s.one_box.push_back({0, 1, a(0, 1) + 0.1, a(0, 1) + 1.0});
  s.two_box.push_back({2, 0, a(2, 0) - 1.0, a(2, 0) + 1.0, a(2, 0) + 0.05, 0.2});
  s.equality.push_back({1, 1, a(1, 1) - 0.3});
  const RiemannianIdentificationProblem p(random_trajectory(3, 8, 0.1, rng), s);
  const double viol = 0.1 + (0.04 - 0.0025) + 0.3;
  EXPECT_NEAR(merit_value(p, x, 3.0), p.cost(x) + 3.0 * viol, 1e-12);
}

TEST(LineSearch, QuadraticFullStep) {
  // H = f'' = 2 gives z = -x; decrease x^2 >= sigma <Hz, z> = 0.5 x^2.
  const ScalarProblem p;
  SolverConfig c;
  const double x = 1.5;
  const Vector z = Vector::Constant(1, -x);
  const auto ls = line_search(p, x, z, 1.0, 2.0 * z.squaredNorm(), p.cost(x), c);
  EXPECT_EQ(ls.alpha, 1.0);
  EXPECT_EQ(ls.trials, 1);
  EXPECT_EQ(ls.x, 0.0);
}

TEST(LineSearch, BacktracksAndCaps) {
  const ScalarProblem p;
  SolverConfig c;
  const double x = 1.0;
  // H = 0.2: accepted iff 5 alpha <= 20 alpha - 100 alpha^2, i.e. alpha <= 0.15.
  const Vector z = Vector::Constant(1, -10.0);
  const double hzz = 20.0;
  const auto ls = line_search(p, x, z, 1.0, hzz, p.cost(x), c);
  EXPECT_LE(ls.alpha, 0.15);
  EXPECT_GT(ls.alpha, 0.15 * c.beta);
  EXPECT_LE(c.sigma * ls.alpha * hzz, p.cost(x) - ls.merit);
  // An ascent direction can never be accepted.
  c.max_ls_trials = 20;
  EXPECT_THROW(line_search(p, x, Vector::Constant(1, 1.0), 1.0, 1.0, p.cost(x), c),
               LineSearchFailure);
}

TEST(Kkt, HandCases) {
  Linearization lin;
  lin.grad = Vector::Zero(1);
  lin.ineq_values = Vector::Zero(1);
  lin.ineq_jacobian = Matrix::Zero(1, 1);
  lin.eq_values = Vector::Zero(0);
  lin.eq_jacobian = Matrix::Zero(0, 1);
  EXPECT_NEAR(kkt_residual(lin, Vector::Constant(1, -0.3), Vector::Zero(0)), 0.3, 1e-15);
  // f = (x - 2)^2 / 2, g = x - 1 at x = 1: grad = -1, lambda = 1.
  lin.grad = Vector::Constant(1, -1.0);
  lin.ineq_jacobian = Matrix::Ones(1, 1);
  EXPECT_LE(kkt_residual(lin, Vector::Ones(1), Vector::Zero(0)), 1e-10);
  EXPECT_THROW(kkt_residual(lin, Vector::Zero(2), Vector::Zero(0)), DimensionError);
}

TEST(Kkt, ZeroMultipliersGiveGradientNorm) {
  Rng rng(3);
  const ProductPoint x = identity_point(3);
  const Matrix a = assemble_A(x);
  ConstraintSpec s;
  s.one_box.push_back({0, 2, a(0, 2) - 1.0, a(0, 2) + 1.0});
  const RiemannianIdentificationProblem p(random_trajectory(3, 12, 0.1, rng), s);
  const double res = kkt_residual(p, x, Vector::Zero(2), Vector::Zero(0));
  EXPECT_NEAR(res, norm(x, objective_gradient(x, p.trajectory())), 1e-12);
}

TEST(Direction, UnconstrainedIsNegativeGradient) {
  Rng rng(4);
  const RiemannianIdentificationProblem p(random_trajectory(3, 12, 0.1, rng), ConstraintSpec{});
  const ProductPoint x = random_point(3, rng);
  const Linearization lin = p.linearize(x);
  const QpProblem qp = build_subproblem(lin.grad, lin.ineq_values, lin.ineq_jacobian,
                                        lin.eq_values, lin.eq_jacobian,
                                        metric_operator(HChoice::Identity, p.dim()));
  const Direction d = compute_direction(qp, SolverConfig{});
  EXPECT_FALSE(d.elastic);
  EXPECT_LE((d.z + lin.grad).norm(), 1e-12 * std::max(1.0, lin.grad.norm()));
}

TEST(Direction, InactiveConstraintsChangeNothing) {
  Rng rng(5);
  const ProductPoint x = random_point(3, rng);
  const Matrix a = assemble_A(x);
  ConstraintSpec s;
  s.one_box.push_back({1, 2, a(1, 2) - 100.0, a(1, 2) + 100.0});
  const Trajectory t = random_trajectory(3, 12, 0.1, rng);
  const RiemannianIdentificationProblem p(t, s);
  const Linearization lin = p.linearize(x);
  const QpProblem qp = build_subproblem(lin.grad, lin.ineq_values, lin.ineq_jacobian,
                                        lin.eq_values, lin.eq_jacobian,
                                        metric_operator(HChoice::Identity, p.dim()));
  const Direction d = compute_direction(qp, SolverConfig{});
  EXPECT_LE((d.z + lin.grad).norm(), 1e-8);
  EXPECT_LE(d.ineq_mult.cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Solve, UcroOnNoiselessDataReachesZeroCost) {
  const auto inst = noiseless_rotation_instance();
  const RiemannianIdentificationProblem p(inst.trajectory, ConstraintSpec{});
  Rng rng(6);
  const ProductPoint x0 = retract(inst.truth, 0.1 * random_tangent(2, rng));
  const auto out = solve(p, x0, quiet_config(200));
  EXPECT_LE(p.cost(out.state.x), 1e-12);
  EXPECT_LE(norm(out.state.x, objective_gradient(out.state.x, p.trajectory())), 1e-8);
  EXPECT_EQ(out.trace.records.size(), 200u);
  for (const auto& r : out.trace.records) {
    EXPECT_EQ(r.rho, 1e-3);
    EXPECT_FALSE(r.elastic);
  }
}

TEST(Solve, ElasticOnInfeasibleLinearization) {
  Rng rng(7);
  ConstraintSpec s;
  // A_01 = 0 sits at the center of the forbidden band, so the linearized gap
  // row reads 0 * z + d^2 <= 0.
  s.two_box.push_back({0, 1, -1.0, 1.0, 0.0, 0.1});
  const RiemannianIdentificationProblem p(random_trajectory(2, 12, 0.1, rng), s);
  SolverConfig c = quiet_config(5);
  c.check_descent = true;
  const auto out = solve(p, identity_point(2), c);
  const IterationRecord& r0 = out.trace.records.front();
  EXPECT_TRUE(r0.elastic);
  EXPECT_EQ(r0.qp_status, QpStatus::ElasticSolved);
  EXPECT_NEAR(r0.phase1_violation, 0.01, 1e-9);
  EXPECT_NEAR(r0.slack_norm, 0.01, 1e-8);
  EXPECT_TRUE(r0.descent_checked);
  EXPECT_TRUE(r0.descent_ok);
  EXPECT_LE(r0.multiplier_bound, c.rho_bar + 1e-8);
}

TEST(Solve, RsqoAndErsqoAgreeWhenSubproblemsAreFeasible) {
  Rng rng(8);
  const ProductPoint x0 = random_point(3, rng);
  const Matrix a = assemble_A(x0);
  ConstraintSpec s;
  s.one_box.push_back({0, 0, a(0, 0) - 0.05, a(0, 0) + 0.05});
  s.one_box.push_back({2, 1, a(2, 1) - 0.5, a(2, 1) + 0.5});
  s.equality.push_back({1, 2, a(1, 2) + 0.01});
  const RiemannianIdentificationProblem p(random_trajectory(3, 15, 0.1, rng), s);
  SolverConfig e = quiet_config(30);
  SolverConfig r = e;
  r.elastic_enabled = false;
  const auto oe = solve(p, x0, e);
  const auto orr = solve(p, x0, r);
  ASSERT_EQ(oe.trace.records.size(), orr.trace.records.size());
  for (size_t k = 0; k < oe.trace.records.size(); ++k) {
    const auto& u = oe.trace.records[k];
    const auto& v = orr.trace.records[k];
    ASSERT_FALSE(u.elastic);
    EXPECT_EQ(u.cost, v.cost);
    EXPECT_EQ(u.rho, v.rho);
    EXPECT_EQ(u.alpha, v.alpha);
    EXPECT_EQ(u.kkt_residual, v.kkt_residual);
  }
  EXPECT_EQ(assemble_A(oe.state.x), assemble_A(orr.state.x));
}

TEST(Solve, TraceInvariants) {
  Rng rng(9);
  const ProductPoint x0 = random_point(3, rng);
  const Matrix a = assemble_A(x0);
  ConstraintSpec s;
  s.one_box.push_back({0, 1, a(0, 1) + 0.2, a(0, 1) + 1.0});
  s.two_box.push_back({1, 0, a(1, 0) - 1.0, a(1, 0) + 1.0, a(1, 0) + 0.02, 0.1});
  const RiemannianIdentificationProblem p(random_trajectory(3, 15, 0.1, rng), s);
  SolverConfig c = quiet_config(40);
  c.check_descent = true;
  const auto out = solve(p, x0, c);
  double rho = c.rho_init;
  for (const auto& r : out.trace.records) {
    EXPECT_GE(r.rho, rho);
    rho = r.rho;
    EXPECT_LE(r.merit_after, r.merit_before - c.sigma * r.alpha * r.hzz + 1e-14);
    EXPECT_TRUE(std::isfinite(r.kkt_residual));
    if (r.elastic) {
      EXPECT_TRUE(r.descent_checked);
      EXPECT_TRUE(r.descent_ok) << r.iter;
      EXPECT_LE(r.multiplier_bound, c.rho_bar + 1e-8);
    }
  }
}

TEST(Solve, EarlyStop) {
  const auto inst = noiseless_rotation_instance();
  const RiemannianIdentificationProblem p(inst.trajectory, ConstraintSpec{});
  SolverConfig c = quiet_config(200);
  c.early_stop = true;
  const auto out = solve(p, inst.truth, c);
  EXPECT_TRUE(out.trace.early_stopped);
  EXPECT_LT(out.trace.records.size(), 200u);
}

TEST(Solve, EuclideanVariantRuns) {
  Rng rng(10);
  const Trajectory t = random_trajectory(3, 15, 0.1, rng);
  ConstraintSpec s;
  s.one_box.push_back({0, 0, -0.5, 0.5});
  const EuclideanIdentificationProblem p(t, s);
  const auto out = solve(p, Matrix::Identity(3, 3), quiet_config(20));
  EXPECT_EQ(out.trace.records.size(), 20u);
  EXPECT_LE(out.trace.records.back().merit_after, out.trace.records.front().merit_before);
}

TEST(Solve, RejectsOffManifoldStart) {
  Rng rng(11);
  const RiemannianIdentificationProblem p(random_trajectory(2, 5, 0.1, rng), ConstraintSpec{});
  ProductPoint bad;
  EXPECT_THROW(solve(p, bad, quiet_config(1)), Error);
}

TEST(TraceIo, CsvHeaderAndRows) {
  const auto inst = noiseless_rotation_instance();
  const RiemannianIdentificationProblem p(inst.trajectory, ConstraintSpec{});
  const auto out = solve(p, identity_point(2), quiet_config(3));
  std::ostringstream os;
  write_trace_csv(os, out.trace);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "iter,cost,kkt_residual,max_violation,rho,alpha,dir_norm,elastic,qp_status");
  int rows = 0;
  while (std::getline(is, line)) ++rows;
  EXPECT_EQ(rows, 3);
  EXPECT_EQ(trace_to_json(out.trace)["records"].size(), 3u);
}

}  // namespace
}  // namespace stableid
