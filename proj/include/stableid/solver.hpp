#pragma once

// Elastic Riemannian SQO outer loop.  Works on any problem type with the
// interface described in identification_problem.hpp; all tangent vectors
// are handled as coordinates in the chart of the current iterate.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <iosfwd>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "stableid/errors.hpp"
#include "stableid/identification_problem.hpp"
#include "stableid/qp.hpp"

namespace stableid {

enum class HChoice { Identity };

struct SolverConfig {
  double rho_bar = 1e2;
  double rho_init = 1e-3;
  double eps_pen = 1e-4;
  double beta = 0.9;
  double sigma = 0.25;
  int max_iter = 200;
  bool elastic_enabled = true;  // false = plain RSQO
  HChoice h_choice = HChoice::Identity;
  int max_ls_trials = 200;
  bool early_stop = false;
  double stop_dir_norm = 1e-10;
  double stop_violation = 1e-9;
  // Forward-difference check of the elastic descent inequality.
  bool check_descent = false;
  double descent_rel_tol = 1e-3;
  QpOptions qp;

  void validate() const;
};

template <class Point>
struct IterateState {
  Point x;
  Vector ineq_mult;
  Vector eq_mult;
  double rho = 0.0;
  int k = 0;
};

inline constexpr std::array<double, 3> kDescentSteps = {1e-4, 1e-5, 1e-6};

// Values after iteration `iter` (cost, residual and violation at x_{k+1};
// the residual uses the subproblem multipliers lambda^{k+1}).
struct IterationRecord {
  int iter = 0;
  double cost = 0.0;
  double kkt_residual = 0.0;
  double max_violation = 0.0;
  double rho = 0.0;
  double alpha = 0.0;
  double dir_norm = 0.0;
  bool elastic = false;
  QpStatus qp_status = QpStatus::Solved;
  int ls_trials = 0;
  double merit_before = 0.0;  // F_rho(x_k)
  double merit_after = 0.0;   // F_rho(x_{k+1}), same rho
  double hzz = 0.0;           // <H z, z>
  double multiplier_bound = 0.0;  // max{max lambda, max |mu|}
  double ineq_mult_norm = 0.0;
  double eq_mult_norm = 0.0;
  double iterate_norm = 0.0;
  double slack_norm = 0.0;         // elastic slacks (v, w+, w-)
  double phase1_violation = 0.0;   // > 0 only for infeasible subproblems
  double qp_kkt = 0.0;
  bool rho_above_rho_bar = false;
  bool descent_checked = false;
  std::array<double, 3> descent_fd{};  // at kDescentSteps
  double descent_bound = 0.0;          // -<Hz,z> + tol |<Hz,z>|
  bool descent_ok = true;
};

struct SolverTrace {
  double initial_cost = 0.0;
  double initial_max_violation = 0.0;
  std::vector<IterationRecord> records;
  Vector final_ineq_mult;
  Vector final_eq_mult;
  double wall_time = 0.0;
  bool early_stopped = false;
};

// Raised when a QP or the line search fails; carries the trace so far.
class SolveAborted : public Error {
 public:
  SolveAborted(const std::string& what, SolverTrace trace, std::string kind, Matrix last_system)
      : Error(what),
        trace_(std::move(trace)),
        kind_(std::move(kind)),
        last_system_(std::move(last_system)) {}
  const SolverTrace& trace() const { return trace_; }
  const std::string& kind() const { return kind_; }  // "qp" or "line_search"
  // System matrix at the last accepted iterate.
  const Matrix& last_system() const { return last_system_; }

 private:
  SolverTrace trace_;
  std::string kind_;
  Matrix last_system_;
};

template <class Point>
struct SolveResult {
  IterateState<Point> state;
  SolverTrace trace;
};

struct Direction {
  Vector z;
  Vector ineq_mult;
  Vector eq_mult;
  bool elastic = false;
  QpStatus status = QpStatus::Solved;
  double slack_norm = 0.0;
  double phase1_violation = 0.0;
  double qp_kkt = 0.0;
};

// rho_prev if rho_prev >= Lambda, else Lambda + eps, with
// Lambda = max{max ineq_mult, max |eq_mult|} (0 with no constraints).
double penalty_update(double rho_prev, const Vector& ineq_mult, const Vector& eq_mult,
                      double eps);
double multiplier_bound(const Vector& ineq_mult, const Vector& eq_mult);

Matrix metric_operator(HChoice choice, Eigen::Index dim);

// Subproblem, then its elastic version when the subproblem is infeasible (or
// the best-effort iterate in RSQO mode).
Direction compute_direction(const QpProblem& qp, const SolverConfig& config);

// sqrt(||grad L||^2 + sum max(0,g)^2 + sum h^2 + sum max(0,-l)^2 + sum (l g)^2),
// or +inf off the manifold.
double kkt_residual(const Linearization& lin, const Vector& ineq_mult, const Vector& eq_mult);

double l1_violation(const Vector& ineq_values, const Vector& eq_values);

template <class Problem>
double kkt_residual(const Problem& problem, const typename Problem::Point& x,
                    const Vector& ineq_mult, const Vector& eq_mult) {
  if (!problem.on_manifold(x)) return std::numeric_limits<double>::infinity();
  return kkt_residual(problem.linearize(x), ineq_mult, eq_mult);
}

// F(x) = f(x) + rho (sum max(0, g) + sum |h|).
template <class Problem>
double merit_value(const Problem& problem, const typename Problem::Point& x, double rho) {
  return problem.cost(x) + rho * l1_violation(problem.ineq_values(x), problem.eq_values(x));
}

template <class Point>
struct LineSearchResult {
  double alpha = 1.0;
  Point x;
  double merit = 0.0;
  int trials = 0;
};

// Smallest l with sigma beta^l <H z, z> <= F(x) - F(R_x(beta^l z)).  Trials
// whose retraction leaves the manifold count as rejections.  When every trial
// fails and ||z|| <= stop_dir_norm the step is null (alpha = 0).
template <class Problem>
LineSearchResult<typename Problem::Point> line_search(const Problem& problem,
                                                      const typename Problem::Point& x,
                                                      const Vector& z, double rho, double hzz,
                                                      double merit_x, const SolverConfig& cfg) {
  LineSearchResult<typename Problem::Point> out;
  if (hzz == 0.0) {
    out.x = x;
    out.merit = merit_x;
    return out;
  }
  double alpha = 1.0;
  for (int l = 0; l <= cfg.max_ls_trials; ++l) {
    out.trials = l + 1;
    try {
      typename Problem::Point trial = problem.retract(x, alpha * z);
      if (problem.on_manifold(trial)) {
        const double f = merit_value(problem, trial, rho);
        if (cfg.sigma * alpha * hzz <= merit_x - f) {
          out.alpha = alpha;
          out.x = std::move(trial);
          out.merit = f;
          return out;
        }
      }
    } catch (const InvariantViolation&) {
    }
    alpha *= cfg.beta;
  }
  // Below stop_dir_norm the merit decrease is under the rounding floor: null step.
  if (z.norm() <= cfg.stop_dir_norm) {
    out.alpha = 0.0;
    out.x = x;
    out.merit = merit_x;
    return out;
  }
  throw LineSearchFailure("line search: no acceptable step within " +
                          std::to_string(cfg.max_ls_trials) + " trials");
}

template <class Problem>
SolveResult<typename Problem::Point> solve(const Problem& problem,
                                           const typename Problem::Point& x0,
                                           const SolverConfig& cfg) {
  using Point = typename Problem::Point;
  cfg.validate();
  if (!problem.on_manifold(x0)) throw InvariantViolation("solve: initial point is off the manifold");
  const auto t0 = std::chrono::steady_clock::now();

  IterateState<Point> st{x0, Vector::Zero(0), Vector::Zero(0), cfg.rho_init, 0};
  SolverTrace trace;
  trace.initial_cost = problem.cost(x0);
  trace.initial_max_violation =
      std::max({0.0, problem.ineq_values(x0).size() ? problem.ineq_values(x0).maxCoeff() : 0.0,
                problem.eq_values(x0).size() ? problem.eq_values(x0).cwiseAbs().maxCoeff() : 0.0});
  const Matrix H = metric_operator(cfg.h_choice, problem.dim());

  auto abort = [&](const std::string& what, const std::string& kind) {
    trace.final_ineq_mult = st.ineq_mult;
    trace.final_eq_mult = st.eq_mult;
    trace.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return SolveAborted("iteration " + std::to_string(st.k) + ": " + what, trace, kind,
                        problem.system_matrix(st.x));
  };

  Linearization lin = problem.linearize(st.x);
  for (st.k = 0; st.k < cfg.max_iter; ++st.k) {
    const QpProblem qp = build_subproblem(lin.grad, lin.ineq_values, lin.ineq_jacobian,
                                          lin.eq_values, lin.eq_jacobian, H);
    Direction dir;
    try {
      dir = compute_direction(qp, cfg);
    } catch (const Error& e) {
      throw abort(e.what(), "qp");
    }
    IterationRecord rec;
    rec.iter = st.k;
    rec.elastic = dir.elastic;
    rec.qp_status = dir.status;
    rec.slack_norm = dir.slack_norm;
    rec.phase1_violation = dir.phase1_violation;
    rec.qp_kkt = dir.qp_kkt;
    rec.dir_norm = dir.z.norm();
    rec.multiplier_bound = multiplier_bound(dir.ineq_mult, dir.eq_mult);
    rec.ineq_mult_norm = dir.ineq_mult.norm();
    rec.eq_mult_norm = dir.eq_mult.norm();

    const double max_viol_k = std::max(
        {0.0, lin.ineq_values.size() ? lin.ineq_values.maxCoeff() : 0.0,
         lin.eq_values.size() ? lin.eq_values.cwiseAbs().maxCoeff() : 0.0});
    if (cfg.early_stop && rec.dir_norm <= cfg.stop_dir_norm && max_viol_k <= cfg.stop_violation) {
      trace.early_stopped = true;
      st.ineq_mult = dir.ineq_mult;
      st.eq_mult = dir.eq_mult;
      break;
    }

    st.rho = penalty_update(st.rho, dir.ineq_mult, dir.eq_mult, cfg.eps_pen);
    rec.rho = st.rho;
    rec.rho_above_rho_bar = st.rho > cfg.rho_bar;
    rec.hzz = dir.z.dot(H * dir.z);
    rec.merit_before = problem.cost(st.x) + st.rho * l1_violation(lin.ineq_values, lin.eq_values);

    // Checked on every elastic iteration.  An active slack pins its multiplier
    // at rho_bar, so the update usually lands at rho_bar + eps; rec.rho_above_rho_bar
    // records when the strict hypothesis rho_bar >= rho_k is missed.
    if (cfg.check_descent && dir.elastic) {
      rec.descent_checked = true;
      for (size_t i = 0; i < kDescentSteps.size(); ++i) {
        const double h = kDescentSteps[i];
        rec.descent_fd[i] =
            (merit_value(problem, problem.retract(st.x, h * dir.z), st.rho) - rec.merit_before) / h;
      }
      rec.descent_bound = -rec.hzz + cfg.descent_rel_tol * std::abs(rec.hzz);
      rec.descent_ok = rec.descent_fd.back() <= rec.descent_bound;
    }

    LineSearchResult<Point> ls;
    try {
      ls = line_search(problem, st.x, dir.z, st.rho, rec.hzz, rec.merit_before, cfg);
    } catch (const LineSearchFailure& e) {
      throw abort(e.what(), "line_search");
    }
    rec.alpha = ls.alpha;
    rec.ls_trials = ls.trials;
    rec.merit_after = ls.merit;

    st.x = std::move(ls.x);
    st.ineq_mult = dir.ineq_mult;
    st.eq_mult = dir.eq_mult;
    lin = problem.linearize(st.x);

    rec.cost = problem.cost(st.x);
    rec.kkt_residual = problem.on_manifold(st.x)
                           ? kkt_residual(lin, st.ineq_mult, st.eq_mult)
                           : std::numeric_limits<double>::infinity();
    rec.max_violation = std::max(
        {0.0, lin.ineq_values.size() ? lin.ineq_values.maxCoeff() : 0.0,
         lin.eq_values.size() ? lin.eq_values.cwiseAbs().maxCoeff() : 0.0});
    rec.iterate_norm = problem.point_norm(st.x);
    trace.records.push_back(rec);
  }
  trace.final_ineq_mult = st.ineq_mult;
  trace.final_eq_mult = st.eq_mult;
  trace.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {std::move(st), std::move(trace)};
}

// `iter,cost,kkt_residual,max_violation,rho,alpha,dir_norm,elastic,qp_status`.
void write_trace_csv(std::ostream& os, const SolverTrace& trace);
// Every record field; deterministic (no wall time).
nlohmann::json trace_to_json(const SolverTrace& trace);

nlohmann::json solver_config_to_json(const SolverConfig& cfg);
// Missing keys keep the values already in `base`.
SolverConfig solver_config_from_json(const nlohmann::json& j, SolverConfig base = {});

}  // namespace stableid
