// Command-line front end: experiments, sweeps and numerical diagnostics.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "stableid/errors.hpp"
#include "stableid/harness.hpp"
#include "stableid/oracles.hpp"

using namespace stableid;

namespace {

nlohmann::json load_json(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot read " + path);
  try {
    return nlohmann::json::parse(is);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path + ": " + e.what());
  }
}

Matrix gaussian(Eigen::Index r, Eigen::Index c, Rng& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  Matrix m(r, c);
  for (Eigen::Index j = 0; j < c; ++j)
    for (Eigen::Index i = 0; i < r; ++i) m(i, j) = nd(rng);
  return m;
}

void print_report(const ExperimentReport& rep) {
  std::printf("seed %llu  n=%lld  inequalities=%lld  equalities=%lld\n",
              static_cast<unsigned long long>(rep.instance.seed),
              static_cast<long long>(rep.instance.trajectory.n()),
              static_cast<long long>(rep.instance.spec.num_inequalities()),
              static_cast<long long>(rep.instance.spec.num_equalities()));
  std::printf("%-11s %-4s %12s %12s %12s %12s %12s %12s %9s\n", "variant", "ok", "cost", "residual",
              "max_viol", "abscissa", "RelErr1", "RelErr2", "time[s]");
  for (const auto& r : rep.results) {
    auto rel = [&](size_t i) { return i < r.eigs.rel_errors.size() ? r.eigs.rel_errors[i] : 0.0; };
    std::printf("%-11s %-4s %12.4e %12.4e %12.4e %12.4e %12.4e %12.4e %9.2f\n",
                variant_name(r.variant), r.ok ? "yes" : "no", r.cost, r.residual, r.max_violation,
                r.spectral_abscissa, rel(0), rel(1), r.wall_time);
    if (!r.ok) std::printf("  failure (%s): %s\n", r.failure_kind.c_str(), r.failure.c_str());
  }
}

int cmd_run(const std::string& config_path, const std::string& instance_path,
            const std::string& out_dir) {
  ExperimentConfig c = config_path.empty() ? ExperimentConfig{}
                                           : experiment_config_from_json(load_json(config_path));
  if (!out_dir.empty()) c.output_dir = out_dir;
  const ExperimentReport rep = instance_path.empty()
                                   ? run_experiment(c)
                                   : run_experiment(c, instance_from_json(load_json(instance_path)));
  print_report(rep);
  if (!c.output_dir.empty()) {
    emit_report(rep, c.output_dir);
    std::printf("wrote %s\n", c.output_dir.c_str());
  }
  return 0;
}

// Central differences of f o R_x along random directions against <grad, v>.
int cmd_gradcheck(int n, std::uint64_t seed, int pairs, double tol) {
  Rng rng(seed);
  auto random_spd = [&]() {
    const Matrix g = gaussian(n, n, rng);
    return SpdMatrix(g * g.transpose() / n + 0.5 * Matrix::Identity(n, n));
  };
  auto random_sym = [&]() {
    const Matrix g = gaussian(n, n, rng);
    return SymMatrix(0.5 * (g + g.transpose()));
  };
  Trajectory t;
  t.dt = 0.02;
  t.states = gaussian(n, 39, rng);
  double worst = 0.0;
  for (int k = 0; k < pairs; ++k) {
    const Matrix j = gaussian(n, n, rng);
    const ProductPoint x(skew_project(j), random_spd(), random_spd());
    const Matrix w = gaussian(n, n, rng);
    const TangentVector v(skew_project(w), random_sym(), random_sym());
    const Matrix a = assemble_A(x);
    ConstraintSpec s;
    s.one_box.push_back({0, n - 1, a(0, n - 1) - 1.0, a(0, n - 1) + 1.0});
    if (n > 1) {
      s.two_box.push_back({n - 1, 0, a(n - 1, 0) - 2.0, a(n - 1, 0) + 2.0, a(n - 1, 0) + 0.5, 0.3});
    }
    const double h = 1e-5;
    auto fd = [&](auto&& f) { return (f(retract(x, h * v)) - f(retract(x, -h * v))) / (2.0 * h); };
    auto gap = [](double p, double q) {
      return std::abs(p - q) / std::max({std::abs(p), std::abs(q), 1e-8});
    };
    const double e0 = gap(metric(x, objective_gradient(x, t), v),
                          fd([&](const ProductPoint& p) { return objective_value(p, t); }));
    worst = std::max(worst, e0);
    const auto grads = constraint_gradients(x, s);
    for (size_t r = 0; r < grads.size(); ++r) {
      const double e = gap(metric(x, grads[r], v), fd([&](const ProductPoint& p) {
                             return constraint_values(p, s).inequalities()(static_cast<Eigen::Index>(r));
                           }));
      worst = std::max(worst, e);
    }
    std::printf("pair %2d  objective rel err %.3e\n", k, e0);
  }
  std::printf("n=%d seed=%llu pairs=%d worst rel err %.3e (tol %.0e): %s\n", n,
              static_cast<unsigned long long>(seed), pairs, worst, tol,
              worst <= tol ? "ok" : "FAILED");
  return worst <= tol ? 0 : 1;
}

int cmd_qp_oracle(int dim, int trials, std::uint64_t seed, int max_rows) {
  Rng rng(seed);
  std::uniform_int_distribution<int> rows(0, max_rows);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  int bad = 0;
  double worst_primal = 0.0, worst_dual = 0.0;
  for (int k = 0; k < trials; ++k) {
    const int total = rows(rng);
    std::uniform_int_distribution<int> split(0, std::min(total, dim - 1));
    const int me = split(rng), mi = total - me;
    QpProblem qp;
    const Matrix m = gaussian(dim, dim, rng);
    qp.H = m * m.transpose() + 0.5 * Matrix::Identity(dim, dim);
    qp.g = 2.0 * gaussian(dim, 1, rng);
    const Vector zbar = gaussian(dim, 1, rng);
    qp.A_ineq = gaussian(mi, dim, rng);
    qp.b_ineq.resize(mi);
    for (int i = 0; i < mi; ++i) qp.b_ineq(i) = -qp.A_ineq.row(i).dot(zbar) - unif(rng);
    qp.A_eq = gaussian(me, dim, rng);
    qp.b_eq = -qp.A_eq * zbar;
    const OracleSolution o = brute_force_qp(qp);
    const QpSolution s = solve_qp(qp);
    const double dp = (s.z - o.z).cwiseAbs().maxCoeff();
    double dd = 0.0;
    if (mi) dd = std::max(dd, (s.ineq_mult - o.ineq_mult).cwiseAbs().maxCoeff());
    if (me) dd = std::max(dd, (s.eq_mult - o.eq_mult).cwiseAbs().maxCoeff());
    worst_primal = std::max(worst_primal, dp);
    worst_dual = std::max(worst_dual, dd);
    if (s.status != QpStatus::Solved || dp > 1e-8 || dd > 1e-8) ++bad;
  }
  std::printf("dim=%d trials=%d mismatches=%d worst primal %.3e worst dual %.3e\n", dim, trials, bad,
              worst_primal, worst_dual);
  return bad == 0 ? 0 : 1;
}

int cmd_sweep(const std::string& config_path, int seeds, const std::string& out_dir) {
  ExperimentConfig c = config_path.empty() ? ExperimentConfig{}
                                           : experiment_config_from_json(load_json(config_path));
  if (!out_dir.empty()) c.output_dir = out_dir;
  const SweepSummary s = run_sweep(c, seeds);
  const nlohmann::json j = sweep_to_json(s);
  if (!c.output_dir.empty()) {
    std::ofstream os(c.output_dir + "/sweep.json");
    os << j.dump(2) << "\n";
    if (!os) throw IoError("cannot write " + c.output_dir + "/sweep.json");
  }
  std::printf("%-11s %14s %10s %10s\n", "variant", "median RelErr1", "stable", "feasible");
  for (const auto& [v, errs] : s.rel_err1) {
    int stable = 0, feasible = 0;
    for (double a : s.abscissa.at(v)) stable += a < 0.0;
    for (double m : s.max_violation.at(v)) feasible += m <= 1e-6;
    std::printf("%-11s %14.4e %7d/%-2zu %7d/%-2zu\n", variant_name(v), s.median_rel_err1.at(v),
                stable, errs.size(), feasible, errs.size());
  }
  std::printf("eRSQO stable and feasible %d/%d, ENLO unstable %d, UCRO violating %d/%d\n",
              s.ersqo_stable_feasible, seeds, s.enlo_unstable, s.ucro_violating,
              s.ucro_runs_with_constraints);
  std::printf("elastic iterations %d, descent checked %d, failed %d; line-search failures %d; "
              "merit violations %d, penalty violations %d; %.1f s\n",
              s.elastic_iterations, s.descent_checked, s.descent_failures, s.line_search_failures,
              s.merit_violations, s.penalty_violations, s.wall_time);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stable linear system identification with elastic Riemannian SQO"};
  app.require_subcommand(1);

  std::string config_path, instance_path, out_dir;
  auto* run = app.add_subcommand("run", "Run one experiment and print the per-variant table");
  run->add_option("--config", config_path, "Experiment config JSON (defaults when omitted)");
  run->add_option("--instance", instance_path, "Replay an instance.json instead of generating one");
  run->add_option("--out", out_dir, "Report directory (overrides output_dir in the config)");

  int n = 10, pairs = 20;
  std::uint64_t seed = 1;
  double tol = 1e-6;
  auto* gc = app.add_subcommand("gradcheck", "Finite-difference check of all gradients");
  gc->add_option("--n", n, "State dimension")->check(CLI::PositiveNumber);
  gc->add_option("--seed", seed, "RNG seed");
  gc->add_option("--pairs", pairs, "Random (point, direction) pairs")->check(CLI::PositiveNumber);
  gc->add_option("--tol", tol, "Relative tolerance");

  int dim = 4, trials = 1000, max_rows = 4;
  auto* qo = app.add_subcommand("qp-oracle", "Compare the QP solver against active-set enumeration");
  qo->add_option("--dim", dim, "QP dimension")->check(CLI::Range(1, 12));
  qo->add_option("--trials", trials, "Number of random instances")->check(CLI::PositiveNumber);
  qo->add_option("--seed", seed, "RNG seed");
  qo->add_option("--max-rows", max_rows, "Maximum constraint rows")->check(CLI::Range(0, 12));

  int seeds = 20;
  auto* sw = app.add_subcommand("sweep", "Multi-seed protocol with medians and counters");
  sw->add_option("--seeds", seeds, "Number of consecutive seeds")->check(CLI::PositiveNumber);
  sw->add_option("--config", config_path, "Experiment config JSON; seed is the first seed");
  sw->add_option("--out", out_dir, "Directory for per-seed reports and sweep.json");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run) return cmd_run(config_path, instance_path, out_dir);
    if (*gc) return cmd_gradcheck(n, seed, pairs, tol);
    if (*qo) return cmd_qp_oracle(dim, trials, seed, max_rows);
    if (*sw) return cmd_sweep(config_path, seeds, out_dir);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
