#include "stableid/harness.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <type_traits>

#include "stableid/errors.hpp"
#include "stableid/identification_problem.hpp"
#include "stableid/io.hpp"

namespace stableid {
namespace {

nlohmann::json eigs_to_json(const std::vector<std::complex<double>>& eigs) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& e : eigs) out.push_back({number_to_json(e.real()), number_to_json(e.imag())});
  return out;
}

nlohmann::json vector_to_json(const Vector& v) {
  nlohmann::json out = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(number_to_json(v(i)));
  return out;
}

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream os(p);
  if (!os) throw IoError("cannot write " + p.string());
  return os;
}

void write_json(const std::filesystem::path& p, const nlohmann::json& j) {
  auto os = open_out(p);
  os << j.dump(2) << "\n";
  if (!os) throw IoError("write failed: " + p.string());
}

// Multipliers padded with zeros when a run failed before its first subproblem.
Vector sized(const Vector& v, Eigen::Index n) { return v.size() == n ? v : Vector::Zero(n); }

template <class Problem>
void run_one(const Problem& problem, const typename Problem::Point& x0, const SolverConfig& cfg,
             const ConstraintSpec& full_spec, VariantResult& out) {
  try {
    auto res = solve(problem, x0, cfg);
    out.a_final = problem.system_matrix(res.state.x);
    if constexpr (std::is_same_v<typename Problem::Point, ProductPoint>) {
      out.x_final = res.state.x;
    }
    out.ineq_mult = res.state.ineq_mult;
    out.eq_mult = res.state.eq_mult;
    out.trace = std::move(res.trace);
  } catch (const SolveAborted& e) {
    out.ok = false;
    out.failure = e.what();
    out.failure_kind = e.kind();
    out.a_final = e.last_system();
    out.trace = e.trace();
    out.ineq_mult = out.trace.final_ineq_mult;
    out.eq_mult = out.trace.final_eq_mult;
  }
  out.wall_time = out.trace.wall_time;
  out.cost = objective_value(out.a_final, problem.trajectory());
  out.max_violation = max_violation(out.a_final, full_spec);
  out.spectral_abscissa = spectral_abscissa(out.a_final);
}

}  // namespace

SolverConfig with_descent_check() {
  SolverConfig c;
  c.check_descent = true;
  return c;
}

const char* variant_name(Variant v) {
  switch (v) {
    case Variant::RnloErsqo:
      return "RNLO-eRSQO";
    case Variant::RnloRsqo:
      return "RNLO-RSQO";
    case Variant::Enlo:
      return "ENLO";
    case Variant::Ucro:
      return "UCRO";
  }
  return "unknown";
}

Variant variant_from_name(const std::string& name) {
  for (Variant v : all_variants()) {
    if (name == variant_name(v)) return v;
  }
  throw IoError("unknown variant '" + name + "'");
}

std::vector<Variant> all_variants() {
  return {Variant::RnloErsqo, Variant::RnloRsqo, Variant::Enlo, Variant::Ucro};
}

Modeling variant_modeling(Variant v) {
  switch (v) {
    case Variant::RnloErsqo:
    case Variant::RnloRsqo:
      return Modeling::RNLO;
    case Variant::Enlo:
      return Modeling::ENLO;
    case Variant::Ucro:
      return Modeling::UCRO;
  }
  return Modeling::RNLO;
}

void ExperimentConfig::validate() const {
  if (n < 1) throw InvariantViolation("experiment config: n must be >= 1");
  if (N < 2) throw InvariantViolation("experiment config: N must be >= 2");
  if (!(dt > 0.0)) throw InvariantViolation("experiment config: dt must be positive");
  const Eigen::Index cells = n * n;
  if (constraints.num_one_box < 0 || constraints.num_two_box < 0 || constraints.num_equality < 0 ||
      constraints.num_one_box + constraints.num_two_box + constraints.num_equality > cells) {
    throw InvariantViolation("experiment config: constraint counts exceed the n*n entries");
  }
  solver.validate();
  for (Variant v : variants) solver_for(v).validate();
}

SolverConfig ExperimentConfig::solver_for(Variant v) const {
  SolverConfig c = solver;
  c.elastic_enabled = v != Variant::RnloRsqo;
  auto it = solver_overrides.find(v);
  if (it != solver_overrides.end()) c = solver_config_from_json(it->second, c);
  return c;
}

nlohmann::json experiment_config_to_json(const ExperimentConfig& c) {
  nlohmann::json variants = nlohmann::json::array();
  for (Variant v : c.variants) variants.push_back(variant_name(v));
  nlohmann::json overrides = nlohmann::json::object();
  for (const auto& [v, j] : c.solver_overrides) overrides[variant_name(v)] = j;
  return {{"n", c.n},
          {"dt", c.dt},
          {"N", c.N},
          {"snr_db", number_to_json(c.snr_db)},
          {"seed", c.seed},
          {"constraints",
           {{"num_one_box", c.constraints.num_one_box},
            {"num_two_box", c.constraints.num_two_box},
            {"num_equality", c.constraints.num_equality},
            {"rel_margin", c.constraints.rel_margin},
            {"abs_margin", c.constraints.abs_margin}}},
          {"variants", variants},
          {"solver", solver_config_to_json(c.solver)},
          {"solver_overrides", overrides},
          {"output_dir", c.output_dir}};
}

ExperimentConfig experiment_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw IoError("experiment config JSON: expected an object");
  ExperimentConfig c;
  try {
    c.n = j.value("n", c.n);
    c.dt = j.value("dt", c.dt);
    c.N = j.value("N", c.N);
    if (j.contains("snr_db")) c.snr_db = number_from_json(j.at("snr_db"));
    c.seed = j.value("seed", c.seed);
    if (j.contains("constraints")) {
      const auto& k = j.at("constraints");
      c.constraints.num_one_box = k.value("num_one_box", c.constraints.num_one_box);
      c.constraints.num_two_box = k.value("num_two_box", c.constraints.num_two_box);
      c.constraints.num_equality = k.value("num_equality", c.constraints.num_equality);
      c.constraints.rel_margin = k.value("rel_margin", c.constraints.rel_margin);
      c.constraints.abs_margin = k.value("abs_margin", c.constraints.abs_margin);
    }
    if (j.contains("variants")) {
      c.variants.clear();
      for (const auto& v : j.at("variants")) c.variants.push_back(variant_from_name(v.get<std::string>()));
    }
    if (j.contains("solver")) c.solver = solver_config_from_json(j.at("solver"), c.solver);
    if (j.contains("solver_overrides")) {
      for (const auto& [name, o] : j.at("solver_overrides").items()) {
        c.solver_overrides[variant_from_name(name)] = o;
      }
    }
    c.output_dir = j.value("output_dir", c.output_dir);
  } catch (const nlohmann::json::exception& ex) {
    throw IoError(std::string("experiment config JSON: ") + ex.what());
  }
  c.validate();
  return c;
}

Instance generate_instance(const ExperimentConfig& config) {
  config.validate();
  Rng rng(config.seed);
  Instance inst;
  inst.seed = config.seed;
  inst.truth = random_stable_triple(config.n, rng);
  inst.a_true = assemble_A(inst.truth);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Vector x0(config.n);
  for (Eigen::Index i = 0; i < config.n; ++i) x0(i) = unif(rng);
  const Trajectory clean = simulate_true(inst.a_true, x0, config.dt, config.N);
  inst.trajectory = scale_trajectory(add_noise(clean, config.snr_db, rng));
  inst.spec = generate_constraints(inst.a_true, config.constraints, rng);
  inst.initial = random_initial_point(config.n, rng);
  return inst;
}

nlohmann::json instance_to_json(const Instance& inst) {
  return {{"seed", inst.seed},
          {"truth", point_to_json(inst.truth)},
          {"A_true", matrix_to_json(inst.a_true)},
          {"dt", inst.trajectory.dt},
          {"states", matrix_to_json(inst.trajectory.states)},
          {"constraints", constraint_spec_to_json(inst.spec)},
          {"initial", point_to_json(inst.initial)}};
}

Instance instance_from_json(const nlohmann::json& j) {
  Instance inst;
  try {
    inst.seed = j.at("seed").get<std::uint64_t>();
    inst.truth = point_from_json(j.at("truth"));
    inst.a_true = matrix_from_json(j.at("A_true"));
    inst.trajectory.dt = j.at("dt").get<double>();
    inst.trajectory.states = matrix_from_json(j.at("states"));
    inst.spec = constraint_spec_from_json(j.at("constraints"));
    inst.initial = point_from_json(j.at("initial"));
  } catch (const nlohmann::json::exception& ex) {
    throw IoError(std::string("instance JSON: ") + ex.what());
  }
  inst.trajectory.validate();
  inst.spec.validate(inst.trajectory.n());
  return inst;
}

double residual_for_variant(Variant v, const Instance& inst, const VariantResult& r) {
  const ConstraintSpec empty;
  switch (variant_modeling(v)) {
    case Modeling::RNLO:
    case Modeling::UCRO: {
      if (!r.x_final) return std::numeric_limits<double>::infinity();
      const ConstraintSpec& spec = variant_modeling(v) == Modeling::UCRO ? empty : inst.spec;
      const RiemannianIdentificationProblem p(inst.trajectory, spec);
      return kkt_residual(p, *r.x_final, sized(r.ineq_mult, spec.num_inequalities()),
                          sized(r.eq_mult, spec.num_equalities()));
    }
    case Modeling::ENLO: {
      const EuclideanIdentificationProblem p(inst.trajectory, inst.spec);
      return kkt_residual(p, r.a_final, sized(r.ineq_mult, inst.spec.num_inequalities()),
                          sized(r.eq_mult, inst.spec.num_equalities()));
    }
  }
  return std::numeric_limits<double>::infinity();
}

ExperimentReport run_experiment(const ExperimentConfig& config) {
  return run_experiment(config, generate_instance(config));
}

ExperimentReport run_experiment(const ExperimentConfig& config, const Instance& inst) {
  config.validate();
  ExperimentReport rep;
  rep.config = config;
  rep.instance = inst;
  rep.true_eigenvalues = sorted_eigenvalues(inst.a_true);
  const ConstraintSpec empty;
  for (Variant v : config.variants) {
    VariantResult r;
    r.variant = v;
    const SolverConfig cfg = config.solver_for(v);
    switch (variant_modeling(v)) {
      case Modeling::RNLO:
        run_one(RiemannianIdentificationProblem(inst.trajectory, inst.spec), inst.initial, cfg,
                inst.spec, r);
        break;
      case Modeling::ENLO:
        run_one(EuclideanIdentificationProblem(inst.trajectory, inst.spec),
                assemble_A(inst.initial), cfg, inst.spec, r);
        break;
      case Modeling::UCRO:
        run_one(RiemannianIdentificationProblem(inst.trajectory, empty), inst.initial, cfg,
                inst.spec, r);
        break;
    }
    r.residual = residual_for_variant(v, inst, r);
    r.eigs = eig_report(r.a_final, inst.a_true);
    rep.results.push_back(std::move(r));
  }
  return rep;
}

int merit_monotonicity_violations(const SolverTrace& trace) {
  int bad = 0;
  for (const auto& r : trace.records) {
    if (!(r.merit_after <= r.merit_before)) ++bad;
  }
  return bad;
}

int penalty_monotonicity_violations(const SolverTrace& trace, double rho_init) {
  int bad = 0;
  double prev = rho_init;
  for (const auto& r : trace.records) {
    if (!(r.rho >= prev)) ++bad;
    prev = r.rho;
  }
  return bad;
}

nlohmann::json report_to_json(const ExperimentReport& report) {
  nlohmann::json j;
  j["seed"] = report.instance.seed;
  j["config"] = experiment_config_to_json(report.config);
  j["true_eigenvalues"] = eigs_to_json(report.true_eigenvalues);
  j["num_inequalities"] = report.instance.spec.num_inequalities();
  j["num_equalities"] = report.instance.spec.num_equalities();
  nlohmann::json vars = nlohmann::json::object();
  for (const auto& r : report.results) {
    const std::string name = variant_name(r.variant);
    int elastic = 0;
    for (const auto& rec : r.trace.records) elastic += rec.elastic ? 1 : 0;
    nlohmann::json rel = nlohmann::json::array();
    for (double e : r.eigs.rel_errors) rel.push_back(number_to_json(e));
    vars[name] = {
        {"ok", r.ok},
        {"failure", r.failure},
        {"failure_kind", r.failure_kind},
        {"iterations", r.trace.records.size()},
        {"elastic_iterations", elastic},
        {"final_rho", r.trace.records.empty() ? nlohmann::json(nullptr)
                                              : number_to_json(r.trace.records.back().rho)},
        {"cost", number_to_json(r.cost)},
        {"residual", number_to_json(r.residual)},
        {"max_violation", number_to_json(r.max_violation)},
        {"spectral_abscissa", number_to_json(r.spectral_abscissa)},
        {"stable", r.spectral_abscissa < 0.0},
        {"eigenvalues", eigs_to_json(r.eigs.eigenvalues)},
        {"rel_errors", rel},
        {"A_final", matrix_to_json(r.a_final)},
        {"ineq_mult", vector_to_json(r.ineq_mult)},
        {"eq_mult", vector_to_json(r.eq_mult)},
        {"merit_monotonicity_violations", merit_monotonicity_violations(r.trace)},
        {"penalty_monotonicity_violations",
         penalty_monotonicity_violations(r.trace, report.config.solver_for(r.variant).rho_init)},
        {"trace_csv", "trace_" + name + ".csv"},
        {"trace_json", "trace_" + name + ".json"},
        {"eigs_csv", "eigs_" + name + ".csv"}};
  }
  j["variants"] = std::move(vars);
  return j;
}

void emit_report(const ExperimentReport& report, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir + ": " + ec.message());
  const fs::path base(dir);
  write_json(base / "report.json", report_to_json(report));
  write_json(base / "instance.json", instance_to_json(report.instance));
  nlohmann::json timing = nlohmann::json::object();
  for (const auto& r : report.results) {
    const std::string name = variant_name(r.variant);
    timing[name] = r.wall_time;
    {
      auto os = open_out(base / ("trace_" + name + ".csv"));
      write_trace_csv(os, r.trace);
    }
    write_json(base / ("trace_" + name + ".json"), trace_to_json(r.trace));
    {
      auto os = open_out(base / ("eigs_" + name + ".csv"));
      write_eigs_csv(os, r.eigs.eigenvalues);
    }
  }
  write_json(base / "timing.json", timing);
}

double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

SweepSummary run_sweep(const ExperimentConfig& config, int num_seeds) {
  const auto t0 = std::chrono::steady_clock::now();
  SweepSummary s;
  for (int i = 0; i < num_seeds; ++i) {
    ExperimentConfig c = config;
    c.seed = config.seed + static_cast<std::uint64_t>(i);
    const ExperimentReport rep = run_experiment(c);
    if (!config.output_dir.empty()) {
      emit_report(rep, config.output_dir + "/seed_" + std::to_string(c.seed));
    }
    s.seeds.push_back(c.seed);
    const bool constrained = !rep.instance.spec.empty();
    for (const auto& r : rep.results) {
      const Variant v = r.variant;
      s.rel_err1[v].push_back(r.eigs.rel_errors.empty() ? 0.0 : r.eigs.rel_errors[0]);
      s.abscissa[v].push_back(r.spectral_abscissa);
      s.max_violation[v].push_back(r.max_violation);
      s.ok[v].push_back(r.ok);
      if (r.failure_kind == "line_search") ++s.line_search_failures;
      if (v == Variant::RnloErsqo && r.ok && r.spectral_abscissa < 0.0 && r.max_violation <= 1e-6) {
        ++s.ersqo_stable_feasible;
      }
      if (v == Variant::Enlo && r.spectral_abscissa > 0.0) ++s.enlo_unstable;
      if (v == Variant::Ucro && constrained) {
        ++s.ucro_runs_with_constraints;
        if (r.max_violation > 1e-6) ++s.ucro_violating;
      }
      if (v != Variant::RnloRsqo) {
        s.merit_violations += merit_monotonicity_violations(r.trace);
        s.penalty_violations += penalty_monotonicity_violations(r.trace, c.solver_for(v).rho_init);
        for (const auto& rec : r.trace.records) {
          if (!rec.elastic) continue;
          ++s.elastic_iterations;
          if (rec.descent_checked) {
            ++s.descent_checked;
            if (!rec.descent_ok) ++s.descent_failures;
            if (rec.rho_above_rho_bar) ++s.descent_rho_above;
          }
        }
      }
    }
  }
  for (const auto& [v, errs] : s.rel_err1) s.median_rel_err1[v] = median(errs);
  s.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return s;
}

nlohmann::json sweep_to_json(const SweepSummary& s) {
  nlohmann::json j;
  j["seeds"] = s.seeds;
  nlohmann::json per = nlohmann::json::object();
  for (const auto& [v, errs] : s.rel_err1) {
    nlohmann::json e = nlohmann::json::array();
    for (double x : errs) e.push_back(number_to_json(x));
    nlohmann::json a = nlohmann::json::array();
    for (double x : s.abscissa.at(v)) a.push_back(number_to_json(x));
    nlohmann::json m = nlohmann::json::array();
    for (double x : s.max_violation.at(v)) m.push_back(number_to_json(x));
    per[variant_name(v)] = {{"rel_err1", e},
                            {"median_rel_err1", number_to_json(s.median_rel_err1.at(v))},
                            {"spectral_abscissa", a},
                            {"max_violation", m},
                            {"ok", s.ok.at(v)}};
  }
  j["variants"] = per;
  j["ersqo_stable_feasible"] = s.ersqo_stable_feasible;
  j["enlo_unstable"] = s.enlo_unstable;
  j["ucro_violating"] = s.ucro_violating;
  j["ucro_runs_with_constraints"] = s.ucro_runs_with_constraints;
  j["merit_violations"] = s.merit_violations;
  j["penalty_violations"] = s.penalty_violations;
  j["elastic_iterations"] = s.elastic_iterations;
  j["descent_checked"] = s.descent_checked;
  j["descent_failures"] = s.descent_failures;
  j["descent_rho_above"] = s.descent_rho_above;
  j["line_search_failures"] = s.line_search_failures;
  j["wall_time"] = s.wall_time;
  return j;
}

}  // namespace stableid
