#pragma once

// Experiment runner: instance generation, the four modeling/algorithm
// variants, reports and the multi-seed sweep.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "stableid/model.hpp"
#include "stableid/solver.hpp"

namespace stableid {

enum class Variant { RnloErsqo, RnloRsqo, Enlo, Ucro };

const char* variant_name(Variant v);  // "RNLO-eRSQO", "RNLO-RSQO", "ENLO", "UCRO"
Variant variant_from_name(const std::string& name);
std::vector<Variant> all_variants();
Modeling variant_modeling(Variant v);

// Default solver settings with the forward-difference descent check on.
SolverConfig with_descent_check();

struct ExperimentConfig {
  Eigen::Index n = 10;
  double dt = 0.02;
  Eigen::Index N = 39;  // stored states x_0 .. x_{N-1}
  double snr_db = 20.0;
  std::uint64_t seed = 1;
  ConstraintGenOptions constraints;
  std::vector<Variant> variants = all_variants();
  SolverConfig solver = with_descent_check();  // shared defaults
  std::map<Variant, nlohmann::json> solver_overrides;  // per-variant key overrides
  std::string output_dir;

  void validate() const;
  // eRSQO settings for the variant (elastic mode off for RNLO-RSQO).
  SolverConfig solver_for(Variant v) const;
};

nlohmann::json experiment_config_to_json(const ExperimentConfig& c);
// Missing keys keep the defaults.
ExperimentConfig experiment_config_from_json(const nlohmann::json& j);

struct Instance {
  std::uint64_t seed = 0;
  ProductPoint truth;
  Matrix a_true;
  Trajectory trajectory;  // noisy and scaled
  ConstraintSpec spec;
  ProductPoint initial;
};

// Draws, in order: the true triple, the initial state (uniform on [0,1]^n),
// the noise, the constraint index sets and bands, and the initial triple.
Instance generate_instance(const ExperimentConfig& config);

nlohmann::json instance_to_json(const Instance& inst);
Instance instance_from_json(const nlohmann::json& j);

struct VariantResult {
  Variant variant = Variant::RnloErsqo;
  bool ok = true;
  std::string failure;       // empty when ok
  std::string failure_kind;  // "qp" or "line_search"
  Matrix a_final;
  std::optional<ProductPoint> x_final;  // Riemannian variants only
  Vector ineq_mult;
  Vector eq_mult;
  double cost = 0.0;
  double residual = 0.0;       // residual_for_variant at the final iterate
  double max_violation = 0.0;  // against the instance constraints for every variant
  double spectral_abscissa = 0.0;
  EigReport eigs;
  double wall_time = 0.0;
  SolverTrace trace;
};

struct ExperimentReport {
  ExperimentConfig config;
  Instance instance;
  std::vector<std::complex<double>> true_eigenvalues;
  std::vector<VariantResult> results;
};

// KKT residual for the RNLO variants, the same formula over R^{n x n} for
// ENLO and the Riemannian gradient norm for UCRO.
double residual_for_variant(Variant v, const Instance& inst, const VariantResult& r);

ExperimentReport run_experiment(const ExperimentConfig& config);
ExperimentReport run_experiment(const ExperimentConfig& config, const Instance& inst);

// Deterministic: contains no wall times (those go to timing.json).
nlohmann::json report_to_json(const ExperimentReport& report);

// report.json, timing.json, instance.json, trace_<v>.csv, trace_<v>.json, eigs_<v>.csv.
void emit_report(const ExperimentReport& report, const std::string& dir);

// Per-trace monotonicity checks.
int merit_monotonicity_violations(const SolverTrace& trace);
int penalty_monotonicity_violations(const SolverTrace& trace, double rho_init);

struct SweepSummary {
  std::vector<std::uint64_t> seeds;
  std::map<Variant, std::vector<double>> rel_err1;
  std::map<Variant, std::vector<double>> abscissa;
  std::map<Variant, std::vector<double>> max_violation;
  std::map<Variant, std::vector<bool>> ok;
  std::map<Variant, double> median_rel_err1;
  int ersqo_stable_feasible = 0;
  int enlo_unstable = 0;
  int ucro_violating = 0;
  int ucro_runs_with_constraints = 0;
  int merit_violations = 0;
  int penalty_violations = 0;
  int elastic_iterations = 0;
  int descent_checked = 0;
  int descent_failures = 0;
  int descent_rho_above = 0;  // checked iterations with rho_k > rho_bar
  int line_search_failures = 0;
  double wall_time = 0.0;
};

// Seeds config.seed .. config.seed + num_seeds - 1; writes one report
// directory per seed below config.output_dir when it is non-empty.
SweepSummary run_sweep(const ExperimentConfig& config, int num_seeds);
nlohmann::json sweep_to_json(const SweepSummary& s);

double median(std::vector<double> v);

}  // namespace stableid
