#include <iomanip>
#include <ostream>

#include "stableid/io.hpp"
#include "stableid/solver.hpp"

namespace stableid {
namespace {

nlohmann::json vector_to_json(const Vector& v) {
  nlohmann::json out = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(number_to_json(v(i)));
  return out;
}

}  // namespace

void write_trace_csv(std::ostream& os, const SolverTrace& trace) {
  os << "iter,cost,kkt_residual,max_violation,rho,alpha,dir_norm,elastic,qp_status\n";
  os << std::setprecision(17);
  for (const auto& r : trace.records) {
    os << r.iter << "," << r.cost << "," << r.kkt_residual << "," << r.max_violation << ","
       << r.rho << "," << r.alpha << "," << r.dir_norm << "," << (r.elastic ? 1 : 0) << ","
       << to_string(r.qp_status) << "\n";
  }
}

nlohmann::json trace_to_json(const SolverTrace& trace) {
  nlohmann::json j;
  j["initial_cost"] = number_to_json(trace.initial_cost);
  j["initial_max_violation"] = number_to_json(trace.initial_max_violation);
  j["early_stopped"] = trace.early_stopped;
  j["final_ineq_mult"] = vector_to_json(trace.final_ineq_mult);
  j["final_eq_mult"] = vector_to_json(trace.final_eq_mult);
  nlohmann::json recs = nlohmann::json::array();
  for (const auto& r : trace.records) {
    nlohmann::json fd = nlohmann::json::array();
    for (double v : r.descent_fd) fd.push_back(number_to_json(v));
    recs.push_back({{"iter", r.iter},
                    {"cost", number_to_json(r.cost)},
                    {"kkt_residual", number_to_json(r.kkt_residual)},
                    {"max_violation", number_to_json(r.max_violation)},
                    {"rho", number_to_json(r.rho)},
                    {"alpha", number_to_json(r.alpha)},
                    {"dir_norm", number_to_json(r.dir_norm)},
                    {"elastic", r.elastic},
                    {"qp_status", to_string(r.qp_status)},
                    {"ls_trials", r.ls_trials},
                    {"merit_before", number_to_json(r.merit_before)},
                    {"merit_after", number_to_json(r.merit_after)},
                    {"hzz", number_to_json(r.hzz)},
                    {"multiplier_bound", number_to_json(r.multiplier_bound)},
                    {"ineq_mult_norm", number_to_json(r.ineq_mult_norm)},
                    {"eq_mult_norm", number_to_json(r.eq_mult_norm)},
                    {"iterate_norm", number_to_json(r.iterate_norm)},
                    {"slack_norm", number_to_json(r.slack_norm)},
                    {"phase1_violation", number_to_json(r.phase1_violation)},
                    {"qp_kkt", number_to_json(r.qp_kkt)},
                    {"rho_above_rho_bar", r.rho_above_rho_bar},
                    {"descent_checked", r.descent_checked},
                    {"descent_fd", fd},
                    {"descent_bound", number_to_json(r.descent_bound)},
                    {"descent_ok", r.descent_ok}});
  }
  j["records"] = std::move(recs);
  return j;
}

nlohmann::json solver_config_to_json(const SolverConfig& c) {
  return {{"rho_bar", c.rho_bar},
          {"rho_init", c.rho_init},
          {"eps_pen", c.eps_pen},
          {"beta", c.beta},
          {"sigma", c.sigma},
          {"max_iter", c.max_iter},
          {"elastic_enabled", c.elastic_enabled},
          {"h_choice", "identity"},
          {"max_ls_trials", c.max_ls_trials},
          {"early_stop", c.early_stop},
          {"stop_dir_norm", c.stop_dir_norm},
          {"stop_violation", c.stop_violation},
          {"check_descent", c.check_descent},
          {"descent_rel_tol", c.descent_rel_tol},
          {"qp_kkt_tol", c.qp.kkt_tol},
          {"qp_feasibility_tol", c.qp.feasibility_tol},
          {"qp_max_iter", c.qp.max_iter},
          {"qp_ipm_tol", c.qp.ipm_tol}};
}

SolverConfig solver_config_from_json(const nlohmann::json& j, SolverConfig c) {
  if (!j.is_object()) throw IoError("solver config JSON: expected an object");
  try {
    c.rho_bar = j.value("rho_bar", c.rho_bar);
    c.rho_init = j.value("rho_init", c.rho_init);
    c.eps_pen = j.value("eps_pen", c.eps_pen);
    c.beta = j.value("beta", c.beta);
    c.sigma = j.value("sigma", c.sigma);
    c.max_iter = j.value("max_iter", c.max_iter);
    c.elastic_enabled = j.value("elastic_enabled", c.elastic_enabled);
    if (j.contains("h_choice") && j.at("h_choice").get<std::string>() != "identity") {
      throw IoError("solver config JSON: only h_choice = \"identity\" is supported");
    }
    c.max_ls_trials = j.value("max_ls_trials", c.max_ls_trials);
    c.early_stop = j.value("early_stop", c.early_stop);
    c.stop_dir_norm = j.value("stop_dir_norm", c.stop_dir_norm);
    c.stop_violation = j.value("stop_violation", c.stop_violation);
    c.check_descent = j.value("check_descent", c.check_descent);
    c.descent_rel_tol = j.value("descent_rel_tol", c.descent_rel_tol);
    c.qp.kkt_tol = j.value("qp_kkt_tol", c.qp.kkt_tol);
    c.qp.feasibility_tol = j.value("qp_feasibility_tol", c.qp.feasibility_tol);
    c.qp.max_iter = j.value("qp_max_iter", c.qp.max_iter);
    c.qp.ipm_tol = j.value("qp_ipm_tol", c.qp.ipm_tol);
  } catch (const nlohmann::json::exception& ex) {
    throw IoError(std::string("solver config JSON: ") + ex.what());
  }
  c.validate();
  return c;
}

}  // namespace stableid
