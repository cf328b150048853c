#pragma once

// JSON serialization of plans and reports, and the CSV trace writer. Output
// is fully determined by the inputs: no timestamps, no environment state.

#include <json.hpp>

#include <fstream>
#include <stdexcept>
#include <string>

#include "kla/couplings.hpp"
#include "kla/diagnostics.hpp"
#include "kla/planner.hpp"
#include "kla/target_models.hpp"

namespace kla {

using Json = nlohmann::ordered_json;

inline Json to_json(const ModelConstants& c) {
  return Json{{"K", c.K}, {"L", c.L}, {"L_H", c.L_H}, {"d", c.d}, {"kappa", c.kappa()}};
}

inline Json to_json(const AssumptionReport& r) {
  return Json{{"friction_ratio", r.friction_ratio},
              {"friction_ok", r.friction_ok},
              {"gamma_h", r.gamma_h},
              {"step_ok", r.step_ok},
              {"exit_step_value", r.exit_step_value},
              {"exit_step_ok", r.exit_step_ok},
              {"stability_value", r.stability_value},
              {"stability_ok", r.stability_ok},
              {"has_horizon", r.has_horizon},
              {"horizon_value", r.horizon_value},
              {"horizon_ok", r.horizon_ok},
              {"all_ok", r.all_ok()}};
}

inline Json to_json(const EpochPlan& p) {
  return Json{{"h", p.h},
              {"gamma", p.gamma},
              {"eps", p.eps},
              {"log_nu_lyap", p.log_nu_lyap},
              {"rho", p.rho},
              {"c_reg", p.c_reg},
              {"r_u", p.r_u},
              {"r", p.r},
              {"epoch", p.epoch},
              {"k", p.k},
              {"horizon", p.horizon},
              {"lambda", p.lambda}};
}

inline Json to_json(const CertificateReport& r) {
  return Json{{"exit_log_bound", r.exit_log_bound},
              {"exit_log_target", r.exit_log_target},
              {"exit_degenerate", r.exit_degenerate},
              {"exit_ok", r.exit_ok},
              {"rejection_budget", r.rejection_budget},
              {"rejection_threshold", kOneOverThreeE},
              {"rejection_ok", r.rejection_ok},
              {"horizon_value", r.horizon_value},
              {"horizon_ok", r.horizon_ok},
              {"assumptions_ok", r.assumptions_ok},
              {"all_ok", r.all_ok()}};
}

inline Json to_json(const VerificationReport& r) {
  Json j{{"name", r.name},
         {"trials", r.trials},
         {"violations", r.violations},
         {"worst_margin", r.worst_margin},
         {"statistical", r.statistical},
         {"passed", r.passed}};
  if (r.stderr_) j["stderr"] = *r.stderr_;
  Json details = Json::object();
  for (const auto& [key, value] : r.details) details[key] = value;
  j["details"] = details;
  return j;
}

inline Json to_json(const MixingReport& r) {
  return Json{{"replicas", r.replicas},
              {"warmup_steps", r.warmup_steps},
              {"curve", r.curve},
              {"curve_stderr", r.curve_stderr},
              {"per_epoch_failure", r.per_epoch_failure},
              {"per_epoch_failure_stderr", r.per_epoch_failure_stderr},
              {"exit_mass", r.exit_mass},
              {"value_at_horizon", r.value_at_horizon},
              {"stderr_at_horizon", r.stderr_at_horizon},
              {"verdict", r.verdict},
              {"median_met_step", r.median_met_step}};
}

inline Json to_json(const MomentReport& r) {
  return Json{{"mean_x", r.mean_x},
              {"mean_x_stderr", r.mean_x_stderr},
              {"var_x", r.var_x},
              {"var_x_stderr", r.var_x_stderr},
              {"var_v", r.var_v},
              {"var_v_stderr", r.var_v_stderr},
              {"acceptance", r.acceptance},
              {"samples", r.samples}};
}

inline Json to_json(const OneShotExperiment& e) {
  return Json{{"trials", e.trials},
              {"meet_frequency", e.meet_frequency},
              {"meet_stderr", e.meet_stderr},
              {"bound", e.bound},
              {"ks_stat", e.ks_stat},
              {"ks_p", e.ks_p},
              {"meet_ok", e.meet_ok},
              {"ks_ok", e.ks_ok}};
}

inline void write_json(const std::string& path, const Json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << j.dump(2) << '\n';
}

// Per-step trace of a coupled replica. Header is stable; one row per recorded
// coupled step.
class CoupledTraceWriter {
 public:
  explicit CoupledTraceWriter(const std::string& path) : out_(path, std::ios::binary) {
    if (!out_) throw std::runtime_error("cannot open for writing: " + path);
    out_ << "replica,step,met,in_domain,rejected,delta_H,twisted_distance\n";
  }

  void row(std::int64_t replica, std::int64_t step, bool met, bool in_domain, bool rejected,
           double delta_H, double twisted_distance) {
    out_ << replica << ',' << step << ',' << (met ? 1 : 0) << ',' << (in_domain ? 1 : 0) << ','
         << (rejected ? 1 : 0) << ',' << format(delta_H) << ',' << format(twisted_distance)
         << '\n';
  }

  static std::string format(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
  }

 private:
  std::ofstream out_;
};

}  // namespace kla
