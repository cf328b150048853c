// Batch experiment front end: parses configs, seeds replica RNG streams,
// dispatches planner / diagnostics / sampling jobs, writes reports.
//
// Exit codes: 0 success, 1 check or certificate failure, 2 configuration error.

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "kla/couplings.hpp"
#include "kla/diagnostics.hpp"
#include "kla/integrator.hpp"
#include "kla/parallel.hpp"
#include "kla/planner.hpp"
#include "kla/serialize.hpp"
#include "kla/target_models.hpp"

namespace fs = std::filesystem;
using kla::Json;
using kla::Vec;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitConfigError = 2;

struct RunConfig {
  std::string model = "iso_gauss";
  double L = 1.0;
  std::vector<double> diag;
  int d = 2;
  std::string h = "auto";
  std::string gamma = "auto";
  double eps = 0.1;
  std::uint64_t seed = 1;
  int threads = kla::default_threads();
  std::string out = "out";
  std::int64_t replicas = 1000;
  // start distribution: dirac (default at the phase-space origin) or
  // product_gaussian
  std::string start_kind = "dirac";
  std::vector<double> start_x, start_v;
  // sample options
  std::string algorithm = "makla";
  std::int64_t steps = 100000;
  std::int64_t burn_in = 1000;
  // verify options
  std::string suite = "all";
  double tamper_contraction_c = 1.0;
  // mix options
  std::int64_t trace_replicas = 0;
  std::int64_t trace_stride = 1;
  bool require_certificates = false;
};

void apply_config_file(RunConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file: " + path);
  Json j = Json::parse(in);
  if (j.contains("model")) cfg.model = j["model"].get<std::string>();
  if (j.contains("L")) cfg.L = j["L"].get<double>();
  if (j.contains("diag")) cfg.diag = j["diag"].get<std::vector<double>>();
  if (j.contains("d")) cfg.d = j["d"].get<int>();
  if (j.contains("h"))
    cfg.h = j["h"].is_string() ? j["h"].get<std::string>() : std::to_string(j["h"].get<double>());
  if (j.contains("gamma"))
    cfg.gamma = j["gamma"].is_string() ? j["gamma"].get<std::string>()
                                       : std::to_string(j["gamma"].get<double>());
  if (j.contains("eps")) cfg.eps = j["eps"].get<double>();
  if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("threads")) cfg.threads = j["threads"].get<int>();
  if (j.contains("out")) cfg.out = j["out"].get<std::string>();
  if (j.contains("replicas")) cfg.replicas = j["replicas"].get<std::int64_t>();
  if (j.contains("start")) {
    const Json& s = j["start"];
    if (s.contains("kind")) cfg.start_kind = s["kind"].get<std::string>();
    if (s.contains("x")) cfg.start_x = s["x"].get<std::vector<double>>();
    if (s.contains("v")) cfg.start_v = s["v"].get<std::vector<double>>();
  }
  if (j.contains("algorithm")) cfg.algorithm = j["algorithm"].get<std::string>();
  if (j.contains("steps")) cfg.steps = j["steps"].get<std::int64_t>();
  if (j.contains("burn_in")) cfg.burn_in = j["burn_in"].get<std::int64_t>();
  if (j.contains("suite")) cfg.suite = j["suite"].get<std::string>();
}

std::unique_ptr<kla::TargetModel> make_model(const RunConfig& cfg) {
  if (cfg.model == "iso_gauss") return kla::iso_gaussian(cfg.L, cfg.d);
  if (cfg.model == "diag_gauss") {
    if (cfg.diag.empty()) throw std::invalid_argument("diag_gauss requires \"diag\" entries");
    Vec a(static_cast<Eigen::Index>(cfg.diag.size()));
    for (std::size_t i = 0; i < cfg.diag.size(); ++i) a[static_cast<Eigen::Index>(i)] = cfg.diag[i];
    return kla::diag_gaussian(std::move(a));
  }
  if (cfg.model == "perturbed") return kla::perturbed_example(cfg.d);
  throw std::invalid_argument("unknown model: " + cfg.model +
                           " (expected iso_gauss, diag_gauss, or perturbed)");
}

struct Resolved {
  std::unique_ptr<kla::TargetModel> model;
  kla::KernelParams params;
  double gamma = 0.0;
  double h = 0.0;
  bool h_was_auto = false;
  std::optional<double> h_bar;
  kla::PhaseState start;
  double log_nu = 0.0;
};

kla::PhaseState resolve_start(const RunConfig& cfg, const kla::TargetModel& m) {
  const int d = m.dim();
  kla::PhaseState z = kla::PhaseState::zero(d);
  if (!cfg.start_x.empty()) {
    if (static_cast<int>(cfg.start_x.size()) != d)
      throw std::invalid_argument("start.x has wrong dimension");
    for (int i = 0; i < d; ++i) z.x[i] = cfg.start_x[static_cast<std::size_t>(i)];
  }
  if (!cfg.start_v.empty()) {
    if (static_cast<int>(cfg.start_v.size()) != d)
      throw std::invalid_argument("start.v has wrong dimension");
    for (int i = 0; i < d; ++i) z.v[i] = cfg.start_v[static_cast<std::size_t>(i)];
  }
  return z;
}

Resolved resolve(const RunConfig& cfg) {
  Resolved r;
  r.model = make_model(cfg);
  const kla::ModelConstants& c = r.model->constants();
  r.gamma = cfg.gamma == "auto" ? kla::default_gamma(c) : std::stod(cfg.gamma);
  r.start = resolve_start(cfg, *r.model);
  if (cfg.start_kind == "product_gaussian") {
    if (!r.model->gaussian_kind())
      throw std::invalid_argument("product_gaussian start requires a Gaussian-kind model");
    r.log_nu = kla::log_nu_product_gaussian(c.d);
  } else if (cfg.start_kind == "dirac") {
    r.log_nu = kla::log_nu_dirac(*r.model, r.start);
  } else {
    throw std::invalid_argument("unknown start kind: " + cfg.start_kind);
  }
  if (cfg.h == "auto") {
    r.h_was_auto = true;
    r.h_bar = kla::admissible_step_size(c, r.gamma, cfg.eps, r.log_nu);
    if (!r.h_bar)
      throw std::invalid_argument("no admissible step size in the search bracket; pass --h explicitly");
    r.h = *r.h_bar;
  } else {
    r.h = std::stod(cfg.h);
    r.h_bar = kla::admissible_step_size(c, r.gamma, cfg.eps, r.log_nu);
  }
  r.params = kla::KernelParams::make(r.h, r.gamma, c);
  return r;
}

Json config_echo(const RunConfig& cfg, const Resolved& r) {
  return Json{{"model", cfg.model},
              {"constants", kla::to_json(r.model->constants())},
              {"h", r.h},
              {"gamma", r.gamma},
              {"eps", cfg.eps},
              {"seed", cfg.seed},
              {"start_kind", cfg.start_kind},
              {"log_nu_lyap", r.log_nu}};
}

int cmd_plan(const RunConfig& cfg) {
  const Resolved r = resolve(cfg);
  const kla::ModelConstants& c = r.model->constants();
  const kla::EpochPlan plan = kla::build_plan(c, r.params, cfg.eps, r.log_nu);
  const kla::CertificateReport cert = kla::certificates(c, r.params, plan);
  Json j{{"config", config_echo(cfg, r)},
         {"assumptions", kla::to_json(kla::check_assumptions(
                             c, r.params, static_cast<double>(plan.horizon)))},
         {"plan", kla::to_json(plan)},
         {"certificates", kla::to_json(cert)}};
  if (r.h_bar) j["h_bar"] = *r.h_bar;
  fs::create_directories(cfg.out);
  kla::write_json(cfg.out + "/plan.json", j);
  std::cout << "plan written to " << cfg.out << "/plan.json (epoch=" << plan.epoch
            << ", horizon=" << plan.horizon << ", certificates "
            << (cert.all_ok() ? "ok" : "violated") << ")\n";
  if (cfg.require_certificates && !cert.all_ok()) return kExitCheckFailed;
  return kExitOk;
}

bool suite_selected(const RunConfig& cfg, const std::string& name) {
  if (cfg.suite == "all") return true;
  std::size_t pos = 0;
  const std::string& s = cfg.suite;
  while (pos < s.size()) {
    const std::size_t comma = s.find(',', pos);
    const std::string token = s.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    if (token == name) return true;
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return false;
}

int cmd_verify(const RunConfig& cfg) {
  const Resolved r = resolve(cfg);
  const kla::TargetModel& m = *r.model;
  const kla::ModelConstants& c = m.constants();
  fs::create_directories(cfg.out + "/reports");
  bool all_passed = true;
  std::vector<kla::VerificationReport> reports;

  const auto emit = [&](const kla::VerificationReport& report) {
    reports.push_back(report);
    all_passed = all_passed && report.passed;
    std::cout << (report.passed ? "PASS " : "FAIL ") << report.name
              << " violations=" << report.violations << "/" << report.trials
              << " worst_margin=" << report.worst_margin << "\n";
  };

  if (suite_selected(cfg, "energy")) {
    kla::RngStream rng(cfg.seed, 0xE0);
    const auto sampler = [&m](kla::RngStream& s) {
      kla::PhaseState z{Vec(m.dim()), Vec(m.dim())};
      s.fill_normal(z.x);
      s.fill_normal(z.v);
      z.x *= 2.0;
      z.v *= 2.0;
      return z;
    };
    emit(kla::verify_energy_error(m, r.h, 100000, sampler, rng));
  }
  if (suite_selected(cfg, "contraction")) {
    kla::RngStream rng(cfg.seed, 0xC0);
    emit(kla::verify_contraction(m, r.params, 10000, rng, cfg.tamper_contraction_c));
  }
  if (suite_selected(cfg, "oneshot")) {
    kla::RngStream rng(cfg.seed, 0x05);
    const kla::OneShotExperiment e =
        kla::one_shot_regularization_experiment(m, r.params, 0.01, 10000, rng);
    kla::VerificationReport report;
    report.name = "one_shot_regularization";
    report.trials = e.trials;
    report.statistical = true;
    report.stderr_ = e.meet_stderr;
    report.violations = (e.meet_ok ? 0 : 1) + (e.ks_ok ? 0 : 1);
    report.worst_margin = e.bound > 0.0 ? (1.0 - e.meet_frequency) / (1.0 - e.bound) : 0.0;
    report.details["meet_frequency"] = e.meet_frequency;
    report.details["bound"] = e.bound;
    report.details["ks_p"] = e.ks_p;
    report.passed = report.violations == 0;
    emit(report);
  }
  if (suite_selected(cfg, "lyapunov") || suite_selected(cfg, "rejection")) {
    const kla::EpochPlan plan = kla::build_plan(c, r.params, cfg.eps, r.log_nu);
    if (suite_selected(cfg, "lyapunov")) {
      kla::RngStream rng(cfg.seed, 0x17);
      emit(kla::lyapunov_drift_check(m, plan, r.params, 128, 512, rng));
      emit(kla::exit_frequency_check(m, plan, r.params, r.start, 128, cfg.seed, cfg.threads));
    }
    if (suite_selected(cfg, "rejection")) {
      emit(kla::rejection_rate_epoch(m, plan, r.params, 256, 1024, cfg.seed, cfg.threads));
    }
  }
  if (suite_selected(cfg, "stationarity")) {
    if (!m.gaussian_kind()) {
      std::cout << "SKIP stationarity (exact moments unavailable for this model)\n";
    } else {
      kla::MomentOptions opts;
      opts.n_steps = 200000;
      opts.replicas = 16;
      opts.threads = cfg.threads;
      opts.seed = cfg.seed;
      const kla::MomentReport makla = kla::chain_moments(m, r.params, true, opts);
      kla::VerificationReport report;
      report.name = "stationarity";
      report.statistical = true;
      report.trials = makla.samples;
      report.stderr_ = makla.var_x_stderr;
      report.violations = std::abs(makla.var_x - 1.0) <= 3.0 * makla.var_x_stderr &&
                                  std::abs(makla.var_v - 1.0) <= 3.0 * makla.var_v_stderr
                              ? 0
                              : 1;
      report.worst_margin = std::abs(makla.var_x - 1.0) / std::max(1e-12, 3.0 * makla.var_x_stderr);
      report.details["var_x"] = makla.var_x;
      report.details["var_v"] = makla.var_v;
      report.details["acceptance"] = makla.acceptance;
      report.passed = report.violations == 0;
      emit(report);
      kla::RngStream rng(cfg.seed, 0x0b);
      emit(kla::verify_ou_moment_bounds(m, r.params, 64, 512, rng));
    }
  }
  if (suite_selected(cfg, "bias")) {
    if (!m.gaussian_kind()) {
      std::cout << "SKIP bias (exact moments unavailable for this model)\n";
    } else {
      // resolving the h^2 discretization bias of the unadjusted chain needs a
      // wide step ladder and a large sample
      kla::MomentOptions opts;
      opts.replicas = 16;
      opts.threads = cfg.threads;
      opts.seed = cfg.seed;
      const std::vector<kla::StationarityGridPoint> grid = {{r.h, 200000, 2000000},
                                                            {4.0 * r.h, 200000, 500000}};
      const kla::StationarityReport sr = kla::stationarity_and_bias(m, r.gamma, grid, opts);
      kla::VerificationReport report;
      report.name = "bias_growth";
      report.statistical = true;
      report.trials = sr.ukla.front().samples + sr.ukla.back().samples;
      report.violations = (sr.makla_ok ? 0 : 1) + (sr.ukla_monotone ? 0 : 1);
      report.worst_margin =
          sr.ukla_deviation.back() > 0.0 ? sr.ukla_deviation.front() / sr.ukla_deviation.back()
                                         : 1.0;
      for (std::size_t i = 0; i < sr.h_grid.size(); ++i) {
        report.details["ukla_deviation_h" + std::to_string(i)] = sr.ukla_deviation[i];
        report.details["makla_var_x_h" + std::to_string(i)] = sr.makla[i].var_x;
      }
      report.passed = report.violations == 0;
      emit(report);
    }
  }

  Json j = Json::array();
  for (const auto& report : reports) j.push_back(kla::to_json(report));
  kla::write_json(cfg.out + "/reports/verify_" +
                      (cfg.suite == "all" ? std::string("all") : cfg.suite) + ".json",
                  j);
  return all_passed ? kExitOk : kExitCheckFailed;
}

int cmd_mix(const RunConfig& cfg) {
  const Resolved r = resolve(cfg);
  const kla::TargetModel& m = *r.model;
  const kla::ModelConstants& c = m.constants();
  const kla::EpochPlan plan = kla::build_plan(c, r.params, cfg.eps, r.log_nu);
  fs::create_directories(cfg.out + "/reports");

  kla::MixingOptions opts;
  opts.replicas = cfg.replicas;
  opts.threads = cfg.threads;
  opts.seed = cfg.seed;
  if (cfg.start_kind == "product_gaussian")
    opts.start_sampler = [&m](kla::RngStream& rng) {
      return kla::sample_stationary_gaussian(m, rng);
    };
  const kla::MixingReport report = kla::estimate_mixing(m, plan, r.params, r.start, opts);

  if (cfg.trace_replicas > 0) {
    fs::create_directories(cfg.out + "/traces");
    kla::CoupledTraceWriter writer(cfg.out + "/traces/mixing.csv");
    for (std::int64_t rep = 0; rep < std::min(cfg.trace_replicas, cfg.replicas); ++rep) {
      // re-run the traced replicas with the same streams as the main run
      kla::RngStream warm_rng(cfg.seed, 0x57410000u + static_cast<std::uint64_t>(rep));
      const int d = m.dim();
      Vec x = Vec::Zero(d), v(d);
      warm_rng.fill_normal(v);
      Vec xi1(d), xi2(d);
      kla::StepScratch scratch(d);
      for (std::int64_t s = 0; s < report.warmup_steps; ++s) {
        warm_rng.fill_normal(xi1);
        warm_rng.fill_normal(xi2);
        kla::makla_advance(m, r.params, x, v, xi1, xi2, warm_rng.uniform(), scratch);
      }
      kla::PhaseState first = r.start;
      if (opts.start_sampler) {
        kla::RngStream start_rng(cfg.seed, 0x53540000u + static_cast<std::uint64_t>(rep));
        first = opts.start_sampler(start_rng);
      }
      kla::CoupledPair pair =
          kla::CoupledPair::start(std::move(first), kla::PhaseState{std::move(x), std::move(v)});
      kla::RngStream rng(cfg.seed, 0x4d580000u + static_cast<std::uint64_t>(rep));
      const auto observer = [&](const kla::StepTraceInfo& info) {
        if (info.step % cfg.trace_stride == 0 || info.met)
          writer.row(rep, info.step, info.met, info.in_domain, info.rejected, info.delta_H,
                     info.twisted_distance);
      };
      kla::epoch_coupled_run(m, pair, plan, r.params, rng, true, observer);
    }
  }

  Json j{{"config", config_echo(cfg, r)},
         {"plan", kla::to_json(plan)},
         {"mixing", kla::to_json(report)}};
  kla::write_json(cfg.out + "/reports/mixing.json", j);
  kla::write_json(cfg.out + "/plan.json",
                  Json{{"config", config_echo(cfg, r)},
                       {"plan", kla::to_json(plan)},
                       {"certificates", kla::to_json(kla::certificates(c, r.params, plan))}});
  std::cout << "mixing: curve_at_horizon=" << report.value_at_horizon << " (target eps=" << cfg.eps
            << "), per_epoch_failure=" << report.per_epoch_failure
            << ", exit_mass=" << report.exit_mass << "\n";
  return report.verdict ? kExitOk : kExitCheckFailed;
}

int cmd_sample(const RunConfig& cfg) {
  const Resolved r = resolve(cfg);
  const kla::TargetModel& m = *r.model;
  const bool adjusted = cfg.algorithm == "makla";
  if (!adjusted && cfg.algorithm != "ukla")
    throw std::invalid_argument("unknown algorithm: " + cfg.algorithm + " (expected makla or ukla)");
  fs::create_directories(cfg.out + "/reports");
  fs::create_directories(cfg.out + "/traces");

  const int d = m.dim();
  kla::RngStream rng(cfg.seed, 0x534d0000u);
  Vec x = r.start.x, v = r.start.v;
  if (cfg.start_kind == "product_gaussian") {
    kla::RngStream start_rng(cfg.seed, 0x53540000u);
    const kla::PhaseState z0 = kla::sample_stationary_gaussian(m, start_rng);
    x = z0.x;
    v = z0.v;
  }
  Vec xi1(d), xi2(d), grad(d);
  kla::StepScratch scratch(d);
  std::ofstream csv(cfg.out + "/traces/chain.csv", std::ios::binary);
  csv << "step";
  for (int i = 0; i < d; ++i) csv << ",x" << i;
  for (int i = 0; i < d; ++i) csv << ",v" << i;
  csv << ",accepted,delta_H\n";
  std::int64_t accepted_total = 0;
  double sum_xx = 0.0, sum_vv = 0.0;
  for (std::int64_t s = 0; s < cfg.burn_in + cfg.steps; ++s) {
    rng.fill_normal(xi1);
    rng.fill_normal(xi2);
    bool accepted = true;
    double delta_H = 0.0;
    if (adjusted) {
      const kla::AdvanceResult res =
          kla::makla_advance(m, r.params, x, v, xi1, xi2, rng.uniform(), scratch);
      accepted = res.accepted;
      delta_H = res.delta_H;
    } else {
      kla::ukla_advance(m, r.params, x, v, xi1, xi2, grad);
    }
    if (s >= cfg.burn_in) {
      accepted_total += accepted ? 1 : 0;
      sum_xx += x.squaredNorm();
      sum_vv += v.squaredNorm();
      csv << (s - cfg.burn_in);
      for (int i = 0; i < d; ++i) csv << ',' << kla::CoupledTraceWriter::format(x[i]);
      for (int i = 0; i < d; ++i) csv << ',' << kla::CoupledTraceWriter::format(v[i]);
      csv << ',' << (accepted ? 1 : 0) << ',' << kla::CoupledTraceWriter::format(delta_H) << '\n';
    }
  }
  const double n = static_cast<double>(cfg.steps);
  Json j{{"config", config_echo(cfg, r)},
         {"algorithm", cfg.algorithm},
         {"steps", cfg.steps},
         {"burn_in", cfg.burn_in},
         {"mean_sq_x", sum_xx / (n * d)},
         {"mean_sq_v", sum_vv / (n * d)},
         {"acceptance", adjusted ? static_cast<double>(accepted_total) / n : 1.0}};
  kla::write_json(cfg.out + "/reports/sample_summary.json", j);
  std::cout << "sample: " << cfg.steps << " steps written to " << cfg.out << "/traces/chain.csv\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Metropolis-adjusted kinetic Langevin sampling and verification toolkit"};
  app.require_subcommand(1);

  RunConfig cfg;
  std::string config_path;

  app.set_help_flag("--help", "print help");
  const auto add_common = [&](CLI::App* sub) {
    sub->set_help_flag("--help", "print help");
    sub->add_option("--config", config_path, "JSON config file; flags override file values");
    sub->add_option("--seed", cfg.seed, "master seed for all replica streams");
    sub->add_option("--threads", cfg.threads, "worker pool size");
    sub->add_option("--out", cfg.out, "output directory");
    sub->add_option("--model", cfg.model, "iso_gauss | diag_gauss | perturbed");
    sub->add_option("--dim", cfg.d, "dimension");
    sub->add_option("--L", cfg.L, "gradient Lipschitz constant of iso_gauss");
    sub->add_option("--diag", cfg.diag, "diagonal entries of diag_gauss");
    sub->add_option("--h", cfg.h, "step size, or 'auto' for the bisected admissible value");
    sub->add_option("--gamma", cfg.gamma, "friction, or 'auto' for 10 sqrt(L)");
    sub->add_option("--eps", cfg.eps, "target total-variation accuracy");
    sub->add_option("--replicas", cfg.replicas, "number of independent replicas");
    sub->add_option("--start-kind", cfg.start_kind, "dirac | product_gaussian");
  };

  CLI::App* plan = app.add_subcommand("plan", "emit the epoch plan and certificates");
  add_common(plan);
  plan->add_flag("--require-certificates", cfg.require_certificates,
                 "exit nonzero when a certificate is violated");

  CLI::App* verify = app.add_subcommand("verify", "run diagnostic suites");
  add_common(verify);
  verify->add_option("--suite", cfg.suite,
                     "comma-separated: energy,contraction,oneshot,lyapunov,rejection,stationarity,bias or all");
  verify->add_option("--tamper-contraction-c", cfg.tamper_contraction_c,
                     "test hook: scale the contraction constant");

  CLI::App* mix = app.add_subcommand("mix", "coupled mixing-time estimate");
  add_common(mix);
  mix->add_option("--trace", cfg.trace_replicas, "stream per-step traces for the first N replicas");
  mix->add_option("--trace-stride", cfg.trace_stride, "record every Nth step in traces");

  CLI::App* sample = app.add_subcommand("sample", "plain MAKLA/UKLA run");
  add_common(sample);
  sample->add_option("--algorithm", cfg.algorithm, "makla | ukla");
  sample->add_option("--steps", cfg.steps, "post burn-in steps");
  sample->add_option("--burn-in", cfg.burn_in, "burn-in steps");

  try {
    // two-pass parse so the config file loads first and flags override it
    app.parse(argc, argv);
    if (!config_path.empty()) {
      RunConfig from_file;
      apply_config_file(from_file, config_path);
      cfg = from_file;
      app.clear();
      app.parse(argc, argv);
    }
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kExitConfigError;
  }

  try {
    if (plan->parsed()) return cmd_plan(cfg);
    if (verify->parsed()) return cmd_verify(cfg);
    if (mix->parsed()) return cmd_mix(cfg);
    if (sample->parsed()) return cmd_sample(cfg);
  } catch (const std::invalid_argument& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitCheckFailed;
  }
  return kExitConfigError;
}
