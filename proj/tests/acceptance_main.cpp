// Acceptance suite: end-to-end checks of the sampler, the couplings, and the
// verification layer at their stated tolerances. Each criterion prints one
// PASS/FAIL line; the exit code is the number of failures.
//
// Usage: kla_acceptance [--criterion N] [--threads N]

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "kla/couplings.hpp"
#include "kla/diagnostics.hpp"
#include "kla/integrator.hpp"
#include "kla/planner.hpp"
#include "kla/serialize.hpp"
#include "kla/target_models.hpp"

using namespace kla;

namespace {

int g_threads = 2;
int g_failures = 0;

void report(int id, const std::string& name, bool passed, const std::string& detail) {
  std::printf("%-4s criterion %2d %-28s %s\n", passed ? "PASS" : "FAIL", id, name.c_str(),
              detail.c_str());
  std::fflush(stdout);
  if (!passed) ++g_failures;
}

std::string fmt(const char* format, ...) {
  char buf[512];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof(buf), format, args);
  va_end(args);
  return buf;
}

StateSampler wide_sampler(int d, double scale) {
  return [d, scale](RngStream& rng) {
    PhaseState z{Vec(d), Vec(d)};
    rng.fill_normal(z.x);
    rng.fill_normal(z.v);
    z.x *= scale;
    z.v *= scale;
    return z;
  };
}

// The shared mixing configuration: isotropic Gaussian in d = 2 with the full
// derived plan at the assumption-checked desk-scale step size, cold start at
// the phase-space origin, comparison chain from a warm-up run.
struct MixingSetup {
  EpochPlan plan;
  KernelParams params;
};

const MixingSetup& shared_setup() {
  static const MixingSetup setup = [] {
    MixingSetup s;
    const auto model = iso_gaussian(1.0, 2);
    const ModelConstants& c = model->constants();
    s.params = KernelParams::make(0.05, 10.0, c);
    s.plan = build_plan(c, s.params, 0.1, log_nu_dirac(*model, PhaseState::zero(2)));
    return s;
  }();
  return setup;
}

const MixingReport& shared_mixing_report() {
  static const MixingReport cached = [] {
    const MixingSetup& s = shared_setup();
    const auto model = iso_gaussian(1.0, 2);
    MixingOptions opts;
    opts.replicas = 1024;
    opts.threads = g_threads;
    opts.seed = 20240817;
    return estimate_mixing(*model, s.plan, s.params, PhaseState::zero(2), opts);
  }();
  return cached;
}

// --------------------------------------------------------------------------

void criterion_1_contraction() {
  const auto model = iso_gaussian(1.0, 4);
  const KernelParams p = KernelParams::make(0.05, 10.0, model->constants());
  RngStream rng(101, 0);
  const VerificationReport r = verify_contraction(*model, p, 10000, rng);
  const double c = contraction_rate_c(model->constants(), p.gamma);
  report(1, "pathwise_contraction", r.passed && std::abs(c - 1.78392e-3) < 1e-8,
         fmt("violations=%lld/%lld worst_factor=%.9f required=%.9f c=%.6e",
             static_cast<long long>(r.violations), static_cast<long long>(r.trials),
             r.details.at("worst_factor"), r.details.at("required_factor"), c));
}

void criterion_2_energy_error() {
  RngStream rng(102, 0);
  const auto iso = iso_gaussian(1.0, 4);
  const auto pert = perturbed_example(4);
  const VerificationReport ri = verify_energy_error(*iso, 0.05, 100000, wide_sampler(4, 2.0), rng);
  const VerificationReport rp = verify_energy_error(*pert, 0.05, 100000, wide_sampler(4, 2.0), rng);
  report(2, "energy_error_bounds", ri.passed && rp.passed,
         fmt("iso violations=%lld worst=%.4f | perturbed violations=%lld worst=%.4f",
             static_cast<long long>(ri.violations), ri.worst_margin,
             static_cast<long long>(rp.violations), rp.worst_margin));
}

void criterion_3_leading_order() {
  bool passed = true;
  std::string detail;
  for (const int d : {1, 4, 16}) {
    const LeadingOrderReport r = verify_leading_order(d, {0.02, 0.01, 0.005});
    passed = passed && r.ratio_within_tolerance && r.errors_shrink;
    detail += fmt("d=%d ratios=%.4f,%.4f,%.4f ", d, r.ratios[0], r.ratios[1], r.ratios[2]);
  }
  report(3, "leading_order_energy_error", passed, detail);
}

void criterion_4_one_shot_regularization() {
  bool passed = true;
  std::string detail;
  for (const int d : {1, 4}) {
    const auto model = iso_gaussian(1.0, d);
    const KernelParams p = KernelParams::make(0.05, 10.0, model->constants());
    RngStream rng(104, static_cast<std::uint64_t>(d));
    const OneShotExperiment e = one_shot_regularization_experiment(*model, p, 0.01, 10000, rng);
    passed = passed && e.meet_ok && e.ks_ok;
    detail += fmt("d=%d meet=%.4f bound=%.4f ks_p=%.3f ", d, e.meet_frequency, e.bound, e.ks_p);
  }
  report(4, "one_shot_regularization", passed, detail);
}

void criterion_5_overlap_consistency() {
  bool passed = true;
  double worst_gap = -1e300;
  for (const int d : {1, 4}) {
    const auto model = iso_gaussian(1.0, d);
    const KernelParams p = KernelParams::make(0.05, 10.0, model->constants());
    const TwistedNorm tw = TwistedNorm::make(p.gamma, p.h);
    RngStream rng(105, static_cast<std::uint64_t>(d));
    CoupledScratch ws(d);
    for (int pair_idx = 0; pair_idx < 8; ++pair_idx) {
      PhaseState z = sample_stationary_gaussian(*model, rng);
      Vec dx = rng.normal_vec(d), dv = rng.normal_vec(d);
      const double norm = std::sqrt(tw.squared(dx, dv));
      const PhaseState zt{z.x + (0.01 / norm) * dx, z.v + (0.01 / norm) * dv};

      const TvOverlapEstimate est = tv_overlap_estimate(*model, z, zt, p, 512, rng);
      std::int64_t met = 0;
      const std::int64_t trials = 1024;
      for (std::int64_t t = 0; t < trials; ++t) {
        CoupledPair pair = CoupledPair::start(z, zt);
        if (one_shot_coupled_step(*model, pair, p, rng, ws).met_now) ++met;
      }
      const double freq = static_cast<double>(met) / static_cast<double>(trials);
      const double freq_se = std::sqrt(freq * (1.0 - freq) / static_cast<double>(trials));
      const double gap = (1.0 - freq) - est.estimate;  // should be <= 3 combined stderr
      const double tol = 3.0 * std::sqrt(freq_se * freq_se + est.stderr_ * est.stderr_);
      if (gap > tol) passed = false;
      worst_gap = std::max(worst_gap, gap - tol);
    }
  }
  report(5, "overlap_upper_bounds_meeting", passed, fmt("worst_gap_minus_tol=%.3e", worst_gap));
}

void criterion_6_per_epoch_meeting() {
  const MixingSetup& s = shared_setup();
  const MixingReport& r = shared_mixing_report();
  const double bound = std::exp(-1.0);
  const bool passed = r.per_epoch_failure <= bound + 3.0 * r.per_epoch_failure_stderr;
  report(6, "per_epoch_meeting", passed,
         fmt("failure=%.5f (3se=%.5f) bound=e^-1=%.5f epoch=%lld replicas=%lld",
             r.per_epoch_failure, 3.0 * r.per_epoch_failure_stderr, bound,
             static_cast<long long>(s.plan.epoch), static_cast<long long>(r.replicas)));
}

void criterion_7_end_to_end_mixing() {
  const MixingSetup& s = shared_setup();
  const MixingReport& r = shared_mixing_report();
  const bool at_horizon = r.value_at_horizon <= s.plan.eps + 3.0 * r.stderr_at_horizon;
  report(7, "mixing_at_horizon", at_horizon,
         fmt("curve(horizon)=%.5f eps=%.2f 3se=%.5f exit_mass=%.5f", r.value_at_horizon,
             s.plan.eps, 3.0 * r.stderr_at_horizon, r.exit_mass));

  // Sanity leg: the tightened claim "mixed to eps/4 by half the horizon" is
  // supposed to fail, i.e. the curve at horizon/2 should still exceed eps/4.
  // Meetings can only occur at the regularizing step that ends each epoch, so
  // the curve value at horizon/2 is the value after floor(k/2) epochs.
  const int epochs_by_half = s.plan.k / 2;
  const double value_at_half = r.curve[epochs_by_half];
  const bool sanity = value_at_half > s.plan.eps / 4.0;
  report(7, "mixing_half_horizon_sanity", sanity,
         fmt("curve(horizon/2)=%.6f should exceed eps/4=%.6f (epochs=%d)", value_at_half,
             s.plan.eps / 4.0, epochs_by_half));
}

void criterion_8_adjustment_exactness() {
  const auto model = iso_gaussian(1.0, 4);
  MomentOptions opts;
  opts.replicas = 48;
  opts.threads = g_threads;
  opts.seed = 108;
  opts.burn_in = 4000;
  // the unadjusted bias in the standardized position variance is h^2 L / 4;
  // the budgets keep >= 4 combined standard errors between adjacent grid points
  const std::vector<StationarityGridPoint> grid = {
      {0.05, 1200000, 19000000}, {0.1, 1200000, 6000000}, {0.2, 1200000, 1500000}};
  const StationarityReport r = stationarity_and_bias(*model, 10.0, grid, opts);
  std::string detail;
  for (std::size_t i = 0; i < r.h_grid.size(); ++i)
    detail += fmt("h=%.2f makla=%.5f+-%.5f ukla_dev=%.2e ", r.h_grid[i], r.makla[i].var_x,
                  r.makla[i].var_x_stderr, r.ukla_deviation[i]);
  report(8, "adjustment_exactness", r.makla_ok && r.ukla_monotone, detail);
}

void criterion_9_lyapunov_exit() {
  const MixingSetup& s = shared_setup();
  const auto model = iso_gaussian(1.0, 2);
  RngStream rng(109, 0);
  const VerificationReport drift = lyapunov_drift_check(*model, s.plan, s.params, 128, 256, rng);
  const VerificationReport exit = exit_frequency_check(*model, s.plan, s.params,
                                                       PhaseState::zero(2), 256, 109, g_threads);
  report(9, "lyapunov_and_exit_bounds", drift.passed && exit.passed,
         fmt("worst_log_drift=%.4f lambda=%.4g exit_freq=%.4f bound=%.4g",
             drift.details.at("worst_log_drift"), s.plan.lambda,
             exit.details.at("exit_frequency"), exit.details.at("exit_bound")));
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return "<missing:" + path + ">";
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void criterion_10_determinism() {
  namespace fs = std::filesystem;
  const fs::path base = fs::temp_directory_path() / "kla_acceptance_determinism";
  fs::remove_all(base);
  fs::create_directories(base);
  bool passed = true;
  std::string detail;

  const std::string cli = KLA_CLI_PATH;
  const auto run = [&](const std::string& args) {
    const std::string cmd = cli + " " + args + " > /dev/null 2>&1";
    return std::system(cmd.c_str()) == 0;
  };
  const std::string plan_args = "plan --model iso_gauss --L 1 --dim 4 --eps 0.1 --h 0.05 --seed 3";
  const std::string sample_args =
      "sample --model perturbed --dim 3 --h 0.05 --gamma 10 --steps 5000 --burn-in 200 --seed 3";
  const std::string mix_args =
      "mix --model iso_gauss --L 1 --dim 1 --h 0.1 --eps 0.3 --gamma 10 --replicas 4 --seed 3 "
      "--threads 2 --trace 1 --trace-stride 10000";
  const struct {
    std::string args;
    std::vector<std::string> files;
  } cases[] = {
      {plan_args, {"plan.json"}},
      {sample_args, {"traces/chain.csv", "reports/sample_summary.json"}},
      {mix_args, {"reports/mixing.json", "traces/mixing.csv", "plan.json"}},
  };
  int case_idx = 0;
  for (const auto& c : cases) {
    const fs::path out1 = base / ("a" + std::to_string(case_idx));
    const fs::path out2 = base / ("b" + std::to_string(case_idx));
    if (!run(c.args + " --out " + out1.string()) || !run(c.args + " --out " + out2.string())) {
      passed = false;
      detail += "run_failed(" + c.args.substr(0, 6) + ") ";
    } else {
      for (const auto& f : c.files) {
        const std::string s1 = slurp((out1 / f).string());
        if (s1 != slurp((out2 / f).string()) || s1.rfind("<missing", 0) == 0) {
          passed = false;
          detail += "mismatch(" + f + ") ";
        }
      }
    }
    ++case_idx;
  }
  if (detail.empty()) detail = "plan/sample/mix outputs byte-identical across reruns";
  report(10, "determinism", passed, detail);
}

// Declared desk-scale substitute for the asymptotic step-size law: the median
// meeting step grows linearly in 1/h at fixed accuracy.
void criterion_11_meeting_time_scaling() {
  const double hs[] = {0.05, 0.0625, 0.08, 0.1};
  std::vector<double> inv_h, median;
  std::string detail;
  for (const double h : hs) {
    const auto model = iso_gaussian(1.0, 2);
    const ModelConstants& c = model->constants();
    const KernelParams p = KernelParams::make(h, 10.0, c);
    const PhaseState start = PhaseState::zero(2);
    const EpochPlan plan = build_plan(c, p, 0.1, log_nu_dirac(*model, start));
    MixingOptions opts;
    opts.replicas = 32;
    opts.threads = g_threads;
    opts.seed = 111;
    const MixingReport r = estimate_mixing(*model, plan, p, start, opts);
    if (r.median_met_step <= 0) {
      report(11, "meeting_time_scaling", false, fmt("no meetings at h=%.4f", h));
      return;
    }
    inv_h.push_back(1.0 / h);
    median.push_back(r.median_met_step);
    detail += fmt("h=%.4f med=%.0f ", h, r.median_met_step);
  }
  // least-squares fit median ~ a + b / h
  const auto n = static_cast<double>(inv_h.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < inv_h.size(); ++i) {
    sx += inv_h[i];
    sy += median[i];
    sxx += inv_h[i] * inv_h[i];
    sxy += inv_h[i] * median[i];
    syy += median[i] * median[i];
  }
  const double cov = sxy / n - sx / n * sy / n;
  const double var_x = sxx / n - sx / n * sx / n;
  const double var_y = syy / n - sy / n * sy / n;
  const double r2 = cov * cov / (var_x * var_y);
  report(11, "meeting_time_scaling", r2 >= 0.95, detail + fmt("R2=%.4f", r2));
}

}  // namespace

int main(int argc, char** argv) {
  int criterion = 0;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) criterion = std::atoi(argv[++i]);
    if (std::strcmp(argv[i], "--threads") == 0 && i + 1 < argc) g_threads = std::atoi(argv[++i]);
  }
  using Clock = std::chrono::steady_clock;
  const auto run = [&](int id, void (*fn)()) {
    if (criterion != 0 && criterion != id) return;
    const auto t0 = Clock::now();
    fn();
    const double s = std::chrono::duration<double>(Clock::now() - t0).count();
    std::fprintf(stderr, "criterion %d took %.1f s\n", id, s);
  };
  run(1, criterion_1_contraction);
  run(2, criterion_2_energy_error);
  run(3, criterion_3_leading_order);
  run(4, criterion_4_one_shot_regularization);
  run(5, criterion_5_overlap_consistency);
  run(6, criterion_6_per_epoch_meeting);
  run(7, criterion_7_end_to_end_mixing);
  run(8, criterion_8_adjustment_exactness);
  run(9, criterion_9_lyapunov_exit);
  run(10, criterion_10_determinism);
  run(11, criterion_11_meeting_time_scaling);
  if (g_failures > 0) std::printf("%d criterion check(s) FAILED\n", g_failures);
  return g_failures;
}
