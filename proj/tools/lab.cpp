// Command-line front end for the lab: code construction, trials, sweeps and
// the acceptance suite.
#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "scolab/acceptance.hpp"
#include "scolab/report.hpp"

using namespace scolab;

namespace {

struct Common {
  std::string config;
  std::string out;
  long long seed = -1;
  int threads = -1;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "INI config file")->check(CLI::ExistingFile);
  cmd->add_option("--seed", c.seed, "harness master seed");
  cmd->add_option("--out", c.out, "output directory");
  cmd->add_option("--threads", c.threads, "worker threads (0 = all cores)");
  cmd->allow_extras();
}

// Leftover "--key value" or "--key=value" pairs become config overrides.
Overrides collect_overrides(const std::vector<std::string>& extras) {
  Overrides out;
  for (std::size_t i = 0; i < extras.size(); ++i) {
    const std::string& tok = extras[i];
    if (tok.rfind("--", 0) != 0) throw ConfigError(tok, "unexpected argument");
    const std::string body = tok.substr(2);
    const auto eq = body.find('=');
    if (eq != std::string::npos) {
      out.emplace_back(body.substr(0, eq), body.substr(eq + 1));
    } else {
      if (i + 1 >= extras.size()) throw ConfigError(body, "missing value");
      out.emplace_back(body, extras[++i]);
    }
  }
  return out;
}

LabConfig load(const Common& c, const CLI::App* cmd) {
  Overrides ov = collect_overrides(cmd->remaining());
  if (c.seed >= 0) ov.emplace_back("harness.seed", std::to_string(c.seed));
  if (c.threads >= 0) ov.emplace_back("harness.threads", std::to_string(c.threads));
  if (!c.out.empty()) ov.emplace_back("harness.out_dir", c.out);
  return parse_config(c.config, ov);
}

int finish(const Report& r, const LabConfig& cfg) {
  emit_report(r, cfg.out_dir);
  for (const CriterionResult& c : r.criteria)
    std::printf("%s C%d %s: %s\n", c.pass ? "PASS" : "FAIL", c.id, c.name.c_str(),
                c.detail.c_str());
  if (!r.all_pass()) {
    std::fprintf(stderr, "failures:");
    for (const CriterionResult& c : r.criteria)
      if (!c.pass) std::fprintf(stderr, " C%d", c.id);
    std::fprintf(stderr, "\n");
  }
  std::printf("wrote %s\n", (std::filesystem::path(cfg.out_dir) / "summary.txt").c_str());
  return r.all_pass() ? 0 : 1;
}

int cmd_trial(const LabConfig& cfg, const std::string& trajectory_out) {
  const LabContext ctx = make_context(cfg);
  Report r;
  r.command = "trial";
  r.cfg = cfg;
  r.code = ctx.code;
  std::vector<TrialResult> trials = run_trials(ctx, cfg.trials);
  long cond = 0, below = 0, cert_bad = 0;
  for (const TrialResult& t : trials) {
    r.rows.push_back(to_row(t));
    if (!t.conditioned) continue;
    ++cond;
    below += t.gap_population.lo < t.bound_predicted - 1e-9;
    cert_bad += !t.certificates_ok;
  }
  r.criteria.push_back({3, "gap >= predicted bound", below == 0,
                        std::to_string(cond) + " conditioned, " + std::to_string(below) +
                            " below bound",
                        0.0});
  r.criteria.push_back({5, "certificates", cert_bad == 0,
                        std::to_string(cert_bad) + " conditioned trials failing", 0.0});
  if (!trajectory_out.empty()) {
    TrajectoryRecord rec;
    run_gd_trial(ctx, 0, cfg.eta, cfg.T, cfg.suffix_value(), &rec);
    write_trajectory_csv(trajectory_out, rec);
  }
  return finish(r, cfg);
}

int cmd_sweep(const LabConfig& cfg) {
  const LabContext ctx = make_context(cfg);
  Report r;
  r.command = "sweep";
  r.cfg = cfg;
  r.code = ctx.code;
  const SweepResult sw = sweep_eta_T(ctx, default_sweep_grid(cfg), cfg.sweep_trials);
  r.sweep = sw;
  bool plateau_ok = true;
  for (const SweepPoint& p : sw.points)
    if (p.plateau_region) plateau_ok = plateau_ok && p.max_erm_rel_dev <= 1e-3;
  r.criteria.push_back({8, "GD scaling shape",
                        sw.monotone && sw.slope >= 0.4 && sw.slope <= 0.6 && plateau_ok,
                        "slope=" + std::to_string(sw.slope) +
                            (sw.monotone ? " monotone" : " not monotone"),
                        0.0});
  return finish(r, cfg);
}

int cmd_corollary3(const LabConfig& cfg) {
  const LabContext ctx = make_context(cfg);
  Report r;
  r.command = "corollary3";
  r.cfg = cfg;
  r.code = ctx.code;
  long i = 0;
  while (i < cfg.trials && !trial_sample(ctx, i).conditioned) ++i;
  const Corollary3Result c3 = corollary3_run(ctx, i);
  r.rows.push_back(to_row(c3.trial));
  r.metrics["epsilon"] = c3.epsilon;
  r.metrics["suboptimality"] = c3.suboptimality;
  r.metrics["suboptimality_half_T"] = c3.suboptimality_half_T;
  r.metrics["gd_gap"] = c3.gd_gap;
  r.metrics["exact_erm_gap"] = c3.exact_erm_gap;
  r.criteria.push_back({0, "epsilon reached", c3.reached_epsilon,
                        "suboptimality=" + std::to_string(c3.suboptimality), 0.0});
  r.criteria.push_back({0, "gap matches exact ERM",
                        std::abs(c3.gd_gap - c3.exact_erm_gap) <= 1e-6,
                        "diff=" + std::to_string(c3.gd_gap - c3.exact_erm_gap), 0.0});
  r.criteria.push_back({0, "halving T hurts", c3.suboptimality_half_T >= c3.suboptimality, "",
                        0.0});
  return finish(r, cfg);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Overfitting lab for convex stochastic optimization"};
  app.set_version_flag("--version", std::string("lab ") + kLabVersion + " (code " +
                                        kCodeConstructionVersion + ", suite " +
                                        kAcceptanceSuiteVersion + ")");
  app.require_subcommand(1);

  auto* code = app.add_subcommand("code", "build or verify a code file");
  code->require_subcommand(1);
  int build_k = 16;
  double build_rho = 0.10;
  std::uint64_t build_seed = 1;
  int build_retries = 20;
  std::string code_path;
  auto* build = code->add_subcommand("build", "construct and certify a code");
  build->add_option("--k", build_k)->check(CLI::Range(1, kMaxCodeK));
  build->add_option("--rho", build_rho);
  build->add_option("--seed", build_seed);
  build->add_option("--retries", build_retries);
  build->add_option("--out", code_path)->required();
  auto* verify = code->add_subcommand("verify", "re-verify a saved code");
  verify->add_option("--in", code_path)->required()->check(CLI::ExistingFile);

  Common common;
  std::string trajectory_out;
  auto* trial = app.add_subcommand("trial", "run trials in the configured mode");
  add_common(trial, common);
  trial->add_option("--trajectory", trajectory_out, "dump the GD trajectory of trial 0 as CSV");
  auto* sweep = app.add_subcommand("sweep", "eta*T sweep of GD");
  add_common(sweep, common);
  auto* conc = app.add_subcommand("concentration", "Monte Carlo of |v_S| <= 3 sqrt(m)");
  add_common(conc, common);
  auto* c3 = app.add_subcommand("corollary3", "GD to an eps-ERM of the ERM instance");
  add_common(c3, common);
  auto* accept = app.add_subcommand("accept", "full acceptance suite");
  add_common(accept, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    return 2;
  }

  try {
    if (*build) {
      const BinaryCode c = build_code(build_k, build_rho, build_seed, build_retries);
      save_code(c, code_path);
      std::printf("k=%d d_min=%d rho=%.17g attempts=%d fingerprint=%016llx\n", c.k,
                  c.min_distance, c.rho, c.attempts,
                  static_cast<unsigned long long>(c.fingerprint()));
      return 0;
    }
    if (*verify) {
      const BinaryCode c = load_code(code_path);
      const double rho = verify_relative_distance(c);
      std::printf("k=%d d_min=%d rho=%.17g verified\n", c.k, c.min_distance, rho);
      return 0;
    }
    if (*trial) return cmd_trial(load(common, trial), trajectory_out);
    if (*sweep) return cmd_sweep(load(common, sweep));
    if (*c3) return cmd_corollary3(load(common, c3));
    if (*conc) {
      const LabConfig cfg = load(common, conc);
      Report r;
      r.command = "concentration";
      r.cfg = cfg;
      r.criteria.push_back(check_concentration(cfg));
      return finish(r, cfg);
    }
    if (*accept) {
      const LabConfig cfg = load(common, accept);
      AcceptanceOptions opts;
      opts.on_criterion = [](const CriterionResult& c) {
        std::fprintf(stderr, "[%6.1fs] %s C%d %s\n", c.seconds, c.pass ? "pass" : "FAIL", c.id,
                     c.name.c_str());
      };
      return finish(run_acceptance(cfg, opts), cfg);
    }
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 2;
}
