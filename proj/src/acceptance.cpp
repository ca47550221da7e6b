#include "scolab/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace scolab {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

struct ErmTrialData {
  TrialResult trial;
  bool optimality_ok = true;
  double min_gap = 0.0;
  double min_sc_slack = 0.0;
  int eps_kept = 0;
  double eps_min_slack = 0.0;  // min over kept probes of population_gap - required
};

// Random w whose message block dominates, so the sign certificate has a chance
// to claim uniqueness; the other half of the queries are plain ball points.
ParamVector certificate_query(int k, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ParamVector w(static_cast<std::size_t>(k));
  const double scale = 1.0 / std::sqrt(static_cast<double>(k));
  for (double& x : w.message) x = (u(rng) < 0.5 ? -1.0 : 1.0) * scale * (0.02 + 0.98 * u(rng));
  const ParamVector d = random_direction(k, rng);
  const double r = std::pow(10.0, -4.0 + 4.0 * u(rng));
  w.code = d.code;
  for (double& x : w.code) x *= r;
  return project_unit_ball(w);
}

std::pair<double, double> lipschitz_scan(const HardInstance& inst, int points, std::uint64_t seed) {
  const int k = inst.k();
  std::uniform_int_distribution<int> pick(0, k - 1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int q = 0; q < points; ++q) {
    Rng rng = make_rng(seed, static_cast<std::uint64_t>(q), kTagProbe);
    const double radius = q % 4 == 3 ? std::pow(10.0, -3.0 * u(rng)) : 1.0;
    const ParamVector w = random_ball_point(k, rng, radius);
    worst = std::max(worst, loss_subgrad(inst, w, pick(rng)).norm());
  }
  const InstanceParams& p = inst.params;
  const double bound = 4.0 + p.gamma_m * std::sqrt(static_cast<double>(k)) + p.gamma_c +
                       p.lambda_m + p.lambda_c;
  return {worst, bound};
}

bool caps_hold(const InstanceParams& p) {
  return p.lambda_m <= 1.0 && p.lambda_c <= 1.0 && p.gamma_c <= 1.0 && p.zeta <= 1.0 &&
         p.gamma_m * std::sqrt(static_cast<double>(p.k)) <= 1.0;
}

bool same_trial(const TrialResult& a, const TrialResult& b) {
  TrialRow ra = to_row(a), rb = to_row(b);
  ra.runtime_ms = rb.runtime_ms = 0;
  return ra == rb && a.S.draws == b.S.draws && a.feldman_excess == b.feldman_excess;
}

}  // namespace

CriterionResult check_code_certification(const LabConfig& cfg) {
  CriterionResult c{1, "code certification", false, "", 0.0};
  const auto t0 = Clock::now();
  try {
    const BinaryCode code = build_code(16, 0.10, cfg.code_seed, 20);
    const auto tv = Clock::now();
    const double rho = verify_relative_distance(code);
    const double verify_s = seconds_since(tv);

    Rng rng = make_rng(cfg.seed, 0, kTagQuery);
    std::uniform_int_distribution<std::uint64_t> msg(1, code.size() - 1);
    double worst = -1.0;
    for (int q = 0; q < 10000; ++q) {
      const std::uint64_t a = msg(rng);
      std::uint64_t b = msg(rng);
      while (b == a) b = msg(rng);
      const Vec ga = normalized_codeword(code, a), gb = normalized_codeword(code, b);
      worst = std::max(worst, dot(ga, gb));
    }
    const bool pairs_ok = worst <= 1.0 - 2.0 * rho + 1e-12 && worst < 1.0 - rho / 2.0;
    c.pass = rho >= 0.10 && rho == code.rho && code.attempts <= 20 && verify_s < 10.0 && pairs_ok;
    c.detail = "rho=" + num(rho) + " attempts=" + std::to_string(code.attempts) +
               " verify_s=" + num(verify_s) + " max_corr=" + num(worst) +
               " (<= 1-2rho=" + num(1.0 - 2.0 * rho) + ")";
  } catch (const CodeConstructionError& e) {
    c.detail = e.what();
  }
  c.seconds = seconds_since(t0);
  return c;
}

CriterionResult check_concentration(const LabConfig& cfg) {
  CriterionResult c{7, "concentration", false, "", 0.0};
  const auto t0 = Clock::now();
  const double frac = mc_concentration(cfg.m, cfg.k, cfg.concentration_trials, cfg.seed);
  c.pass = cfg.concentration_trials >= 2000 && frac >= 0.47;
  c.detail = "fraction=" + num(frac) + " over " + std::to_string(cfg.concentration_trials) +
             " trials (>= 0.47)";
  c.seconds = seconds_since(t0);
  return c;
}

CriterionResult check_argmax_soundness(const LabContext& ctx, long trajectory_claims,
                                       long trajectory_disagreements) {
  CriterionResult c{6, "argmax soundness", false, "", 0.0};
  const auto t0 = Clock::now();
  const LabConfig& cfg = ctx.cfg;
  const HardInstance instances[2] = {erm_instance(ctx),
                                     gd_instance(ctx, cfg.eta, cfg.T)};
  std::vector<char> claimed(cfg.pcert_queries, 0), bad(cfg.pcert_queries, 0);
  parallel_for(cfg.pcert_queries, cfg.thread_count(), [&](long q) {
    Rng rng = make_rng(cfg.seed, static_cast<std::uint64_t>(q), kTagQuery);
    const HardInstance& inst = instances[q % 2];
    const ParamVector w =
        (q / 2) % 2 ? certificate_query(inst.k(), rng) : random_ball_point(inst.k(), rng);
    Vec cand(w.message.size());
    for (std::size_t i = 0; i < cand.size(); ++i) cand[i] = w.message[i] < 0.0 ? -1.0 : 1.0;
    if (std::any_of(w.message.begin(), w.message.end(), [](double x) { return x == 0.0; })) return;
    const PCertified pc = p_eval_certified(inst, w, cand);
    if (!pc.certified_unique) return;
    claimed[q] = 1;
    const PBruteForce pb = p_eval_bruteforce(inst, w);
    bad[q] = pb.tie || pb.argmax != message_bits(cand) || std::abs(pb.value - pc.value) > 1e-12;
  });
  const long claims = std::count(claimed.begin(), claimed.end(), 1);
  const long disagreements = std::count(bad.begin(), bad.end(), 1);
  c.pass = claims > 0 && disagreements == 0 && trajectory_disagreements == 0 && ctx.cfg.k <= 16;
  c.detail = std::to_string(cfg.pcert_queries) + " queries: " + std::to_string(claims) +
             " certified, " + std::to_string(disagreements) + " disagreements; trajectories: " +
             std::to_string(trajectory_claims) + " certified, " +
             std::to_string(trajectory_disagreements) + " disagreements";
  c.seconds = seconds_since(t0);
  return c;
}

CriterionResult check_lipschitz(const LabContext& ctx) {
  CriterionResult c{9, "Lipschitz audit", true, "", 0.0};
  const auto t0 = Clock::now();
  const LabConfig& cfg = ctx.cfg;
  InstanceParams capped;
  capped.mode = Mode::kGd;
  capped.k = cfg.k;
  capped.m = cfg.m;
  capped.zeta = 1.0;
  capped.gamma_c = 1.0;
  capped.gamma_m = 1.0 / std::sqrt(static_cast<double>(cfg.k));
  capped.lambda_c = 1.0;
  capped.lambda_m = 1.0;
  capped.rho = ctx.rho();
  const HardInstance instances[3] = {erm_instance(ctx), gd_instance(ctx, cfg.eta, cfg.T),
                                     make_instance(capped, ctx.code, cfg.brute_force_cap)};
  const char* names[3] = {"erm", "gd", "capped"};
  std::pair<double, double> res[3];
  parallel_for(3, cfg.thread_count(), [&](long i) {
    res[i] = lipschitz_scan(instances[i], cfg.lipschitz_points, derive_seed(cfg.seed, i, kTagProbe));
  });
  std::ostringstream d;
  for (int i = 0; i < 3; ++i) {
    const auto [worst, bound] = res[i];
    bool ok = worst <= bound + 1e-9;
    const bool capped_ok = caps_hold(instances[i].params);
    if (capped_ok) ok = ok && worst <= 7.0 + 1e-9;
    c.pass = c.pass && ok;
    d << names[i] << ": max|g|=" << num(worst) << " bound=" << num(bound)
      << (capped_ok ? " (caps hold, <= 7)" : "") << (i < 2 ? "; " : "");
  }
  c.pass = c.pass && cfg.lipschitz_points >= 10000;
  c.detail = d.str();
  c.seconds = seconds_since(t0);
  return c;
}

Report run_acceptance(const LabConfig& cfg, const AcceptanceOptions& opts) {
  const auto start = Clock::now();
  Report report;
  report.command = "accept";
  report.cfg = cfg;
  auto finish = [&](CriterionResult c) {
    if (opts.on_criterion) opts.on_criterion(c);
    report.criteria.push_back(std::move(c));
  };

  finish(check_code_certification(cfg));
  const LabContext ctx = make_context(cfg);
  report.code = ctx.code;
  const double rho = ctx.rho();
  const int threads = cfg.thread_count();

  // ERM trials feed C2, C3 and C4.
  auto t0 = Clock::now();
  const HardInstance erm = erm_instance(ctx);
  const double epsilon = cfg.epsilon_value(rho);
  const double alpha = erm.params.alpha();
  const double transport = 7.0 * std::sqrt(2.0 * epsilon / alpha);
  std::vector<ErmTrialData> erm_data(cfg.trials);
  parallel_for(cfg.trials, threads, [&](long i) {
    ErmTrialData& d = erm_data[i];
    d.trial = run_erm_trial(ctx, i);
    if (!d.trial.conditioned || i >= cfg.optimality_trials) return;
    const SampleStats& S = d.trial.S;
    const ErmSolution sol = closed_form_minimizer(erm, S);
    const OptimalityReport opt =
        verify_global_optimality(erm, S, sol, cfg.probes, derive_seed(cfg.seed, i, kTagProbe));
    d.optimality_ok = opt.ok();
    d.min_gap = opt.min_gap;
    d.min_sc_slack = opt.min_sc_slack;
    const EpsilonProbeResult eps = epsilon_erm_probe(erm, S, sol, epsilon, cfg.eps_probes,
                                                     derive_seed(cfg.seed, i, kTagQuery));
    const double exact_gap = d.trial.gap_population.lo;
    d.eps_kept = static_cast<int>(eps.kept.size());
    d.eps_min_slack = std::numeric_limits<double>::infinity();
    for (const EpsilonProbe& p : eps.kept)
      d.eps_min_slack = std::min(d.eps_min_slack, p.population_gap - (exact_gap - transport));
  });
  const double erm_seconds = seconds_since(t0);

  long cond = 0, probed = 0, resid_bad = 0, opt_bad = 0, gap_bad = 0, eps_kept = 0;
  double max_resid = 0.0, min_opt_gap = 0.0, min_sc = 0.0, min_gap_slack = 1e300;
  double eps_slack = 1e300;
  std::vector<double> gaps;
  for (const ErmTrialData& d : erm_data) {
    report.rows.push_back(to_row(d.trial));
    if (!d.trial.conditioned) continue;
    ++cond;
    max_resid = std::max(max_resid, d.trial.stationarity_residual);
    resid_bad += d.trial.stationarity_residual > 1e-9;
    if (d.trial.trial_index < cfg.optimality_trials) {
      ++probed;
      opt_bad += !d.optimality_ok;
      min_opt_gap = probed == 1 ? d.min_gap : std::min(min_opt_gap, d.min_gap);
      min_sc = probed == 1 ? d.min_sc_slack : std::min(min_sc, d.min_sc_slack);
    }
    const double slack = d.trial.gap_population.lo - (d.trial.bound_predicted - 1e-9);
    min_gap_slack = std::min(min_gap_slack, slack);
    gap_bad += slack < 0.0;
    gaps.push_back(d.trial.gap_population.lo);
    eps_kept += d.eps_kept;
    if (d.eps_kept > 0) eps_slack = std::min(eps_slack, d.eps_min_slack + 1e-9);
  }
  {
    CriterionResult c{2, "ERM closed-form oracle", false, "", erm_seconds};
    c.pass = probed >= 200 && resid_bad == 0 && opt_bad == 0 && cfg.probes >= 1000;
    c.detail = std::to_string(cond) + " conditioned of " + std::to_string(cfg.trials) +
               "; max residual=" + num(max_resid) + "; " + std::to_string(cfg.probes) +
               " probes on each of " + std::to_string(probed) +
               " conditioned trials, min F_S gap=" + num(min_opt_gap) +
               ", min strong-convexity slack=" + num(min_sc) + "; failing trials=" +
               std::to_string(resid_bad + opt_bad);
    finish(c);
  }
  {
    const double lambda = cfg.lambda_value();
    const double paper_form =
        std::min(rho / (72.0 * lambda * std::pow(cfg.m, 1.5)), rho / 12.0);
    const double med = median(gaps);
    report.metrics["erm_median_gap"] = med;
    report.metrics["erm_paper_form"] = paper_form;
    report.metrics["erm_bound_rho_zeta_over_4"] = rho * erm.params.zeta / 4.0;
    CriterionResult c{3, "ERM overfitting gap", false, "", 0.0};
    c.pass = cond > 0 && gap_bad == 0;
    c.detail = "bound rho*zeta/4=" + num(rho * erm.params.zeta / 4.0) +
               "; min slack=" + num(min_gap_slack) + "; violations=" + std::to_string(gap_bad) +
               "; median gap=" + num(med) + " vs min{rho/(72 lambda m^1.5), rho/12}=" +
               num(paper_form);
    finish(c);
  }
  {
    CriterionResult c{4, "epsilon-ERM transport", false, "", 0.0};
    c.pass = eps_kept > 0 && eps_slack >= 0.0;
    c.detail = "epsilon=" + num(epsilon) + " transport 7 sqrt(2 eps/alpha)=" + num(transport) +
               "; kept eps-ERM probes=" + std::to_string(eps_kept) +
               "; min slack=" + num(eps_kept ? eps_slack : 0.0);
    finish(c);
  }

  // GD trajectories: C5, and the trajectory half of C6.
  t0 = Clock::now();
  std::vector<TrialResult> gd_trials(cfg.gd_trials);
  std::vector<long> claims(cfg.gd_trials, 0), disagreements(cfg.gd_trials, 0);
  std::vector<char> traj_ok(cfg.gd_trials, 0);
  parallel_for(cfg.gd_trials, threads, [&](long i) {
    TrajectoryRecord rec;
    gd_trials[i] = run_gd_trial(ctx, i, cfg.eta, cfg.T, cfg.suffix_value(), &rec);
    claims[i] = rec.certified_claims;
    disagreements[i] = rec.certificate_disagreements;
    traj_ok[i] = rec.all_certificates_ok() && rec.max_closed_form_dev <= 1e-8 && !rec.aborted;
  });
  {
    long gd_cond = 0, bad = 0, bound_bad = 0;
    double max_dev = 0.0;
    for (long i = 0; i < cfg.gd_trials; ++i) {
      report.rows.push_back(to_row(gd_trials[i]));
      if (!gd_trials[i].conditioned) continue;
      ++gd_cond;
      bad += !traj_ok[i];
      max_dev = std::max(max_dev, gd_trials[i].max_traj_dev);
      bound_bad += gd_trials[i].gap_population.lo < gd_trials[i].bound_predicted - 1e-9;
    }
    CriterionResult c{5, "GD trajectory oracle", false, "", seconds_since(t0)};
    c.pass = gd_cond > 0 && bad == 0 && bound_bad == 0 && cfg.T <= 2000;
    c.detail = std::to_string(gd_cond) + " conditioned of " + std::to_string(cfg.gd_trials) +
               ", T=" + std::to_string(cfg.T) + "; certificate failures=" + std::to_string(bad) +
               "; max deviation=" + num(max_dev) + "; bound violations=" +
               std::to_string(bound_bad);
    finish(c);
  }
  {
    long tc = 0, td = 0;
    for (long i = 0; i < cfg.gd_trials; ++i) {
      tc += claims[i];
      td += disagreements[i];
    }
    finish(check_argmax_soundness(ctx, tc, td));
  }

  finish(check_concentration(cfg));

  t0 = Clock::now();
  const SweepResult sweep = sweep_eta_T(ctx, default_sweep_grid(cfg), cfg.sweep_trials);
  report.sweep = sweep;
  {
    bool plateau_ok = true;
    int plateau_points = 0;
    double worst_rel = 0.0;
    for (const SweepPoint& p : sweep.points) {
      if (!p.plateau_region) continue;
      ++plateau_points;
      worst_rel = std::max(worst_rel, p.max_erm_rel_dev);
      plateau_ok = plateau_ok && p.max_erm_rel_dev <= 1e-3;
    }
    CriterionResult c{8, "GD scaling shape", false, "", seconds_since(t0)};
    c.pass = sweep.monotone && sweep.slope >= 0.4 && sweep.slope <= 0.6 && plateau_points > 0 &&
             plateau_ok;
    c.detail = "slope=" + num(sweep.slope) + (sweep.monotone ? " monotone" : " NOT monotone") +
               "; plateau points=" + std::to_string(plateau_points) +
               " max rel dev to exact ERM=" + num(worst_rel);
    finish(c);
  }

  finish(check_lipschitz(ctx));

  // C10: budget, determinism (including a permuted order), and every other criterion.
  {
    CriterionResult c{10, "end-to-end run", false, "", 0.0};
    const auto tr = Clock::now();
    bool deterministic = true;
    if (opts.determinism_rerun) {
      const long n = std::min<long>(8, cfg.trials);
      for (long i = n - 1; i >= 0; --i)
        deterministic = deterministic && same_trial(run_erm_trial(ctx, i), erm_data[i].trial);
      if (cfg.gd_trials > 0)
        deterministic = deterministic && same_trial(run_gd_trial(ctx, 0, cfg.eta, cfg.T,
                                                                 cfg.suffix_value()),
                                                    gd_trials[0]);
      const LabContext again = make_context(cfg);
      deterministic = deterministic && again.code->table == ctx.code->table;
    }
    const double total = seconds_since(start);
    const bool others = std::all_of(report.criteria.begin(), report.criteria.end(),
                                    [](const CriterionResult& r) { return r.pass; });
    c.pass = deterministic && total < opts.time_budget_s && others;
    c.detail = "total_s=" + num(total) + " (< " + num(opts.time_budget_s) + ")" +
               (deterministic ? "; rerun identical" : "; rerun DIFFERS") +
               (others ? "; all other criteria pass" : "; other criteria failed");
    c.seconds = seconds_since(tr);
    report.metrics["total_seconds"] = total;
    finish(c);
  }
  return report;
}

}  // namespace scolab
