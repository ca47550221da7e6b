#include "scolab/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

namespace scolab {

namespace {

using Clock = std::chrono::steady_clock;

long elapsed_ms(Clock::time_point start) {
  return static_cast<long>(
      std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - start).count());
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<long>(mid), v.end());
  double hi = v[mid];
  if (v.size() % 2 == 1) return hi;
  const double lo = *std::max_element(v.begin(), v.begin() + static_cast<long>(mid));
  return 0.5 * (lo + hi);
}

RiskValue gap_between(const RiskValue& a, const RiskValue& b) {
  return {a.exact && b.exact, a.lo - b.hi, a.hi - b.lo};
}

GDConfig gd_config(const LabConfig& c, double eta, long T, long s) {
  GDConfig g;
  g.eta = eta;
  g.T = T;
  g.suffix_s = s;
  g.record_every = c.record_every;
  g.abort_on_violation = c.abort_on_violation;
  return g;
}

}  // namespace

HardInstance erm_instance(const LabContext& ctx) {
  const LabConfig& c = ctx.cfg;
  const double lambda = c.lambda_value();
  const Schedule s = schedule_erm(c.m, lambda, c.epsilon_value(ctx.rho()), ctx.rho(), c.relax, c.k);
  return make_instance(s.params, ctx.code, c.brute_force_cap);
}

HardInstance gd_instance(const LabContext& ctx, double eta, long T) {
  const LabConfig& c = ctx.cfg;
  const Schedule s = schedule_gd(c.m, eta, T, ctx.rho(), c.relax, c.k);
  return make_instance(s.params, ctx.code, c.brute_force_cap);
}

LabContext make_context(const LabConfig& cfg) {
  cfg.validate();
  LabContext ctx;
  ctx.cfg = cfg;
  ctx.code = std::make_shared<const BinaryCode>(
      build_code(cfg.k, cfg.rho_target, cfg.code_seed, cfg.max_retries));
  return ctx;
}

void parallel_for(long n, int threads, const std::function<void(long)>& fn) {
  if (n <= 0) return;
  const int workers = static_cast<int>(std::min<long>(std::max(1, threads), n));
  if (workers == 1) {
    for (long i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<long> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (long i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mu);
          if (!error) error = std::current_exception();
          next = n;
        }
      }
    });
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

SampleStats trial_sample(const LabContext& ctx, long trial_index) {
  Rng rng = make_rng(ctx.cfg.seed, static_cast<std::uint64_t>(trial_index), kTagSample);
  return draw_sample(ctx.cfg.m, ctx.cfg.k, rng);
}

TrialResult run_erm_trial(const LabContext& ctx, long trial_index) {
  const auto start = Clock::now();
  const HardInstance inst = erm_instance(ctx);
  TrialResult r;
  r.trial_index = trial_index;
  r.seed = derive_seed(ctx.cfg.seed, static_cast<std::uint64_t>(trial_index), kTagSample);
  r.S = trial_sample(ctx, trial_index);
  r.conditioned = r.S.conditioned;
  r.mode = Mode::kErm;
  r.m = ctx.cfg.m;
  r.k = ctx.cfg.k;

  const ErmSolution sol = closed_form_minimizer(inst, r.S);
  const ParamVector zero(static_cast<std::size_t>(r.k));
  r.gap_empirical = sol.empirical_risk - empirical_risk(inst, zero, r.S);
  r.gap_population = gap_between(population_risk(inst, sol.w_star), population_risk(inst, zero));
  r.feldman_excess = feldman_excess(inst, sol.w_star);
  r.bound_predicted = ctx.rho() * inst.params.zeta / 4.0;
  r.stationarity_residual = sol.stationarity_residual;
  r.certificates_ok = sol.stationarity_residual <= 1e-9 && sol.feasibility_margin >= -kFeasibilityTol;
  r.runtime_ms = elapsed_ms(start);
  return r;
}

TrialResult run_gd_trial(const LabContext& ctx, long trial_index, double eta, long T, long s,
                         TrajectoryRecord* trajectory) {
  const auto start = Clock::now();
  const HardInstance inst = gd_instance(ctx, eta, T);
  const InstanceParams& p = inst.params;
  TrialResult r;
  r.trial_index = trial_index;
  r.seed = derive_seed(ctx.cfg.seed, static_cast<std::uint64_t>(trial_index), kTagSample);
  r.S = trial_sample(ctx, trial_index);
  r.conditioned = r.S.conditioned;
  r.mode = Mode::kGd;
  r.m = ctx.cfg.m;
  r.k = ctx.cfg.k;
  r.eta = eta;
  r.T = T;
  r.s = s;

  TrajectoryRecord rec = run_gd(inst, r.S, gd_config(ctx.cfg, eta, T, s));
  const ParamVector& w = rec.suffix_avg;
  const ParamVector zero(static_cast<std::size_t>(r.k));
  r.gap_empirical = empirical_risk(inst, w, r.S) - empirical_risk(inst, zero, r.S);
  r.gap_population = gap_between(population_risk(inst, w), population_risk(inst, zero));
  r.feldman_excess = feldman_excess(inst, w);
  const double etaT = eta * static_cast<double>(T);
  r.bound_predicted = 0.5 * p.zeta * (ctx.rho() / 2.0 - 1.0 / (p.lambda_c * etaT));
  r.max_traj_dev = rec.max_closed_form_dev;
  r.certificates_ok = rec.all_certificates_ok() && !rec.aborted &&
                      rec.max_closed_form_dev <= 1e-8 && rec.certificate_disagreements == 0;
  if (trajectory) *trajectory = std::move(rec);
  r.runtime_ms = elapsed_ms(start);
  return r;
}

TrialResult run_trial(const LabContext& ctx, long trial_index) {
  const LabConfig& c = ctx.cfg;
  if (c.mode == Mode::kErm) return run_erm_trial(ctx, trial_index);
  return run_gd_trial(ctx, trial_index, c.eta, c.T, c.suffix_value());
}

std::vector<TrialResult> run_trials(const LabContext& ctx, long n) {
  std::vector<TrialResult> out(static_cast<std::size_t>(std::max(0L, n)));
  parallel_for(n, ctx.cfg.thread_count(), [&](long i) { out[i] = run_trial(ctx, i); });
  return out;
}

double mc_concentration(int m, int k, int trials, std::uint64_t seed) {
  if (trials < 100) throw InvalidInput("mc_concentration: needs at least 100 trials");
  long hits = 0;
  for (int t = 0; t < trials; ++t) {
    Rng rng = make_rng(seed, static_cast<std::uint64_t>(t), kTagSample);
    hits += draw_sample(m, k, rng).conditioned ? 1 : 0;
  }
  return static_cast<double>(hits) / trials;
}

std::vector<std::pair<double, long>> default_sweep_grid(const LabConfig& cfg) {
  std::vector<std::pair<double, long>> grid;
  const double sm = std::sqrt(static_cast<double>(cfg.m));
  for (int j = cfg.sweep_j_min; j <= cfg.sweep_j_max; ++j) {
    const double target = std::ldexp(sm, j);
    grid.emplace_back(cfg.sweep_eta, static_cast<long>(std::ceil(target / cfg.sweep_eta - 1e-9)));
  }
  return grid;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) return 0.0;
  double mx = 0.0, my = 0.0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxx > 0.0 ? sxy / sxx : 0.0;
}

SweepResult sweep_eta_T(const LabContext& ctx, const std::vector<std::pair<double, long>>& grid,
                        int trials) {
  const LabConfig& c = ctx.cfg;
  const double sm = std::sqrt(static_cast<double>(c.m));
  for (const auto& [eta, T] : grid)
    if (!(eta * static_cast<double>(T) > sm))
      throw InvalidInput("sweep_eta_T: grid point with eta*T <= sqrt(m)");

  const HardInstance erm = erm_instance(ctx);
  std::vector<SampleStats> samples(trials);
  std::vector<double> exact_gap(trials, 0.0);
  std::vector<int> conditioned;
  for (int i = 0; i < trials; ++i) {
    samples[i] = trial_sample(ctx, i);
    if (samples[i].conditioned) conditioned.push_back(i);
  }
  const ParamVector zero(static_cast<std::size_t>(c.k));
  const double F0_erm = population_risk(erm, zero).lo;
  parallel_for(static_cast<long>(conditioned.size()), c.thread_count(), [&](long r) {
    const int i = conditioned[r];
    exact_gap[i] = population_risk(erm, closed_form_minimizer(erm, samples[i]).w_star).lo - F0_erm;
  });

  SweepResult out;
  const double threshold = c.plateau_scale * std::pow(c.m, 1.5);
  for (const auto& [eta, T] : grid) {
    const HardInstance gd = gd_instance(ctx, eta, T);
    const double F0_gd = population_risk(gd, zero).lo;
    const long s = T / 2;
    const bool plateau = eta * static_cast<double>(T) >= threshold;
    const std::size_t n = conditioned.size();
    std::vector<double> excess(n), gap(n), slack(n), erm_gap(n), exact(n), rel(n);
    std::vector<char> ok(n);
    parallel_for(static_cast<long>(n), c.thread_count(), [&](long r) {
      const SampleStats& S = samples[conditioned[r]];
      const TrajectoryRecord rec = run_gd(gd, S, gd_config(c, eta, T, s));
      excess[r] = feldman_excess(gd, rec.suffix_avg);
      gap[r] = population_risk(gd, rec.suffix_avg).lo - F0_gd;
      const double etaT = eta * static_cast<double>(T);
      const double bound = 0.5 * gd.params.zeta * (ctx.rho() / 2.0 - 1.0 / (gd.params.lambda_c * etaT));
      slack[r] = excess[r] - bound;
      ok[r] = rec.all_certificates_ok() && rec.max_closed_form_dev <= 1e-8;

      exact[r] = exact_gap[conditioned[r]];
      if (!plateau) return;
      const TrajectoryRecord erm_rec = run_gd(erm, S, gd_config(c, eta, T, s));
      erm_gap[r] = population_risk(erm, erm_rec.suffix_avg).lo - F0_erm;
      rel[r] = std::abs(erm_gap[r] - exact[r]) / std::max(std::abs(exact[r]), 1e-300);
    });

    SweepPoint pt;
    pt.eta = eta;
    pt.T = T;
    pt.etaT = eta * static_cast<double>(T);
    pt.pre_cap = std::sqrt(gd.params.gamma_m / (30.0 * c.relax.gd_gamma_c * sm * pt.etaT)) <=
                 gd.params.lambda_c / std::sqrt(3.0);
    pt.conditioned = static_cast<int>(n);
    pt.median_feldman_excess = median(excess);
    pt.median_gap = median(gap);
    pt.min_bound_slack = n ? *std::min_element(slack.begin(), slack.end()) : 0.0;
    pt.certificate_pass_rate =
        n ? static_cast<double>(std::count(ok.begin(), ok.end(), 1)) / static_cast<double>(n) : 0.0;
    pt.median_erm_gd_gap = median(erm_gap);
    pt.median_erm_exact_gap = median(exact);
    pt.max_erm_rel_dev = n ? *std::max_element(rel.begin(), rel.end()) : 0.0;
    pt.plateau_region = plateau;
    out.points.push_back(pt);
  }

  std::vector<double> xs, ys;
  out.monotone = true;
  for (std::size_t i = 0; i < out.points.size(); ++i) {
    const SweepPoint& pt = out.points[i];
    if (i > 0 && pt.median_feldman_excess < out.points[i - 1].median_feldman_excess) out.monotone = false;
    if (pt.pre_cap && pt.median_feldman_excess > 0.0) {
      xs.push_back(pt.etaT);
      ys.push_back(pt.median_feldman_excess);
    }
  }
  out.slope = loglog_slope(xs, ys);
  return out;
}

Corollary3Result corollary3_run(const LabContext& ctx, long trial_index) {
  const auto start = Clock::now();
  const LabConfig& c = ctx.cfg;
  const HardInstance inst = erm_instance(ctx);
  const double eta = c.eta;
  const long T = static_cast<long>(std::ceil(c.corollary3_scale * std::pow(c.m, 1.5) / eta));

  Corollary3Result out;
  TrialResult& r = out.trial;
  r.trial_index = trial_index;
  r.seed = derive_seed(c.seed, static_cast<std::uint64_t>(trial_index), kTagSample);
  r.S = trial_sample(ctx, trial_index);
  r.conditioned = r.S.conditioned;
  r.mode = Mode::kErm;
  r.m = c.m;
  r.k = c.k;
  r.eta = eta;
  r.T = T;
  r.s = T / 2;

  const ErmSolution sol = closed_form_minimizer(inst, r.S);
  const TrajectoryRecord rec = run_gd(inst, r.S, gd_config(c, eta, T, T / 2));
  const TrajectoryRecord half = run_gd(inst, r.S, gd_config(c, eta, T / 2, T / 4));
  const ParamVector zero(static_cast<std::size_t>(c.k));
  const RiskValue F0 = population_risk(inst, zero);

  out.epsilon = c.epsilon_value(ctx.rho());
  out.suboptimality = empirical_risk(inst, rec.suffix_avg, r.S) - sol.empirical_risk;
  out.suboptimality_half_T = empirical_risk(inst, half.suffix_avg, r.S) - sol.empirical_risk;
  out.exact_erm_gap = population_risk(inst, sol.w_star).lo - F0.hi;
  r.gap_population = gap_between(population_risk(inst, rec.suffix_avg), F0);
  out.gd_gap = r.gap_population.lo;
  out.reached_epsilon = out.suboptimality <= out.epsilon;
  r.gap_empirical = empirical_risk(inst, rec.suffix_avg, r.S) - empirical_risk(inst, zero, r.S);
  r.feldman_excess = feldman_excess(inst, rec.suffix_avg);
  r.bound_predicted = ctx.rho() * inst.params.zeta / 4.0;
  r.max_traj_dev = rec.max_closed_form_dev;
  r.certificates_ok = rec.all_certificates_ok();
  r.runtime_ms = elapsed_ms(start);
  return out;
}

}  // namespace scolab
