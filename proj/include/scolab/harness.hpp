#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "scolab/config.hpp"
#include "scolab/erm.hpp"
#include "scolab/hard_instance.hpp"
#include "scolab/subgrad_gd.hpp"

namespace scolab {

/// Shared, read-only state of one lab run: the validated config and the code.
struct LabContext {
  LabConfig cfg;
  std::shared_ptr<const BinaryCode> code;

  double rho() const { return code->rho; }
};

/// Builds (and exhaustively verifies) the code described by cfg.
LabContext make_context(const LabConfig& cfg);

/// The scheduled ERM instance of cfg (lambda, epsilon, relax) over ctx.code.
HardInstance erm_instance(const LabContext& ctx);
/// The scheduled GD instance for horizon (eta, T).
HardInstance gd_instance(const LabContext& ctx, double eta, long T);

/// Calls fn(i) for i in [0, n) on a small worker pool. Results must be written
/// to per-index slots; scheduling order never affects them.
void parallel_for(long n, int threads, const std::function<void(long)>& fn);

struct TrialResult {
  long trial_index = 0;
  std::uint64_t seed = 0;  // derived sample stream seed
  SampleStats S;
  bool conditioned = false;
  Mode mode = Mode::kErm;
  int m = 0;
  int k = 0;
  double eta = 0.0;
  long T = 0;
  long s = 0;
  double gap_empirical = 0.0;  // F_S(w_S) - F_S(0)
  RiskValue gap_population;    // F(w_S) - F(0)
  double feldman_excess = 0.0; // h_D(w^c) - zeta(1 - rho/2)
  double bound_predicted = 0.0;
  bool certificates_ok = false;
  double max_traj_dev = 0.0;
  double stationarity_residual = 0.0;
  long runtime_ms = 0;
};

/// ERM trial: closed-form minimizer of the scheduled strongly convex instance.
/// bound_predicted = rho zeta / 4.
TrialResult run_erm_trial(const LabContext& ctx, long trial_index);

/// GD trial on the scheduled GD instance, output = suffix average.
/// bound_predicted = (1/2) zeta (rho/2 - 1/(lambda^c eta T)).
TrialResult run_gd_trial(const LabContext& ctx, long trial_index, double eta, long T, long s,
                         TrajectoryRecord* trajectory = nullptr);

/// Dispatches on cfg.mode using cfg's GD settings.
TrialResult run_trial(const LabContext& ctx, long trial_index);

std::vector<TrialResult> run_trials(const LabContext& ctx, long n);

/// Sample S for trial i: reproducible from (harness seed, i) alone.
SampleStats trial_sample(const LabContext& ctx, long trial_index);

/// Fraction of samples with |v_S| <= 3 sqrt(m).
double mc_concentration(int m, int k, int trials, std::uint64_t seed);

struct SweepPoint {
  double eta = 0.0;
  long T = 0;
  double etaT = 0.0;
  bool pre_cap = true;  // gamma^c on its sqrt(.) branch
  int conditioned = 0;
  // GD instance, conditioned trials
  double median_feldman_excess = 0.0;
  double median_gap = 0.0;
  double min_bound_slack = 0.0;  // min over trials of feldman_excess - bound_predicted
  double certificate_pass_rate = 0.0;
  // GD run on the ERM instance vs the exact ERM of that instance; the GD runs
  // happen only in the plateau region (eta T >= plateau_scale m^{3/2}).
  double median_erm_gd_gap = 0.0;
  double median_erm_exact_gap = 0.0;
  double max_erm_rel_dev = 0.0;
  bool plateau_region = false;
};

struct SweepResult {
  std::vector<SweepPoint> points;
  double slope = 0.0;  // log-log slope of median Feldman excess vs eta T, pre-cap points
  bool monotone = false;
};

/// eta T = 2^j sqrt(m) for j in [j_min, j_max] at eta = cfg.sweep_eta.
std::vector<std::pair<double, long>> default_sweep_grid(const LabConfig& cfg);

/// Least-squares slope of log y against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

SweepResult sweep_eta_T(const LabContext& ctx, const std::vector<std::pair<double, long>>& grid,
                        int trials);

struct Corollary3Result {
  TrialResult trial;
  double epsilon = 0.0;
  double suboptimality = 0.0;           // F_S(w_GD) - F_S(w_star)
  double suboptimality_half_T = 0.0;    // same with T/2 steps
  double exact_erm_gap = 0.0;
  double gd_gap = 0.0;
  bool reached_epsilon = false;
};

/// GD on the strongly convex ERM instance with eta T >= scale * m^{3/2}.
Corollary3Result corollary3_run(const LabContext& ctx, long trial_index);

}  // namespace scolab
