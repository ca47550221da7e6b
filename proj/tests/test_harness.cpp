#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "scolab/harness.hpp"
#include "scolab/report.hpp"

using namespace scolab;

namespace {

LabConfig small_config() {
  LabConfig cfg;
  cfg.threads = 1;
  cfg.T = 200;
  return cfg;
}

const LabContext& shared_ctx() {
  static const LabContext ctx = make_context(small_config());
  return ctx;
}

bool rows_equal_ignoring_time(TrialRow a, TrialRow b) {
  a.runtime_ms = b.runtime_ms = 0;
  return a == b;
}

std::filesystem::path fresh_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / name;
  std::filesystem::remove_all(dir);
  return dir;
}

}  // namespace

TEST_CASE("trials are deterministic and independent of execution order") {
  const LabContext& ctx = shared_ctx();
  std::vector<TrialResult> forward = run_trials(ctx, 6);
  for (long i = 5; i >= 0; --i) {
    const TrialResult again = run_trial(ctx, i);
    CHECK(rows_equal_ignoring_time(to_row(again), to_row(forward[i])));
    CHECK(again.S.draws == forward[i].S.draws);
  }
  LabContext threaded = ctx;
  threaded.cfg.threads = 3;
  const std::vector<TrialResult> par = run_trials(threaded, 6);
  for (long i = 0; i < 6; ++i) CHECK(rows_equal_ignoring_time(to_row(par[i]), to_row(forward[i])));
}

TEST_CASE("ERM trials clear rho zeta / 4") {
  const LabContext& ctx = shared_ctx();
  for (long i = 0; i < 20; ++i) {
    const TrialResult r = run_erm_trial(ctx, i);
    if (!r.conditioned) continue;
    CHECK(r.bound_predicted ==
          doctest::Approx(ctx.rho() * erm_instance(ctx).params.zeta / 4.0).epsilon(1e-15));
    CHECK(r.gap_population.lo >= r.bound_predicted - 1e-9);
    CHECK(r.certificates_ok);
  }
}

TEST_CASE("GD trials clear their re-derived bound") {
  const LabContext& ctx = shared_ctx();
  for (long i = 0; i < 4; ++i) {
    TrajectoryRecord rec;
    const TrialResult r = run_gd_trial(ctx, i, 0.1, 200, 100, &rec);
    if (!r.conditioned) continue;
    CHECK(r.certificates_ok);
    CHECK(r.max_traj_dev <= 1e-8);
    const InstanceParams p = gd_instance(ctx, 0.1, 200).params;
    const double bound = 0.5 * p.zeta * (ctx.rho() / 2.0 - 1.0 / (p.lambda_c * 20.0));
    CHECK(r.bound_predicted == doctest::Approx(bound).epsilon(1e-15));
    CHECK(r.gap_population.lo >= r.bound_predicted - 1e-9);
    CHECK(r.feldman_excess >= r.bound_predicted - 1e-9);
  }
}

TEST_CASE("concentration") {
  CHECK(mc_concentration(1, 2, 100, 3) == 1.0);  // both draws give |vS| = sqrt 2 <= 3
  const double a = mc_concentration(8, 16, 2000, 7);
  CHECK(a >= 0.47);
  CHECK(a == mc_concentration(8, 16, 2000, 7));
  CHECK_THROWS_AS(mc_concentration(8, 16, 50, 7), InvalidInput);
}

TEST_CASE("log-log slope recovers a power law") {
  std::vector<double> x, y;
  for (int j = 1; j <= 6; ++j) {
    x.push_back(std::ldexp(1.0, j));
    y.push_back(3.0 * std::sqrt(x.back()));
  }
  CHECK(loglog_slope(x, y) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(loglog_slope({1.0}, {2.0}) == 0.0);
}

TEST_CASE("sweep grid and its precondition") {
  LabConfig cfg = small_config();
  const auto grid = default_sweep_grid(cfg);
  REQUIRE(grid.size() == 6);
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double target = std::ldexp(std::sqrt(8.0), static_cast<int>(j) + 1);
    CHECK(grid[j].first * grid[j].second >= target - 1e-9);
    CHECK(grid[j].first * grid[j].second < target + grid[j].first);
  }
  CHECK_THROWS_AS(sweep_eta_T(shared_ctx(), {{0.1, 20}}, 2), InvalidInput);
}

TEST_CASE("short sweep is monotone with slope near 1/2") {
  const SweepResult sw = sweep_eta_T(shared_ctx(), {{0.1, 57}, {0.1, 114}, {0.1, 227}}, 3);
  REQUIRE(sw.points.size() == 3);
  CHECK(sw.monotone);
  CHECK(sw.slope >= 0.4);
  CHECK(sw.slope <= 0.6);
  for (const SweepPoint& p : sw.points) {
    CHECK(p.certificate_pass_rate == 1.0);
    CHECK(p.min_bound_slack >= -1e-9);
  }
}

TEST_CASE("GD on the strongly convex instance reaches an epsilon-ERM") {
  const Corollary3Result c3 = corollary3_run(shared_ctx(), 0);
  CHECK(c3.reached_epsilon);
  CHECK(c3.suboptimality <= c3.epsilon);
  CHECK(std::abs(c3.gd_gap - c3.exact_erm_gap) <= 1e-6);
  CHECK(c3.suboptimality_half_T >= c3.suboptimality);
}

TEST_CASE("report files: empty set, round trip and criterion summary") {
  const auto empty_dir = fresh_dir("scolab_report_empty");
  Report empty;
  empty.command = "trial";
  emit_report(empty, empty_dir);
  CHECK(read_trials_csv(empty_dir / "trials.csv").empty());
  {
    std::ifstream in(empty_dir / "aggregate.json");
    std::stringstream ss;
    ss << in.rdbuf();
    CHECK(ss.str().find("\"aggregate\"") != std::string::npos);
  }

  const auto dir = fresh_dir("scolab_report_rt");
  Report r;
  r.command = "trial";
  r.code = shared_ctx().code;
  for (const TrialResult& t : run_trials(shared_ctx(), 5)) r.rows.push_back(to_row(t));
  r.rows.back().conditioned = false;
  r.criteria.push_back({3, "gap", true, "ok", 0.0});
  r.criteria.push_back({5, "certificates", false, "one failing", 0.0});
  emit_report(r, dir);
  const std::vector<TrialRow> back = read_trials_csv(dir / "trials.csv");
  CHECK(back == r.rows);
  CHECK(aggregate_rows(back) == aggregate_rows(r.rows));

  std::ifstream in(dir / "summary.txt");
  std::stringstream ss;
  ss << in.rdbuf();
  CHECK(ss.str().find("PASS C3 gap") != std::string::npos);
  CHECK(ss.str().find("FAIL C5 certificates") != std::string::npos);
  CHECK_FALSE(r.all_pass());

  CHECK_THROWS(emit_report(r, "/proc/definitely/not/writable"));
  std::filesystem::remove_all(empty_dir);
  std::filesystem::remove_all(dir);
}

TEST_CASE("aggregates only count conditioned rows") {
  std::vector<TrialRow> rows(3);
  rows[0].conditioned = true;
  rows[0].gap_pop_lo = 0.3;
  rows[0].bound_predicted = 0.1;
  rows[0].certificates_ok = true;
  rows[1].conditioned = true;
  rows[1].gap_pop_lo = 0.1;
  rows[1].bound_predicted = 0.05;
  rows[2].conditioned = false;
  rows[2].gap_pop_lo = -5.0;
  const TrialAggregate a = aggregate_rows(rows);
  CHECK(a.trials == 3);
  CHECK(a.conditioned == 2);
  CHECK(a.median_gap_lo == doctest::Approx(0.2));
  CHECK(a.min_gap_lo == 0.1);
  CHECK(a.min_bound_slack == doctest::Approx(0.05));
  CHECK(a.certificate_pass_rate == 0.5);
}
