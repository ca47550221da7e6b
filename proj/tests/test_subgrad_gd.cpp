#include <cmath>
#include <memory>

#include "doctest.h"
#include "scolab/erm.hpp"
#include "scolab/subgrad_gd.hpp"

using namespace scolab;

namespace {

struct GdFixture {
  std::shared_ptr<const BinaryCode> code =
      std::make_shared<const BinaryCode>(build_code(16, 0.1, 1, 20));
  double eta = 0.1;
  long T = 300;
  HardInstance inst;
  SampleStats S;

  GdFixture() {
    Relax r;
    r.enabled = true;
    r.gamma_m_margin = 0.99;
    inst = make_instance(schedule_gd(8, eta, T, code->rho, r).params, code);
    Rng rng = make_rng(7, 0, kTagSample);
    do S = draw_sample(8, 16, rng);
    while (!S.conditioned);
  }

  GDConfig config(long steps, long s = 0) const {
    GDConfig c;
    c.eta = eta;
    c.T = steps;
    c.suffix_s = s;
    return c;
  }
};

}  // namespace

TEST_CASE("first step lands on (0, (eta/m) vS)") {
  GdFixture f;
  const TrajectoryRecord rec = run_gd(f.inst, f.S, f.config(1));
  REQUIRE(rec.iterates.size() == 1);
  const ParamVector& w1 = rec.iterates[0];
  for (double x : w1.code) CHECK(x == 0.0);
  for (int i = 0; i < 16; ++i) CHECK(w1.message[i] == doctest::Approx(f.eta / 8 * f.S.vS[i]).epsilon(1e-15));
  const ParamVector cf = closed_form_iterate(f.inst, f.S, f.eta, 1);
  CHECK(distance_inf(cf, w1) == 0.0);
  const TrajectoryComparison cmp = compare_trajectory(rec, f.inst, f.S, f.eta);
  CHECK(cmp.max_dev == 0.0);
  CHECK_FALSE(cmp.first_divergence.has_value());
}

TEST_CASE("closed form tends to the ERM-shaped limit") {
  GdFixture f;
  const InstanceParams& p = f.inst.params;
  const ParamVector w = closed_form_iterate(f.inst, f.S, f.eta, 200000);
  const Vec g = unit_normalize(encode(*f.code, f.S.vSs));
  for (int i = 0; i < 16; ++i)
    CHECK(w.message[i] ==
          doctest::Approx((f.S.vS[i] / 8.0 - p.gamma_m * f.S.vSs[i]) / p.lambda_m).epsilon(1e-12));
  for (int b = 0; b < 32; ++b)
    CHECK(w.code[b] == doctest::Approx(p.gamma_c / p.lambda_c * g[b]).epsilon(1e-12));
}

TEST_CASE("all certificates hold along a conditioned GD run and match the closed form") {
  GdFixture f;
  const TrajectoryRecord rec = run_gd(f.inst, f.S, f.config(f.T, f.T / 2));
  CHECK(rec.steps_run == f.T);
  CHECK(rec.all_certificates_ok());
  CHECK_FALSE(rec.first_violation().has_value());
  CHECK(rec.max_closed_form_dev <= 1e-8);
  CHECK(rec.certificate_disagreements == 0);
  for (const StepCertificate& c : rec.per_step_cert) {
    CHECK(c.projection_inactive);
    CHECK(c.feldman_zero);
    if (c.t >= 2) {
      CHECK(c.p_argmax_is_vSs);
      CHECK(c.p_positive);
    }
  }
  const TrajectoryComparison cmp = compare_trajectory(rec, f.inst, f.S, f.eta);
  CHECK(cmp.max_dev <= 1e-8);
}

TEST_CASE("a forced violation is located by the trajectory comparison") {
  GdFixture f;
  InstanceParams p = f.inst.params;
  p.gamma_c = 0.5;
  p.zeta = std::min(1.0, p.gamma_c / p.lambda_c);
  const HardInstance bad = make_instance(p, f.code);
  GDConfig c = f.config(60);
  const TrajectoryRecord rec = run_gd(bad, f.S, c);
  const auto viol = rec.first_violation();
  REQUIRE(viol.has_value());
  const TrajectoryComparison cmp = compare_trajectory(rec, bad, f.S, f.eta);
  REQUIRE(cmp.first_divergence.has_value());
  CHECK(*cmp.first_divergence == *viol);
  CHECK(rec.first_divergence_step == cmp.first_divergence);

  c.abort_on_violation = true;
  const TrajectoryRecord stop = run_gd(bad, f.S, c);
  CHECK(stop.aborted);
  CHECK(stop.steps_run == *viol);
}

TEST_CASE("suffix averages") {
  GdFixture f;
  const TrajectoryRecord two = run_gd(f.inst, f.S, f.config(2, 0));
  ParamVector mid = 0.5 * (two.iterates[0] + two.iterates[1]);
  CHECK(distance_inf(suffix_average(two, 0), mid) <= 1e-16);
  CHECK(distance_inf(two.suffix_avg, mid) <= 1e-16);

  const TrajectoryRecord rec = run_gd(f.inst, f.S, f.config(40, 39));
  CHECK(distance_inf(rec.suffix_avg, rec.iterates.back()) == 0.0);
  CHECK(distance_inf(suffix_average(rec, 39), rec.iterates.back()) == 0.0);

  TrajectoryRecord same = rec;
  for (auto& w : same.iterates) w = rec.iterates[5];
  CHECK(distance_inf(suffix_average(same, 10), rec.iterates[5]) <= 1e-16);
  CHECK_THROWS_AS(suffix_average(rec, 40), InvalidInput);
}

TEST_CASE("config validation") {
  GDConfig c;
  c.eta = 0.0;
  CHECK_THROWS_AS(c.validate(), InvalidInput);
  c.eta = 0.1;
  c.T = 0;
  CHECK_THROWS_AS(c.validate(), InvalidInput);
  c.T = 10;
  c.suffix_s = 10;
  CHECK_THROWS_AS(c.validate(), InvalidInput);
}
