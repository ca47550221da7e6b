#include <cmath>
#include <memory>

#include "doctest.h"
#include "oracle.hpp"
#include "scolab/erm.hpp"
#include "scolab/hard_instance.hpp"

using namespace scolab;

namespace {

Relax relaxed() {
  Relax r;
  r.enabled = true;
  return r;
}

struct Fixture {
  std::shared_ptr<const BinaryCode> code;
  HardInstance erm;

  explicit Fixture(int m = 4, std::uint64_t seed = 1) {
    code = std::make_shared<const BinaryCode>(build_code(2 * m, 0.1, seed, 20));
    const double lambda = theorem1_lambda(m);
    const Schedule s = schedule_erm(m, lambda, theorem1_epsilon(lambda, code->rho), code->rho,
                                    relaxed());
    erm = make_instance(s.params, code);
  }

  HardInstance with(InstanceParams p) const { return make_instance(p, code); }
};

ParamVector ball(int k, std::uint64_t seed, double radius = 1.0) {
  Rng rng = make_rng(seed, 0, 17);
  return random_ball_point(k, rng, radius);
}

}  // namespace

TEST_CASE("delta vectors") {
  const Vec d = delta_vector(2, 4, 0);
  CHECK(d == Vec{-1.5, 0.5, 0.5, 0.5});
  for (int m : {2, 3, 8}) {
    const int k = 2 * m;
    Vec sum(k, 0.0);
    for (int i = 0; i < k; ++i) {
      const Vec di = delta_vector(m, k, i);
      CHECK(oracle::normv(di) <= 2.0);
      for (int j = 0; j < k; ++j) sum[j] += di[j];
    }
    for (double x : sum) CHECK(std::abs(x) < 1e-12);
  }
  CHECK_THROWS_AS(delta_vector(2, 4, 4), InvalidInput);
}

TEST_CASE("sample statistics by hand") {
  const int dup[] = {0, 0};
  const SampleStats a = sample_stats(dup, 4);
  CHECK(a.vS == Vec{-3, 1, 1, 1});
  CHECK(a.vSs == Vec{-1, 1, 1, 1});
  CHECK(a.vS_norm == doctest::Approx(std::sqrt(12.0)));
  CHECK(a.conditioned == (std::sqrt(12.0) <= 3.0 * std::sqrt(2.0)));

  const int two[] = {0, 1};
  const SampleStats b = sample_stats(two, 4);
  CHECK(b.vS == Vec{-1, -1, 1, 1});
  CHECK(b.vS_norm == doctest::Approx(2.0));
  CHECK(b.conditioned);
  CHECK(b.unsampled() == 2);
}

TEST_CASE("property: sample statistics invariants") {
  Rng rng = make_rng(3, 3, 3);
  for (int t = 0; t < 200; ++t) {
    const SampleStats S = draw_sample(8, 16, rng);
    Vec sum(16, 0.0);
    for (int z : S.draws) {
      const Vec d = delta_vector(8, 16, z);
      for (int j = 0; j < 16; ++j) sum[j] += d[j];
    }
    for (int i = 0; i < 16; ++i) {
      CHECK(S.vS[i] == doctest::Approx(1.0 - 2.0 * S.mult[i]));
      CHECK(S.vS[i] == doctest::Approx(sum[i]).epsilon(1e-12));
      CHECK(S.vSs[i] == (S.mult[i] >= 1 ? -1.0 : 1.0));
      CHECK(S.vSs[i] * S.vS[i] == std::abs(S.vS[i]));
    }
    CHECK(S.conditioned == (S.vS_norm <= 3.0 * std::sqrt(8.0)));
  }
}

TEST_CASE("schedule constants") {
  CHECK(theorem1_lambda(16) == doctest::Approx(7.0 / 64.0));
  const double rho = 0.15;
  CHECK(theorem1_epsilon(7.0 / 64.0, rho) ==
        doctest::Approx((7.0 / 64.0) * rho * rho / (4 * 72.0 * 72.0 * 2401.0)));
  CHECK(theorem2_epsilon(0.01, rho, 8) ==
        doctest::Approx(rho * rho / (4 * 72.0 * 72.0 * 49.0 * 0.01 * 512.0)));

  const Schedule e = schedule_erm(8, theorem1_lambda(8), 0.0, rho, relaxed());
  CHECK(e.params.gamma_m == 1.0 / 16.0);
  CHECK(e.params.zeta == e.params.gamma_c / e.params.lambda_c);
  CHECK(e.params.alpha() == std::min(e.params.lambda_m, e.params.lambda_c));
  CHECK(e.report.claims_pass());

  Relax r = relaxed();
  r.gamma_m_margin = 0.99;
  const Schedule g = schedule_gd(8, 0.1, 1000, rho, r);
  CHECK(g.params.zeta == g.params.gamma_c / g.params.lambda_c);
  CHECK(g.params.lambda_c == doctest::Approx(4.0 / (rho * 100.0)));
  CHECK(g.report.claims_pass());
  CHECK_FALSE(g.report.preconditions_pass());  // m > 6400 fails at desk scale
}

TEST_CASE("schedules refuse violated regimes") {
  // Without relaxation the <= 1 caps and lemma preconditions must hold.
  CHECK_THROWS_AS(schedule_erm(8, theorem1_lambda(8), 0.0, 0.15, Relax{}), RegimeError);
  Relax r = relaxed();
  CHECK_THROWS_AS(schedule_gd(8, 0.1, 28, 0.15, r), RegimeError);  // eta T <= sqrt(8)
  CHECK_THROWS_AS(schedule_gd(8, 0.0, 100, 0.15, r), InvalidInput);
}

TEST_CASE("p by brute force") {
  Fixture f;
  const PBruteForce z = p_eval_bruteforce(f.erm, ParamVector(8));
  CHECK(z.value == 0.0);
  CHECK(z.margin == 0.0);
  CHECK(z.tie);

  const int draws[] = {0, 3, 3, 5};
  const SampleStats S = sample_stats(draws, 8);
  InstanceParams p = f.erm.params;
  p.gamma_c = 0.0;
  const HardInstance inst = f.with(p);
  ParamVector w(8);
  for (int i = 0; i < 8; ++i) w.message[i] = 0.1 * S.vS[i];
  const PBruteForce b = p_eval_bruteforce(inst, w);
  CHECK(b.argmax_signs(8) == S.vSs);
  CHECK_FALSE(b.tie);
}

TEST_CASE("p is uniquely maximized at vSs at the ERM point") {
  Fixture f;
  Rng rng = make_rng(1, 0, kTagSample);
  for (int t = 0; t < 20; ++t) {
    const SampleStats S = draw_sample(4, 8, rng);
    if (!S.conditioned) continue;
    const ErmSolution sol = closed_form_minimizer(f.erm, S);
    const PBruteForce b = p_eval_bruteforce(f.erm, sol.w_star);
    CHECK(b.argmax_signs(8) == S.vSs);
    CHECK(b.margin > 0.0);
    CHECK(b.value == doctest::Approx(oracle::p(f.erm, sol.w_star)).epsilon(1e-13));
  }
}

TEST_CASE("p certificate") {
  Fixture f;
  ParamVector w(8);
  w.message = {0.2, -0.1, 0.05, 0.3, -0.2, 0.1, -0.4, 0.15};
  Vec cand(8);
  for (int i = 0; i < 8; ++i) cand[i] = w.message[i] < 0 ? -1.0 : 1.0;
  const PCertified c = p_eval_certified(f.erm, w, cand);
  CHECK(c.certified_unique);
  CHECK(c.slack == doctest::Approx(2.0 * f.erm.params.gamma_m * 0.05));

  InstanceParams p = f.erm.params;
  p.gamma_c = 1e3;
  const HardInstance loud = f.with(p);
  w.code[0] = 0.1;
  CHECK_FALSE(p_eval_certified(loud, w, cand).certified_unique);
  CHECK_THROWS_AS(p_eval_certified(f.erm, w, Vec(8, 1.0)), InvalidInput);
}

TEST_CASE("property: certified uniqueness never disagrees with brute force") {
  Fixture f(4, 2);
  Rng rng = make_rng(9, 0, 0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int claims = 0;
  for (int t = 0; t < 3000; ++t) {
    ParamVector w = random_ball_point(8, rng);
    const double shrink = std::pow(10.0, -4.0 * u(rng));
    for (double& x : w.code) x *= shrink;
    Vec cand(8);
    for (int i = 0; i < 8; ++i) cand[i] = w.message[i] < 0 ? -1.0 : 1.0;
    const PCertified c = p_eval_certified(f.erm, w, cand);
    if (!c.certified_unique) continue;
    ++claims;
    const PBruteForce b = p_eval_bruteforce(f.erm, w);
    CHECK(b.argmax == message_bits(cand));
    CHECK_FALSE(b.tie);
    CHECK(b.value == doctest::Approx(c.value).epsilon(1e-13));
  }
  CHECK(claims > 100);
}

TEST_CASE("loss and subgradient against the oracle") {
  Fixture f;
  for (int t = 0; t < 30; ++t) {
    const ParamVector w = ball(8, 100 + t);
    const int i = t % 8;
    CHECK(loss(f.erm, w, i) == doctest::Approx(oracle::loss(f.erm, w, i)).epsilon(1e-13));
  }
  for (int i = 0; i < 8; ++i) {
    const ParamVector g = loss_subgrad(f.erm, ParamVector(8), i);
    const Vec d = delta_vector(4, 8, i);
    for (double x : g.code) CHECK(x == 0.0);
    for (int j = 0; j < 8; ++j) CHECK(g.message[j] == -d[j]);
  }
}

TEST_CASE("property: subgradient inequality and Lipschitz bound") {
  Fixture f(4, 3);
  InstanceParams p = f.erm.params;
  const double bound = 4.0 + p.gamma_m * std::sqrt(8.0) + p.gamma_c + p.lambda_m + p.lambda_c;
  for (int t = 0; t < 300; ++t) {
    const ParamVector w = ball(8, 1000 + t), v = ball(8, 5000 + t);
    const int i = t % 8;
    const ParamVector g = loss_subgrad(f.erm, w, i);
    CHECK(g.norm() <= bound + 1e-9);
    CHECK(loss(f.erm, v, i) >= loss(f.erm, w, i) + dot(g, v - w) - 1e-12);
  }
}

TEST_CASE("empirical subgradient is the mean of per-draw subgradients") {
  Fixture f;
  const int draws[] = {1, 1, 4, 7};
  const SampleStats S = sample_stats(draws, 8);
  const ParamVector zero(8);
  const ParamVector g0 = empirical_subgrad(f.erm, zero, S);
  for (int j = 0; j < 8; ++j) CHECK(g0.message[j] == doctest::Approx(-S.vS[j] / 4.0).epsilon(1e-15));
  for (int t = 0; t < 20; ++t) {
    const ParamVector w = ball(8, 77 + t, 0.5);
    ParamVector mean(8);
    for (int z : draws) mean += loss_subgrad(f.erm, w, z);
    mean *= 0.25;
    CHECK(distance(mean, empirical_subgrad(f.erm, w, S)) <= 1e-12);
    CHECK(empirical_risk(f.erm, w, S) ==
          doctest::Approx(oracle::empirical(f.erm, w, {1, 1, 4, 7})).epsilon(1e-13));
  }
}

TEST_CASE("population risk") {
  Fixture f;
  const RiskValue r0 = population_risk(f.erm, ParamVector(8));
  CHECK(r0.exact);
  CHECK(r0.lo == doctest::Approx(f.erm.params.zeta * (1.0 - f.code->rho / 2.0)).epsilon(1e-15));
  // The linear term averages out: w with only a message block costs only its quadratic and p part.
  ParamVector w(8);
  w.message = {0.1, -0.2, 0.3, 0.0, 0.05, -0.1, 0.2, 0.1};
  const RiskValue r = population_risk(f.erm, w);
  const double expected = f.erm.feldman.floor + std::max(oracle::p(f.erm, w), 0.0) +
                          0.5 * f.erm.params.lambda_m * oracle::dotv(w.message, w.message);
  CHECK(r.lo == doctest::Approx(expected).epsilon(1e-13));
  for (int t = 0; t < 10; ++t) {
    const ParamVector q = ball(8, 300 + t);
    CHECK(population_risk(f.erm, q).lo == doctest::Approx(oracle::population(f.erm, q)).epsilon(1e-13));
  }
}

TEST_CASE("certified population interval contains the exhaustive value at the ERM point") {
  Fixture f(8, 1);
  Rng rng = make_rng(4, 0, kTagSample);
  int seen = 0;
  for (int t = 0; t < 40 && seen < 10; ++t) {
    const SampleStats S = draw_sample(8, 16, rng);
    if (!S.conditioned) continue;
    ++seen;
    const ErmSolution sol = closed_form_minimizer(f.erm, S);
    const RiskValue exact = population_risk_exact(f.erm, sol.w_star);
    const RiskValue cert = population_risk_certified(f.erm, sol.w_star);
    CHECK(cert.lo <= exact.lo + 1e-12);
    CHECK(cert.hi >= exact.hi - 1e-12);
  }
  CHECK(seen > 0);
  CHECK_THROWS_AS(population_risk_certified(f.erm, ball(16, 4)), CapabilityError);
}

TEST_CASE("brute-force cap") {
  Fixture f;
  HardInstance small = make_instance(f.erm.params, f.code, 4);
  CHECK_THROWS_AS(p_eval_bruteforce(small, ParamVector(8)), CapabilityError);
  InstanceParams p = f.erm.params;
  p.rho = 0.3;
  CHECK_THROWS_AS(make_instance(p, f.code), InvalidInput);
}

TEST_CASE("strong convexity probe") {
  Fixture f;
  CHECK(strong_convexity_probe(f.erm, 400, 1) >= f.erm.params.alpha() - 1e-9);

  InstanceParams q = f.erm.params;
  q.gamma_c = 0.0;
  q.gamma_m = 0.0;
  q.lambda_c = 0.5;
  q.lambda_m = 0.5;
  q.zeta = 1.0;
  const double probe = strong_convexity_probe(f.with(q), 400, 2);
  CHECK(probe >= 0.5 - 1e-9);
  CHECK(probe <= 0.5 + 1e-6);

  InstanceParams z = f.erm.params;
  z.lambda_c = 0.0;
  z.lambda_m = 0.0;
  CHECK(strong_convexity_probe(f.with(z), 400, 3) >= -1e-9);
}
