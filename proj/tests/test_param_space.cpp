#include <cmath>

#include "doctest.h"
#include "scolab/param_space.hpp"
#include "scolab/rng.hpp"

using namespace scolab;

TEST_CASE("blocks have lengths 2k and k") {
  ParamVector w(5);
  CHECK(w.code.size() == 10);
  CHECK(w.message.size() == 5);
  CHECK(w.k() == 5);
  CHECK_THROWS_AS(ParamVector(Vec(3, 0.0), Vec(2, 0.0)), InvalidInput);
}

TEST_CASE("projection fixes interior and boundary points") {
  ParamVector w(Vec{0.3, 0.0}, Vec{0.4});
  CHECK(project_unit_ball(w) == w);
  ParamVector b(Vec{0.6, 0.0}, Vec{0.8});
  CHECK(project_unit_ball(b) == b);
}

TEST_CASE("projection scales radially") {
  ParamVector u(Vec{0.6, 0.0}, Vec{0.8});
  const ParamVector p = project_unit_ball(2.0 * u);
  CHECK(distance(p, u) < 1e-15);
}

TEST_CASE("projection rejects non-finite input") {
  ParamVector w(Vec{NAN, 0.0}, Vec{0.1});
  CHECK_THROWS_AS(project_unit_ball(w), InvalidInput);
}

TEST_CASE("unit_normalize") {
  const Vec a = unit_normalize(Vec{3.0, 4.0, 0.0});
  CHECK(a[0] == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(a[1] == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(a[2] == 0.0);
  const Vec z = unit_normalize(Vec(6, 0.0));
  for (double x : z) CHECK(x == 0.0);
  Vec s{1, -1, -1, 1, 1, 1, -1, 1};
  const Vec n = unit_normalize(s);
  for (std::size_t i = 0; i < s.size(); ++i) CHECK(n[i] == doctest::Approx(s[i] / std::sqrt(8.0)));
}

TEST_CASE("property: projection output is feasible, idempotent and 1-Lipschitz") {
  Rng rng = make_rng(11, 0, 99);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int t = 0; t < 500; ++t) {
    ParamVector a(4), b(4);
    const double sa = std::exp(3.0 * g(rng)), sb = std::exp(3.0 * g(rng));
    for (auto* w : {&a, &b}) {
      for (double& x : w->code) x = g(rng);
      for (double& x : w->message) x = g(rng);
    }
    a *= sa / a.norm();
    b *= sb / b.norm();
    const ParamVector pa = project_unit_ball(a), pb = project_unit_ball(b);
    CHECK(pa.feasible());
    CHECK(pa.norm() <= 1.0 + kFeasibilityTol);
    CHECK(distance(project_unit_ball(pa), pa) <= 1e-15);
    CHECK(distance(pa, pb) <= distance(a, b) + 1e-12);
  }
}
