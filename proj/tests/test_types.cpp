#include <sstream>

#include "doctest.h"
#include "preflearn/rng.hpp"
#include "preflearn/types.hpp"

using namespace preflearn;

TEST_CASE("c_map sign conventions") {
  CHECK(c_map({1.0, 2.0}, UtilityForm::quad({1.0, 1.0})) == Vec{-1.0, -2.0});
  CHECK(c_map({1.0, 2.0}, UtilityForm::ces()) == Vec{1.0, 4.0});
  CHECK(c_map({3.0, 5.0}, UtilityForm::bilinear()) == Vec{-3.0, -5.0});

  const UtilityForm appx = UtilityForm::custom_1d(Custom1dKind::IndicatorAtZero);
  CHECK(c_map({0.0}, appx) == Vec{-1.0});
  CHECK(c_map({0.5}, appx) == Vec{0.0});
  CHECK(c_map({-1.0}, appx) == Vec{0.0});

  CHECK(c_map({0.25}, UtilityForm::custom_1d(Custom1dKind::LinearCost)) == Vec{0.25});
}

TEST_CASE("c_map rejects non-positive Cobb-Douglas actions") {
  CHECK_THROWS_AS(c_map({1.0, 0.0}, UtilityForm::cobb_douglas()), std::domain_error);
  CHECK_THROWS_AS(c_map({-0.5}, UtilityForm::cobb_douglas()), std::domain_error);
  CHECK(c_map({1.0}, UtilityForm::cobb_douglas()) == Vec{0.0});
}

TEST_CASE("eval_f hand values") {
  // unnormalized P = I, theta = (1/2, 1/2), x = (1, 1): 1 - 1 = 0
  Instance quad = make_instance(1, UtilityForm::quad({1.0, 1.0}),
                                Domain::cont_knapsack({1.0, 1.0}, 10.0));
  CHECK(eval_f({1.0, 1.0}, {0.5, 0.5}, quad) == doctest::Approx(0.0).epsilon(1e-12));

  Instance ces = make_instance(1, UtilityForm::ces(), Domain::eq_knapsack({1.0, 1.0}, 1.0));
  CHECK(eval_f({2.0, 0.0}, {0.25, 0.75}, ces) == doctest::Approx(1.0).epsilon(1e-12));

  Instance bil = make_instance(1, UtilityForm::bilinear(),
                               Domain::cont_knapsack({1.0, 1.0}, 10.0));
  CHECK(eval_f({3.0, 5.0}, {1.0, 0.0}, bil) == doctest::Approx(-3.0).epsilon(1e-12));
}

TEST_CASE("decomposability: f - <theta, c(x)> is independent of theta") {
  StreamRng rng(7, 0, rng_tag::kTest);
  const std::vector<UtilityForm> forms = {
      UtilityForm::quad({0.4, 0.6, 1.3}), UtilityForm::ces(),
      UtilityForm::bilinear(), UtilityForm::cobb_douglas()};
  for (const UtilityForm& u : forms) {
    Domain d = u.kind == UtilityKind::CesRho2 ? Domain::eq_knapsack({1, 2, 3}, 4.0)
                                              : Domain::cont_knapsack({1, 2, 3}, 4.0);
    Instance inst = make_instance(1, u, d);
    for (int rep = 0; rep < 50; ++rep) {
      Vec x(3), ta(3), tb(3);
      for (int i = 0; i < 3; ++i) {
        x[i] = rng.uniform(0.05, 2.0);
        ta[i] = rng.uniform(0.0, 1.0);
        tb[i] = rng.uniform(0.0, 1.0);
      }
      const Vec c = c_map(x, u);
      const double fa = eval_f(x, ta, inst) - dot(ta, c);
      const double fb = eval_f(x, tb, inst) - dot(tb, c);
      CHECK(std::abs(fa - fb) <= 1e-12);
    }
  }
}

TEST_CASE("parameter point invariants") {
  CHECK_NOTHROW(ParameterPoint({0.5, 0.5}, ParameterSpace::simplex(2)));
  CHECK_THROWS_AS(ParameterPoint({0.6, 0.6}, ParameterSpace::simplex(2)),
                  std::invalid_argument);
  CHECK_THROWS_AS(ParameterPoint({-0.1, 1.1}, ParameterSpace::simplex(2)),
                  std::invalid_argument);
  CHECK_NOTHROW(ParameterPoint({-2.0}, ParameterSpace::box(1, -3.0, 3.0)));
  CHECK_THROWS_AS(ParameterPoint({4.0}, ParameterSpace::box(1, -3.0, 3.0)),
                  std::invalid_argument);
  // tolerance: sums within 1e-9 accepted
  CHECK_NOTHROW(ParameterPoint({0.5, 0.5 + 5e-10}, ParameterSpace::simplex(2)));
}

TEST_CASE("instance construction checks dimensions") {
  CHECK_THROWS_AS(make_instance(1, UtilityForm::quad({1.0}),
                                Domain::cont_knapsack({1.0, 1.0}, 1.0)),
                  std::invalid_argument);
  CHECK_THROWS_AS(make_instance(1, UtilityForm::ces(), Domain::interval(-1, 1)),
                  std::invalid_argument);
}

TEST_CASE("stream serialization round-trip") {
  InstanceStream s;
  s.theta_true = ParameterPoint({0.25, 0.75}, ParameterSpace::simplex(2));
  s.quad_diag = {0.3, 0.7};
  const UtilityForm u = UtilityForm::quad(s.quad_diag);
  s.steps.push_back(make_instance(1, u, Domain::cont_knapsack({1.5, 2.5}, 3.25)));
  s.steps.push_back(make_instance(
      2, u, Domain::polytope(2, 2, {1.0, 2.0, 3.0, 4.0}, {5.0, 6.0})));

  std::stringstream ss;
  write_stream(ss, s);
  const InstanceStream r = read_stream(ss);

  REQUIRE(r.steps.size() == s.steps.size());
  CHECK(r.theta_true.values == s.theta_true.values);
  CHECK(r.quad_diag == s.quad_diag);
  CHECK(r.steps[0].domain.prices == s.steps[0].domain.prices);
  CHECK(r.steps[0].domain.budget == s.steps[0].domain.budget);
  CHECK(r.steps[1].domain.A == s.steps[1].domain.A);
  CHECK(r.steps[1].domain.rhs == s.steps[1].domain.rhs);

  // full-precision doubles survive a second round unchanged
  std::stringstream ss2;
  write_stream(ss2, r);
  std::stringstream ss3;
  write_stream(ss3, s);
  CHECK(ss2.str() == ss3.str());
}

TEST_CASE("interval stream serialization") {
  InstanceStream s;
  s.theta_true = ParameterPoint({0.0}, ParameterSpace::box(1, -3.0, 3.0));
  s.steps.push_back(make_instance(1, UtilityForm::custom_1d(Custom1dKind::IndicatorAtZero),
                                  Domain::interval(-1.0, 1.0)));
  std::stringstream ss;
  write_stream(ss, s);
  const InstanceStream r = read_stream(ss);
  CHECK(r.steps[0].utility.kind == UtilityKind::Custom1d);
  CHECK(r.steps[0].domain.lo == -1.0);
  CHECK(r.theta_true.space.kind == SpaceKind::Box);
}
