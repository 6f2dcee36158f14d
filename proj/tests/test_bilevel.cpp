#include <cmath>

#include "doctest.h"
#include "preflearn/bilevel.hpp"
#include "preflearn/forward.hpp"
#include "preflearn/instance_gen.hpp"
#include "preflearn/rng.hpp"

using namespace preflearn;

namespace {

ParameterPoint random_simplex_point(StreamRng& rng, int n) {
  Vec v(n);
  double s = 0.0;
  for (double& c : v) {
    c = rng.exponential();
    s += c;
  }
  for (double& c : v) c /= s;
  return ParameterPoint(std::move(v), ParameterSpace::simplex(n));
}

double bilevel_value(const ParameterPoint& theta, const ParameterPoint& theta_t,
                     double eta, const Instance& inst, const Vec& y) {
  const ForwardSolution sol = solve_forward(theta, inst);
  return 0.5 * l2_dist_sq(theta.values, theta_t.values) + eta * l2_dist_sq(y, sol.x);
}

}  // namespace

TEST_CASE("zero step size keeps the iterate") {
  GenConfig cfg;
  cfg.n = 3;
  cfg.T = 1;
  cfg.seed = 11;
  const InstanceStream stream = gen_instance_stream(cfg, 0);
  const Instance& inst = stream.steps[0];
  const Vec y = solve_forward(stream.theta_true, inst).x;
  StreamRng rng(73, 0, rng_tag::kTest);
  const ParameterPoint th = random_simplex_point(rng, 3);

  const PreStepResult res = implicit_pre_step(th, 0.0, inst, y);
  for (int i = 0; i < 3; ++i)
    CHECK(res.theta_next.values[i] == doctest::Approx(th.values[i]).epsilon(1e-9));
  CHECK(res.objective <= 1e-12);
}

TEST_CASE("1-d indicator analogue: the iterate never moves") {
  const Instance inst = make_instance(
      1, UtilityForm::custom_1d(Custom1dKind::IndicatorAtZero), Domain::interval(-1, 1));
  const ParameterSpace box = ParameterSpace::box(1, -3.0, 3.0);
  const ParameterPoint theta_true({0.0}, box);
  const Vec y = solve_forward(theta_true, inst).x;

  ParameterPoint th({3.0}, box);
  for (int t = 1; t <= 30; ++t) {
    const PreStepResult res = implicit_pre_step(th, 1.0 / t, inst, y);
    CHECK(res.theta_next.values[0] == 3.0);
    th = res.theta_next;
  }
}

TEST_CASE("pattern solve: interior pattern reduces to Px = theta stationarity") {
  const Vec P{0.6, 0.4};
  const Domain dom = Domain::cont_knapsack({1.0, 1.0}, 100.0);  // slack budget
  const ParameterPoint th({0.5, 0.5}, ParameterSpace::simplex(2));
  const Vec y{0.2, 0.3};

  // all x free, budget slack
  const PatternCandidate cand =
      kkt_pattern_solve({0, 0}, {0}, th, 0.5, P, dom, y);
  REQUIRE(cand.feasible);
  for (int i = 0; i < 2; ++i)
    CHECK(std::abs(P[i] * cand.x[i] - cand.theta[i]) <= 1e-9);

  // pinned coordinate drops out of the linear system
  const PatternCandidate pinned =
      kkt_pattern_solve({1, 0}, {0}, th, 0.5, P, dom, y);
  if (pinned.feasible) CHECK(pinned.x[0] == 0.0);
}

TEST_CASE("branch-and-bound equals exhaustive enumeration") {
  StreamRng rng(79, 0, rng_tag::kTest);
  for (int rep = 0; rep < 6; ++rep) {
    GenConfig cfg;
    cfg.n = 2;
    cfg.T = 1;
    cfg.seed = 500 + rep;
    const InstanceStream stream = gen_instance_stream(cfg, 0);
    const Instance& inst = stream.steps[0];
    const Vec y = solve_forward(stream.theta_true, inst).x;
    const ParameterPoint th = random_simplex_point(rng, 2);
    const double eta = rng.uniform(0.05, 0.5);

    const PreStepResult bb = implicit_pre_step(th, eta, inst, y);
    const PreStepResult ex = implicit_pre_exhaustive(th, eta, inst, y);
    CHECK(bb.objective == ex.objective);
    for (int i = 0; i < 2; ++i)
      CHECK(bb.theta_next.values[i] == doctest::Approx(ex.theta_next.values[i])
                                           .epsilon(1e-12));
    CHECK(bb.patterns_solved <= ex.patterns_solved);
  }
}

TEST_CASE("pattern-best equals a grid search over theta") {
  StreamRng rng(83, 0, rng_tag::kTest);
  for (int rep = 0; rep < 3; ++rep) {
    GenConfig cfg;
    cfg.n = 2;
    cfg.T = 1;
    cfg.seed = 600 + rep;
    const InstanceStream stream = gen_instance_stream(cfg, 0);
    const Instance& inst = stream.steps[0];
    const Vec y = solve_forward(stream.theta_true, inst).x;
    const ParameterPoint th = random_simplex_point(rng, 2);
    const double eta = rng.uniform(0.05, 0.3);

    const PreStepResult best = implicit_pre_exhaustive(th, eta, inst, y);

    double grid_best = 1e300;
    for (double a = 0.0; a <= 1.0 + 1e-12; a += 1e-3) {
      const ParameterPoint cand(Vec{a, 1.0 - a}, ParameterSpace::simplex(2));
      grid_best = std::min(grid_best, bilevel_value(cand, th, eta, inst, y));
    }
    CHECK(best.objective <= grid_best + 1e-3);
    CHECK(best.objective >= grid_best - 1e-3);
  }
}

TEST_CASE("result is never worse than staying at theta_t") {
  StreamRng rng(89, 0, rng_tag::kTest);
  for (int rep = 0; rep < 5; ++rep) {
    GenConfig cfg;
    cfg.n = 3;
    cfg.T = 1;
    cfg.seed = 700 + rep;
    cfg.domain = rep % 2 == 0 ? DomainKind::ContKnapsack : DomainKind::Polytope;
    cfg.m = 2;
    const InstanceStream stream = gen_instance_stream(cfg, 0);
    const Instance& inst = stream.steps[0];
    const Vec y = solve_forward(stream.theta_true, inst).x;
    const ParameterPoint th = random_simplex_point(rng, 3);
    const double eta = rng.uniform(0.01, 1.0);

    const PreStepResult res = implicit_pre_step(th, eta, inst, y);
    CHECK(res.objective <= bilevel_value(th, th, eta, inst, y) + 1e-7);

    // KKT invariants of the returned inner solution
    const Vec& x = res.kkt.x;
    const Vec& w = res.kkt.w;
    const Vec& v = res.kkt.v;
    if (!v.empty() && !w.empty()) {
      const int n = inst.n;
      const Vec rows_A =
          inst.domain.kind == DomainKind::ContKnapsack ? inst.domain.prices
                                                       : inst.domain.A;
      const Vec rhs = inst.domain.kind == DomainKind::ContKnapsack
                          ? Vec{inst.domain.budget}
                          : inst.domain.rhs;
      const int m = static_cast<int>(rhs.size());
      for (int i = 0; i < n; ++i) {
        double stat = inst.utility.quad_diag[i] * x[i] - res.theta_next.values[i] - w[i];
        for (int j = 0; j < m; ++j) stat += rows_A[j * n + i] * v[j];
        CHECK(std::abs(stat) <= 1e-7);
        CHECK(std::abs(w[i] * x[i]) <= 1e-8);
      }
      for (int j = 0; j < m; ++j) {
        double row = 0.0;
        for (int i = 0; i < n; ++i) row += rows_A[j * n + i] * x[i];
        CHECK(std::abs(v[j] * (row - rhs[j])) <= 1e-6);
      }
    }
  }
}

TEST_CASE("interior instances: average prediction regret decreases") {
  // domains chosen so P^{-1} theta_true stays strictly feasible
  StreamRng rng(97, 0, rng_tag::kTest);
  const int n = 3, T = 40;
  Vec P{0.5, 0.3, 0.2};
  const ParameterPoint theta_true = random_simplex_point(rng, n);
  std::vector<Instance> steps;
  for (int t = 1; t <= T; ++t) {
    Vec p(n);
    for (double& c : p) c = rng.uniform(0.8, 1.2);
    steps.push_back(make_instance(t, UtilityForm::quad(P),
                                  Domain::cont_knapsack(p, 50.0)));  // generous budget
  }
  ParameterPoint th = uniform_simplex_point(n);
  Vec avg_pre(T, 0.0);
  double cum = 0.0;
  for (int t = 1; t <= T; ++t) {
    const Instance& inst = steps[t - 1];
    const Vec y = solve_forward(theta_true, inst).x;
    const Vec x_pred = solve_forward(th, inst).x;
    cum += l2_dist_sq(y, x_pred);
    avg_pre[t - 1] = cum / t;
    const double eta = 1.0 / std::sqrt(static_cast<double>(t));
    th = implicit_pre_step(th, eta, inst, y).theta_next;
  }
  CHECK(avg_pre[T - 1] < avg_pre[4]);
}

TEST_CASE("cap and input validation") {
  GenConfig cfg;
  cfg.n = 2;
  cfg.T = 1;
  cfg.seed = 1;
  const InstanceStream stream = gen_instance_stream(cfg, 0);
  const Instance& inst = stream.steps[0];
  const ParameterPoint th = uniform_simplex_point(2);
  PreStepOptions opts;
  opts.n_cap = 1;
  CHECK_THROWS_AS(implicit_pre_step(th, 0.1, inst, {0.0, 0.0}, opts),
                  std::invalid_argument);
  CHECK_THROWS_AS(implicit_pre_step(th, 0.1, inst, {0.0}), std::invalid_argument);
}
