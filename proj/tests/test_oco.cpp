#include <cmath>

#include "doctest.h"
#include "preflearn/forward.hpp"
#include "preflearn/losses.hpp"
#include "preflearn/oco.hpp"
#include "preflearn/rng.hpp"

using namespace preflearn;

namespace {

// direct numeric minimization of <xi, th> + V_theta(th) over a fine simplex
// grid; independent of the prox implementations
Vec grid_prox_2simplex(const Vec& theta, const Vec& xi, bool entropy, double step = 1e-4) {
  auto bregman = [&](const Vec& th) {
    if (!entropy) {
      double s = 0.0;
      for (int i = 0; i < 2; ++i) s += (th[i] - theta[i]) * (th[i] - theta[i]);
      return 0.5 * s;
    }
    double v = 0.0;
    for (int i = 0; i < 2; ++i) {
      const double a = std::max(th[i], 1e-300);
      v += a * std::log(a / theta[i]) - th[i] + theta[i];
    }
    return v;
  };
  Vec best{0.5, 0.5};
  double best_val = 1e300;
  for (double a = 0.0; a <= 1.0 + 1e-12; a += step) {
    const Vec th{a, 1.0 - a};
    const double val = xi[0] * th[0] + xi[1] * th[1] + bregman(th);
    if (val < best_val) {
      best_val = val;
      best = th;
    }
  }
  return best;
}

Vec grid_prox_3simplex(const Vec& theta, const Vec& xi, double step = 2e-3) {
  Vec best;
  double best_val = 1e300;
  for (double a = 0.0; a <= 1.0 + 1e-12; a += step)
    for (double b = 0.0; a + b <= 1.0 + 1e-12; b += step) {
      const Vec th{a, b, 1.0 - a - b};
      double val = 0.0;
      for (int i = 0; i < 3; ++i)
        val += xi[i] * th[i] + 0.5 * (th[i] - theta[i]) * (th[i] - theta[i]);
      if (val < best_val) {
        best_val = val;
        best = th;
      }
    }
  return best;
}

}  // namespace

TEST_CASE("step schedules") {
  CHECK(step_value(StepSchedule::implicit_sqrt(1.0, 2.0), 4) ==
        doctest::Approx(0.25).epsilon(1e-15));
  CHECK(step_value(StepSchedule::md_constant_optimal(std::log(2.0), 1.0, 100), 1) ==
        doctest::Approx(std::sqrt(2.0 * std::log(2.0) / 100.0)).epsilon(1e-15));
  CHECK(step_value(StepSchedule::md_constant_paper(1.5, 2.0, 10), 7) ==
        doctest::Approx(2.0 * 1.5 / (4.0 * 10.0)).epsilon(1e-15));
  CHECK(step_value(StepSchedule::custom_steps({1.0, 0.5, 1.0 / 3.0}), 2) == 0.5);
  CHECK_THROWS_AS(step_value(StepSchedule::custom_steps({1.0}), 2),
                  std::invalid_argument);
  // constant schedules extend beyond T
  CHECK(step_value(StepSchedule::md_constant_optimal(1.0, 1.0, 10), 25) ==
        step_value(StepSchedule::md_constant_optimal(1.0, 1.0, 10), 1));
}

TEST_CASE("prox setup widths") {
  const ProxSetup ent = make_prox_setup(Geometry::EntropySimplex,
                                        ParameterSpace::simplex(8), 1.0);
  CHECK(ent.omega == doctest::Approx(std::log(8.0)).epsilon(1e-15));

  const ProxSetup eu = make_prox_setup(Geometry::EuclidSimplex,
                                       ParameterSpace::simplex(8), 1.0);
  CHECK(eu.omega_hat == 1.0);

  const ProxSetup box = make_prox_setup(Geometry::EuclidBox,
                                        ParameterSpace::box(1, -3.0, 3.0), 1.0);
  CHECK(box.omega == doctest::Approx(36.0 / 8.0).epsilon(1e-15));
  CHECK(box.omega_hat == doctest::Approx(18.0).epsilon(1e-15));
}

TEST_CASE("project_simplex") {
  CHECK(project_simplex({0.6, 0.6}).values == Vec{0.5, 0.5});

  const ParameterPoint p = project_simplex({1.5, -0.2});
  CHECK(p.values[0] == 1.0);
  CHECK(p.values[1] == 0.0);

  // idempotence on a simplex point
  const Vec v{0.2, 0.3, 0.5};
  const ParameterPoint q = project_simplex(v);
  for (int i = 0; i < 3; ++i) CHECK(q.values[i] == doctest::Approx(v[i]).epsilon(1e-12));

  // grid cross-check of the (1.5, -0.2) projection
  const Vec g = grid_prox_2simplex({0.5, 0.5}, {-1.0, 0.7}, false);
  const ParameterPoint s = project_simplex({0.5 + 1.0, 0.5 - 0.7});
  CHECK(std::abs(s.values[0] - g[0]) <= 1e-3);
}

TEST_CASE("prox_map entropy formula") {
  const ProxSetup setup =
      make_prox_setup(Geometry::EntropySimplex, ParameterSpace::simplex(2), 1.0);
  const ParameterPoint uni = uniform_simplex_point(2);

  // zero step keeps the point
  const ParameterPoint same = prox_map(uni, {0.0, 0.0}, setup);
  CHECK(same.values[0] == doctest::Approx(0.5).epsilon(1e-12));

  // xi = (ln 2, 0): weights (1/2 * 1/2, 1/2) -> (1/3, 2/3)
  const ParameterPoint moved = prox_map(uni, {std::log(2.0), 0.0}, setup);
  CHECK(moved.values[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(moved.values[1] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));

  // matches direct numeric minimization of the prox objective
  const Vec grid = grid_prox_2simplex({0.5, 0.5}, {std::log(2.0), 0.0}, true);
  CHECK(std::abs(moved.values[0] - grid[0]) <= 1e-3);

  CHECK_THROWS_AS(prox_map(uni, {std::nan(""), 0.0}, setup), std::invalid_argument);
}

TEST_CASE("prox_map euclid-box hand value") {
  const ProxSetup setup =
      make_prox_setup(Geometry::EuclidBox, ParameterSpace::box(1, -3.0, 3.0), 1.0);
  const ParameterPoint th({3.0}, ParameterSpace::box(1, -3.0, 3.0));
  CHECK(prox_map(th, {1.0}, setup).values[0] == 2.0);
  CHECK(prox_map(th, {-1.0}, setup).values[0] == 3.0);  // clamped at the wall
}

TEST_CASE("md_step zero subgradient is a fixed point") {
  const ProxSetup setup =
      make_prox_setup(Geometry::EntropySimplex, ParameterSpace::simplex(3), 2.0);
  const StepSchedule sched = StepSchedule::md_constant_optimal(setup.omega, 2.0, 10);
  const ParameterPoint th = uniform_simplex_point(3);
  const ParameterPoint next = md_step(th, {0.0, 0.0, 0.0}, 1, sched, setup);
  for (int i = 0; i < 3; ++i)
    CHECK(next.values[i] == doctest::Approx(th.values[i]).epsilon(1e-12));
}

TEST_CASE("md_step reproduces the 1-d projected-gradient sequence") {
  // interval instance, eta_t = 1/t, theta_1 = 3: iterates 3, 2, 3/2, 7/6, 11/12
  const ParameterSpace box = ParameterSpace::box(1, -3.0, 3.0);
  const ProxSetup setup = make_prox_setup(Geometry::EuclidBox, box, 2.0);
  Vec etas;
  for (int t = 1; t <= 8; ++t) etas.push_back(1.0 / t);
  const StepSchedule sched = StepSchedule::custom_steps(etas);
  const Instance inst = make_instance(
      1, UtilityForm::custom_1d(Custom1dKind::IndicatorAtZero), Domain::interval(-1, 1));
  const ParameterPoint theta_true({0.0}, box);
  const Vec y = solve_forward(theta_true, inst).x;

  ParameterPoint th({3.0}, box);
  const Vec expected{2.0, 1.5, 7.0 / 6.0, 11.0 / 12.0, 11.0 / 12.0, 11.0 / 12.0};
  for (std::size_t k = 0; k < expected.size(); ++k) {
    const int t = static_cast<int>(k) + 1;
    const Vec x_pred = solve_forward(th, inst).x;
    const Vec s = sim_subgradient(x_pred, y, inst.utility);
    th = md_step(th, s, t, sched, setup);
    CHECK(th.values[0] == doctest::Approx(expected[k]).epsilon(1e-12));
  }
}

TEST_CASE("implicit step equals the euclid md step and the grid oracle") {
  StreamRng rng(41, 0, rng_tag::kTest);
  const ParameterSpace space = ParameterSpace::simplex(3);
  const ProxSetup euclid = make_prox_setup(Geometry::EuclidSimplex, space, 2.0);
  const StepSchedule sched = StepSchedule::implicit_sqrt(1.0, 2.0);

  for (int rep = 0; rep < 20; ++rep) {
    Vec v(3);
    double sum = 0.0;
    for (double& c : v) {
      c = rng.exponential();
      sum += c;
    }
    for (double& c : v) c /= sum;
    const ParameterPoint th(v, space);
    const Vec s{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
    const int t = 1 + rep % 5;

    const ParameterPoint a = implicit_sim_step(th, s, t, sched);
    const ParameterPoint b = md_step(th, s, t, sched, euclid);
    for (int i = 0; i < 3; ++i) CHECK(std::abs(a.values[i] - b.values[i]) <= 1e-12);

    const Vec grid = grid_prox_3simplex(th.values, scaled(s, step_value(sched, t)));
    for (int i = 0; i < 3; ++i) CHECK(std::abs(a.values[i] - grid[i]) <= 5e-3);
  }

  // feasible unprojected point is returned as-is
  const ParameterPoint mid({0.5, 0.3, 0.2}, space);
  const ParameterPoint out =
      implicit_sim_step(mid, {0.0, 0.0, 0.0}, 1, StepSchedule::implicit_sqrt(1.0, 1.0));
  for (int i = 0; i < 3; ++i)
    CHECK(out.values[i] == doctest::Approx(mid.values[i]).epsilon(1e-12));
}

TEST_CASE("implicit_sim_step simple hand value") {
  const ParameterPoint th({0.5, 0.5}, ParameterSpace::simplex(2));
  const StepSchedule sched = StepSchedule::custom_steps({0.1});
  const ParameterPoint next = implicit_sim_step(th, {1.0, -1.0}, 1, sched);
  CHECK(next.values[0] == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(next.values[1] == doctest::Approx(0.6).epsilon(1e-12));
}

TEST_CASE("prox_map first-order optimality under sampled perturbations") {
  StreamRng rng(43, 0, rng_tag::kTest);
  const ParameterSpace space = ParameterSpace::simplex(4);
  for (Geometry g : {Geometry::EntropySimplex, Geometry::EuclidSimplex}) {
    const ProxSetup setup = make_prox_setup(g, space, 1.0);
    Vec v(4);
    double sum = 0.0;
    for (double& c : v) {
      c = rng.exponential() + 0.05;
      sum += c;
    }
    for (double& c : v) c /= sum;
    const ParameterPoint th(v, space);
    Vec xi(4);
    for (double& c : xi) c = rng.uniform(-1.0, 1.0);
    const ParameterPoint star = prox_map(th, xi, setup);

    auto objective = [&](const Vec& cand) {
      double val = dot(xi, cand);
      if (g == Geometry::EuclidSimplex) {
        val += 0.5 * l2_dist_sq(cand, th.values);
      } else {
        for (int i = 0; i < 4; ++i) {
          const double a = std::max(cand[i], 1e-300);
          val += a * std::log(a / th.values[i]) - cand[i] + th.values[i];
        }
      }
      return val;
    };
    const double fstar = objective(star.values);
    const double eps = 1e-4;
    for (int k = 0; k < 200; ++k) {
      Vec d(4);
      double dsum = 0.0;
      for (double& c : d) {
        c = rng.uniform(-1.0, 1.0);
        dsum += c;
      }
      for (double& c : d) c -= dsum / 4.0;  // stay on the simplex plane
      Vec cand(4);
      bool ok = true;
      for (int i = 0; i < 4; ++i) {
        cand[i] = star.values[i] + eps * d[i];
        if (cand[i] < 0.0) ok = false;
      }
      if (!ok) continue;
      CHECK(fstar <= objective(cand) + 1e-9);
    }
  }
}

TEST_CASE("iterates satisfy the space invariants") {
  StreamRng rng(47, 0, rng_tag::kTest);
  const ParameterSpace space = ParameterSpace::simplex(6);
  const ProxSetup setup = make_prox_setup(Geometry::EntropySimplex, space, 4.0);
  const StepSchedule sched = StepSchedule::md_constant_optimal(setup.omega, 4.0, 50);
  ParameterPoint th = uniform_simplex_point(6);
  for (int t = 1; t <= 50; ++t) {
    Vec s(6);
    for (double& c : s) c = rng.uniform(-2.0, 2.0);
    th = md_step(th, s, t, sched, setup);  // constructor revalidates
    double sum = 0.0;
    for (double c : th.values) {
      CHECK(c >= 0.0);
      sum += c;
    }
    CHECK(std::abs(sum - 1.0) <= 1e-9);
  }
}
