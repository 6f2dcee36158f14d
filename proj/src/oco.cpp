#include "preflearn/oco.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace preflearn {

ProxSetup make_prox_setup(Geometry g, const ParameterSpace& space, double G) {
  if (!(G > 0.0)) throw std::invalid_argument("prox setup requires G > 0");
  ProxSetup s;
  s.geometry = g;
  s.space = space;
  s.G = G;
  const int n = space.dim;
  switch (g) {
    case Geometry::EntropySimplex:
      if (space.kind != SpaceKind::Simplex)
        throw std::invalid_argument("entropy geometry requires the simplex");
      s.omega = std::log(static_cast<double>(n));
      s.omega_hat = std::numeric_limits<double>::infinity();  // unbounded at the boundary
      break;
    case Geometry::EuclidSimplex:
      if (space.kind != SpaceKind::Simplex)
        throw std::invalid_argument("euclid-simplex geometry requires the simplex");
      s.omega = 0.5 * (1.0 - 1.0 / n);
      s.omega_hat = 1.0;
      break;
    case Geometry::EuclidBox: {
      if (space.kind != SpaceKind::Box)
        throw std::invalid_argument("euclid-box geometry requires a box");
      const double w = space.hi - space.lo;
      s.omega = n * w * w / 8.0;
      s.omega_hat = 0.5 * n * w * w;
      break;
    }
  }
  return s;
}

StepSchedule StepSchedule::md_constant_paper(double omega, double G, int T) {
  StepSchedule s;
  s.kind = ScheduleKind::MdConstantPaper;
  s.omega = omega;
  s.G = G;
  s.T = T;
  return s;
}

StepSchedule StepSchedule::md_constant_optimal(double omega, double G, int T) {
  StepSchedule s;
  s.kind = ScheduleKind::MdConstantOptimal;
  s.omega = omega;
  s.G = G;
  s.T = T;
  return s;
}

StepSchedule StepSchedule::implicit_sqrt(double omega_hat, double G) {
  StepSchedule s;
  s.kind = ScheduleKind::ImplicitSqrt;
  s.omega_hat = omega_hat;
  s.G = G;
  return s;
}

StepSchedule StepSchedule::custom_steps(Vec eta) {
  for (double e : eta)
    if (!(e > 0.0)) throw std::invalid_argument("custom step sizes must be positive");
  StepSchedule s;
  s.kind = ScheduleKind::Custom;
  s.custom = std::move(eta);
  return s;
}

double step_value(const StepSchedule& schedule, int t) {
  if (t < 1) throw std::invalid_argument("step index starts at 1");
  switch (schedule.kind) {
    case ScheduleKind::MdConstantPaper:
      return 2.0 * schedule.omega / (schedule.G * schedule.G * schedule.T);
    case ScheduleKind::MdConstantOptimal:
      return std::sqrt(2.0 * schedule.omega / (schedule.G * schedule.G * schedule.T));
    case ScheduleKind::ImplicitSqrt:
      return std::sqrt(schedule.omega_hat) / schedule.G / std::sqrt(static_cast<double>(t));
    case ScheduleKind::Custom:
      if (t > static_cast<int>(schedule.custom.size()))
        throw std::invalid_argument("custom schedule exhausted");
      return schedule.custom[t - 1];
  }
  throw std::logic_error("unknown schedule kind");
}

ParameterPoint project_simplex(const Vec& v) {
  if (!all_finite(v)) throw std::invalid_argument("projection requires finite input");
  const int n = static_cast<int>(v.size());
  Vec u = v;
  std::sort(u.begin(), u.end(), std::greater<double>());
  double cum = 0.0, tau = 0.0;
  for (int k = 0; k < n; ++k) {
    cum += u[k];
    const double cand = (cum - 1.0) / (k + 1);
    if (u[k] - cand > 0.0) tau = cand;
  }
  Vec x(n);
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    x[i] = std::max(v[i] - tau, 0.0);
    sum += x[i];
  }
  // renormalize away the last-ulp drift so the simplex invariant holds
  if (sum > 0.0)
    for (double& xi : x) xi /= sum;
  return ParameterPoint(std::move(x), ParameterSpace::simplex(n));
}

namespace {

ParameterPoint entropy_prox(const ParameterPoint& theta, const Vec& xi) {
  const int n = theta.dim();
  // (theta')_i ~ theta_i * exp(-xi_i); shift exponents for stability
  double xmin = xi[0];
  for (double v : xi) xmin = std::min(xmin, v);
  Vec w(n);
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    w[i] = theta.values[i] * std::exp(-(xi[i] - xmin));
    sum += w[i];
  }
  double clipped = 0.0;
  for (int i = 0; i < n; ++i) {
    w[i] = std::max(w[i] / sum, kEntropyFloor);
    clipped += w[i];
  }
  for (int i = 0; i < n; ++i) w[i] /= clipped;
  return ParameterPoint(std::move(w), theta.space);
}

ParameterPoint box_clamp(const ParameterPoint& theta, const Vec& xi) {
  Vec x(theta.dim());
  for (int i = 0; i < theta.dim(); ++i)
    x[i] = std::clamp(theta.values[i] - xi[i], theta.space.lo, theta.space.hi);
  return ParameterPoint(std::move(x), theta.space);
}

}  // namespace

ParameterPoint prox_map(const ParameterPoint& theta, const Vec& xi,
                        const ProxSetup& setup) {
  if (!all_finite(xi)) throw std::invalid_argument("prox step requires finite xi");
  if (static_cast<int>(xi.size()) != theta.dim())
    throw std::invalid_argument("prox step dimension mismatch");
  switch (setup.geometry) {
    case Geometry::EntropySimplex:
      return entropy_prox(theta, xi);
    case Geometry::EuclidSimplex:
      return project_simplex(sub(theta.values, xi));
    case Geometry::EuclidBox:
      return box_clamp(theta, xi);
  }
  throw std::logic_error("unknown geometry");
}

ParameterPoint md_step(const ParameterPoint& theta, const Vec& s, int t,
                       const StepSchedule& schedule, const ProxSetup& setup) {
  return prox_map(theta, scaled(s, step_value(schedule, t)), setup);
}

ParameterPoint implicit_sim_step(const ParameterPoint& theta, const Vec& s, int t,
                                 const StepSchedule& schedule) {
  if (theta.space.kind != SpaceKind::Simplex)
    throw std::invalid_argument("the implicit simple-loss oracle requires the simplex");
  return project_simplex(sub(theta.values, scaled(s, step_value(schedule, t))));
}

}  // namespace preflearn
